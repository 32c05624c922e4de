//! Subcommand bodies. Each returns the exact stdout text and whether the
//! checks it ran passed.

use std::fmt::Write as _;

use serde_json::{json, Value};
use torelli_core::ideal::{is_radical_squarefree, local_ring, minimal_primes, SquareFreeIdeal};
use torelli_core::intersect::{classify, closed_form_nonvanishing, codim, enumerate_nonvanishing, PartTuple};
use torelli_core::json::{canonical_string, ideal_to_json, poset_to_json, stratum_to_json, StratumFile};
use torelli_core::plumbing::{verify_refinement, Expansion, OmegaPlacement, PlumbingError, PlumbingSeries};
use torelli_core::plumbing::{OrderReport, RefinementOptions};
use torelli_core::strata::{enumerate_strata, StrataPoset};

use crate::{CliError, Format};

pub struct Outcome {
    pub stdout: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, passed: true }
    }
}

fn json_line(v: &Value) -> String {
    let mut s = canonical_string(v);
    s.push('\n');
    s
}

fn unsupported(command: &str, format: Format) -> CliError {
    CliError::Usage(format!("`{command}` does not support --format {}", format.name()))
}

pub fn strata(g: u32, parts: &[u32], dedup_unordered: bool, format: Format) -> Result<Outcome, CliError> {
    let list = enumerate_strata(g, parts, dedup_unordered).map_err(|e| CliError::Usage(e.to_string()))?;
    match format {
        Format::Json => {
            let strata: Vec<Value> = list.iter().map(stratum_to_json).collect();
            let doc = json!({
                "g": g,
                "parts": parts,
                "dedupUnordered": dedup_unordered,
                "count": list.len(),
                "strata": strata,
            });
            Ok(Outcome::ok(json_line(&doc)))
        }
        Format::Dot => {
            let mut out = String::new();
            for (i, s) in list.iter().enumerate() {
                out.push_str(&s.to_dot(&format!("stratum_{i}")));
            }
            Ok(Outcome::ok(out))
        }
        other => Err(unsupported("strata", other)),
    }
}

/// Exhaustive check that the ideal is the intersection of its minimal
/// primes, over all square-free supports. `None` when there are too many
/// variables to scan.
fn intersection_matches(ideal: &SquareFreeIdeal, primes: &[u64]) -> Option<bool> {
    let n = ideal.vars().len();
    if n > 20 {
        return None;
    }
    Some((0u64..1 << n).all(|m| ideal.contains_support(m) == primes.iter().all(|p| m & p != 0)))
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(","))
}

pub fn local_ring_cmd(file: &StratumFile, format: Format) -> Result<Outcome, CliError> {
    let ideal = local_ring(&file.stratum).map_err(|e| CliError::Input(e.to_string()))?;
    let primes = minimal_primes(&ideal);
    let masks: Vec<u64> = primes.iter().map(|p| p.mask).collect();
    let squarefree = is_radical_squarefree(&ideal.to_monomial_ideal());
    let exhaustive = intersection_matches(&ideal, &masks);
    let reduced = squarefree && exhaustive != Some(false);
    let stdout = match format {
        Format::Json => {
            let primes: Vec<Value> =
                primes.iter().map(|p| json!({"vars": p.names, "componentDim": p.component_dim})).collect();
            json_line(&json!({
                "ideal": ideal_to_json(&ideal),
                "minimalPrimes": primes,
                "squareFree": squarefree,
                "intersectionOfPrimes": exhaustive,
                "reduced": reduced,
            }))
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "vars: {}", ideal.vars().join(" ")).unwrap();
            let gens: Vec<String> = ideal.generator_names().iter().map(|g| braces(g)).collect();
            let gens = if gens.is_empty() { "(zero ideal)".to_string() } else { gens.join(" ") };
            writeln!(out, "generators: {gens}").unwrap();
            writeln!(out, "dimX: {}", ideal.dim_x()).unwrap();
            for p in &primes {
                writeln!(out, "prime: {} componentDim: {}", braces(&p.names), p.component_dim).unwrap();
            }
            match exhaustive {
                Some(ok) => writeln!(out, "intersection of primes: {ok}").unwrap(),
                None => writeln!(out, "intersection of primes: not scanned").unwrap(),
            }
            writeln!(out, "reduced={reduced}").unwrap();
            out
        }
        other => return Err(unsupported("local-ring", other)),
    };
    Ok(Outcome { stdout, passed: reduced })
}

pub struct ExpandArgs<'a> {
    pub source: &'a str,
    pub target: &'a str,
    pub order: u32,
    pub index: Option<u32>,
    pub s_trunc: Option<u32>,
}

fn plumbing_error(e: PlumbingError) -> CliError {
    match e {
        PlumbingError::SameVertex => CliError::Usage(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn order_json(o: &OrderReport, s_trunc: u32) -> Value {
    json!({
        "order": o.order,
        "mustVanish": o.must_vanish,
        "vanishes": o.vanishes,
        "etaTerms": o.eta_terms,
        "leading": PlumbingSeries::new(o.leading.clone(), None).to_json()["terms"],
        "remainder": PlumbingSeries::new(o.remainder.clone(), Some(s_trunc)).to_json()["terms"],
        "remainderMinDegree": o.remainder_min_degree,
        "remainderDivisible": o.remainder_divisible,
        "pass": o.pass,
    })
}

pub fn expand(file: &StratumFile, args: &ExpandArgs<'_>, format: Format) -> Result<Outcome, CliError> {
    if args.source == args.target {
        return Err(CliError::Usage("source and target must differ".into()));
    }
    let tree = file.stratum.tree();
    let lookup = |id: &str| tree.vertex_index(id).ok_or_else(|| CliError::Input(format!("unknown vertex `{id}`")));
    let (source, target) = (lookup(args.source)?, lookup(args.target)?);
    if args.order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    let options =
        RefinementOptions { s_trunc: args.s_trunc, positions: file.positions.clone(), omega_index: args.index };
    let report = verify_refinement(tree, target, source, args.order, &options).map_err(plumbing_error)?;
    let omega = OmegaPlacement { vertex: source, index: args.index.unwrap_or(1) };
    let expansion = Expansion::new(tree, omega, report.s_truncation, &file.positions).map_err(plumbing_error)?;
    let eta = expansion.eta_series(target, args.order).map_err(plumbing_error)?;
    let series = PlumbingSeries::new(eta, Some(report.s_truncation));
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    let stdout = match format {
        Format::Json => {
            let orders: Vec<Value> = report.orders.iter().map(|o| order_json(o, report.s_truncation)).collect();
            json_line(&json!({
                "target": report.target,
                "source": report.source,
                "distance": report.distance,
                "geodesic": report.geodesic,
                "sTruncation": report.s_truncation,
                "orders": orders,
                "series": series.to_json(),
                "pass": report.pass,
            }))
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "target: {}  source: {}", report.target, report.source).unwrap();
            writeln!(out, "geodesic: {} (distance {})", report.geodesic.join(" "), report.distance).unwrap();
            writeln!(out, "sTruncation: {}", report.s_truncation).unwrap();
            for o in &report.orders {
                let status = if o.pass { "ok" } else { "FAIL" };
                if o.must_vanish {
                    let state = if o.vanishes { "eta = 0" } else { "eta != 0" };
                    writeln!(out, "order {}: below distance, {state} [{status}]", o.order).unwrap();
                } else {
                    writeln!(out, "order {}: leading = {}", o.order, o.leading).unwrap();
                    let min = o.remainder_min_degree.map_or("none".to_string(), |d| d.to_string());
                    writeln!(
                        out,
                        "  remainder: {} terms, min degree {min}, divisible by geodesic: {} [{status}]",
                        o.remainder.len(),
                        o.remainder_divisible
                    )
                    .unwrap();
                }
            }
            writeln!(out, "eta = {}", series.to_text()).unwrap();
            writeln!(out, "verify_refinement: {verdict}").unwrap();
            out
        }
        other => return Err(unsupported("expand", other)),
    };
    Ok(Outcome { stdout, passed: report.pass })
}

pub fn tuples(g_max: u64, check: bool, all: bool, format: Format) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for g in 2..=g_max {
        let found = enumerate_nonvanishing(g).map_err(|e| CliError::Usage(e.to_string()))?;
        if check && found != closed_form_nonvanishing(g) {
            mismatches.push(g);
        }
        let listed = if all { all_tuples(g) } else { found };
        rows.extend(listed.into_iter().map(|t| (g, t)));
    }
    let stdout = match format {
        Format::Tsv => {
            let mut out = String::from("g\ttuple\td\t2g-3\t3g-3\tclassification\n");
            for (g, t) in &rows {
                writeln!(out, "{g}\t{t}\t{}\t{}\t{}\t{}", codim(t), 2 * g - 3, 3 * g - 3, classify(t)).unwrap();
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(g, t)| {
                    json!({
                        "g": g,
                        "tuple": t,
                        "d": codim(t),
                        "taut": 2 * g - 3,
                        "dim": 3 * g - 3,
                        "classification": classify(t),
                    })
                })
                .collect();
            let mut doc = json!({"gMax": g_max, "rows": rows});
            if check {
                doc["check"] = json!({"pass": mismatches.is_empty(), "mismatches": mismatches});
            }
            json_line(&doc)
        }
        other => return Err(unsupported("tuples", other)),
    };
    if check {
        let verdict = if mismatches.is_empty() { "PASS".to_string() } else { format!("FAIL at g = {mismatches:?}") };
        eprintln!("check: {verdict}");
    }
    Ok(Outcome { stdout, passed: mismatches.is_empty() })
}

/// Every sorted tuple with at least two positive parts summing to `g`.
fn all_tuples(g: u64) -> Vec<PartTuple> {
    fn go(rest: u64, min: u64, cur: &mut Vec<u64>, out: &mut Vec<PartTuple>) {
        if rest == 0 {
            if cur.len() >= 2 {
                out.push(PartTuple::new(cur.clone()).expect("positive parts"));
            }
            return;
        }
        for p in min..=rest {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(g, 1, &mut Vec::new(), &mut out);
    out.sort();
    out
}

pub fn poset(g: u32, parts: &[u32], format: Format) -> Result<Outcome, CliError> {
    let poset = StrataPoset::build(g, parts).map_err(|e| CliError::Usage(e.to_string()))?;
    match format {
        Format::Dot => Ok(Outcome::ok(poset.to_dot())),
        Format::Json => Ok(Outcome::ok(json_line(&poset_to_json(&poset)))),
        other => Err(unsupported("poset", other)),
    }
}
