//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line and
//! fails on FAIL. Run with `--nocapture` to see the summary lines.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use torelli_core::graph::{StableTree, TreeBuilder};
use torelli_core::ideal::{
    components_through_point, is_radical_squarefree, local_ring, minimal_primes, monomial_membership,
};
use torelli_core::intersect::{
    classify, closed_form_nonvanishing, codim, enumerate_nonvanishing, Classification, PartTuple,
};
use torelli_core::plumbing::period::period_block;
use torelli_core::plumbing::{
    verify_refinement, Expansion, NodePositions, OmegaPlacement, Poly, RefinementOptions, Symbol,
};
use torelli_core::strata::{
    enumerate_strata, generic_structure, FiberProductDecomposer, specialize, Coloring, ColoredStratum,
    SStructure, StrataPoset, StratumSpecialization,
};

use common::{all_subsets, brute_critical_supports, compositions, stratum_from_seed};

// Pinned budgets. Every numeric comparison below is exact.
const PROP4_BUDGET: Duration = Duration::from_secs(1);
const REDUCEDNESS_BUDGET: Duration = Duration::from_secs(60);
const REFINEMENT_BUDGET: Duration = Duration::from_secs(60);
const S_STRUCTURE_CASES: usize = 1000;
const S_STRUCTURE_MAX_VERTICES: usize = 8;

fn report(n: u32, failures: &[String]) {
    if failures.is_empty() {
        println!("criterion {n}: PASS");
    } else {
        println!("criterion {n}: FAIL ({} problems)", failures.len());
        for f in failures.iter().take(10) {
            println!("  {f}");
        }
    }
    assert!(failures.is_empty(), "criterion {n} failed: {}", failures[0]);
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn tuple(parts: &[u64]) -> PartTuple {
    PartTuple::new(parts.to_vec()).unwrap()
}

#[test]
fn criterion_01_nonvanishing_tuples() {
    let mut failures = Vec::new();
    let start = Instant::now();
    let mut found = BTreeMap::new();
    for g in 2..60u64 {
        found.insert(g, enumerate_nonvanishing(g).unwrap());
    }
    let elapsed = start.elapsed();
    for (g, tuples) in &found {
        let g = *g;
        let mut expected: BTreeSet<Vec<u64>> = [vec![1, g - 1], vec![1, 1, g - 2], vec![2, g - 2]]
            .into_iter()
            .map(|mut p| {
                p.retain(|&x| x > 0);
                p.sort();
                p
            })
            .filter(|p| p.len() >= 2)
            .collect();
        if g == 6 {
            expected.insert(vec![3, 3]);
        }
        let got: BTreeSet<Vec<u64>> = tuples.iter().map(|t| t.parts().to_vec()).collect();
        if got.len() != tuples.len() {
            failures.push(format!("g={g}: duplicate tuples"));
        }
        if got != expected {
            failures.push(format!("g={g}: got {got:?}, expected {expected:?}"));
        }
        let closed: BTreeSet<Vec<u64>> = closed_form_nonvanishing(g).iter().map(|t| t.parts().to_vec()).collect();
        if closed != expected {
            failures.push(format!("g={g}: closed form {closed:?}"));
        }
    }
    if elapsed >= PROP4_BUDGET {
        failures.push(format!("took {elapsed:?}"));
    }
    report(1, &failures);
}

#[test]
fn criterion_02_boundary_arithmetic() {
    let mut failures = Vec::new();
    let t = tuple(&[3, 3]);
    if codim(&t) != 9 || 9 != 2 * 6 - 3 {
        failures.push(format!("codim(3,3) = {}", codim(&t)));
    }
    if classify(&t) != Classification::PossiblyNonzero {
        failures.push(format!("classify(3,3) = {:?}", classify(&t)));
    }
    for g in 7..=30u64 {
        let t = tuple(&[3, g - 3]);
        if classify(&t) != Classification::VanishesTautological {
            failures.push(format!("classify(3,{}) = {:?}", g - 3, classify(&t)));
        }
    }
    report(2, &failures);
}

#[test]
fn criterion_03_reducedness() {
    let mut failures = Vec::new();
    let start = Instant::now();
    let mut checked = 0usize;
    for g in 2..=5u32 {
        for parts in compositions(g) {
            for s in enumerate_strata(g, &parts, false).unwrap() {
                let ideal = local_ring(&s).unwrap();
                let ne = s.tree().num_edges();
                let label = format!("g={g} {parts:?} {}", s.canonical_form());
                let monomial = ideal.to_monomial_ideal();
                if !monomial.minimal_generators().iter().flatten().all(|&e| e <= 1) || !is_radical_squarefree(&monomial)
                {
                    failures.push(format!("{label}: generators not square-free"));
                }
                let oracle: Vec<u64> = brute_critical_supports(&s)
                    .iter()
                    .map(|p| p.iter().fold(0u64, |m, &e| m | (1 << e)))
                    .collect();
                let primes: Vec<u64> = minimal_primes(&ideal).iter().map(|p| p.mask).collect();
                for support in all_subsets(ne) {
                    let m = support.iter().fold(0u64, |m, &e| m | (1 << e));
                    let expected = oracle.iter().any(|p| p & m == *p);
                    let named: BTreeMap<String, u32> =
                        support.iter().map(|&e| (s.tree().edges()[e].id.clone(), 1)).collect();
                    if monomial_membership(&ideal, &named).unwrap() != expected {
                        failures.push(format!("{label}: membership of {support:?}"));
                    }
                    if primes.iter().all(|p| p & m != 0) != expected {
                        failures.push(format!("{label}: intersection of primes differs at {support:?}"));
                    }
                }
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= REDUCEDNESS_BUDGET {
        failures.push(format!("took {elapsed:?}"));
    }
    println!("  {checked} strata checked in {elapsed:?}");
    report(3, &failures);
}

fn four_edge() -> ColoredStratum {
    let tree = TreeBuilder::new()
        .vertex("u1", 1)
        .vertex("u2", 1)
        .vertex("w", 0)
        .vertex("u3", 1)
        .vertex("u4", 1)
        .edge("f1", "u1", "u2")
        .edge("f2", "u2", "w")
        .edge("f3", "w", "u3")
        .edge("f4", "w", "u4")
        .build()
        .unwrap();
    let colors: BTreeMap<String, usize> =
        [("u1", 2), ("u2", 1), ("u3", 2), ("u4", 2)].into_iter().map(|(v, c)| (v.to_string(), c)).collect();
    let coloring = Coloring::from_ids(&tree, vec![1, 3], &colors).unwrap();
    ColoredStratum::new(tree, coloring).unwrap()
}

#[test]
fn criterion_04_four_edge_ring() {
    let mut failures = Vec::new();
    let s = four_edge();
    let ideal = local_ring(&s).unwrap();
    let gens: BTreeSet<Vec<String>> = ideal.generator_names().into_iter().collect();
    let expected: BTreeSet<Vec<String>> = [vec!["f1"], vec!["f2", "f3"], vec!["f2", "f4"]]
        .iter()
        .map(|g| g.iter().map(|x| x.to_string()).collect())
        .collect();
    if gens != expected {
        failures.push(format!("generators {gens:?}"));
    }
    let primes: BTreeSet<(Vec<String>, i64)> =
        minimal_primes(&ideal).into_iter().map(|p| (p.names, p.component_dim)).collect();
    let expected: BTreeSet<(Vec<String>, i64)> =
        [(vec!["f1", "f2"], 7), (vec!["f1", "f3", "f4"], 6)]
            .iter()
            .map(|(n, d)| (n.iter().map(|x| x.to_string()).collect(), *d))
            .collect();
    if primes != expected {
        failures.push(format!("primes {primes:?}"));
    }
    // exhaustive cover search over the four edges
    let gens: Vec<u64> = ideal.generators().to_vec();
    let covers: Vec<u64> = (0u64..16).filter(|w| gens.iter().all(|g| g & w != 0)).collect();
    let minimal: BTreeSet<u64> =
        covers.iter().copied().filter(|&w| !covers.iter().any(|&c| c != w && c & !w == 0)).collect();
    let found: BTreeSet<u64> = minimal_primes(&ideal).iter().map(|p| p.mask).collect();
    if minimal != found {
        failures.push(format!("covers {minimal:?} vs primes {found:?}"));
    }
    for w in &minimal {
        let dim = 3 * 4 - 3 - w.count_ones() as i64;
        if ![7, 6].contains(&dim) {
            failures.push(format!("cover {w:b} has dimension {dim}"));
        }
    }
    report(4, &failures);
}

/// Pushes each member map of `s` down along `phi`, which must contract a
/// subset of the edges every member contracts.
fn push_down(s: &SStructure, phi: &StratumSpecialization) -> SStructure {
    let target = &phi.target;
    let mut representative = vec![usize::MAX; target.tree().num_vertices()];
    for (v, &w) in phi.vertex_map.iter().enumerate() {
        if representative[w] == usize::MAX {
            representative[w] = v;
        }
    }
    let mut source_edge = vec![usize::MAX; target.tree().num_edges()];
    for (e, m) in phi.edge_map.iter().enumerate() {
        if let Some(t) = m {
            source_edge[*t] = e;
        }
    }
    let maps = s
        .maps
        .iter()
        .map(|m| {
            let edge_map: Vec<Option<usize>> = source_edge.iter().map(|&e| m.edge_map[e]).collect();
            StratumSpecialization {
                source: target.clone(),
                target: m.target.clone(),
                contracted: (0..edge_map.len()).filter(|&e| edge_map[e].is_none()).collect(),
                vertex_map: representative.iter().map(|&v| m.vertex_map[v]).collect(),
                edge_map,
            }
        })
        .collect();
    SStructure::new(target.clone(), maps).unwrap()
}

fn random_structure(seed: u64) -> SStructure {
    let base = stratum_from_seed(seed, S_STRUCTURE_MAX_VERTICES, 3);
    let mut rng = StdRng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let ne = base.tree().num_edges();
    let count = rng.gen_range(1..=3);
    let mut maps = Vec::new();
    while maps.len() < count {
        let set: BTreeSet<usize> = (0..ne).filter(|_| rng.gen_bool(0.35)).collect();
        if let Ok(spec) = specialize(&base, &set) {
            maps.push(spec);
        }
    }
    SStructure::new(base, maps).unwrap()
}

fn check_structure(s: &SStructure) -> Result<(), String> {
    // existence
    let found = generic_structure(s).map_err(|e| e.to_string())?;
    let generic = &found.generic;
    if !generic.is_generic() {
        return Err("result is not generic".into());
    }
    if !found.factoring.is_consistent() || found.factoring.source != s.base {
        return Err("factoring map is not a specialization of the base".into());
    }
    for (i, (m, n)) in s.maps.iter().zip(&generic.maps).enumerate() {
        if !n.is_consistent() {
            return Err(format!("member {i} of the generic structure is inconsistent"));
        }
        let composite = found.factoring.then(n).map_err(|e| e.to_string())?;
        if !composite.same_map(m) {
            return Err(format!("member {i} does not factor through the generic structure"));
        }
    }
    // every structure S' through which S factors, by exhaustive search over
    // contracted edge sets of the base
    let ne = s.base.tree().num_edges();
    let mut generic_through = Vec::new();
    for set in all_subsets(ne) {
        let factors = s.maps.iter().all(|m| set.is_subset(&m.contracted));
        if !factors {
            continue;
        }
        let phi = specialize(&s.base, &set).map_err(|e| format!("{set:?}: {e}"))?;
        let pushed = push_down(s, &phi);
        if pushed.maps.iter().any(|m| !m.is_consistent()) {
            return Err(format!("{set:?}: pushed-down maps inconsistent"));
        }
        if pushed.is_generic() {
            generic_through.push(pushed.key());
        }
        // universal property: S' maps to the generic structure, and the
        // map is the contraction of the remaining common edges
        let onward = generic_structure(&pushed).map_err(|e| e.to_string())?;
        if onward.generic.key() != generic.key() {
            return Err(format!("{set:?}: S' does not map to the generic structure"));
        }
        let total = phi.then(&onward.factoring).map_err(|e| e.to_string())?;
        if total.contracted != found.factoring.contracted {
            return Err(format!("{set:?}: factoring is not unique"));
        }
    }
    // uniqueness: exactly one generic structure receives S, up to isomorphism
    if generic_through != vec![generic.key()] {
        return Err(format!("{} generic structures receive S", generic_through.len()));
    }
    Ok(())
}

#[test]
fn criterion_05_generic_structures() {
    let mut failures = Vec::new();
    for seed in 0..S_STRUCTURE_CASES as u64 {
        let s = random_structure(seed);
        if let Err(e) = check_structure(&s) {
            failures.push(format!("seed {seed} ({}): {e}", s.base.canonical_form()));
        }
    }
    report(5, &failures);
}

/// Generic structures over `z` read off the poset: a stratum with one
/// contracted set per member whose common intersection is empty.
fn degenerations_from_poset(poset: &StrataPoset, z: &[usize]) -> BTreeMap<String, usize> {
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    for (a, s) in poset.strata.iter().enumerate() {
        let options: Vec<Vec<BTreeSet<usize>>> = z
            .iter()
            .map(|&c| {
                if c == a {
                    vec![BTreeSet::new()]
                } else {
                    poset.specializations.get(&(a, c)).cloned().unwrap_or_default()
                }
            })
            .collect();
        if options.iter().any(Vec::is_empty) {
            continue;
        }
        let mut pick: Vec<usize> = vec![0; z.len()];
        loop {
            let chosen: Vec<&BTreeSet<usize>> = pick.iter().zip(&options).map(|(&i, o)| &o[i]).collect();
            let mut common: BTreeSet<usize> = (0..s.tree().num_edges()).collect();
            for c in &chosen {
                common = common.intersection(c).copied().collect();
            }
            if common.is_empty() {
                let key = s.canonical_form_with_edges(|e| {
                    chosen.iter().map(|c| if c.contains(&e) { '1' } else { '0' }).collect()
                });
                *out.entry(key).or_default() += 1;
            }
            let mut i = 0;
            while i < pick.len() {
                pick[i] += 1;
                if pick[i] < options[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == pick.len() {
                break;
            }
        }
    }
    out
}

#[test]
fn criterion_06_fiber_product_decomposition() {
    let mut failures = Vec::new();
    let mut subsets = 0;
    for g in 2..=4u32 {
        for parts in compositions(g) {
            let poset = StrataPoset::build(g, &parts).unwrap();
            let comps = &poset.components;
            let mut decomposer = FiberProductDecomposer::new(g, &parts).unwrap();
            for mask in 1u64..1 << comps.len() {
                let z: Vec<usize> = (0..comps.len()).filter(|i| mask & (1 << i) != 0).map(|i| comps[i]).collect();
                let members: Vec<ColoredStratum> = z.iter().map(|&c| poset.strata[c].clone()).collect();
                let decomposition = decomposer.decompose(&members).unwrap();
                let keys: Vec<String> = decomposition.iter().map(SStructure::key).collect();
                let distinct: BTreeSet<String> = keys.iter().cloned().collect();
                let label = format!("g={g} {parts:?} Z={z:?}");
                if distinct.len() != keys.len() {
                    failures.push(format!("{label}: duplicate structures"));
                }
                if decomposition.iter().any(|s| !s.is_generic()) {
                    failures.push(format!("{label}: non-generic member"));
                }
                let oracle: BTreeSet<String> = degenerations_from_poset(&poset, &z).into_keys().collect();
                if distinct != oracle {
                    failures.push(format!("{label}: {} members vs {} from the poset", distinct.len(), oracle.len()));
                }
                subsets += 1;
            }
        }
    }
    println!("  {subsets} component subsets checked");
    report(6, &failures);
}

/// Positions 0, 1, 2, ... at each genus-0 vertex in outgoing-edge order.
fn integer_positions(tree: &StableTree) -> NodePositions {
    let mut positions = NodePositions::new();
    for v in 0..tree.num_vertices() {
        if tree.genus(v) == 0 {
            for (i, e) in tree.outgoing(v).into_iter().enumerate() {
                positions.set(e.label(tree), rat(i as i64));
            }
        }
    }
    positions
}

#[test]
fn criterion_07_refinement() {
    let mut failures = Vec::new();
    let start = Instant::now();
    let mut trees: BTreeMap<String, StableTree> = BTreeMap::new();
    for g in 2..=5u32 {
        for parts in compositions(g) {
            for s in enumerate_strata(g, &parts, false).unwrap() {
                if s.tree().num_edges() <= 5 {
                    let key = torelli_core::graph::canonical_form(s.tree()).unwrap().0;
                    trees.entry(key).or_insert_with(|| s.tree().clone());
                }
            }
        }
    }
    let mut pairs = 0;
    for (key, tree) in &trees {
        let positions = integer_positions(tree);
        let positive: Vec<usize> = (0..tree.num_vertices()).filter(|&v| tree.genus(v) > 0).collect();
        for &target in &positive {
            for &source in &positive {
                if target == source {
                    continue;
                }
                let path = tree.path_vertices(target, source);
                if path[1..path.len() - 1].iter().any(|&v| tree.genus(v) > 0) {
                    continue;
                }
                let distance = tree.distance(target, source) as u32;
                let options = RefinementOptions { positions: positions.clone(), ..Default::default() };
                let label = format!("{key}: {target} <- {source}");
                match verify_refinement(tree, target, source, distance + 1, &options) {
                    Ok(r) if r.pass => {}
                    Ok(r) => failures.push(format!("{label}: {:?}", r.orders.iter().map(|o| o.pass).collect::<Vec<_>>())),
                    Err(e) => failures.push(format!("{label}: {e}")),
                }
                // the degree-r part of eta itself is the path sum
                let omega = OmegaPlacement { vertex: source, index: 1 };
                let x = Expansion::new(tree, omega, distance + 2, &positions).unwrap();
                let eta = x.eta(target, distance).unwrap();
                let lead = eta.s_homogeneous_part(distance as i32);
                if lead.is_zero() || lead != x.path_sum_leading(target, distance) {
                    failures.push(format!("{label}: leading term differs from the path sum"));
                }
                pairs += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= REFINEMENT_BUDGET {
        failures.push(format!("took {elapsed:?}"));
    }
    println!("  {} trees, {pairs} vertex pairs in {elapsed:?}", trees.len());
    report(7, &failures);
}

#[test]
fn criterion_08_one_step_expansion() {
    let mut failures = Vec::new();
    let cases: [(StableTree, usize, usize, &str); 2] = [
        (TreeBuilder::new().vertex("v", 1).vertex("vp", 2).edge("e", "v", "vp").build().unwrap(), 0, 1, "e"),
        (four_edge().tree().clone(), 0, 1, "f1"),
    ];
    for (tree, v, vp, edge) in &cases {
        let x = Expansion::new(tree, OmegaPlacement { vertex: *vp, index: 1 }, 2, &NodePositions::new()).unwrap();
        let eta = x.eta(*v, 1).unwrap();
        let name = &tree.vertices()[*v].id;
        let b = Poly::symbol(Symbol::KernelDiff { vertex: name.clone(), edge: edge.to_string(), b: 1 });
        let xi = Poly::symbol(Symbol::Xi { edge: format!("-{edge}"), n: 0 });
        let expected = -&(&(&Poly::s(edge, 1) * &b) * &xi);
        if eta.s_homogeneous_part(1) != expected {
            failures.push(format!("{name}: got {}", eta.s_homogeneous_part(1)));
        }
    }
    report(8, &failures);
}

/// `a - w1 - ... - wk - b` with a genus-1 leaf on each interior vertex.
fn chain(k: usize, ga: u32, gb: u32) -> (StableTree, Vec<String>) {
    let mut b = TreeBuilder::new().vertex("a", ga).vertex("b", gb);
    let mut spine = vec!["a".to_string()];
    for i in 1..=k {
        b = b.vertex(format!("w{i}"), 0).vertex(format!("l{i}"), 1).edge(format!("h{i}"), format!("w{i}"), format!("l{i}"));
        spine.push(format!("w{i}"));
    }
    spine.push("b".into());
    let mut edges = Vec::new();
    for (i, pair) in spine.windows(2).enumerate() {
        let id = format!("e{}", i + 1);
        b = b.edge(id.clone(), pair[0].clone(), pair[1].clone());
        edges.push(id);
    }
    (b.build().unwrap(), edges)
}

#[test]
fn criterion_09_period_unit() {
    let mut failures = Vec::new();
    let placements: [[i64; 3]; 3] = [[0, 1, 2], [3, -1, 7], [-2, 5, 1]];
    for k in 1..=3usize {
        for (ga, gb) in [(1, 1), (1, 2), (2, 2)] {
            for place in &placements {
                let (tree, edges) = chain(k, ga, gb);
                // incoming edge, outgoing edge and leaf at each interior vertex
                let mut positions = NodePositions::new();
                for i in 1..=k {
                    positions.set(format!("-{}", edges[i - 1]), rat(place[0]));
                    positions.set(edges[i].clone(), rat(place[1]));
                    positions.set(format!("h{i}"), rat(place[2]));
                }
                let (a, b) = (tree.vertex_index("a").unwrap(), tree.vertex_index("b").unwrap());
                let r = k as u32 + 1;
                let block = period_block(&tree, a, b, r, None, &positions).unwrap();
                for i in 0..block.rows() {
                    for j in 0..block.columns() {
                        if block.leading_coefficient(i, j).is_zero() {
                            failures.push(format!("k={k} genera=({ga},{gb}) positions={place:?} entry ({i},{j})"));
                        }
                    }
                }
            }
        }
    }
    report(9, &failures);
}

#[test]
fn criterion_10_components_through_points() {
    let mut failures = Vec::new();
    for g in 2..=4u32 {
        for parts in compositions(g) {
            let poset = StrataPoset::build(g, &parts).unwrap();
            for (a, s) in poset.strata.iter().enumerate() {
                let local: BTreeSet<String> =
                    components_through_point(s).unwrap().into_iter().map(|(_, t)| t.canonical_form()).collect();
                let global: BTreeSet<String> =
                    poset.components_above(a).into_iter().map(|c| poset.strata[c].canonical_form()).collect();
                if local != global {
                    failures.push(format!(
                        "g={g} {parts:?} at {}: local {local:?} vs poset {global:?}",
                        s.canonical_form()
                    ));
                }
            }
        }
    }
    report(10, &failures);
}
