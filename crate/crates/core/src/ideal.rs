//! The local ring at a point of a stratum, `C[[x, s]] / (prod_{e in gamma} s_e)`,
//! through its square-free monomial ideal.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::strata::{specialize, ColoredStratum, StrataError, StratumValidity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdealError {
    #[error("not a valid stratum: edge `{0}` lies on no critical path")]
    InvalidStratum(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("empty generator")]
    EmptyGenerator,
    #[error("at most 64 variables are supported, got {0}")]
    TooManyVariables(usize),
    #[error("contracting the complement of a minimal prime failed: {0}")]
    Inconsistent(StrataError),
}

/// A monomial ideal given by exponent vectors, as loaded from external input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialIdeal {
    pub vars: Vec<String>,
    pub gens: Vec<Vec<u32>>,
    pub dim_x: i64,
}

impl MonomialIdeal {
    /// `gens` lists variable names; repeats raise the exponent.
    pub fn from_names(vars: Vec<String>, gens: &[Vec<String>], dim_x: i64) -> Result<Self, IdealError> {
        check_vars(&vars)?;
        let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut out = Vec::new();
        for g in gens {
            if g.is_empty() {
                return Err(IdealError::EmptyGenerator);
            }
            let mut exps = vec![0u32; vars.len()];
            for name in g {
                let i = index.get(name.as_str()).ok_or_else(|| IdealError::UnknownVariable(name.clone()))?;
                exps[*i] += 1;
            }
            out.push(exps);
        }
        Ok(MonomialIdeal { vars, gens: out, dim_x })
    }

    /// Generators not divisible by another generator.
    pub fn minimal_generators(&self) -> Vec<Vec<u32>> {
        let divides = |a: &Vec<u32>, b: &Vec<u32>| a.iter().zip(b).all(|(x, y)| x <= y);
        let mut uniq: Vec<Vec<u32>> = self.gens.clone();
        uniq.sort();
        uniq.dedup();
        uniq.iter()
            .filter(|g| !uniq.iter().any(|h| h != *g && divides(h, g)))
            .cloned()
            .collect()
    }

    pub fn contains(&self, monomial: &[u32]) -> bool {
        self.gens.iter().any(|g| g.iter().zip(monomial).all(|(x, y)| x <= y))
    }

    /// The square-free ideal, if the minimal generators are square-free.
    pub fn to_squarefree(&self) -> Result<Option<SquareFreeIdeal>, IdealError> {
        if !is_radical_squarefree(self) {
            return Ok(None);
        }
        let gens = self
            .minimal_generators()
            .iter()
            .map(|g| g.iter().enumerate().filter(|(_, e)| **e > 0).fold(0u64, |m, (i, _)| m | (1 << i)))
            .collect();
        SquareFreeIdeal::new(self.vars.clone(), gens, self.dim_x).map(Some)
    }
}

fn check_vars(vars: &[String]) -> Result<(), IdealError> {
    if vars.len() > 64 {
        return Err(IdealError::TooManyVariables(vars.len()));
    }
    let mut seen = BTreeSet::new();
    for v in vars {
        if !seen.insert(v) {
            return Err(IdealError::DuplicateVariable(v.clone()));
        }
    }
    Ok(())
}

/// A monomial ideal is radical iff its minimal generators are square-free.
pub fn is_radical_squarefree(ideal: &MonomialIdeal) -> bool {
    ideal.minimal_generators().iter().all(|g| g.iter().all(|&e| e <= 1))
}

/// Square-free monomial ideal; generators are bitmasks over `vars`, kept as
/// a sorted antichain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareFreeIdeal {
    vars: Vec<String>,
    gens: Vec<u64>,
    dim_x: i64,
}

impl SquareFreeIdeal {
    pub fn new(vars: Vec<String>, gens: Vec<u64>, dim_x: i64) -> Result<Self, IdealError> {
        check_vars(&vars)?;
        let full = if vars.len() == 64 { u64::MAX } else { (1u64 << vars.len()) - 1 };
        for &g in &gens {
            if g == 0 {
                return Err(IdealError::EmptyGenerator);
            }
            if g & !full != 0 {
                return Err(IdealError::UnknownVariable(format!("#{}", 63 - (g & !full).leading_zeros())));
            }
        }
        Ok(SquareFreeIdeal { vars, gens: minimalize(gens), dim_x })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn generators(&self) -> &[u64] {
        &self.gens
    }

    pub fn dim_x(&self) -> i64 {
        self.dim_x
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn names(&self, mask: u64) -> Vec<String> {
        (0..self.vars.len()).filter(|i| mask & (1 << i) != 0).map(|i| self.vars[i].clone()).collect()
    }

    pub fn generator_names(&self) -> Vec<Vec<String>> {
        self.gens.iter().map(|&g| self.names(g)).collect()
    }

    /// Membership of a square-free monomial given by its support.
    pub fn contains_support(&self, support: u64) -> bool {
        self.gens.iter().any(|&g| g & !support == 0)
    }

    pub fn to_monomial_ideal(&self) -> MonomialIdeal {
        let gens = self
            .gens
            .iter()
            .map(|&g| (0..self.vars.len()).map(|i| ((g >> i) & 1) as u32).collect())
            .collect();
        MonomialIdeal { vars: self.vars.clone(), gens, dim_x: self.dim_x }
    }
}

/// Size first, then the sorted list of variable indices.
fn order_key(mask: u64) -> (u32, Vec<u32>) {
    (mask.count_ones(), (0..64).filter(|i| mask & (1 << i) != 0).collect())
}

/// Sorted antichain: drops generators containing another generator.
fn minimalize(mut gens: Vec<u64>) -> Vec<u64> {
    gens.sort_by_key(|g| (g.count_ones(), *g));
    gens.dedup();
    let mut out: Vec<u64> = Vec::new();
    for g in gens {
        if !out.iter().any(|&h| h & !g == 0) {
            out.push(g);
        }
    }
    out.sort_by_key(|&g| order_key(g));
    out
}

/// Local ring of a stratum: one generator per critical path, with
/// `dim_x = sum_v (3 g(v) - 3 + n(v))`.
pub fn local_ring(stratum: &ColoredStratum) -> Result<SquareFreeIdeal, IdealError> {
    let tree = stratum.tree();
    if let StratumValidity::Uncovered(e) = stratum.validity() {
        return Err(IdealError::InvalidStratum(tree.edges()[e].id.clone()));
    }
    let vars: Vec<String> = tree.edges().iter().map(|e| e.id.clone()).collect();
    if vars.len() > 64 {
        return Err(IdealError::TooManyVariables(vars.len()));
    }
    let gens = stratum
        .critical_paths()
        .iter()
        .map(|p| p.edges.iter().fold(0u64, |m, &e| m | (1 << e)))
        .collect();
    let dim_x = (0..tree.num_vertices())
        .map(|v| 3 * tree.genus(v) as i64 - 3 + tree.valence(v) as i64)
        .sum();
    SquareFreeIdeal::new(vars, gens, dim_x)
}

/// Membership of `prod x_i^{a_i}` given as a name-to-exponent map.
pub fn monomial_membership(ideal: &SquareFreeIdeal, monomial: &BTreeMap<String, u32>) -> Result<bool, IdealError> {
    let mut support = 0u64;
    for (name, &exp) in monomial {
        let i = ideal.vars.iter().position(|v| v == name).ok_or_else(|| IdealError::UnknownVariable(name.clone()))?;
        if exp > 0 {
            support |= 1 << i;
        }
    }
    Ok(ideal.contains_support(support))
}

/// The prime `(s_e : e in W)` for a minimal vertex cover `W`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MinimalPrime {
    pub mask: u64,
    pub names: Vec<String>,
    /// `dim_x + |E| - |W|`, which is `3g - 3 - |W|` for a stable tree.
    pub component_dim: i64,
}

/// All minimal vertex covers of the generator hypergraph.
pub fn minimal_primes(ideal: &SquareFreeIdeal) -> Vec<MinimalPrime> {
    let mut memo = HashMap::new();
    let mut covers = minimal_covers(&ideal.gens, &mut memo);
    covers.sort_by_key(|&m| order_key(m));
    let n = ideal.vars.len() as i64;
    covers
        .into_iter()
        .map(|mask| MinimalPrime {
            mask,
            names: ideal.names(mask),
            component_dim: ideal.dim_x + n - mask.count_ones() as i64,
        })
        .collect()
}

/// Branch on the variables of a smallest generator: every cover contains one
/// of them. Results are minimalized; subproblems are memoized by their
/// remaining generator set.
fn minimal_covers(gens: &[u64], memo: &mut HashMap<Vec<u64>, Vec<u64>>) -> Vec<u64> {
    if gens.is_empty() {
        return vec![0];
    }
    if let Some(hit) = memo.get(gens) {
        return hit.clone();
    }
    let pivot = *gens.iter().min_by_key(|g| (g.count_ones(), **g)).expect("nonempty");
    let mut found = Vec::new();
    let mut bits = pivot;
    while bits != 0 {
        let x = bits & bits.wrapping_neg();
        bits &= bits - 1;
        let rest: Vec<u64> = gens.iter().copied().filter(|g| g & x == 0).collect();
        for c in minimal_covers(&rest, memo) {
            found.push(c | x);
        }
    }
    found.sort_by_key(|c| (c.count_ones(), *c));
    found.dedup();
    let mut out: Vec<u64> = Vec::new();
    for c in found {
        if !out.iter().any(|&d| d & !c == 0) {
            out.push(c);
        }
    }
    memo.insert(gens.to_vec(), out.clone());
    out
}

/// For each minimal prime `W`, the stratum obtained by contracting the
/// edges outside `W`.
pub fn components_through_point(stratum: &ColoredStratum) -> Result<Vec<(MinimalPrime, ColoredStratum)>, IdealError> {
    let ideal = local_ring(stratum)?;
    let n = stratum.tree().num_edges();
    minimal_primes(&ideal)
        .into_iter()
        .map(|p| {
            let complement: BTreeSet<usize> = (0..n).filter(|e| p.mask & (1 << e) == 0).collect();
            let spec = specialize(stratum, &complement).map_err(IdealError::Inconsistent)?;
            if let StratumValidity::Uncovered(e) = spec.target.validity() {
                return Err(IdealError::Inconsistent(StrataError::NotAStratum(
                    spec.target.tree().edges()[e].id.clone(),
                )));
            }
            Ok((p, spec.target))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TreeBuilder;
    use crate::strata::{enumerate_strata, Coloring};

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
        let colors = BTreeMap::from([
            ("u1".to_string(), 2),
            ("u2".to_string(), 1),
            ("u3".to_string(), 2),
            ("u4".to_string(), 2),
        ]);
        let coloring = Coloring::from_ids(&tree, vec![1, 3], &colors).unwrap();
        ColoredStratum::new(tree, coloring).unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn four_edge_ring() {
        let ideal = local_ring(&four_edge()).unwrap();
        assert_eq!(
            ideal.generator_names(),
            vec![names(&["f1"]), names(&["f2", "f3"]), names(&["f2", "f4"])]
        );
        assert_eq!(ideal.dim_x(), 5);
        assert!(is_radical_squarefree(&ideal.to_monomial_ideal()));
        let primes = minimal_primes(&ideal);
        let got: Vec<(Vec<String>, i64)> = primes.iter().map(|p| (p.names.clone(), p.component_dim)).collect();
        assert_eq!(got, vec![(names(&["f1", "f2"]), 7), (names(&["f1", "f3", "f4"]), 6)]);
    }

    #[test]
    fn membership_examples() {
        let ideal = local_ring(&four_edge()).unwrap();
        let m = |pairs: &[(&str, u32)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>();
        assert!(monomial_membership(&ideal, &m(&[("f2", 1), ("f3", 1)])).unwrap());
        assert!(!monomial_membership(&ideal, &m(&[("f2", 1)])).unwrap());
        assert!(monomial_membership(&ideal, &m(&[("f1", 3)])).unwrap());
        assert!(matches!(
            monomial_membership(&ideal, &m(&[("zz", 1)])),
            Err(IdealError::UnknownVariable(_))
        ));
        let zero = SquareFreeIdeal::new(names(&["a"]), vec![], 0).unwrap();
        assert!(!monomial_membership(&zero, &BTreeMap::new()).unwrap());
    }

    #[test]
    fn trivial_cases() {
        let zero = SquareFreeIdeal::new(vec![], vec![], 3).unwrap();
        let primes = minimal_primes(&zero);
        assert_eq!(primes.len(), 1);
        assert_eq!(primes[0].mask, 0);
        assert!(is_radical_squarefree(&zero.to_monomial_ideal()));

        let single = SquareFreeIdeal::new(names(&["e"]), vec![1], 0).unwrap();
        assert_eq!(minimal_primes(&single)[0].names, names(&["e"]));

        let squared = MonomialIdeal::from_names(names(&["s1"]), &[names(&["s1", "s1"])], 0).unwrap();
        assert!(!is_radical_squarefree(&squared));
        assert!(squared.to_squarefree().unwrap().is_none());
        // s1^2 is redundant next to s1
        let redundant =
            MonomialIdeal::from_names(names(&["s1"]), &[names(&["s1", "s1"]), names(&["s1"])], 0).unwrap();
        assert!(is_radical_squarefree(&redundant));
    }

    #[test]
    fn k1_stratum_is_smooth() {
        let s = &enumerate_strata(3, &[3], false).unwrap()[0];
        let ideal = local_ring(s).unwrap();
        assert!(ideal.is_zero());
        assert_eq!(ideal.dim_x(), 6);
    }

    #[test]
    fn components_of_four_edge() {
        let comps = components_through_point(&four_edge()).unwrap();
        assert_eq!(comps.len(), 2);
        let (p, chain) = &comps[0];
        assert_eq!(p.names, names(&["f1", "f2"]));
        assert_eq!(chain.tree().num_vertices(), 3);
        let genera: BTreeSet<u32> = chain.tree().vertices().iter().map(|v| v.genus).collect();
        assert_eq!(genera, BTreeSet::from([1, 2]));
        let (_, star) = &comps[1];
        assert_eq!(star.tree().num_vertices(), 4);
        assert!(star.tree().vertices().iter().all(|v| v.genus == 1));
    }

    #[test]
    fn branch_and_bound_matches_exhaustive_search() {
        let gens = vec![0b0011, 0b0110, 0b1100, 0b1001, 0b10000];
        let ideal = SquareFreeIdeal::new(names(&["a", "b", "c", "d", "e"]), gens.clone(), 0).unwrap();
        let fast: BTreeSet<u64> = minimal_primes(&ideal).into_iter().map(|p| p.mask).collect();
        let covers: Vec<u64> = (0u64..32).filter(|w| gens.iter().all(|g| g & w != 0)).collect();
        let slow: BTreeSet<u64> =
            covers.iter().copied().filter(|&w| !covers.iter().any(|&v| v != w && v & !w == 0)).collect();
        assert_eq!(fast, slow);
    }
}
