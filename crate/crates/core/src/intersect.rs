//! Codimension of product loci, the vanishing classification of their
//! Torelli pullbacks, and rank bookkeeping for normal bundles.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::strata::{ColoredStratum, StratumSpecialization};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntersectError {
    #[error("part tuple must be nonempty")]
    Empty,
    #[error("parts must be positive, got {0:?}")]
    ZeroPart(Vec<u64>),
    #[error("genus must be at least 2, got {0}")]
    GenusTooSmall(u64),
    #[error("stratum has genus {stratum} but parts sum to {parts}")]
    GenusMismatch { stratum: u64, parts: u64 },
}

/// Parts `g_1 <= ... <= g_k`, all positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct PartTuple(Vec<u64>);

impl PartTuple {
    /// Sorts the input; rejects empty tuples and zero parts.
    pub fn new(mut parts: Vec<u64>) -> Result<Self, IntersectError> {
        if parts.is_empty() {
            return Err(IntersectError::Empty);
        }
        if parts.contains(&0) {
            return Err(IntersectError::ZeroPart(parts));
        }
        parts.sort_unstable();
        Ok(PartTuple(parts))
    }

    pub fn parts(&self) -> &[u64] {
        &self.0
    }

    pub fn genus(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<u64>> for PartTuple {
    type Error = IntersectError;
    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        PartTuple::new(v)
    }
}

impl From<PartTuple> for Vec<u64> {
    fn from(p: PartTuple) -> Self {
        p.0
    }
}

impl fmt::Display for PartTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", s.join(","))
    }
}

/// `d = sum_{i<j} g_i g_j`.
pub fn codim(parts: &PartTuple) -> u64 {
    let total = parts.genus();
    let squares: u64 = parts.0.iter().map(|g| g * g).sum();
    (total * total - squares) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    /// `d <= 2g - 3`.
    PossiblyNonzero,
    /// `2g - 3 < d <= 3g - 3`: zero because the tautological ring vanishes
    /// above degree `2g - 3`.
    VanishesTautological,
    /// `d > 3g - 3 = dim`.
    VanishesDimension,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::PossiblyNonzero => "POSSIBLY_NONZERO",
            Classification::VanishesTautological => "VANISHES_TAUTOLOGICAL",
            Classification::VanishesDimension => "VANISHES_DIMENSION",
        })
    }
}

pub fn classify(parts: &PartTuple) -> Classification {
    let d = codim(parts) as i128;
    let g = parts.genus() as i128;
    if d <= 2 * g - 3 {
        Classification::PossiblyNonzero
    } else if d <= 3 * g - 3 {
        Classification::VanishesTautological
    } else {
        Classification::VanishesDimension
    }
}

/// All tuples of genus `g` with at least two parts and `d <= 2g - 3`, found
/// by a partition search that prunes once the partial codimension plus the
/// least possible contribution of the remaining genus exceeds the bound.
pub fn enumerate_nonvanishing(g: u64) -> Result<Vec<PartTuple>, IntersectError> {
    if g < 2 {
        return Err(IntersectError::GenusTooSmall(g));
    }
    let bound = 2 * g - 3;
    let mut out = Vec::new();
    let mut current = Vec::new();
    search(g, 1, 0, 0, bound, &mut current, &mut out);
    out.sort();
    Ok(out)
}

fn search(remaining: u64, min_part: u64, sum: u64, d: u64, bound: u64, current: &mut Vec<u64>, out: &mut Vec<PartTuple>) {
    if remaining == 0 {
        if current.len() >= 2 {
            out.push(PartTuple(current.clone()));
        }
        return;
    }
    for part in min_part..=remaining {
        // the final part closes the tuple; otherwise at least `part` more remains
        if part != remaining && remaining - part < part {
            continue;
        }
        let next_d = d + part * sum;
        // later parts add at least (remaining - part) * (sum + part)
        if next_d + (remaining - part) * (sum + part) > bound {
            continue;
        }
        current.push(part);
        search(remaining - part, part, sum + part, next_d, bound, current, out);
        current.pop();
    }
}

/// `{(1, g-1), (1, 1, g-2), (2, g-2)}` restricted to valid tuples with at
/// least two parts, plus `(3, 3)` when `g = 6`.
pub fn closed_form_nonvanishing(g: u64) -> Vec<PartTuple> {
    let mut out: Vec<PartTuple> = [vec![1, g - 1], vec![1, 1, g.saturating_sub(2)], vec![2, g.saturating_sub(2)]]
        .into_iter()
        .filter(|t| t.iter().all(|&x| x >= 1))
        .filter_map(|t| PartTuple::new(t).ok())
        .collect();
    if g == 6 {
        out.push(PartTuple(vec![3, 3]));
    }
    out.sort();
    out.dedup();
    out
}

/// Ranks and dimensions attached to a stratum (and optionally a
/// specialization out of it).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankLedger {
    pub g: u64,
    /// Rank of the normal bundle of the product locus, `d`.
    pub d: u64,
    pub edges: u64,
    /// `3g - 3 - |E|`.
    pub stratum_dim: i64,
    /// `3g - 3 - d`.
    pub expected_dim: i64,
    /// `d - |E|`.
    pub excess: i64,
    /// `|E(T)| - |E(T')|` for a specialization `T -> T'`.
    pub specialization_rank: Option<u64>,
}

pub fn rank_ledger(stratum: &ColoredStratum, parts: &PartTuple) -> Result<RankLedger, IntersectError> {
    let g = stratum.genus() as u64;
    if g != parts.genus() {
        return Err(IntersectError::GenusMismatch { stratum: g, parts: parts.genus() });
    }
    let d = codim(parts);
    let edges = stratum.tree().num_edges() as u64;
    let top = 3 * g as i64 - 3;
    Ok(RankLedger {
        g,
        d,
        edges,
        stratum_dim: top - edges as i64,
        expected_dim: top - d as i64,
        excess: d as i64 - edges as i64,
        specialization_rank: None,
    })
}

/// Ledger of the source stratum with the normal rank of `spec`.
pub fn specialization_ledger(spec: &StratumSpecialization, parts: &PartTuple) -> Result<RankLedger, IntersectError> {
    let mut ledger = rank_ledger(&spec.source, parts)?;
    ledger.specialization_rank = Some((spec.source.tree().num_edges() - spec.target.tree().num_edges()) as u64);
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strata::{enumerate_strata, specialize};
    use std::collections::BTreeSet;

    fn t(v: &[u64]) -> PartTuple {
        PartTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn codim_examples() {
        assert_eq!(codim(&t(&[1, 5])), 5);
        assert_eq!(codim(&t(&[3, 3])), 9);
        assert_eq!(codim(&t(&[7])), 0);
        assert_eq!(codim(&t(&[1, 2, 3])), 2 + 3 + 6);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&t(&[3, 3])), Classification::PossiblyNonzero);
        assert_eq!(classify(&t(&[3, 4])), Classification::VanishesTautological);
        assert_eq!(classify(&t(&[1, 1, 1])), Classification::PossiblyNonzero);
        assert_eq!(classify(&t(&[5, 5])), Classification::VanishesTautological);
        assert_eq!(classify(&t(&[6, 6])), Classification::VanishesDimension);
        assert_eq!(Classification::VanishesTautological.to_string(), "VANISHES_TAUTOLOGICAL");
    }

    #[test]
    fn tuples_reject_bad_input() {
        assert!(matches!(PartTuple::new(vec![]), Err(IntersectError::Empty)));
        assert!(matches!(PartTuple::new(vec![2, 0]), Err(IntersectError::ZeroPart(_))));
        assert_eq!(t(&[3, 1]).parts(), &[1, 3]);
        assert!(enumerate_nonvanishing(1).is_err());
    }

    #[test]
    fn nonvanishing_small_genera() {
        assert_eq!(enumerate_nonvanishing(6).unwrap(), vec![t(&[1, 1, 4]), t(&[1, 5]), t(&[2, 4]), t(&[3, 3])]);
        assert_eq!(enumerate_nonvanishing(4).unwrap(), vec![t(&[1, 1, 2]), t(&[1, 3]), t(&[2, 2])]);
        assert_eq!(enumerate_nonvanishing(2).unwrap(), vec![t(&[1, 1])]);
    }

    /// Every partition of g, filtered directly.
    fn brute_force(g: u64) -> BTreeSet<PartTuple> {
        fn parts(n: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if n == 0 {
                out.push(cur.clone());
                return;
            }
            for p in (1..=n.min(max)).rev() {
                cur.push(p);
                parts(n - p, p, cur, out);
                cur.pop();
            }
        }
        let mut all = Vec::new();
        parts(g, g, &mut Vec::new(), &mut all);
        all.into_iter()
            .map(|p| PartTuple::new(p).unwrap())
            .filter(|p| p.k() >= 2 && codim(p) <= 2 * g - 3)
            .collect()
    }

    #[test]
    fn pruned_search_matches_brute_force() {
        for g in 2..=24 {
            let fast: BTreeSet<PartTuple> = enumerate_nonvanishing(g).unwrap().into_iter().collect();
            assert_eq!(fast, brute_force(g), "g = {g}");
            let closed: BTreeSet<PartTuple> = closed_form_nonvanishing(g).into_iter().collect();
            assert_eq!(fast, closed, "g = {g}");
        }
    }

    #[test]
    fn ledger_examples() {
        let strata = enumerate_strata(4, &[1, 3], false).unwrap();
        let fig = strata
            .iter()
            .find(|s| s.tree().num_edges() == 4 && (0..5).any(|v| s.tree().genus(v) == 1 && s.tree().valence(v) == 2))
            .unwrap();
        let ledger = rank_ledger(fig, &t(&[1, 3])).unwrap();
        assert_eq!((ledger.d, ledger.edges, ledger.stratum_dim, ledger.expected_dim, ledger.excess), (3, 4, 5, 6, -1));

        let chain = strata
            .iter()
            .find(|s| s.tree().num_edges() == 2 && s.tree().vertices().iter().any(|v| v.genus == 2))
            .unwrap();
        let ledger = rank_ledger(chain, &t(&[1, 3])).unwrap();
        assert_eq!((ledger.stratum_dim, ledger.excess), (7, 1));

        let w = fig.tree().vertices().iter().position(|v| v.genus == 0).unwrap();
        let to_leaves: BTreeSet<usize> = (0..fig.tree().num_edges())
            .filter(|&e| {
                let (a, b) = fig.tree().endpoints(e);
                let other = if a == w { b } else if b == w { a } else { return false };
                fig.coloring().color(other) == Some(1)
            })
            .collect();
        let spec = specialize(fig, &to_leaves).unwrap();
        assert_eq!(specialization_ledger(&spec, &t(&[1, 3])).unwrap().specialization_rank, Some(2));

        assert!(matches!(rank_ledger(fig, &t(&[1, 4])), Err(IntersectError::GenusMismatch { .. })));
    }
}
