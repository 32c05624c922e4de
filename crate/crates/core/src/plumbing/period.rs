//! Off-diagonal period blocks assembled from B-integrals of `eta_v`.

use super::poly::{Monomial, Poly};
use super::recursion::{Expansion, NodePositions, OmegaPlacement};
use super::symbol::Symbol;
use super::PlumbingError;
use crate::graph::StableTree;

/// `Pi_s(v', v)`: rows are basis differentials at `v'`, columns are
/// B-cycles at `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodBlock {
    pub row_vertex: String,
    pub column_vertex: String,
    pub geodesic: Monomial,
    pub distance: u32,
    pub entries: Vec<Vec<Poly>>,
}

impl PeriodBlock {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn columns(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// Coefficient of the geodesic monomial in entry `(i, j)` (0-based).
    pub fn leading_coefficient(&self, i: usize, j: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in self.entries[i][j].terms() {
            if m.s_part() == self.geodesic {
                out.add_assign(&Poly::term(c.clone(), m.symbol_part()));
            }
        }
        out
    }

    /// Every entry lies in the ideal of the geodesic monomial.
    pub fn geodesic_divisible(&self) -> bool {
        self.entries.iter().flatten().all(|p| p.terms().all(|(m, _)| m.divisible_by(&self.geodesic)))
    }

    /// `Pi_s(v, v') = Pi_s(v', v)^T`.
    pub fn transpose(&self) -> PeriodBlock {
        let (r, c) = (self.rows(), self.columns());
        let entries = (0..c).map(|j| (0..r).map(|i| self.entries[i][j].clone()).collect()).collect();
        PeriodBlock {
            row_vertex: self.column_vertex.clone(),
            column_vertex: self.row_vertex.clone(),
            geodesic: self.geodesic.clone(),
            distance: self.distance,
            entries,
        }
    }
}

/// Integrates `eta` over the B-cycle `cycle` of its vertex. A-periods of the
/// kernel vanish, so only B-integrals carry information.
pub fn b_integrate(eta: &Poly, cycle: u32) -> Poly {
    eta.substitute(&|s| match s {
        Symbol::KernelDiff { edge, b, .. } => {
            let period = Poly::symbol(Symbol::BPeriod { cycle, edge: edge.clone(), m: b - 1 });
            period.scale(&num_rational::BigRational::new(1.into(), (*b as i64).into()))
        }
        other => Poly::symbol(other.clone()),
    })
}

/// `Pi_s(v', v)` with Omega ranging over the basis at `v'` and B-cycles at
/// `v`, up to smoothing order `r_max`.
pub fn period_block(
    tree: &StableTree,
    v: usize,
    v_prime: usize,
    r_max: u32,
    s_trunc: Option<u32>,
    positions: &NodePositions,
) -> Result<PeriodBlock, PlumbingError> {
    if v == v_prime {
        return Err(PlumbingError::SameVertex);
    }
    if tree.genus(v) == 0 {
        return Err(PlumbingError::EtaAtGenusZero(tree.vertices()[v].id.clone()));
    }
    let s_trunc = s_trunc.unwrap_or(r_max + 1);
    let mut entries = Vec::new();
    let mut geodesic = Monomial::one();
    for i in 1..=tree.genus(v_prime) {
        let expansion = Expansion::new(tree, OmegaPlacement { vertex: v_prime, index: i }, s_trunc, positions)?;
        geodesic = expansion.geodesic_monomial(v);
        let eta = expansion.eta_series(v, r_max)?;
        entries.push((1..=tree.genus(v)).map(|j| b_integrate(&eta, j)).collect());
    }
    Ok(PeriodBlock {
        row_vertex: tree.vertices()[v_prime].id.clone(),
        column_vertex: tree.vertices()[v].id.clone(),
        geodesic,
        distance: tree.distance(v, v_prime) as u32,
        entries,
    })
}
