//! Formal plumbing series: the xi/eta recursion on a degenerating curve of
//! compact type, its path-sum leading terms and period blocks.
//!
//! Kernel coefficients are stored multiplied by `2 pi i`, so contour
//! integrals reduce to residues. Genus-0 components use centered charts at
//! explicit rational node positions; positive-genus data stays symbolic.

pub mod jet;
pub mod period;
pub mod poly;
pub mod recursion;
pub mod series;
pub mod symbol;

use thiserror::Error;

pub use jet::{pullback_transition, residue_integrate, KernelJet, LocalJet, Precision};
pub use period::{b_integrate, period_block, PeriodBlock};
pub use poly::{Monomial, Poly, Var};
pub use recursion::{
    verify_refinement, Expansion, NodePositions, OmegaPlacement, OrderReport, PathFamily, RefinementOptions,
    RefinementReport, WeightedPath,
};
pub use series::PlumbingSeries;
pub use symbol::Symbol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlumbingError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown oriented edge `{0}`")]
    UnknownEdge(String),
    #[error("the varied differential must sit on a positive-genus vertex, `{0}` has genus 0")]
    OmegaOnGenusZero(String),
    #[error("basis index {index} out of range for vertex `{vertex}` of genus {genus}")]
    OmegaIndexOutOfRange { vertex: String, index: u32, genus: u32 },
    #[error("coincident node positions on genus-0 vertex `{0}`")]
    CoincidentNodes(String),
    #[error("node position given for `{0}`, whose source has positive genus")]
    PositionOnPositiveGenus(String),
    #[error("eta is only defined here on positive-genus vertices, `{0}` has genus 0")]
    EtaAtGenusZero(String),
    #[error("source and target vertex coincide")]
    SameVertex,
    #[error("smoothing truncation {s_trunc} is below the requested order {r_max}")]
    TruncationTooShallow { s_trunc: u32, r_max: u32 },
    #[error("smoothing truncation must be positive")]
    ZeroTruncation,
    #[error("integrand in chart `{chart}` has an unknown tail that survives the truncation")]
    TruncationUnderflow { chart: String },
    #[error("pole of order {order} needs kernel coefficients beyond the available {available}")]
    PoleOrderExceedsKernel { order: i32, available: usize },
    #[error("jets live in different charts `{0}` and `{1}`")]
    ChartMismatch(String, String),
    #[error("cannot combine jets with incompatible precision")]
    IncompatiblePrecision,
}
