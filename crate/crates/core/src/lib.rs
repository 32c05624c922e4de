//! Combinatorics and local analysis of the Torelli pullback of the
//! compact-type boundary.

pub mod graph;
pub mod ideal;
pub mod intersect;
pub mod strata;
pub mod plumbing;
pub mod json;
