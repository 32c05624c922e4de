//! The xi/eta recursion over a stable tree, path sums over oriented walks,
//! and the order-by-order refinement check.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_rational::BigRational;
use num_traits::One;

use super::jet::{pullback_transition, rational_kernel, residue_integrate, KernelJet, LocalJet, Precision};
use super::poly::{Monomial, Poly, Var};
use super::symbol::Symbol;
use super::PlumbingError;
use crate::graph::{OrientedEdge, StableTree};

/// Node positions `q_e` for charts at genus-0 vertices, keyed by oriented
/// edge label (`e` or `-e`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodePositions {
    by_label: BTreeMap<String, BigRational>,
}

impl NodePositions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, label: impl Into<String>, q: BigRational) {
        self.by_label.insert(label.into(), q);
    }

    pub fn with(mut self, label: impl Into<String>, q: BigRational) -> Self {
        self.set(label, q);
        self
    }

    pub fn get(&self, label: &str) -> Option<&BigRational> {
        self.by_label.get(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BigRational)> {
        self.by_label.iter()
    }
}

/// The differential being varied: basis element `index` (1-based) at a
/// positive-genus vertex, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmegaPlacement {
    pub vertex: usize,
    pub index: u32,
}

/// Memoized expansion of `xi^(r)_e` and `eta^(r)_v` modulo `s_e^(T+1)`.
pub struct Expansion<'t> {
    tree: &'t StableTree,
    omega: OmegaPlacement,
    s_trunc: u32,
    positions: Vec<Option<BigRational>>,
    xi_cache: Mutex<HashMap<(usize, u32), LocalJet>>,
    kernel_cache: Mutex<HashMap<(usize, usize), KernelJet>>,
}

impl<'t> Expansion<'t> {
    /// Genus-0 charts without an explicit position get `0, 1, 2, ...` in
    /// `E_v` order.
    pub fn new(
        tree: &'t StableTree,
        omega: OmegaPlacement,
        s_trunc: u32,
        positions: &NodePositions,
    ) -> Result<Self, PlumbingError> {
        if s_trunc == 0 {
            return Err(PlumbingError::ZeroTruncation);
        }
        let genus = tree.vertices().get(omega.vertex).map(|v| v.genus);
        match genus {
            None => return Err(PlumbingError::UnknownVertex(omega.vertex.to_string())),
            Some(0) => {
                return Err(PlumbingError::OmegaOnGenusZero(tree.vertices()[omega.vertex].id.clone()));
            }
            Some(g) if omega.index == 0 || omega.index > g => {
                return Err(PlumbingError::OmegaIndexOutOfRange {
                    vertex: tree.vertices()[omega.vertex].id.clone(),
                    index: omega.index,
                    genus: g,
                });
            }
            Some(_) => {}
        }
        let mut by_code = vec![None; 2 * tree.num_edges()];
        let mut used = 0;
        for v in 0..tree.num_vertices() {
            let out = tree.outgoing(v);
            for (i, e) in out.iter().enumerate() {
                let label = e.label(tree);
                match (tree.genus(v), positions.get(&label)) {
                    (0, Some(q)) => {
                        by_code[e.code()] = Some(q.clone());
                        used += 1;
                    }
                    (0, None) => by_code[e.code()] = Some(BigRational::from_integer((i as i64).into())),
                    (_, Some(_)) => return Err(PlumbingError::PositionOnPositiveGenus(label)),
                    (_, None) => {}
                }
            }
            if tree.genus(v) == 0 {
                for (i, a) in out.iter().enumerate() {
                    for b in &out[i + 1..] {
                        if by_code[a.code()] == by_code[b.code()] {
                            return Err(PlumbingError::CoincidentNodes(tree.vertices()[v].id.clone()));
                        }
                    }
                }
            }
        }
        if used != positions.iter().count() {
            let unknown = positions
                .iter()
                .map(|(l, _)| l)
                .find(|l| (0..2 * tree.num_edges()).all(|c| OrientedEdge::from_code(c).label(tree) != **l))
                .cloned()
                .unwrap_or_default();
            return Err(PlumbingError::UnknownEdge(unknown));
        }
        Ok(Expansion {
            tree,
            omega,
            s_trunc,
            positions: by_code,
            xi_cache: Mutex::new(HashMap::new()),
            kernel_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn tree(&self) -> &StableTree {
        self.tree
    }

    pub fn omega(&self) -> OmegaPlacement {
        self.omega
    }

    pub fn s_truncation(&self) -> u32 {
        self.s_trunc
    }

    pub fn position(&self, e: OrientedEdge) -> Option<&BigRational> {
        self.positions[e.code()].as_ref()
    }

    fn vertex_label(&self, v: usize) -> String {
        self.tree.vertices()[v].id.clone()
    }

    fn edge_label(&self, e: OrientedEdge) -> String {
        e.label(self.tree)
    }

    fn s_name(&self, e: OrientedEdge) -> String {
        self.tree.edges()[e.edge].id.clone()
    }

    /// `beta(e, e')` at the common source vertex.
    pub fn beta(&self, e: OrientedEdge, f: OrientedEdge) -> Poly {
        let v = e.source(self.tree);
        debug_assert_eq!(v, f.source(self.tree));
        if self.tree.genus(v) == 0 {
            if e == f {
                return Poly::zero();
            }
            let delta = self.position(e).expect("genus-0 chart") - self.position(f).expect("genus-0 chart");
            return Poly::constant(BigRational::one() / (&delta * &delta));
        }
        Poly::symbol(Symbol::Beta { vertex: self.vertex_label(v), from: self.edge_label(e), to: self.edge_label(f) })
    }

    /// Regular kernel jet at `v(out)` with output chart `out` and
    /// integration chart `inp`.
    pub fn kernel(&self, out: OrientedEdge, inp: OrientedEdge) -> KernelJet {
        let key = (out.code(), inp.code());
        if let Some(k) = self.kernel_cache.lock().expect("cache lock").get(&key) {
            return k.clone();
        }
        let t = self.s_trunc as usize;
        let v = out.source(self.tree);
        let out_label = self.edge_label(out);
        let kernel = if self.tree.genus(v) == 0 {
            if out == inp {
                KernelJet {
                    out_chart: out_label,
                    z_precision: t,
                    zeta_precision: t + 1,
                    table: vec![vec![Poly::zero(); t + 1]; t],
                }
            } else {
                rational_kernel(
                    &out_label,
                    self.position(out).expect("genus-0 chart"),
                    self.position(inp).expect("genus-0 chart"),
                    t,
                    t + 1,
                )
            }
        } else {
            let (vertex, from, to) = (self.vertex_label(v), out_label.clone(), self.edge_label(inp));
            let table = (0..t as u32)
                .map(|a| {
                    (0..=t as u32)
                        .map(|b| {
                            let s = match (a, b) {
                                (a, 0) => Symbol::Kappa { vertex: vertex.clone(), from: from.clone(), to: to.clone(), a },
                                (0, 1) => Symbol::Beta { vertex: vertex.clone(), from: from.clone(), to: to.clone() },
                                (a, b) => Symbol::Kernel { vertex: vertex.clone(), from: from.clone(), to: to.clone(), a, b },
                            };
                            Poly::symbol(s)
                        })
                        .collect()
                })
                .collect();
            KernelJet { out_chart: out_label, z_precision: t, zeta_precision: t + 1, table }
        };
        self.kernel_cache.lock().expect("cache lock").insert(key, kernel.clone());
        kernel
    }

    /// `xi^(0)_e`: the Taylor jet of Omega in the chart `e` (zero away from
    /// the Omega vertex).
    fn xi_zero(&self, e: OrientedEdge) -> LocalJet {
        let label = self.edge_label(e);
        let precision = Precision::Below(self.s_trunc as i32);
        if e.source(self.tree) != self.omega.vertex {
            return LocalJet::zero(label, precision);
        }
        let coeffs = (0..self.s_trunc).map(|n| Poly::symbol(Symbol::Xi { edge: label.clone(), n })).collect();
        LocalJet { chart: label, start: 0, coeffs, precision }
    }

    /// `xi^(r)_e`.
    pub fn xi(&self, e: OrientedEdge, r: u32) -> Result<LocalJet, PlumbingError> {
        if let Some(j) = self.xi_cache.lock().expect("cache lock").get(&(e.code(), r)) {
            return Ok(j.clone());
        }
        let jet = if r == 0 {
            self.xi_zero(e)
        } else {
            let v = e.source(self.tree);
            let label = self.edge_label(e);
            let mut acc = LocalJet::zero(label, Precision::Below(self.s_trunc as i32));
            for f in self.tree.outgoing(v) {
                let incoming = self.xi(f.reverse(), r - 1)?;
                if incoming.is_zero() {
                    continue;
                }
                let pulled = pullback_transition(&incoming, &self.s_name(f), &self.edge_label(f)).truncate_s(Some(self.s_trunc));
                let term = residue_integrate(&self.kernel(e, f), &pulled, Some(self.s_trunc))?;
                acc = acc.add(&term)?;
            }
            acc
        };
        self.xi_cache.lock().expect("cache lock").insert((e.code(), r), jet.clone());
        Ok(jet)
    }

    fn eta_kernel(&self, v: usize, e: OrientedEdge) -> KernelJet {
        let t = self.s_trunc;
        let row = (0..=t)
            .map(|b| {
                if b == 0 {
                    Poly::zero()
                } else {
                    Poly::symbol(Symbol::KernelDiff { vertex: self.vertex_label(v), edge: self.edge_label(e), b })
                }
            })
            .collect();
        KernelJet { out_chart: self.vertex_label(v), z_precision: 1, zeta_precision: t as usize + 1, table: vec![row] }
    }

    /// `eta^(r)_v` as a combination of kernel differentials on `C_v`.
    pub fn eta(&self, v: usize, r: u32) -> Result<Poly, PlumbingError> {
        if self.tree.genus(v) == 0 {
            return Err(PlumbingError::EtaAtGenusZero(self.vertex_label(v)));
        }
        if r == 0 {
            return Ok(Poly::zero());
        }
        let mut acc = Poly::zero();
        for e in self.tree.outgoing(v) {
            let incoming = self.xi(e.reverse(), r - 1)?;
            if incoming.is_zero() {
                continue;
            }
            let pulled = pullback_transition(&incoming, &self.s_name(e), &self.edge_label(e)).truncate_s(Some(self.s_trunc));
            let term = residue_integrate(&self.eta_kernel(v, e), &pulled, Some(self.s_trunc))?;
            acc.add_assign(&term.coefficient(0));
        }
        Ok(acc)
    }

    /// `sum_{1 <= r <= r_max} eta^(r)_v`.
    pub fn eta_series(&self, v: usize, r_max: u32) -> Result<Poly, PlumbingError> {
        let mut acc = Poly::zero();
        for r in 1..=r_max {
            acc.add_assign(&self.eta(v, r)?);
        }
        Ok(acc)
    }

    /// All oriented walks of length `r` from `v`, with their weights.
    pub fn path_family(&self, v: usize, r: u32) -> PathFamily {
        let mut paths = Vec::new();
        let mut stack: Vec<OrientedEdge> = Vec::new();
        self.extend_walks(v, r, &mut stack, &mut paths);
        PathFamily { base: v, length: r, paths }
    }

    fn extend_walks(&self, at: usize, remaining: u32, stack: &mut Vec<OrientedEdge>, out: &mut Vec<WeightedPath>) {
        if remaining == 0 {
            if stack.is_empty() {
                return;
            }
            let mut s_weight = Poly::one();
            for e in stack.iter() {
                s_weight = &s_weight * &Poly::s(&self.s_name(*e), 1);
            }
            let mut beta_weight = Poly::one();
            for w in stack.windows(2) {
                beta_weight = &beta_weight * &self.beta(w[0].reverse(), w[1]);
            }
            out.push(WeightedPath { edges: stack.clone(), s_weight, beta_weight });
            return;
        }
        for e in self.tree.outgoing(at) {
            stack.push(e);
            self.extend_walks(e.target(self.tree), remaining - 1, stack, out);
            stack.pop();
        }
    }

    /// The closed-form leading part of `eta^(r)_v`:
    /// `(-1)^r sum_l s(l) b_v(z, q_{e_1}) beta(l) xi~_{-e_r}` over walks
    /// ending at the Omega vertex.
    pub fn path_sum_leading(&self, v: usize, r: u32) -> Poly {
        if r == 0 {
            return Poly::zero();
        }
        let mut acc = Poly::zero();
        for p in self.path_family(v, r).paths {
            let last = *p.edges.last().expect("nonempty walk");
            if last.target(self.tree) != self.omega.vertex {
                continue;
            }
            let b = Poly::symbol(Symbol::KernelDiff {
                vertex: self.vertex_label(v),
                edge: self.edge_label(p.edges[0]),
                b: 1,
            });
            let xi = Poly::symbol(Symbol::Xi { edge: self.edge_label(last.reverse()), n: 0 });
            let term = &(&(&p.s_weight * &b) * &p.beta_weight) * &xi;
            acc.add_assign(&term);
        }
        acc.scale(&sign(r))
    }

    /// The monomial `s_{e_1} ... s_{e_r}` of the geodesic from `v` to the
    /// Omega vertex.
    pub fn geodesic_monomial(&self, v: usize) -> Monomial {
        self.tree
            .path(v, self.omega.vertex)
            .into_iter()
            .fold(Monomial::one(), |m, e| m.mul(&Monomial::var(Var::S(self.s_name(e)), 1)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedPath {
    pub edges: Vec<OrientedEdge>,
    /// `s(l)`.
    pub s_weight: Poly,
    /// `beta(l)`.
    pub beta_weight: Poly,
}

/// `L_v^r` with weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathFamily {
    pub base: usize,
    pub length: u32,
    pub paths: Vec<WeightedPath>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderReport {
    pub order: u32,
    /// Number of terms in `eta^(order)` modulo the truncation.
    pub eta_terms: usize,
    pub leading: Poly,
    pub remainder: Poly,
    /// Required to vanish (`order < distance`).
    pub must_vanish: bool,
    pub vanishes: bool,
    /// Smallest smoothing degree among remainder monomials.
    pub remainder_min_degree: Option<i32>,
    pub remainder_divisible: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementReport {
    pub target: String,
    pub source: String,
    pub distance: u32,
    pub geodesic: Vec<String>,
    pub s_truncation: u32,
    pub orders: Vec<OrderReport>,
    pub pass: bool,
}

/// Options for [`verify_refinement`].
#[derive(Debug, Clone, Default)]
pub struct RefinementOptions {
    /// Per-variable truncation; defaults to `r_max + 1`.
    pub s_trunc: Option<u32>,
    pub positions: NodePositions,
    /// 1-based basis index of Omega.
    pub omega_index: Option<u32>,
}

/// Checks, for every order up to `r_max`, that `eta^(r')_v` vanishes below
/// the distance and otherwise equals the path sum plus a remainder whose
/// monomials have smoothing degree above `r'` and are divisible by the
/// geodesic monomial.
pub fn verify_refinement(
    tree: &StableTree,
    target: usize,
    source: usize,
    r_max: u32,
    options: &RefinementOptions,
) -> Result<RefinementReport, PlumbingError> {
    if target == source {
        return Err(PlumbingError::SameVertex);
    }
    if target >= tree.num_vertices() {
        return Err(PlumbingError::UnknownVertex(target.to_string()));
    }
    let s_trunc = options.s_trunc.unwrap_or(r_max + 1);
    if s_trunc < r_max {
        return Err(PlumbingError::TruncationTooShallow { s_trunc, r_max });
    }
    let omega = OmegaPlacement { vertex: source, index: options.omega_index.unwrap_or(1) };
    let expansion = Expansion::new(tree, omega, s_trunc, &options.positions)?;
    if tree.genus(target) == 0 {
        return Err(PlumbingError::EtaAtGenusZero(tree.vertices()[target].id.clone()));
    }
    let geodesic = tree.path(target, source);
    let distance = geodesic.len() as u32;
    let geo = expansion.geodesic_monomial(target);
    let mut orders = Vec::new();
    for r in 1..=r_max {
        let eta = expansion.eta(target, r)?;
        let leading = expansion.path_sum_leading(target, r);
        let remainder = &eta - &leading;
        let must_vanish = r < distance;
        let vanishes = eta.is_zero();
        let remainder_min_degree = remainder.min_s_degree();
        let remainder_divisible = remainder.terms().all(|(m, _)| m.divisible_by(&geo));
        let leading_homogeneous = leading.terms().all(|(m, _)| m.s_degree() == r as i32);
        let pass = if must_vanish {
            vanishes && leading.is_zero()
        } else {
            leading_homogeneous && remainder_divisible && remainder_min_degree.is_none_or(|d| d > r as i32)
        };
        orders.push(OrderReport {
            order: r,
            eta_terms: eta.len(),
            leading,
            remainder,
            must_vanish,
            vanishes,
            remainder_min_degree,
            remainder_divisible,
            pass,
        });
    }
    Ok(RefinementReport {
        target: tree.vertices()[target].id.clone(),
        source: tree.vertices()[source].id.clone(),
        distance,
        geodesic: geodesic.iter().map(|e| e.label(tree)).collect(),
        s_truncation: s_trunc,
        pass: orders.iter().all(|o| o.pass),
        orders,
    })
}

/// Sign `(-1)^r` as a rational.
fn sign(r: u32) -> BigRational {
    if r.is_multiple_of(2) {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}
