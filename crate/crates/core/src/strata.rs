//! Colored strata `(T, sigma)` of the fiber product, their critical paths,
//! specializations between them, S-structures and the stratification poset.
//!
//! A stratum is accepted when every edge lies on a critical path. That is the
//! combinatorial criterion available today; a complete description of the
//! strata may refine it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{
    canonical_labeling, contract_indices, edge_between, enumerate_stable_trees, find_isomorphism, validate,
    GraphError, StableTree,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrataError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("part tuple must be nonempty")]
    EmptyParts,
    #[error("parts must be positive, got {0:?}")]
    ZeroPart(Vec<u32>),
    #[error("parts {parts:?} sum to {sum}, expected genus {g}")]
    PartSumMismatch { g: u32, parts: Vec<u32>, sum: u32 },
    #[error("contraction merges vertices of different colors")]
    IncompatibleColors,
    #[error("not a valid stratum: edge `{0}` lies on no critical path")]
    NotAStratum(String),
    #[error("specialization {index} does not start at the base stratum")]
    SourceMismatch { index: usize },
    #[error("specializations cannot be composed: target and source differ")]
    NotComposable,
    #[error("strata have different genus or parts")]
    MixedParameters,
    #[error("too many edges ({0}); at most 64 are supported")]
    TooManyEdges(usize),
}

pub(crate) fn check_parts(g: u32, parts: &[u32]) -> Result<(), StrataError> {
    if parts.is_empty() {
        return Err(StrataError::EmptyParts);
    }
    if parts.contains(&0) {
        return Err(StrataError::ZeroPart(parts.to_vec()));
    }
    let sum: u32 = parts.iter().sum();
    if sum != g {
        return Err(StrataError::PartSumMismatch { g, parts: parts.to_vec(), sum });
    }
    Ok(())
}

/// A k-coloring of the positive-genus vertices. Colors are stored 0-based;
/// external formats use 1-based colors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    parts: Vec<u32>,
    colors: Vec<Option<usize>>,
}

impl Coloring {
    pub fn new(tree: &StableTree, parts: Vec<u32>, colors: Vec<Option<usize>>) -> Result<Self, StrataError> {
        check_parts(tree.total_genus(), &parts)?;
        if colors.len() != tree.num_vertices() {
            return Err(StrataError::InvalidColoring(format!(
                "{} colors for {} vertices",
                colors.len(),
                tree.num_vertices()
            )));
        }
        let mut sums = vec![0u32; parts.len()];
        for (v, c) in colors.iter().enumerate() {
            let vertex = &tree.vertices()[v];
            match (vertex.genus > 0, c) {
                (true, Some(c)) if *c < parts.len() => sums[*c] += vertex.genus,
                (true, Some(c)) => {
                    return Err(StrataError::InvalidColoring(format!(
                        "vertex `{}` has color {} but there are {} parts",
                        vertex.id,
                        c + 1,
                        parts.len()
                    )))
                }
                (true, None) => {
                    return Err(StrataError::InvalidColoring(format!("vertex `{}` is uncolored", vertex.id)))
                }
                (false, Some(_)) => {
                    return Err(StrataError::InvalidColoring(format!(
                        "genus-0 vertex `{}` must not be colored",
                        vertex.id
                    )))
                }
                (false, None) => {}
            }
        }
        if sums != parts {
            return Err(StrataError::InvalidColoring(format!("color genera {sums:?} differ from parts {parts:?}")));
        }
        Ok(Coloring { parts, colors })
    }

    /// Builds a coloring from `vertex id -> 1-based color`.
    pub fn from_ids(tree: &StableTree, parts: Vec<u32>, by_id: &BTreeMap<String, usize>) -> Result<Self, StrataError> {
        let mut colors = vec![None; tree.num_vertices()];
        for (id, &c) in by_id {
            let v = tree.vertex_index(id).ok_or_else(|| GraphError::UnknownVertex(id.clone()))?;
            if c == 0 {
                return Err(StrataError::InvalidColoring(format!("color of `{id}` must be at least 1")));
            }
            colors[v] = Some(c - 1);
        }
        Coloring::new(tree, parts, colors)
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn color(&self, v: usize) -> Option<usize> {
        self.colors[v]
    }

    pub fn colors(&self) -> &[Option<usize>] {
        &self.colors
    }
}

/// A path with positive-genus, differently colored ends and genus-0 interior.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CriticalPath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl CriticalPath {
    pub fn support(&self) -> BTreeSet<usize> {
        self.edges.iter().copied().collect()
    }
}

/// All critical paths of `(tree, coloring)`, sorted by sorted edge support.
pub fn critical_paths(tree: &StableTree, coloring: &Coloring) -> Vec<CriticalPath> {
    let positive: Vec<usize> = (0..tree.num_vertices()).filter(|&v| tree.genus(v) > 0).collect();
    let mut out = Vec::new();
    for (i, &a) in positive.iter().enumerate() {
        for &b in &positive[i + 1..] {
            if coloring.color(a) == coloring.color(b) {
                continue;
            }
            let vertices = tree.path_vertices(a, b);
            if vertices[1..vertices.len() - 1].iter().all(|&v| tree.genus(v) == 0) {
                let edges = tree.path(a, b).into_iter().map(|oe| oe.edge).collect();
                out.push(CriticalPath { vertices, edges });
            }
        }
    }
    out.sort_by_key(|p| {
        let mut s = p.edges.clone();
        s.sort();
        (s, p.vertices.clone())
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StratumValidity {
    Valid,
    /// An edge (by index) covered by no critical path.
    Uncovered(usize),
}

impl StratumValidity {
    pub fn is_valid(&self) -> bool {
        matches!(self, StratumValidity::Valid)
    }
}

/// A pair `(T, sigma)` with its critical paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColoredStratum {
    tree: StableTree,
    coloring: Coloring,
    critical_paths: Vec<CriticalPath>,
}

impl ColoredStratum {
    pub fn new(tree: StableTree, coloring: Coloring) -> Result<Self, StrataError> {
        let report = validate(&tree);
        if !report.is_valid() {
            return Err(GraphError::Invalid(report).into());
        }
        if coloring.colors.len() != tree.num_vertices() {
            return Err(StrataError::InvalidColoring("coloring belongs to another tree".into()));
        }
        let critical_paths = critical_paths(&tree, &coloring);
        Ok(ColoredStratum { tree, coloring, critical_paths })
    }

    pub fn tree(&self) -> &StableTree {
        &self.tree
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn critical_paths(&self) -> &[CriticalPath] {
        &self.critical_paths
    }

    pub fn genus(&self) -> u32 {
        self.tree.total_genus()
    }

    pub fn parts(&self) -> &[u32] {
        self.coloring.parts()
    }

    /// Remark criterion: every edge lies on some critical path.
    pub fn validity(&self) -> StratumValidity {
        let covered: BTreeSet<usize> = self.critical_paths.iter().flat_map(|p| p.edges.iter().copied()).collect();
        match (0..self.tree.num_edges()).find(|e| !covered.contains(e)) {
            Some(e) => StratumValidity::Uncovered(e),
            None => StratumValidity::Valid,
        }
    }

    pub fn is_valid_stratum(&self) -> bool {
        self.validity().is_valid()
    }

    /// `genus:color` with color 0 for genus-0 vertices.
    pub fn vertex_label(&self, v: usize) -> String {
        format!("{}:{}", self.tree.genus(v), self.coloring.color(v).map_or(0, |c| c + 1))
    }

    pub fn canonical_form(&self) -> String {
        canonical_labeling(&self.tree, |v| self.vertex_label(v), |_| "").0
    }

    /// Canonical form modulo permutations of colors carrying equal parts.
    pub fn canonical_form_unordered(&self) -> String {
        color_permutations(self.parts())
            .into_iter()
            .map(|perm| {
                let label = |v: usize| {
                    format!("{}:{}", self.tree.genus(v), self.coloring.color(v).map_or(0, |c| perm[c] + 1))
                };
                canonical_labeling(&self.tree, label, |_| "").0
            })
            .min()
            .unwrap_or_default()
    }

    /// Canonical form with an extra label per edge.
    pub fn canonical_form_with_edges(&self, edge_label: impl Fn(usize) -> String) -> String {
        canonical_labeling(&self.tree, |v| self.vertex_label(v), edge_label).0
    }

    /// Copy with vertices `v0..` and edges `e0..` in canonical order.
    pub fn relabeled(&self) -> ColoredStratum {
        let (tree, new_of_old) = self.tree.relabel_canonically(|v| self.vertex_label(v));
        let mut colors = vec![None; tree.num_vertices()];
        for (old, &new) in new_of_old.iter().enumerate() {
            colors[new] = self.coloring.color(old);
        }
        let coloring = Coloring { parts: self.coloring.parts.clone(), colors };
        ColoredStratum::new(tree, coloring).expect("relabeling preserves validity")
    }

    /// Same stratum with colors permuted: new color of `c` is `perm[c]`.
    pub fn permute_colors(&self, perm: &[usize]) -> Result<ColoredStratum, StrataError> {
        let mut parts = vec![0u32; self.parts().len()];
        for (c, &p) in perm.iter().enumerate() {
            parts[p] = self.parts()[c];
        }
        let colors = self.coloring.colors.iter().map(|c| c.map(|c| perm[c])).collect();
        ColoredStratum::new(self.tree.clone(), Coloring::new(&self.tree, parts, colors)?)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{name}\" {{\n");
        for (v, vertex) in self.tree.vertices().iter().enumerate() {
            let color = self.coloring.color(v).map_or("-".to_string(), |c| (c + 1).to_string());
            out.push_str(&format!(
                "  \"{}\" [label=\"{}\", color_index=\"{}\"];\n",
                vertex.id, vertex.genus, color
            ));
        }
        for (i, e) in self.tree.edges().iter().enumerate() {
            let (a, b) = self.tree.endpoints(i);
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [label=\"{}\"];\n",
                self.tree.vertices()[a].id,
                self.tree.vertices()[b].id,
                e.id
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Permutations of `0..k` that only move colors among equal parts.
pub fn color_permutations(parts: &[u32]) -> Vec<Vec<usize>> {
    fn go(parts: &[u32], prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let c = prefix.len();
        if c == parts.len() {
            out.push(prefix.clone());
            return;
        }
        for target in 0..parts.len() {
            if !used[target] && parts[target] == parts[c] {
                used[target] = true;
                prefix.push(target);
                go(parts, prefix, used, out);
                prefix.pop();
                used[target] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(parts, &mut Vec::new(), &mut vec![false; parts.len()], &mut out);
    out
}

/// Every valid stratum for genus `g` and ordered parts, up to isomorphism.
/// With `dedup_unordered`, strata differing by a permutation of equal parts
/// are identified.
pub fn enumerate_strata(g: u32, parts: &[u32], dedup_unordered: bool) -> Result<Vec<ColoredStratum>, StrataError> {
    check_parts(g, parts)?;
    let mut found: BTreeMap<String, ColoredStratum> = BTreeMap::new();
    for tree in enumerate_stable_trees(g, None)? {
        let positive: Vec<usize> = (0..tree.num_vertices()).filter(|&v| tree.genus(v) > 0).collect();
        let mut colors = vec![None; tree.num_vertices()];
        let mut remaining = parts.to_vec();
        assign_colors(&tree, &positive, 0, &mut colors, &mut remaining, &mut |colors| {
            let coloring = Coloring { parts: parts.to_vec(), colors: colors.to_vec() };
            let stratum = ColoredStratum::new(tree.clone(), coloring).expect("enumerated trees are valid");
            if stratum.is_valid_stratum() {
                let key = if dedup_unordered {
                    stratum.canonical_form_unordered()
                } else {
                    stratum.canonical_form()
                };
                found.entry(key).or_insert_with(|| stratum.relabeled());
            }
        });
    }
    Ok(found.into_values().collect())
}

fn assign_colors(
    tree: &StableTree,
    positive: &[usize],
    i: usize,
    colors: &mut Vec<Option<usize>>,
    remaining: &mut Vec<u32>,
    visit: &mut impl FnMut(&[Option<usize>]),
) {
    if i == positive.len() {
        if remaining.iter().all(|&r| r == 0) {
            visit(colors);
        }
        return;
    }
    let v = positive[i];
    let gv = tree.genus(v);
    for c in 0..remaining.len() {
        if remaining[c] >= gv {
            remaining[c] -= gv;
            colors[v] = Some(c);
            assign_colors(tree, positive, i + 1, colors, remaining, visit);
            colors[v] = None;
            remaining[c] += gv;
        }
    }
}

/// A color-compatible contraction `(T, sigma) -> (T', sigma')`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumSpecialization {
    pub source: ColoredStratum,
    pub target: ColoredStratum,
    pub contracted: BTreeSet<usize>,
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<Option<usize>>,
}

impl StratumSpecialization {
    pub fn identity(stratum: &ColoredStratum) -> Self {
        StratumSpecialization {
            source: stratum.clone(),
            target: stratum.clone(),
            contracted: BTreeSet::new(),
            vertex_map: (0..stratum.tree.num_vertices()).collect(),
            edge_map: (0..stratum.tree.num_edges()).map(Some).collect(),
        }
    }

    pub fn is_isomorphism(&self) -> bool {
        self.contracted.is_empty()
    }

    /// Verifies `sigma(v) = sigma'(f(v))` and that `f` is compatible with the
    /// edge map.
    pub fn is_consistent(&self) -> bool {
        let s = &self.source;
        let t = &self.target;
        if self.vertex_map.len() != s.tree.num_vertices() || self.edge_map.len() != s.tree.num_edges() {
            return false;
        }
        for v in 0..s.tree.num_vertices() {
            if s.tree.genus(v) > 0 && s.coloring.color(v) != t.coloring.color(self.vertex_map[v]) {
                return false;
            }
        }
        let mut genus = vec![0u32; t.tree.num_vertices()];
        for v in 0..s.tree.num_vertices() {
            genus[self.vertex_map[v]] += s.tree.genus(v);
        }
        if (0..t.tree.num_vertices()).any(|w| genus[w] != t.tree.genus(w)) {
            return false;
        }
        for e in 0..s.tree.num_edges() {
            let (a, b) = s.tree.endpoints(e);
            let (fa, fb) = (self.vertex_map[a], self.vertex_map[b]);
            match self.edge_map[e] {
                None => {
                    if fa != fb || !self.contracted.contains(&e) {
                        return false;
                    }
                }
                Some(te) => {
                    let (x, y) = t.tree.endpoints(te);
                    if !((x == fa && y == fb) || (x == fb && y == fa)) || self.contracted.contains(&e) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &StratumSpecialization) -> Result<StratumSpecialization, StrataError> {
        if self.target != next.source {
            return Err(StrataError::NotComposable);
        }
        let vertex_map = self.vertex_map.iter().map(|&w| next.vertex_map[w]).collect();
        let edge_map: Vec<Option<usize>> = self.edge_map.iter().map(|m| m.and_then(|e| next.edge_map[e])).collect();
        let contracted = edge_map.iter().enumerate().filter(|(_, m)| m.is_none()).map(|(e, _)| e).collect();
        Ok(StratumSpecialization {
            source: self.source.clone(),
            target: next.target.clone(),
            contracted,
            vertex_map,
            edge_map,
        })
    }

    /// Equality as maps out of the same source (targets compared exactly).
    pub fn same_map(&self, other: &StratumSpecialization) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.vertex_map == other.vertex_map
            && self.edge_map == other.edge_map
    }
}

/// Contracts `edges` of `stratum` with the induced coloring.
pub fn specialize(stratum: &ColoredStratum, edges: &BTreeSet<usize>) -> Result<StratumSpecialization, StrataError> {
    let c = contract_indices(&stratum.tree, edges);
    let mut colors: Vec<Option<usize>> = vec![None; c.target.num_vertices()];
    for v in 0..stratum.tree.num_vertices() {
        if let Some(col) = stratum.coloring.color(v) {
            let slot = &mut colors[c.vertex_map[v]];
            match slot {
                Some(existing) if *existing != col => return Err(StrataError::IncompatibleColors),
                _ => *slot = Some(col),
            }
        }
    }
    let coloring = Coloring { parts: stratum.coloring.parts.clone(), colors };
    let target = ColoredStratum::new(c.target, coloring)?;
    Ok(StratumSpecialization {
        source: stratum.clone(),
        target,
        contracted: c.contracted,
        vertex_map: c.vertex_map,
        edge_map: c.edge_map,
    })
}

/// Isomorphism of colored strata `from -> to` as a specialization.
pub fn isomorphism(from: &ColoredStratum, to: &ColoredStratum) -> Option<StratumSpecialization> {
    let map = find_isomorphism(&from.tree, |v| from.vertex_label(v), &to.tree, |v| to.vertex_label(v))?;
    let edge_map = (0..from.tree.num_edges())
        .map(|e| {
            let (a, b) = from.tree.endpoints(e);
            edge_between(&to.tree, map[a], map[b])
        })
        .collect();
    Some(StratumSpecialization {
        source: from.clone(),
        target: to.clone(),
        contracted: BTreeSet::new(),
        vertex_map: map,
        edge_map,
    })
}

pub(crate) fn subsets_of_size(n: usize, size: usize) -> Vec<BTreeSet<usize>> {
    fn go(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<usize>>) {
        if cur.len() == size {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            go(n, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        go(n, size, 0, &mut Vec::new(), &mut out);
    }
    out
}

/// All specializations `a -> b`, one representative per class modulo
/// automorphisms of `b` (equivalently, one per contracted edge set).
pub fn specializations_between(a: &ColoredStratum, b: &ColoredStratum) -> Vec<StratumSpecialization> {
    let (ea, eb) = (a.tree.num_edges(), b.tree.num_edges());
    if eb > ea || a.parts() != b.parts() || a.genus() != b.genus() {
        return Vec::new();
    }
    let target_form = b.canonical_form();
    let mut out = Vec::new();
    for set in subsets_of_size(ea, ea - eb) {
        let Ok(spec) = specialize(a, &set) else { continue };
        if spec.target.canonical_form() != target_form {
            continue;
        }
        let iso = isomorphism(&spec.target, b).expect("equal canonical forms");
        out.push(spec.then(&iso).expect("iso starts at the contraction target"));
    }
    out
}

/// A base stratum with specializations to the members of a collection S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SStructure {
    pub base: ColoredStratum,
    pub maps: Vec<StratumSpecialization>,
}

impl SStructure {
    pub fn new(base: ColoredStratum, maps: Vec<StratumSpecialization>) -> Result<Self, StrataError> {
        for (index, m) in maps.iter().enumerate() {
            if m.source != base {
                return Err(StrataError::SourceMismatch { index });
            }
        }
        Ok(SStructure { base, maps })
    }

    /// Edges of the base contracted by every member map.
    pub fn common_contracted(&self) -> BTreeSet<usize> {
        let mut iter = self.maps.iter();
        let Some(first) = iter.next() else {
            return (0..self.base.tree.num_edges()).collect();
        };
        iter.fold(first.contracted.clone(), |acc, m| acc.intersection(&m.contracted).copied().collect())
    }

    /// Generic means no edge is contracted by all member maps.
    pub fn is_generic(&self) -> bool {
        self.common_contracted().is_empty()
    }

    /// Isomorphism-invariant key: base canonical form with each edge
    /// labeled by which member maps contract it.
    pub fn key(&self) -> String {
        self.base.canonical_form_with_edges(|e| {
            self.maps.iter().map(|m| if m.contracted.contains(&e) { '1' } else { '0' }).collect()
        })
    }
}

/// The generic S-structure through which `structure` factors, with the
/// factoring specialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericFactorization {
    pub generic: SStructure,
    pub factoring: StratumSpecialization,
}

/// Contracts exactly the edges contracted by all member maps and pushes the
/// member maps down to the contracted base.
pub fn generic_structure(structure: &SStructure) -> Result<GenericFactorization, StrataError> {
    for (index, m) in structure.maps.iter().enumerate() {
        if m.source != structure.base {
            return Err(StrataError::SourceMismatch { index });
        }
    }
    let common = structure.common_contracted();
    let factoring = specialize(&structure.base, &common)?;
    let generic_base = factoring.target.clone();
    let mut source_edge = vec![0usize; generic_base.tree.num_edges()];
    for (e, m) in factoring.edge_map.iter().enumerate() {
        if let Some(t) = m {
            source_edge[*t] = e;
        }
    }
    let mut representative = vec![0usize; generic_base.tree.num_vertices()];
    for (v, &w) in factoring.vertex_map.iter().enumerate().rev() {
        representative[w] = v;
    }
    let maps = structure
        .maps
        .iter()
        .map(|m| {
            let vertex_map = representative.iter().map(|&v| m.vertex_map[v]).collect();
            let edge_map: Vec<Option<usize>> = source_edge.iter().map(|&e| m.edge_map[e]).collect();
            let contracted = edge_map.iter().enumerate().filter(|(_, x)| x.is_none()).map(|(e, _)| e).collect();
            StratumSpecialization {
                source: generic_base.clone(),
                target: m.target.clone(),
                contracted,
                vertex_map,
                edge_map,
            }
        })
        .collect();
    Ok(GenericFactorization { generic: SStructure { base: generic_base, maps }, factoring })
}

/// The stratification poset of Y for fixed genus and ordered parts.
///
/// Relations point from deeper strata to coarser ones: `a -> b` when a
/// specialization `a -> b` exists.
#[derive(Debug, Clone)]
pub struct StrataPoset {
    pub g: u32,
    pub parts: Vec<u32>,
    pub strata: Vec<ColoredStratum>,
    /// Covering relations (transitive reduction).
    pub covers: Vec<(usize, usize)>,
    /// `specializations[(a, b)]`: contracted edge sets of `a` realizing `a -> b`.
    pub specializations: BTreeMap<(usize, usize), Vec<BTreeSet<usize>>>,
    /// Maximal elements: Irr(Y).
    pub components: Vec<usize>,
    /// Membership in Strata(Y): the stratum admits a generic S_Z-structure
    /// for some nonempty set Z of components.
    pub in_strata_y: Vec<bool>,
    index: BTreeMap<String, usize>,
}

impl StrataPoset {
    pub fn build(g: u32, parts: &[u32]) -> Result<Self, StrataError> {
        let strata = enumerate_strata(g, parts, false)?;
        let index: BTreeMap<String, usize> =
            strata.iter().enumerate().map(|(i, s)| (s.canonical_form(), i)).collect();
        let mut specializations: BTreeMap<(usize, usize), Vec<BTreeSet<usize>>> = BTreeMap::new();
        for (a, s) in strata.iter().enumerate() {
            let ne = s.tree.num_edges();
            if ne > 64 {
                return Err(StrataError::TooManyEdges(ne));
            }
            for size in 1..=ne {
                for set in subsets_of_size(ne, size) {
                    let Ok(spec) = specialize(s, &set) else { continue };
                    if !spec.target.is_valid_stratum() {
                        continue;
                    }
                    let b = index[&spec.target.canonical_form()];
                    specializations.entry((a, b)).or_default().push(set);
                }
            }
        }
        let n = strata.len();
        let mut above = vec![BTreeSet::new(); n];
        for &(a, b) in specializations.keys() {
            above[a].insert(b);
        }
        let covers = specializations
            .keys()
            .copied()
            .filter(|&(a, b)| !above[a].iter().any(|&c| c != b && above[c].contains(&b)))
            .collect();
        let components: Vec<usize> = (0..n).filter(|&a| above[a].is_empty()).collect();
        let in_strata_y = (0..n)
            .map(|a| {
                if above[a].is_empty() {
                    return true;
                }
                let choices: Vec<Vec<u64>> = components
                    .iter()
                    .filter_map(|&c| specializations.get(&(a, c)))
                    .map(|sets| sets.iter().map(mask).collect())
                    .collect();
                let all = mask(&(0..strata[a].tree.num_edges()).collect());
                admits_empty_intersection(&choices, 0, all, false)
            })
            .collect();
        Ok(StrataPoset {
            g,
            parts: parts.to_vec(),
            strata,
            covers,
            specializations,
            components,
            in_strata_y,
            index,
        })
    }

    pub fn index_of(&self, stratum: &ColoredStratum) -> Option<usize> {
        self.index.get(&stratum.canonical_form()).copied()
    }

    /// Strict reachability `a -> b`.
    pub fn specializes(&self, a: usize, b: usize) -> bool {
        self.specializations.contains_key(&(a, b))
    }

    /// Components reachable from `a` (including `a` itself if maximal).
    pub fn components_above(&self, a: usize) -> Vec<usize> {
        self.components.iter().copied().filter(|&c| c == a || self.specializes(a, c)).collect()
    }

    pub fn is_component(&self, a: usize) -> bool {
        self.components.contains(&a)
    }

    /// Minimal elements (deepest strata).
    pub fn sources(&self) -> Vec<usize> {
        (0..self.strata.len())
            .filter(|&b| !self.specializations.keys().any(|&(_, y)| y == b))
            .collect()
    }

    /// Valid strata outside Strata(Y).
    pub fn strata_y_difference(&self) -> Vec<usize> {
        (0..self.strata.len()).filter(|&a| !self.in_strata_y[a]).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph strata {\n");
        for (i, s) in self.strata.iter().enumerate() {
            let shape = if self.is_component(i) { "doublecircle" } else { "circle" };
            out.push_str(&format!(
                "  s{i} [label=\"{}\", shape={shape}, strata_y={}];\n",
                s.canonical_form(),
                self.in_strata_y[i]
            ));
        }
        for &(a, b) in &self.covers {
            out.push_str(&format!("  s{a} -> s{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn mask(set: &BTreeSet<usize>) -> u64 {
    set.iter().fold(0u64, |m, &e| m | (1u64 << e))
}

fn admits_empty_intersection(choices: &[Vec<u64>], i: usize, acc: u64, chosen: bool) -> bool {
    if chosen && acc == 0 {
        return true;
    }
    if i == choices.len() {
        return false;
    }
    choices[i].iter().any(|&m| admits_empty_intersection(choices, i + 1, acc & m, true))
        || admits_empty_intersection(choices, i + 1, acc, chosen)
}

/// Strata with no outgoing specialization: the irreducible components.
pub fn irreducible_components(g: u32, parts: &[u32]) -> Result<Vec<ColoredStratum>, StrataError> {
    let poset = StrataPoset::build(g, parts)?;
    Ok(poset.components.iter().map(|&i| poset.strata[i].clone()).collect())
}

pub fn strata_poset(g: u32, parts: &[u32]) -> Result<StrataPoset, StrataError> {
    StrataPoset::build(g, parts)
}

/// The set of generic S-structures for the collection `members`, up to
/// isomorphism of structures.
pub fn fiber_product_decomposition(members: &[ColoredStratum]) -> Result<Vec<SStructure>, StrataError> {
    let Some(first) = members.first() else {
        return Ok(Vec::new());
    };
    FiberProductDecomposer::new(first.genus(), first.parts())?.decompose(members)
}

/// Decomposes many member collections at one `(g, parts)`, reusing the
/// strata list and the specializations into each member.
#[derive(Debug, Clone)]
pub struct FiberProductDecomposer {
    g: u32,
    parts: Vec<u32>,
    bases: Vec<ColoredStratum>,
    /// Per member seen so far: specializations into it from each base.
    into_member: Vec<(ColoredStratum, Vec<Vec<StratumSpecialization>>)>,
}

impl FiberProductDecomposer {
    pub fn new(g: u32, parts: &[u32]) -> Result<Self, StrataError> {
        Ok(FiberProductDecomposer {
            g,
            parts: parts.to_vec(),
            bases: enumerate_strata(g, parts, false)?,
            into_member: Vec::new(),
        })
    }

    pub fn decompose(&mut self, members: &[ColoredStratum]) -> Result<Vec<SStructure>, StrataError> {
        for m in members {
            if m.genus() != self.g || m.parts() != self.parts.as_slice() {
                return Err(StrataError::MixedParameters);
            }
            if let StratumValidity::Uncovered(e) = m.validity() {
                return Err(StrataError::NotAStratum(m.tree.edges()[e].id.clone()));
            }
        }
        let mut slots = Vec::with_capacity(members.len());
        for m in members {
            let slot = match self.into_member.iter().position(|(seen, _)| seen == m) {
                Some(i) => i,
                None => {
                    let maps = self.bases.iter().map(|b| specializations_between(b, m)).collect();
                    self.into_member.push((m.clone(), maps));
                    self.into_member.len() - 1
                }
            };
            slots.push(slot);
        }
        let mut found: BTreeMap<String, SStructure> = BTreeMap::new();
        for (i, base) in self.bases.iter().enumerate() {
            let options: Vec<&Vec<StratumSpecialization>> = slots.iter().map(|&k| &self.into_member[k].1[i]).collect();
            if options.iter().any(|o| o.is_empty()) {
                continue;
            }
            let mut pick = Vec::with_capacity(options.len());
            choose(&options, &mut pick, &mut |maps| {
                let structure = SStructure { base: base.clone(), maps: maps.to_vec() };
                if structure.is_generic() {
                    found.entry(structure.key()).or_insert(structure);
                }
            });
        }
        Ok(found.into_values().collect())
    }
}

fn choose<T: Clone>(options: &[&Vec<T>], pick: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
    if pick.len() == options.len() {
        visit(pick);
        return;
    }
    for o in options[pick.len()] {
        pick.push(o.clone());
        choose(options, pick, visit);
        pick.pop();
    }
}

impl fmt::Display for ColoredStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_form())
    }
}
