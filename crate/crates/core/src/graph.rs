//! Stable trees with half-edges: the dual graphs of compact-type curves.
//!
//! A [`StableTree`] stores vertices (with genus), half-edges (each attached to
//! a vertex) and edges (pairs of half-edges). Trees built through
//! [`TreeBuilder`] are checked against the stability and tree invariants; trees
//! assembled with [`StableTree::from_parts`] are not, so that [`validate`] can
//! report what is wrong with external input.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("invalid stable tree: {0}")]
    Invalid(ValidationReport),
    #[error("genus must be at least 1, got {0}")]
    GenusTooSmall(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: String,
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub id: String,
    pub vertex: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    pub halves: [usize; 2],
}

/// Genus-labeled tree in the half-edge model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StableTree {
    vertices: Vec<Vertex>,
    half_edges: Vec<HalfEdge>,
    edges: Vec<Edge>,
}

/// An edge together with a direction. The forward orientation runs from the
/// vertex of `halves[0]` to the vertex of `halves[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedEdge {
    pub edge: usize,
    pub reversed: bool,
}

impl OrientedEdge {
    pub fn forward(edge: usize) -> Self {
        OrientedEdge { edge, reversed: false }
    }

    pub fn reverse(self) -> Self {
        OrientedEdge { edge: self.edge, reversed: !self.reversed }
    }

    /// The half-edge at the source of this orientation.
    pub fn source_half(self, tree: &StableTree) -> usize {
        tree.edges[self.edge].halves[self.reversed as usize]
    }

    /// v(e).
    pub fn source(self, tree: &StableTree) -> usize {
        tree.half_edges[self.source_half(tree)].vertex
    }

    /// v(-e).
    pub fn target(self, tree: &StableTree) -> usize {
        self.reverse().source(tree)
    }

    /// Compact integer code, `2 * edge + reversed`.
    pub fn code(self) -> usize {
        2 * self.edge + self.reversed as usize
    }

    pub fn from_code(code: usize) -> Self {
        OrientedEdge { edge: code / 2, reversed: code % 2 == 1 }
    }

    /// Edge id, prefixed with `-` for the reversed orientation.
    pub fn label(self, tree: &StableTree) -> String {
        let id = &tree.edges[self.edge].id;
        if self.reversed {
            format!("-{id}")
        } else {
            id.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Violation {
    Empty,
    DuplicateVertexId(String),
    DuplicateEdgeId(String),
    DuplicateHalfEdgeId(String),
    DanglingHalfEdge { half_edge: String },
    DanglingEdge { edge: String },
    /// A half-edge used by zero or several edges.
    HalfEdgePairing { half_edge: String, uses: usize },
    SelfLoop { edge: String },
    MultiEdge { edge: String },
    Disconnected,
    Cycle,
    Unstable { vertex: String, genus: u32, valence: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "tree has no vertices"),
            Violation::DuplicateVertexId(id) => write!(f, "duplicate vertex id `{id}`"),
            Violation::DuplicateEdgeId(id) => write!(f, "duplicate edge id `{id}`"),
            Violation::DuplicateHalfEdgeId(id) => write!(f, "duplicate half-edge id `{id}`"),
            Violation::DanglingHalfEdge { half_edge } => {
                write!(f, "half-edge `{half_edge}` refers to a missing vertex")
            }
            Violation::DanglingEdge { edge } => {
                write!(f, "edge `{edge}` refers to a missing half-edge")
            }
            Violation::HalfEdgePairing { half_edge, uses } => {
                write!(f, "half-edge `{half_edge}` is used by {uses} edges")
            }
            Violation::SelfLoop { edge } => write!(f, "edge `{edge}` is a loop"),
            Violation::MultiEdge { edge } => write!(f, "edge `{edge}` duplicates another edge"),
            Violation::Disconnected => write!(f, "graph is disconnected"),
            Violation::Cycle => write!(f, "graph has a cycle"),
            Violation::Unstable { vertex, genus, valence } => write!(
                f,
                "vertex `{vertex}` is unstable: 2*{genus} - 2 + {valence} <= 0"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every invariant of a stable tree and reports all violations.
pub fn validate(tree: &StableTree) -> ValidationReport {
    let mut violations = Vec::new();
    let nv = tree.vertices.len();
    if nv == 0 {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    }
    let mut seen = BTreeSet::new();
    for v in &tree.vertices {
        if !seen.insert(v.id.as_str()) {
            violations.push(Violation::DuplicateVertexId(v.id.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for e in &tree.edges {
        if !seen.insert(e.id.as_str()) {
            violations.push(Violation::DuplicateEdgeId(e.id.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for h in &tree.half_edges {
        if !seen.insert(h.id.as_str()) {
            violations.push(Violation::DuplicateHalfEdgeId(h.id.clone()));
        }
        if h.vertex >= nv {
            violations.push(Violation::DanglingHalfEdge { half_edge: h.id.clone() });
        }
    }
    let mut uses = vec![0usize; tree.half_edges.len()];
    let mut structural = violations.is_empty();
    for e in &tree.edges {
        if e.halves.iter().any(|&h| h >= tree.half_edges.len()) {
            violations.push(Violation::DanglingEdge { edge: e.id.clone() });
            structural = false;
            continue;
        }
        for &h in &e.halves {
            uses[h] += 1;
        }
    }
    for (h, &count) in uses.iter().enumerate() {
        if count != 1 {
            violations.push(Violation::HalfEdgePairing {
                half_edge: tree.half_edges[h].id.clone(),
                uses: count,
            });
            structural = false;
        }
    }
    if !structural {
        return ValidationReport { violations };
    }

    let mut pairs = BTreeSet::new();
    for e in &tree.edges {
        let a = tree.half_edges[e.halves[0]].vertex;
        let b = tree.half_edges[e.halves[1]].vertex;
        if a == b {
            violations.push(Violation::SelfLoop { edge: e.id.clone() });
        } else if !pairs.insert((a.min(b), a.max(b))) {
            violations.push(Violation::MultiEdge { edge: e.id.clone() });
        }
    }
    let connected = {
        let adj = tree.adjacency();
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(_, w) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    if !connected {
        violations.push(Violation::Disconnected);
    }
    if tree.edges.len() + 1 != nv && connected {
        violations.push(Violation::Cycle);
    }
    // A lone vertex of positive genus is the smooth curve; the strict
    // inequality would reject it at genus 1.
    let smooth = nv == 1 && tree.vertices[0].genus >= 1;
    for (i, v) in tree.vertices.iter().enumerate() {
        let n = tree.valence(i);
        if !smooth && 2 * v.genus as i64 - 2 + n as i64 <= 0 {
            violations.push(Violation::Unstable { vertex: v.id.clone(), genus: v.genus, valence: n });
        }
    }
    ValidationReport { violations }
}

/// Incremental construction by ids. Half-edge ids are derived as
/// `"{edgeIndex}:0"` and `"{edgeIndex}:1"`.
#[derive(Debug, Clone, Default)]
pub struct TreeBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<(String, String, String)>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: impl Into<String>, genus: u32) -> Self {
        self.vertices.push(Vertex { id: id.into(), genus });
        self
    }

    pub fn edge(mut self, id: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Self {
        self.edges.push((id.into(), a.into(), b.into()));
        self
    }

    /// Assembles the tree without checking stability.
    pub fn build_unchecked(self) -> Result<StableTree, GraphError> {
        let index: BTreeMap<&str, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let mut half_edges = Vec::with_capacity(2 * self.edges.len());
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, (id, a, b)) in self.edges.iter().enumerate() {
            let ia = *index.get(a.as_str()).ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
            let ib = *index.get(b.as_str()).ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
            let h = half_edges.len();
            half_edges.push(HalfEdge { id: format!("{k}:0"), vertex: ia });
            half_edges.push(HalfEdge { id: format!("{k}:1"), vertex: ib });
            edges.push(Edge { id: id.clone(), halves: [h, h + 1] });
        }
        Ok(StableTree { vertices: self.vertices, half_edges, edges })
    }

    pub fn build(self) -> Result<StableTree, GraphError> {
        let tree = self.build_unchecked()?;
        let report = validate(&tree);
        if report.is_valid() {
            Ok(tree)
        } else {
            Err(GraphError::Invalid(report))
        }
    }
}

impl StableTree {
    /// Raw constructor; indices are not checked. Use [`validate`] afterwards.
    pub fn from_parts(vertices: Vec<Vertex>, half_edges: Vec<HalfEdge>, edges: Vec<Edge>) -> Self {
        StableTree { vertices, half_edges, edges }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn half_edges(&self) -> &[HalfEdge] {
        &self.half_edges
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn genus(&self, v: usize) -> u32 {
        self.vertices[v].genus
    }

    pub fn total_genus(&self) -> u32 {
        self.vertices.iter().map(|v| v.genus).sum()
    }

    /// n(v): number of half-edges at `v`.
    pub fn valence(&self, v: usize) -> usize {
        self.half_edges.iter().filter(|h| h.vertex == v).count()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let [a, b] = self.edges[e].halves;
        (self.half_edges[a].vertex, self.half_edges[b].vertex)
    }

    /// For each vertex, the list of `(edge, neighbor)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, _) in self.edges.iter().enumerate() {
            let (a, b) = self.endpoints(i);
            adj[a].push((i, b));
            adj[b].push((i, a));
        }
        adj
    }

    /// E_v: oriented edges with source `v`, ordered by edge index.
    pub fn outgoing(&self, v: usize) -> Vec<OrientedEdge> {
        let mut out = Vec::new();
        for i in 0..self.edges.len() {
            let (a, b) = self.endpoints(i);
            if a == v {
                out.push(OrientedEdge { edge: i, reversed: false });
            }
            if b == v {
                out.push(OrientedEdge { edge: i, reversed: true });
            }
        }
        out
    }

    /// The unique path from `from` to `to` as a sequence of oriented edges.
    pub fn path(&self, from: usize, to: usize) -> Vec<OrientedEdge> {
        let adj = self.adjacency();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &(e, w) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((e, u));
                    queue.push_back(w);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let (e, p) = parent[cur].expect("tree is connected");
            let oe = OrientedEdge::forward(e);
            path.push(if oe.source(self) == p { oe } else { oe.reverse() });
            cur = p;
        }
        path.reverse();
        path
    }

    /// Vertices along the path from `from` to `to`, endpoints included.
    pub fn path_vertices(&self, from: usize, to: usize) -> Vec<usize> {
        let mut out = vec![from];
        for oe in self.path(from, to) {
            out.push(oe.target(self));
        }
        out
    }

    pub fn distance(&self, from: usize, to: usize) -> usize {
        self.path(from, to).len()
    }

    /// Graphviz rendering with genus as vertex label.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{name}\" {{\n");
        for v in &self.vertices {
            out.push_str(&format!("  \"{}\" [label=\"{}\"];\n", v.id, v.genus));
        }
        for (i, e) in self.edges.iter().enumerate() {
            let (a, b) = self.endpoints(i);
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [label=\"{}\"];\n",
                self.vertices[a].id, self.vertices[b].id, e.id
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Same tree with vertices and edges renamed `v{i}` / `e{i}` in a
    /// canonical order determined by the given labels.
    pub fn relabel_canonically<L: fmt::Display>(&self, label: impl Fn(usize) -> L) -> (StableTree, Vec<usize>) {
        let (_, order) = canonical_labeling(self, label, |_| String::new());
        let mut new_of_old = vec![0usize; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_of_old[old] = new;
        }
        let mut edge_list: Vec<(usize, usize)> = (0..self.edges.len())
            .map(|i| {
                let (a, b) = self.endpoints(i);
                let (a, b) = (new_of_old[a], new_of_old[b]);
                (a.min(b), a.max(b))
            })
            .collect();
        edge_list.sort();
        let mut builder = TreeBuilder::new();
        for &old in &order {
            builder = builder.vertex(format!("v{}", new_of_old[old]), self.vertices[old].genus);
        }
        for (k, (a, b)) in edge_list.iter().enumerate() {
            builder = builder.edge(format!("e{k}"), format!("v{a}"), format!("v{b}"));
        }
        (builder.build_unchecked().expect("ids are consistent"), new_of_old)
    }
}

/// Result of contracting an edge subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contraction {
    pub source: StableTree,
    pub target: StableTree,
    /// Edge indices of `source` that were contracted.
    pub contracted: BTreeSet<usize>,
    /// f: V(source) -> V(target).
    pub vertex_map: Vec<usize>,
    /// Surviving source edges map to target edges; contracted ones to `None`.
    pub edge_map: Vec<Option<usize>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Contracts the edges with the given ids.
pub fn contract(tree: &StableTree, edge_ids: &[&str]) -> Result<Contraction, GraphError> {
    let mut set = BTreeSet::new();
    for id in edge_ids {
        set.insert(tree.edge_index(id).ok_or_else(|| GraphError::UnknownEdge(id.to_string()))?);
    }
    Ok(contract_indices(tree, &set))
}

/// Contracts an edge subset given by index. Merged vertices get the `+`-joined
/// ids of their fiber; surviving edges and half-edges keep their ids.
pub fn contract_indices(tree: &StableTree, edges: &BTreeSet<usize>) -> Contraction {
    let n = tree.vertices.len();
    let mut uf = UnionFind::new(n);
    for &e in edges {
        let (a, b) = tree.endpoints(e);
        uf.union(a, b);
    }
    let mut root_to_new = BTreeMap::new();
    let mut fibers: Vec<Vec<usize>> = Vec::new();
    let mut vertex_map = vec![0usize; n];
    for (v, slot) in vertex_map.iter_mut().enumerate() {
        let r = uf.find(v);
        let idx = *root_to_new.entry(r).or_insert_with(|| {
            fibers.push(Vec::new());
            fibers.len() - 1
        });
        fibers[idx].push(v);
        *slot = idx;
    }
    let vertices: Vec<Vertex> = fibers
        .iter()
        .map(|fiber| Vertex {
            id: fiber.iter().map(|&v| tree.vertices[v].id.as_str()).collect::<Vec<_>>().join("+"),
            genus: fiber.iter().map(|&v| tree.vertices[v].genus).sum(),
        })
        .collect();
    let mut half_edges = Vec::new();
    let mut new_edges = Vec::new();
    let mut edge_map = vec![None; tree.edges.len()];
    for (i, e) in tree.edges.iter().enumerate() {
        if edges.contains(&i) {
            continue;
        }
        let h = half_edges.len();
        for &old in &e.halves {
            let he = &tree.half_edges[old];
            half_edges.push(HalfEdge { id: he.id.clone(), vertex: vertex_map[he.vertex] });
        }
        edge_map[i] = Some(new_edges.len());
        new_edges.push(Edge { id: e.id.clone(), halves: [h, h + 1] });
    }
    Contraction {
        source: tree.clone(),
        target: StableTree { vertices, half_edges, edges: new_edges },
        contracted: edges.clone(),
        vertex_map,
        edge_map,
    }
}

/// Deterministic isomorphism-invariant encoding of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(pub String);

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical form of a genus-labeled tree.
pub fn canonical_form(tree: &StableTree) -> Result<CanonicalForm, GraphError> {
    let report = validate(tree);
    if !report.is_valid() {
        return Err(GraphError::Invalid(report));
    }
    Ok(CanonicalForm(canonical_labeling(tree, |v| tree.genus(v), |_| String::new()).0))
}

fn centroids(tree: &StableTree, adj: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let n = tree.num_vertices();
    if n <= 2 {
        return (0..n).collect();
    }
    // subtree sizes rooted at 0
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![usize::MAX; n];
    let mut stack = vec![0usize];
    parent[0] = 0;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &(_, w) in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                stack.push(w);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &u in order.iter().rev() {
        if u != 0 {
            size[parent[u]] += size[u];
        }
    }
    let mut best = usize::MAX;
    let mut out = Vec::new();
    for u in 0..n {
        let mut worst = n - size[u];
        for &(_, w) in &adj[u] {
            if w != 0 && parent[w] == u {
                worst = worst.max(size[w]);
            }
        }
        match worst.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = worst;
                out = vec![u];
            }
            std::cmp::Ordering::Equal => out.push(u),
            std::cmp::Ordering::Greater => {}
        }
    }
    out
}

fn rooted_code<L: fmt::Display, E: fmt::Display>(
    adj: &[Vec<(usize, usize)>],
    root: usize,
    label: &impl Fn(usize) -> L,
    edge_label: &impl Fn(usize) -> E,
) -> (String, Vec<usize>) {
    fn go<L: fmt::Display, E: fmt::Display>(
        adj: &[Vec<(usize, usize)>],
        u: usize,
        parent: usize,
        label: &impl Fn(usize) -> L,
        edge_label: &impl Fn(usize) -> E,
    ) -> (String, Vec<usize>) {
        let mut children: Vec<(String, Vec<usize>)> = adj[u]
            .iter()
            .filter(|&&(_, w)| w != parent)
            .map(|&(e, w)| {
                let (code, order) = go(adj, w, u, label, edge_label);
                (format!("<{}>{}", edge_label(e), code), order)
            })
            .collect();
        children.sort();
        let mut code = format!("{}(", label(u));
        let mut order = vec![u];
        for (i, (c, o)) in children.into_iter().enumerate() {
            if i > 0 {
                code.push(',');
            }
            code.push_str(&c);
            order.extend(o);
        }
        code.push(')');
        (code, order)
    }
    go(adj, root, usize::MAX, label, edge_label)
}

/// Centroid-rooted AHU encoding with arbitrary vertex and edge labels.
///
/// Returns the encoding together with a canonical vertex order: two trees
/// with equal encodings are isomorphic via `order_a[i] -> order_b[i]`.
pub fn canonical_labeling<L: fmt::Display, E: fmt::Display>(
    tree: &StableTree,
    label: impl Fn(usize) -> L,
    edge_label: impl Fn(usize) -> E,
) -> (String, Vec<usize>) {
    let adj = tree.adjacency();
    centroids(tree, &adj)
        .into_iter()
        .map(|c| rooted_code(&adj, c, &label, &edge_label))
        .min()
        .unwrap_or_default()
}

/// Vertex bijection `a -> b` preserving adjacency and labels, if one exists.
pub fn find_isomorphism<L: fmt::Display>(
    a: &StableTree,
    label_a: impl Fn(usize) -> L,
    b: &StableTree,
    label_b: impl Fn(usize) -> L,
) -> Option<Vec<usize>> {
    if a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges() {
        return None;
    }
    let (ca, oa) = canonical_labeling(a, label_a, |_| "");
    let (cb, ob) = canonical_labeling(b, label_b, |_| "");
    if ca != cb {
        return None;
    }
    let mut map = vec![0usize; oa.len()];
    for (x, y) in oa.into_iter().zip(ob) {
        map[x] = y;
    }
    Some(map)
}

/// Edge of `tree` joining `a` and `b`, if any.
pub fn edge_between(tree: &StableTree, a: usize, b: usize) -> Option<usize> {
    (0..tree.num_edges()).find(|&e| {
        let (x, y) = tree.endpoints(e);
        (x == a && y == b) || (x == b && y == a)
    })
}

/// Upper bound on the number of vertices of a stable tree of genus `g`.
///
/// Genus-0 vertices have valence at least 3 and every leaf has positive genus,
/// which forces `n0 <= n_pos - 2` and hence `|V| <= 2g - 2` once `g >= 2`.
pub fn max_vertices(g: u32) -> usize {
    if g <= 1 {
        1
    } else {
        (2 * g - 2) as usize
    }
}

/// Unlabeled trees on `n` vertices, as edge lists, up to isomorphism.
fn tree_shapes(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut level: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    level.insert(String::new(), Vec::new());
    for size in 1..n {
        let mut next = BTreeMap::new();
        for edges in level.values() {
            for attach in 0..size {
                let mut grown = edges.clone();
                grown.push((attach, size));
                let tree = shape_tree(size + 1, &grown);
                let (code, _) = canonical_labeling(&tree, |_| "", |_| "");
                next.entry(code).or_insert(grown);
            }
        }
        level = next;
    }
    level.into_values().collect()
}

fn shape_tree(n: usize, edges: &[(usize, usize)]) -> StableTree {
    let mut builder = TreeBuilder::new();
    for i in 0..n {
        builder = builder.vertex(format!("v{i}"), 0);
    }
    for (k, &(a, b)) in edges.iter().enumerate() {
        builder = builder.edge(format!("e{k}"), format!("v{a}"), format!("v{b}"));
    }
    builder.build_unchecked().expect("shape ids are consistent")
}

/// All stable trees of genus `g` up to isomorphism, sorted by canonical form.
/// Vertices are renamed `v0..` and edges `e0..` in canonical order.
pub fn enumerate_stable_trees(g: u32, max_vertices_bound: Option<usize>) -> Result<Vec<StableTree>, GraphError> {
    if g < 1 {
        return Err(GraphError::GenusTooSmall(g));
    }
    let bound = max_vertices(g).min(max_vertices_bound.unwrap_or(usize::MAX));
    let mut found: BTreeMap<String, StableTree> = BTreeMap::new();
    for n in 1..=bound {
        for shape in tree_shapes(n) {
            let base = shape_tree(n, &shape);
            let min_genus: Vec<u32> = (0..n).map(|v| if base.valence(v) <= 2 { 1 } else { 0 }).collect();
            let floor: u32 = min_genus.iter().sum();
            if floor > g {
                continue;
            }
            let mut genera = min_genus.clone();
            distribute(&mut genera, 0, g - floor, &mut |genera| {
                let mut tree = base.clone();
                for (v, &gv) in genera.iter().enumerate() {
                    tree.vertices[v].genus = gv;
                }
                let (code, _) = canonical_labeling(&tree, |v| tree.genus(v), |_| "");
                found.entry(code).or_insert_with(|| tree.relabel_canonically(|v| tree.genus(v)).0);
            });
        }
    }
    Ok(found.into_values().collect())
}

fn distribute(genera: &mut Vec<u32>, start: usize, remaining: u32, visit: &mut impl FnMut(&[u32])) {
    if start == genera.len() {
        if remaining == 0 {
            visit(genera);
        }
        return;
    }
    for extra in 0..=remaining {
        genera[start] += extra;
        distribute(genera, start + 1, remaining - extra, visit);
        genera[start] -= extra;
    }
}
