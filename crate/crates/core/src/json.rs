//! JSON interchange for trees, strata, ideals and posets.
//!
//! Trees: `{"vertices":[{"id","genus"}],"edges":[["a","b"]],"edgeIds":[..]}`.
//! `edgeIds` is optional on input and defaults to `f1, f2, ...`. Strata add
//! `"coloring"` (vertex id to 1-based color, positive-genus vertices only),
//! `"parts"` and optionally `"nodePositions"` (oriented edge label to a
//! rational written as `"p/q"`).
//!
//! Output goes through [`canonical_string`]: sorted keys, no whitespace.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{GraphError, StableTree, TreeBuilder};
use crate::ideal::{IdealError, MonomialIdeal, SquareFreeIdeal};
use crate::plumbing::poly::format_rational;
use crate::plumbing::NodePositions;
use crate::strata::{Coloring, ColoredStratum, StrataError, StrataPoset};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error("edgeIds has {ids} entries for {edges} edges")]
    EdgeIdCount { ids: usize, edges: usize },
    #[error("not a rational number: `{0}`")]
    BadRational(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: String,
    genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct TreeDoc {
    vertices: Vec<VertexDoc>,
    edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_ids: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct StratumDoc {
    vertices: Vec<VertexDoc>,
    edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_ids: Option<Vec<String>>,
    coloring: BTreeMap<String, usize>,
    parts: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    node_positions: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct IdealDoc {
    vars: Vec<String>,
    gens: Vec<Vec<String>>,
    dim_x: i64,
}

/// A stratum read from a file, with the node positions it carried.
#[derive(Debug, Clone)]
pub struct StratumFile {
    pub stratum: ColoredStratum,
    pub positions: NodePositions,
}

/// Sorted keys, no insignificant whitespace.
pub fn canonical_string(value: &Value) -> String {
    // serde_json's default map is ordered, so serialization is canonical.
    value.to_string()
}

fn tree_doc(tree: &StableTree) -> TreeDoc {
    let vertices = tree.vertices().iter().map(|v| VertexDoc { id: v.id.clone(), genus: v.genus }).collect();
    let edges = (0..tree.num_edges())
        .map(|e| {
            let (a, b) = tree.endpoints(e);
            [tree.vertices()[a].id.clone(), tree.vertices()[b].id.clone()]
        })
        .collect();
    let edge_ids = Some(tree.edges().iter().map(|e| e.id.clone()).collect());
    TreeDoc { vertices, edges, edge_ids }
}

fn build_tree(vertices: &[VertexDoc], edges: &[[String; 2]], ids: Option<&Vec<String>>) -> Result<StableTree, JsonError> {
    if let Some(ids) = ids {
        if ids.len() != edges.len() {
            return Err(JsonError::EdgeIdCount { ids: ids.len(), edges: edges.len() });
        }
    }
    let mut builder = TreeBuilder::new();
    for v in vertices {
        builder = builder.vertex(v.id.clone(), v.genus);
    }
    for (i, [a, b]) in edges.iter().enumerate() {
        let id = ids.map_or_else(|| format!("f{}", i + 1), |ids| ids[i].clone());
        builder = builder.edge(id, a.clone(), b.clone());
    }
    Ok(builder.build()?)
}

pub fn tree_to_json(tree: &StableTree) -> Value {
    serde_json::to_value(tree_doc(tree)).expect("tree documents serialize")
}

/// Parses and validates a stable tree.
pub fn tree_from_json(text: &str) -> Result<StableTree, JsonError> {
    let doc: TreeDoc = serde_json::from_str(text)?;
    build_tree(&doc.vertices, &doc.edges, doc.edge_ids.as_ref())
}

pub fn stratum_to_json(stratum: &ColoredStratum) -> Value {
    stratum_to_json_with_positions(stratum, None)
}

pub fn stratum_to_json_with_positions(stratum: &ColoredStratum, positions: Option<&NodePositions>) -> Value {
    let tree = stratum.tree();
    let TreeDoc { vertices, edges, edge_ids } = tree_doc(tree);
    let coloring = (0..tree.num_vertices())
        .filter_map(|v| stratum.coloring().color(v).map(|c| (tree.vertices()[v].id.clone(), c + 1)))
        .collect();
    let node_positions = positions
        .filter(|p| p.iter().next().is_some())
        .map(|p| p.iter().map(|(k, q)| (k.clone(), format_rational(q))).collect());
    let doc = StratumDoc { vertices, edges, edge_ids, coloring, parts: stratum.parts().to_vec(), node_positions };
    serde_json::to_value(doc).expect("stratum documents serialize")
}

/// Parses a colored tree. Validity as a stratum (every edge on a critical
/// path) is not required here.
pub fn stratum_from_json(text: &str) -> Result<StratumFile, JsonError> {
    let doc: StratumDoc = serde_json::from_str(text)?;
    let tree = build_tree(&doc.vertices, &doc.edges, doc.edge_ids.as_ref())?;
    let coloring = Coloring::from_ids(&tree, doc.parts, &doc.coloring)?;
    let mut positions = NodePositions::new();
    for (label, q) in doc.node_positions.unwrap_or_default() {
        let value = BigRational::from_str(q.trim()).map_err(|_| JsonError::BadRational(q.clone()))?;
        positions.set(label, value);
    }
    Ok(StratumFile { stratum: ColoredStratum::new(tree, coloring)?, positions })
}

pub fn ideal_to_json(ideal: &SquareFreeIdeal) -> Value {
    let doc = IdealDoc { vars: ideal.vars().to_vec(), gens: ideal.generator_names(), dim_x: ideal.dim_x() };
    serde_json::to_value(doc).expect("ideal documents serialize")
}

/// Reads `{"vars","gens","dimX"}`; a variable repeated inside a generator
/// raises its exponent.
pub fn ideal_from_json(text: &str) -> Result<MonomialIdeal, JsonError> {
    let doc: IdealDoc = serde_json::from_str(text)?;
    Ok(MonomialIdeal::from_names(doc.vars, &doc.gens, doc.dim_x)?)
}

/// Nodes carry the stratum document and the component and Strata(Y) flags.
/// `covers` lists `[from, to]` pairs of the transitive reduction.
pub fn poset_to_json(poset: &StrataPoset) -> Value {
    let nodes: Vec<Value> = poset
        .strata
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "index": i,
                "canonical": s.canonical_form(),
                "component": poset.is_component(i),
                "inStrataY": poset.in_strata_y[i],
                "stratum": stratum_to_json(s),
            })
        })
        .collect();
    let covers: Vec<Value> = poset.covers.iter().map(|&(a, b)| json!([a, b])).collect();
    json!({
        "g": poset.g,
        "parts": poset.parts,
        "nodes": nodes,
        "covers": covers,
        "components": poset.components,
    })
}
