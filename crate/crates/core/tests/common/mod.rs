#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use torelli_core::graph::{StableTree, TreeBuilder};
use torelli_core::strata::{Coloring, ColoredStratum};

/// Labeled tree on `n` vertices from a Prüfer sequence of length `n - 2`.
pub fn prufer_edges(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    if n == 1 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Every Prüfer sequence of length `len` over `0..n`.
pub fn all_sequences(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..n).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn build(genera: &[u32], edges: &[(usize, usize)]) -> StableTree {
    let mut b = TreeBuilder::new();
    for (i, g) in genera.iter().enumerate() {
        b = b.vertex(format!("x{i}"), *g);
    }
    for (k, (a, c)) in edges.iter().enumerate() {
        b = b.edge(format!("d{k}"), format!("x{a}"), format!("x{c}"));
    }
    b.build_unchecked().unwrap()
}

/// Random stable tree with at most `max_n` vertices: a random Prüfer tree
/// with the smallest stable genera plus a random surplus.
pub fn random_tree(rng: &mut StdRng, max_n: usize) -> StableTree {
    let n = rng.gen_range(1..=max_n);
    let seq: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    let edges = prufer_edges(n, &seq);
    let mut valence = vec![0usize; n];
    for &(a, b) in &edges {
        valence[a] += 1;
        valence[b] += 1;
    }
    let genera: Vec<u32> = valence
        .iter()
        .map(|&d| {
            let base = match d {
                0 => 2,
                1 | 2 => 1,
                _ => 0,
            };
            base + if rng.gen_bool(0.3) { rng.gen_range(0..=2) } else { 0 }
        })
        .collect();
    build(&genera, &edges)
}

pub fn tree_from_seed(seed: u64, max_n: usize) -> StableTree {
    random_tree(&mut StdRng::seed_from_u64(seed), max_n)
}

/// Random coloring of the positive-genus vertices with up to `max_k`
/// colors; unused colors are dropped.
pub fn random_coloring(rng: &mut StdRng, tree: &StableTree, max_k: usize) -> ColoredStratum {
    let k = rng.gen_range(1..=max_k);
    let raw: Vec<Option<usize>> =
        (0..tree.num_vertices()).map(|v| (tree.genus(v) > 0).then(|| rng.gen_range(0..k))).collect();
    let used: Vec<usize> = (0..k).filter(|c| raw.contains(&Some(*c))).collect();
    let colors: Vec<Option<usize>> =
        raw.iter().map(|c| c.map(|c| used.iter().position(|&u| u == c).unwrap())).collect();
    let mut parts = vec![0u32; used.len()];
    for (v, c) in colors.iter().enumerate() {
        if let Some(c) = c {
            parts[*c] += tree.genus(v);
        }
    }
    let coloring = Coloring::new(tree, parts, colors).unwrap();
    ColoredStratum::new(tree.clone(), coloring).unwrap()
}

pub fn stratum_from_seed(seed: u64, max_n: usize, max_k: usize) -> ColoredStratum {
    let mut rng = StdRng::seed_from_u64(seed);
    let tree = random_tree(&mut rng, max_n);
    random_coloring(&mut rng, &tree, max_k)
}

/// Vertex path between `a` and `b` by exhaustive depth-first search.
pub fn dfs_path(tree: &StableTree, a: usize, b: usize) -> Vec<usize> {
    fn go(tree: &StableTree, cur: usize, goal: usize, seen: &mut Vec<usize>) -> bool {
        if cur == goal {
            return true;
        }
        for e in 0..tree.num_edges() {
            let (x, y) = tree.endpoints(e);
            let next = if x == cur { y } else if y == cur { x } else { continue };
            if seen.contains(&next) {
                continue;
            }
            seen.push(next);
            if go(tree, next, goal, seen) {
                return true;
            }
            seen.pop();
        }
        false
    }
    let mut seen = vec![a];
    assert!(go(tree, a, b, &mut seen));
    seen
}

pub fn edge_of(tree: &StableTree, a: usize, b: usize) -> usize {
    (0..tree.num_edges())
        .find(|&e| {
            let (x, y) = tree.endpoints(e);
            (x, y) == (a, b) || (x, y) == (b, a)
        })
        .unwrap()
}

/// Critical-path supports by scanning every vertex pair.
pub fn brute_critical_supports(s: &ColoredStratum) -> BTreeSet<BTreeSet<usize>> {
    let t = s.tree();
    let mut out = BTreeSet::new();
    for a in 0..t.num_vertices() {
        for b in 0..t.num_vertices() {
            let (Some(ca), Some(cb)) = (s.coloring().color(a), s.coloring().color(b)) else { continue };
            if a == b || ca == cb {
                continue;
            }
            let path = dfs_path(t, a, b);
            if path[1..path.len() - 1].iter().all(|&v| t.genus(v) == 0) {
                out.insert(path.windows(2).map(|w| edge_of(t, w[0], w[1])).collect());
            }
        }
    }
    out
}

pub fn all_subsets(n: usize) -> impl Iterator<Item = BTreeSet<usize>> {
    (0u64..1 << n).map(move |m| (0..n).filter(|i| m & (1 << i) != 0).collect())
}

/// Ordered tuples of positive parts summing to `g`.
pub fn compositions(g: u32) -> Vec<Vec<u32>> {
    if g == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=g {
        for mut rest in compositions(g - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Sorted tuples of positive parts summing to `g`.
pub fn partitions(g: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in min..=rest {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(g, 1, &mut Vec::new(), &mut out);
    out
}
