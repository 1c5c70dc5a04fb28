//! Synthetic test graphs.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Path `0 - 1 - ... - (k-1)`.
pub fn path(k: usize) -> Result<Graph> {
    if k == 0 {
        return Err(Error::EmptyGraph);
    }
    Graph::new(k, (1..k).map(|i| (i - 1, i)).collect())
}

pub fn cycle(k: usize) -> Result<Graph> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!("cycle needs at least 3 nodes, got {k}")));
    }
    Graph::new(k, (0..k).map(|i| (i, (i + 1) % k)).collect())
}

pub fn complete(k: usize) -> Result<Graph> {
    if k == 0 {
        return Err(Error::EmptyGraph);
    }
    Graph::new(k, clique_edges(0, k))
}

fn clique_edges(offset: usize, k: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            edges.push((offset + i, offset + j));
        }
    }
    edges
}

/// Two copies of `K_m` on nodes `0..m` and `m..2m`, joined by the single
/// bridge edge `(m-1, m)`.
pub fn barbell(m: usize) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("barbell cliques need at least 2 nodes, got {m}")));
    }
    let mut edges = clique_edges(0, m);
    edges.extend(clique_edges(m, m));
    edges.push((m - 1, m));
    Graph::new(2 * m, edges)
}

/// Complete binary tree of the given depth in heap order: node `i` has
/// children `2i+1` and `2i+2`. Depth 0 is a single node.
pub fn binary_tree(depth: u32) -> Result<Graph> {
    if depth > 20 {
        return Err(Error::InvalidArgument(format!("tree depth {depth} too large")));
    }
    let n = (1usize << (depth + 1)) - 1;
    Graph::new(n, (1..n).map(|i| ((i - 1) / 2, i)).collect())
}
