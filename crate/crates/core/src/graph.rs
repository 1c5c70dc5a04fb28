//! Undirected multigraph over dense node indices.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marker for unreachable nodes in distance vectors.
pub const UNREACHABLE: usize = usize::MAX;

/// Undirected multigraph. Parallel edges are kept; degrees and neighbor lists
/// count multiplicity. Self-loops are rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        Graph::new(r.num_nodes, r.edges)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            num_nodes: g.num_nodes,
            edges: g.edges,
        }
    }
}

impl Graph {
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= num_nodes {
                    return Err(Error::NodeOutOfRange {
                        index: w,
                        num_nodes,
                    });
                }
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            num_nodes,
            edges,
            adjacency,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge list in insertion order, with repeats for parallel edges.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list with multiplicity.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Sorted neighbor list without repeats.
    pub fn distinct_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = self.adjacency[v].clone();
        out.dedup();
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// `Some(k)` when every node has degree `k`.
    pub fn regular_degree(&self) -> Option<usize> {
        let k = self.adjacency.first()?.len();
        self.adjacency.iter().all(|a| a.len() == k).then_some(k)
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        let list = &self.adjacency[u];
        let lo = list.partition_point(|&w| w < v);
        let hi = list.partition_point(|&w| w <= v);
        hi - lo
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes && v < self.num_nodes && self.multiplicity(u, v) > 0
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.num_nodes {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: v,
                num_nodes: self.num_nodes,
            })
        }
    }

    /// Hop distances from `source`; [`UNREACHABLE`] where no path exists.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        self.bfs_distances_bounded(source, UNREACHABLE)
    }

    /// Hop distances from `source`, exploring no further than `radius`.
    pub fn bfs_distances_bounded(&self, source: usize, radius: usize) -> Vec<usize> {
        self.multi_source_distances(&[source], radius)
    }

    pub fn multi_source_distances(&self, sources: &[usize], radius: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.num_nodes];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == UNREACHABLE {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            if dist[u] >= radius {
                continue;
            }
            for &w in &self.adjacency[u] {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.num_nodes == 0 {
            return true;
        }
        self.bfs_distances(0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Largest shortest-path distance, by BFS from every node.
    /// `None` for disconnected graphs.
    pub fn diameter(&self) -> Option<usize> {
        (0..self.num_nodes)
            .into_par_iter()
            .map(|s| {
                let d = self.bfs_distances(s);
                if d.contains(&UNREACHABLE) {
                    None
                } else {
                    Some(d.into_iter().max().unwrap_or(0))
                }
            })
            .try_reduce(|| 0, |a, b| Some(a.max(b)))
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.num_nodes {
            return Err(Error::DimensionMismatch {
                expected: self.num_nodes,
                actual: perm.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        Graph::new(self.num_nodes, edges)
    }

    /// Edge multiset in canonical form (`u <= v`, sorted), for comparisons.
    pub fn canonical_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Sparse `y = A x` with multiplicity.
    pub(crate) fn adjacency_apply(&self, x: &[f64], y: &mut [f64]) {
        for (v, out) in y.iter_mut().enumerate() {
            *out = self.adjacency[v].iter().map(|&w| x[w]).sum();
        }
    }
}
