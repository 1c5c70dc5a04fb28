//! Breadth-first construction of Cay(SL(2, Z_n); S_n), prefix slicing, and
//! size selection.
//!
//! Node 0 is the identity. Nodes are numbered in BFS discovery order, where
//! each dequeued node expands its neighbors in generator slot order
//! `s1, s2, s1^-1, s2^-1`. Every node with a positive index therefore has a
//! neighbor with a smaller index, so every prefix of the numbering induces a
//! connected subgraph.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::modular_group::{group_order, inverse_slot, GeneratorSet, ModMatrix, NUM_GENERATORS};

/// A directed, generator-labelled arc `source -> source * s_slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub source: usize,
    pub target: usize,
    pub slot: usize,
}

#[derive(Debug, Clone)]
pub struct CayleyGraph {
    n: u32,
    elements: Vec<ModMatrix>,
    index_of: HashMap<ModMatrix, usize>,
    /// `out[v][s]` is the index of `elements[v] * s`.
    out: Vec<[usize; NUM_GENERATORS]>,
}

/// Builds the Cayley graph of SL(2, Z_n) with respect to `S_n`.
pub fn build_cayley(n: u32) -> Result<CayleyGraph> {
    let gens = GeneratorSet::new(n)?;
    let identity = ModMatrix::identity(n)?;

    let mut elements = vec![identity];
    let mut index_of = HashMap::from([(identity, 0usize)]);
    let mut out = Vec::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(v) = queue.pop_front() {
        let g = elements[v];
        let mut row = [0usize; NUM_GENERATORS];
        for (slot, s) in gens.iter().enumerate() {
            let h = g.mul_unchecked(s);
            let next = elements.len();
            let idx = *index_of.entry(h).or_insert_with(|| {
                elements.push(h);
                queue.push_back(next);
                next
            });
            assert_ne!(idx, v, "self-loop in Cayley graph for n = {n}");
            row[slot] = idx;
        }
        // BFS dequeues in index order, so `out` stays aligned with `elements`.
        debug_assert_eq!(out.len(), v);
        out.push(row);
    }

    debug_assert_eq!(elements.len() as u64, group_order(n as u64)?);
    Ok(CayleyGraph {
        n,
        elements,
        index_of,
        out,
    })
}

impl CayleyGraph {
    pub fn modulus(&self) -> u32 {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, v: usize) -> &ModMatrix {
        &self.elements[v]
    }

    pub fn index_of(&self, g: &ModMatrix) -> Option<usize> {
        self.index_of.get(g).copied()
    }

    /// Index of `element(v) * s_slot`.
    pub fn step(&self, v: usize, slot: usize) -> usize {
        self.out[v][slot]
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize; NUM_GENERATORS] {
        &self.out[v]
    }

    /// All `4 |V|` labelled arcs, grouped by source in slot order.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.out.iter().enumerate().flat_map(|(source, row)| {
            row.iter().enumerate().map(move |(slot, &target)| Arc {
                source,
                target,
                slot,
            })
        })
    }

    /// Undirected edges: the arc `(u, s)` and its reverse `(u*s, s^-1)` merge
    /// into one edge, so only slots `s1` and `s2` are emitted. For n = 2 this
    /// keeps the doubled edges between `g` and `g*s`.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        self.arcs()
            .filter(|a| a.slot < inverse_slot(a.slot))
            .map(|a| (a.source, a.target))
            .collect()
    }

    pub fn to_graph(&self) -> Graph {
        Graph::new(self.num_nodes(), self.undirected_edges())
            .expect("Cayley edges are in range and loop-free")
    }

    /// Induced sub-multigraph on BFS indices `0..target_nodes`.
    pub fn slice(&self, target_nodes: usize) -> Result<SlicedAdjacency> {
        if target_nodes == 0 || target_nodes > self.num_nodes() {
            return Err(Error::SliceOutOfRange {
                requested: target_nodes,
                available: self.num_nodes(),
            });
        }
        let edges = self
            .undirected_edges()
            .into_iter()
            .filter(|&(u, v)| u < target_nodes && v < target_nodes)
            .collect();
        Ok(SlicedAdjacency {
            source_n: self.n,
            graph: Graph::new(target_nodes, edges)?,
        })
    }

    /// Smallest prefix size whose induced subgraph is disconnected, if any.
    /// Adds nodes one at a time to a union-find over the prefix.
    pub fn first_disconnected_prefix(&self) -> Option<usize> {
        let mut parent: Vec<usize> = (0..self.num_nodes()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = 0usize;
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); self.num_nodes()];
        for (u, v) in self.undirected_edges() {
            let (lo, hi) = (u.min(v), u.max(v));
            incoming[hi].push(lo);
        }
        for (k, below) in incoming.iter().enumerate() {
            components += 1;
            for &j in below {
                let (a, b) = (find(&mut parent, k), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                    components -= 1;
                }
            }
            if components != 1 {
                return Some(k + 1);
            }
        }
        None
    }
}

/// The BFS-prefix subgraph of a Cayley graph, used as the overlay for an
/// input graph with `num_nodes` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicedAdjacency {
    pub source_n: u32,
    pub graph: Graph,
}

impl SlicedAdjacency {
    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }
}

/// Smallest `n >= 2` with `|SL(2, Z_n)| >= target_nodes`. The group order is
/// not monotone in `n`, so every modulus is checked in turn.
pub fn select_n(target_nodes: u64) -> u64 {
    let limit = target_nodes.saturating_pow(3).saturating_add(1).max(2);
    (2..=limit)
        .find(|&n| group_order(n).is_ok_and(|o| o >= target_nodes))
        .expect("group_order(n) >= n^3 / 2, so the scan terminates")
}

/// Cayley overlay for an input graph with `num_nodes` nodes.
pub fn overlay_for(num_nodes: usize) -> Result<SlicedAdjacency> {
    if num_nodes == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = select_n(num_nodes as u64);
    build_cayley(n as u32)?.slice(num_nodes)
}
