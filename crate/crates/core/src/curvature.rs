//! Per-edge balanced Forman and Ollivier curvature.
//!
//! Balanced Forman curvature of an edge `i ~ j` with `d_i, d_j > 1`
//! (degrees in the underlying simple graph):
//!
//! ```text
//! Ric(i,j) = 2/d_i + 2/d_j - 2
//!          + 2 T / max(d_i,d_j) + T / min(d_i,d_j)
//!          + (|Q_i| + |Q_j|) / (gamma_max * max(d_i,d_j))      [if gamma_max > 0]
//! ```
//!
//! where `T` is the number of triangles on the edge, `Q_i` the neighbors `k`
//! of `i` (not `j`, not adjacent to `j`) that close a 4-cycle `i ~ j ~ w ~ k`
//! with `w` not adjacent to `i`, and `gamma_max` the largest number of such
//! 4-cycles passing through a common node `k`. Edges with an endpoint of
//! degree 1 have curvature 0. Parallel edges collapse for this measure.
//!
//! Ollivier curvature uses lazy one-step measures: `m_x` keeps mass
//! `idleness` at `x` and spreads the rest over incident edges, counting
//! multiplicity. Then `kappa(u,v) = 1 - W1(m_u, m_v)` for adjacent `u, v`,
//! with `W1` solved exactly over hop distances. With idleness 1/2 this
//! reproduces `kappa = -1/2` on 4-regular graphs that are locally tree-like.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, UNREACHABLE};
use crate::transport::min_cost_transport;

pub const DEFAULT_IDLENESS: f64 = 0.5;

fn require_edge(g: &Graph, u: usize, v: usize) -> Result<()> {
    g.check_node(u)?;
    g.check_node(v)?;
    if g.has_edge(u, v) {
        Ok(())
    } else {
        Err(Error::EdgeNotFound(u, v))
    }
}

fn contains(sorted: &[usize], x: usize) -> bool {
    sorted.binary_search(&x).is_ok()
}

/// 4-cycle witnesses `w` for the path `i ~ k` on edge `i ~ j`: common
/// neighbors of `k` and `j` that are neither `i` nor adjacent to `i`.
fn square_witnesses(nk: &[usize], nj: &[usize], ni: &[usize], i: usize) -> usize {
    nk.iter()
        .filter(|&&w| w != i && contains(nj, w) && !contains(ni, w))
        .count()
}

pub fn balanced_forman(g: &Graph, u: usize, v: usize) -> Result<f64> {
    require_edge(g, u, v)?;
    let nu = g.distinct_neighbors(u);
    let nv = g.distinct_neighbors(v);
    let (du, dv) = (nu.len() as f64, nv.len() as f64);
    if nu.len() <= 1 || nv.len() <= 1 {
        return Ok(0.0);
    }
    let (dmax, dmin) = (du.max(dv), du.min(dv));

    let triangles = nu.iter().filter(|&&k| contains(&nv, k)).count() as f64;

    let mut squares = 0usize;
    let mut gamma_max = 0usize;
    for (a, na, b, nb) in [(u, &nu, v, &nv), (v, &nv, u, &nu)] {
        for &k in na.iter() {
            if k == b || contains(nb, k) {
                continue;
            }
            let nk = g.distinct_neighbors(k);
            let w = square_witnesses(&nk, nb, na, a);
            if w > 0 {
                squares += 1;
                gamma_max = gamma_max.max(w);
            }
        }
    }

    let mut ric = 2.0 / du + 2.0 / dv - 2.0 + 2.0 * triangles / dmax + triangles / dmin;
    if gamma_max > 0 {
        ric += squares as f64 / (gamma_max as f64 * dmax);
    }
    Ok(ric)
}

/// Lazy one-step measure at `x` as `(node, mass)` pairs, sorted by node.
fn lazy_measure(g: &Graph, x: usize, idleness: f64) -> Vec<(usize, f64)> {
    let share = (1.0 - idleness) / g.degree(x) as f64;
    let mut out: Vec<(usize, f64)> = vec![(x, idleness)];
    for &y in g.neighbors(x) {
        match out.iter_mut().find(|(n, _)| *n == y) {
            Some(entry) => entry.1 += share,
            None => out.push((y, share)),
        }
    }
    out.sort_by_key(|&(n, _)| n);
    out
}

pub fn ollivier(g: &Graph, u: usize, v: usize, idleness: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&idleness) {
        return Err(Error::InvalidIdleness(idleness));
    }
    require_edge(g, u, v)?;
    let mu = lazy_measure(g, u, idleness);
    let mv = lazy_measure(g, v, idleness);
    // supports sit within one hop of adjacent endpoints, so radius 3 suffices
    let cost: Vec<Vec<f64>> = mu
        .iter()
        .map(|&(x, _)| {
            let d = g.bfs_distances_bounded(x, 3);
            mv.iter()
                .map(|&(y, _)| {
                    debug_assert_ne!(d[y], UNREACHABLE);
                    d[y] as f64
                })
                .collect()
        })
        .collect();
    let supply: Vec<f64> = mu.iter().map(|p| p.1).collect();
    let demand: Vec<f64> = mv.iter().map(|p| p.1).collect();
    let w1 = min_cost_transport(&supply, &demand, &cost)?;
    Ok(1.0 - w1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCurvature {
    pub u: usize,
    pub v: usize,
    pub balanced_forman: f64,
    pub ollivier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Summary {
        let count = values.clone().count().max(1) as f64;
        Summary {
            min: values.clone().fold(f64::INFINITY, f64::min),
            max: values.clone().fold(f64::NEG_INFINITY, f64::max),
            mean: values.sum::<f64>() / count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub idleness: f64,
    pub per_edge: Vec<EdgeCurvature>,
    pub balanced_forman: Summary,
    pub ollivier: Summary,
}

impl CurvatureReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,forman,ollivier\n");
        for e in &self.per_edge {
            out.push_str(&format!("{},{},{},{}\n", e.u, e.v, e.balanced_forman, e.ollivier));
        }
        out
    }
}

/// Curvatures of every distinct edge, in order of first appearance.
pub fn curvature_report(g: &Graph, idleness: f64) -> Result<CurvatureReport> {
    if !(0.0..1.0).contains(&idleness) {
        return Err(Error::InvalidIdleness(idleness));
    }
    let mut seen = std::collections::HashSet::new();
    let pairs: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter(|&&(u, v)| seen.insert((u.min(v), u.max(v))))
        .copied()
        .collect();
    let per_edge = pairs
        .par_iter()
        .map(|&(u, v)| {
            Ok(EdgeCurvature {
                u,
                v,
                balanced_forman: balanced_forman(g, u, v)?,
                ollivier: ollivier(g, u, v, idleness)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurvatureReport {
        idleness,
        balanced_forman: Summary::of(per_edge.iter().map(|e| e.balanced_forman)),
        ollivier: Summary::of(per_edge.iter().map(|e| e.ollivier)),
        per_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build_cayley;
    use crate::generators;

    #[test]
    fn cayley_examples() {
        let cases = [(2, 0.0, 0.0), (3, -0.25, -0.125), (5, -1.0, -0.375), (6, -1.0, -0.5)];
        for (n, bf, ol) in cases {
            let g = build_cayley(n).unwrap().to_graph();
            let (u, v) = g.edges()[0];
            assert!((balanced_forman(&g, u, v).unwrap() - bf).abs() < 1e-12, "n={n}");
            assert!((ollivier(&g, u, v, 0.5).unwrap() - ol).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn tree_like_regular_edge_reduces_to_degree_term() {
        // No triangles or 4-cycles: 4/d - 2 on a d-regular graph.
        let c7 = generators::cycle(7).unwrap();
        assert!((balanced_forman(&c7, 0, 1).unwrap() - (4.0 / 2.0 - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn triangle_and_leaf_cases() {
        // K3: 2/2 + 2/2 - 2 + 2/2 + 1/2 = 3/2
        let k3 = generators::complete(3).unwrap();
        assert!((balanced_forman(&k3, 0, 1).unwrap() - 1.5).abs() < 1e-15);
        let p3 = generators::path(3).unwrap();
        assert_eq!(balanced_forman(&p3, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn four_cycle_counts_squares() {
        // C4: d = 2, one square on each side, gamma_max = 1:
        // 1 + 1 - 2 + (1 + 1) / (1 * 2) = 1
        let c4 = generators::cycle(4).unwrap();
        assert!((balanced_forman(&c4, 0, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ollivier_on_small_graphs() {
        // K2 lazy: both measures are (1/2, 1/2) over {0, 1}
        let k2 = generators::path(2).unwrap();
        assert!((ollivier(&k2, 0, 1, 0.5).unwrap() - 1.0).abs() < 1e-15);
        // cycles of length >= 6 are flat under the lazy walk
        let c8 = generators::cycle(8).unwrap();
        assert!(ollivier(&c8, 0, 1, 0.5).unwrap().abs() < 1e-12);
        // zero idleness on a tree-like 4-regular graph gives -1
        let g7 = build_cayley(7).unwrap().to_graph();
        assert!((ollivier(&g7, 0, 1, 0.0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let p = generators::path(4).unwrap();
        assert!(matches!(balanced_forman(&p, 0, 2), Err(Error::EdgeNotFound(0, 2))));
        assert!(matches!(ollivier(&p, 0, 1, 1.0), Err(Error::InvalidIdleness(_))));
        assert!(matches!(ollivier(&p, 0, 9, 0.5), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn symmetric_in_orientation() {
        let g = generators::barbell(4).unwrap();
        for &(u, v) in g.edges() {
            assert_eq!(balanced_forman(&g, u, v).unwrap(), balanced_forman(&g, v, u).unwrap());
            let (a, b) = (ollivier(&g, u, v, 0.5).unwrap(), ollivier(&g, v, u, 0.5).unwrap());
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn report_and_csv() {
        let g = build_cayley(2).unwrap().to_graph();
        let r = curvature_report(&g, 0.5).unwrap();
        // parallel edges collapse to 6 distinct pairs
        assert_eq!(r.per_edge.len(), 6);
        assert_eq!(r.balanced_forman.max, 0.0);
        let csv = r.to_csv();
        assert!(csv.starts_with("u,v,forman,ollivier\n"));
        assert_eq!(csv.lines().count(), 7);
    }
}
