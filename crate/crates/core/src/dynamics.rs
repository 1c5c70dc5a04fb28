//! Lazy random walk and mixing time.
//!
//! The walk stays put with probability 1/2 and otherwise moves along a
//! uniformly chosen incident edge. On a k-regular graph this is the matrix
//! `(1/2) I + (1/2k) A` with the uniform distribution as its fixed point; on
//! other graphs the fixed point is proportional to degree.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::sorted_eigenvalues;

/// Mixing threshold on the l1 deviation.
pub const MIXING_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy)]
pub struct WalkOperator<'g> {
    graph: &'g Graph,
    regular_degree: Option<usize>,
}

impl<'g> WalkOperator<'g> {
    pub fn new(graph: &'g Graph) -> Result<Self> {
        if graph.num_nodes() == 0 {
            return Err(Error::EmptyGraph);
        }
        if (0..graph.num_nodes()).any(|v| graph.degree(v) == 0) && graph.num_nodes() > 1 {
            return Err(Error::InvalidArgument("isolated node: walk undefined".into()));
        }
        Ok(WalkOperator {
            graph,
            regular_degree: graph.regular_degree(),
        })
    }

    pub fn regular_degree(&self) -> Option<usize> {
        self.regular_degree
    }

    /// Fixed point of the walk: uniform on regular graphs, otherwise
    /// proportional to degree.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.graph.num_nodes();
        match self.regular_degree {
            Some(_) => vec![1.0 / n as f64; n],
            None => {
                let vol: f64 = (0..n).map(|v| self.graph.degree(v) as f64).sum();
                (0..n).map(|v| self.graph.degree(v) as f64 / vol).collect()
            }
        }
    }

    fn apply_into(&self, pi: &[f64], out: &mut [f64]) {
        let g = self.graph;
        if g.num_nodes() == 1 {
            out[0] = pi[0];
            return;
        }
        for (v, o) in out.iter_mut().enumerate() {
            let inflow: f64 = g
                .neighbors(v)
                .iter()
                .map(|&u| pi[u] / g.degree(u) as f64)
                .sum();
            *o = 0.5 * pi[v] + 0.5 * inflow;
        }
    }

    /// One step `M pi`. `pi` must be non-negative and sum to 1 within 1e-10.
    pub fn step(&self, pi: &[f64]) -> Result<Vec<f64>> {
        let n = self.graph.num_nodes();
        if pi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: pi.len(),
            });
        }
        if let Some(x) = pi.iter().find(|x| **x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!("entry {x}")));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        let mut out = vec![0.0; n];
        self.apply_into(pi, &mut out);
        Ok(out)
    }

    /// Dense column-stochastic matrix of the operator.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.graph.num_nodes();
        DMatrix::from_fn(n, n, |r, c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            let mut out = vec![0.0; n];
            self.apply_into(&e, &mut out);
            out[r]
        })
    }

    /// Transition probabilities `P[u][v]`, the transpose of [`Self::matrix`];
    /// row-stochastic.
    pub fn transition_matrix(&self) -> DMatrix<f64> {
        self.matrix().transpose()
    }

    /// Eigenvalues `1 = mu_0 >= mu_1 >= ...`, via the symmetrization
    /// `D^{-1/2} M D^{1/2}`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let g = self.graph;
        let n = g.num_nodes();
        let m = self.matrix();
        let root: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
        let sym = DMatrix::from_fn(n, n, |r, c| m[(r, c)] * root[c] / root[r]);
        let sym = (&sym + sym.transpose()) * 0.5;
        let mut ev = sorted_eigenvalues(sym);
        ev.reverse();
        ev
    }

    /// Second-largest eigenvalue `mu_1`.
    pub fn second_eigenvalue(&self) -> Result<f64> {
        self.eigenvalues()
            .get(1)
            .copied()
            .ok_or_else(|| Error::InvalidArgument("need at least two nodes".into()))
    }
}

pub fn walk_step(w: &WalkOperator<'_>, pi: &[f64]) -> Result<Vec<f64>> {
    w.step(pi)
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Starts {
    /// Point mass at every vertex. By convexity of the l1 deviation this is
    /// the worst case over all starting distributions.
    AllVertices,
    /// Point masses at the listed vertices only.
    Vertices(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingOptions {
    pub starts: Starts,
    /// Reject non-regular graphs. When false, deviation is measured against
    /// the degree-proportional stationary distribution instead.
    pub strict: bool,
    /// Step cap; `None` means `10 |V|`.
    pub max_steps: Option<usize>,
}

impl Default for MixingOptions {
    fn default() -> Self {
        MixingOptions {
            starts: Starts::AllVertices,
            strict: true,
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingResult {
    pub mixing_time: usize,
    pub worst_start_deviation: f64,
    /// `(step, max over starts of ||M^step pi - stationary||_1)`, from step 0.
    pub trajectory: Vec<(usize, f64)>,
    pub stationary: String,
}

impl MixingResult {
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("step,deviation\n");
        for (s, d) in &self.trajectory {
            out.push_str(&format!("{s},{d}\n"));
        }
        out
    }
}

/// First step at which every start is within l1 distance 1/4 of the
/// stationary distribution. All starts advance in lockstep.
pub fn mixing_time(g: &Graph, opts: &MixingOptions) -> Result<MixingResult> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let walk = WalkOperator::new(g)?;
    if opts.strict && walk.regular_degree().is_none() {
        return Err(Error::NotRegular);
    }
    let n = g.num_nodes();
    let cap = opts.max_steps.unwrap_or(10 * n);
    let stationary = walk.stationary();
    let sources: Vec<usize> = match &opts.starts {
        Starts::AllVertices => (0..n).collect(),
        Starts::Vertices(v) => {
            for &s in v {
                g.check_node(s)?;
            }
            v.clone()
        }
    };
    if sources.is_empty() {
        return Err(Error::InvalidArgument("no starting vertices".into()));
    }

    let mut dists: Vec<Vec<f64>> = sources
        .iter()
        .map(|&s| {
            let mut e = vec![0.0; n];
            e[s] = 1.0;
            e
        })
        .collect();
    let mut scratch: Vec<Vec<f64>> = vec![vec![0.0; n]; sources.len()];
    let mut trajectory = Vec::new();

    for step in 0..=cap {
        let worst = dists
            .par_iter()
            .map(|d| l1(d, &stationary))
            .reduce(|| 0.0, f64::max);
        trajectory.push((step, worst));
        if worst <= MIXING_THRESHOLD {
            return Ok(MixingResult {
                mixing_time: step,
                worst_start_deviation: worst,
                trajectory,
                stationary: if walk.regular_degree().is_some() { "uniform" } else { "degree" }.into(),
            });
        }
        dists
            .par_iter()
            .zip(scratch.par_iter_mut())
            .for_each(|(d, out)| walk.apply_into(d, out));
        std::mem::swap(&mut dists, &mut scratch);
    }
    Err(Error::NoConvergence(cap))
}
