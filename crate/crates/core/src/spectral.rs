//! Laplacian spectra, Cheeger constant and conductance, diameter, and the
//! Mohar diameter bound.
//!
//! Everything counts edge multiplicity: `deg(v)` is the number of edge ends
//! at `v` and `|dA|` the number of edges (with repeats) leaving `A`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Graphs up to this size get a dense symmetric eigensolve in `Auto` mode.
pub const EXACT_EIGEN_LIMIT: usize = 3000;

/// Largest graph accepted by [`cheeger_exact`].
pub const CHEEGER_EXACT_LIMIT: usize = 24;

/// `Lf(v) = deg(v) f(v) - sum_{vw in E} f(w)`.
pub fn laplacian_apply(g: &Graph, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != g.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.num_nodes(),
            actual: f.len(),
        });
    }
    let mut out = vec![0.0; f.len()];
    g.adjacency_apply(f, &mut out);
    for (v, o) in out.iter_mut().enumerate() {
        *o = g.degree(v) as f64 * f[v] - *o;
    }
    Ok(out)
}

pub fn laplacian_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.num_nodes();
    let mut m = DMatrix::zeros(n, n);
    for v in 0..n {
        m[(v, v)] = g.degree(v) as f64;
        for &w in g.neighbors(v) {
            m[(v, w)] -= 1.0;
        }
    }
    m
}

/// `I - D^{-1/2} A D^{-1/2}`; isolated nodes get a zero row and column.
pub fn normalized_laplacian_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.num_nodes();
    let inv_sqrt: Vec<f64> = (0..n).map(|v| inv_sqrt_degree(g, v)).collect();
    let mut m = DMatrix::zeros(n, n);
    for v in 0..n {
        if g.degree(v) > 0 {
            m[(v, v)] = 1.0;
        }
        for &w in g.neighbors(v) {
            m[(v, w)] -= inv_sqrt[v] * inv_sqrt[w];
        }
    }
    m
}

fn inv_sqrt_degree(g: &Graph, v: usize) -> f64 {
    match g.degree(v) {
        0 => 0.0,
        d => 1.0 / (d as f64).sqrt(),
    }
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EigenMode {
    /// Dense symmetric eigensolve.
    Exact,
    /// Lanczos on the deflated operator, stopped when successive Ritz values
    /// differ by less than `tol` and the residual is below `tol`.
    Iterative { tol: f64, max_iter: usize },
    /// `Exact` up to [`EXACT_EIGEN_LIMIT`] nodes, else `Iterative` at 1e-10.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenGap {
    /// Smallest positive eigenvalue of the combinatorial Laplacian.
    pub lambda1: f64,
    /// Smallest positive eigenvalue of the normalized Laplacian.
    pub lambda1_normalized: f64,
}

pub fn eigen_gap(g: &Graph, mode: EigenMode) -> Result<EigenGap> {
    let n = g.num_nodes();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "spectral gap needs at least two nodes".into(),
        ));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mode = match mode {
        EigenMode::Auto if n <= EXACT_EIGEN_LIMIT => EigenMode::Exact,
        EigenMode::Auto => EigenMode::Iterative {
            tol: 1e-10,
            max_iter: n,
        },
        m => m,
    };

    let lambda1 = match mode {
        EigenMode::Exact => sorted_eigenvalues(laplacian_matrix(g))[1],
        EigenMode::Iterative { tol, max_iter } => {
            let ones = DVector::from_element(n, 1.0 / (n as f64).sqrt());
            lanczos_smallest(
                |x, y| {
                    let lx = laplacian_apply(g, x.as_slice()).expect("sized");
                    y.copy_from_slice(&lx);
                },
                &ones,
                tol,
                max_iter,
            )?
        }
        EigenMode::Auto => unreachable!(),
    };
    if lambda1 <= 1e-9 {
        return Err(Error::Disconnected);
    }

    // On a k-regular graph the normalized Laplacian is L / k.
    let lambda1_normalized = if let Some(k) = g.regular_degree() {
        lambda1 / k as f64
    } else {
        match mode {
            EigenMode::Exact => sorted_eigenvalues(normalized_laplacian_matrix(g))[1],
            EigenMode::Iterative { tol, max_iter } => {
                let total: f64 = (0..n).map(|v| g.degree(v) as f64).sum();
                let root_deg = DVector::from_fn(n, |v, _| (g.degree(v) as f64 / total).sqrt());
                let inv: Vec<f64> = (0..n).map(|v| inv_sqrt_degree(g, v)).collect();
                lanczos_smallest(
                    |x, y| {
                        let scaled: Vec<f64> = x.iter().zip(&inv).map(|(a, b)| a * b).collect();
                        let mut ax = vec![0.0; n];
                        g.adjacency_apply(&scaled, &mut ax);
                        for v in 0..n {
                            y[v] = x[v] - inv[v] * ax[v];
                        }
                    },
                    &root_deg,
                    tol,
                    max_iter,
                )?
            }
            EigenMode::Auto => unreachable!(),
        }
    };

    Ok(EigenGap {
        lambda1,
        lambda1_normalized,
    })
}

/// Smallest eigenvalue of a symmetric operator restricted to the orthogonal
/// complement of the unit vector `deflate`, by Lanczos with full
/// reorthogonalization from a fixed pseudo-random start.
pub fn lanczos_smallest<F>(apply: F, deflate: &DVector<f64>, tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(&DVector<f64>, &mut [f64]),
{
    let n = deflate.len();
    let dim = n.saturating_sub(1).max(1);
    let budget = max_iter.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_2a05);

    let mut v = DVector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5);
    v -= deflate * deflate.dot(&v);
    v /= v.norm();

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(budget);
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut prev_ritz = f64::INFINITY;
    let mut w = DVector::zeros(n);

    for j in 0..budget {
        apply(&v, w.as_mut_slice());
        let alpha = v.dot(&w);
        basis.push(v.clone());
        alphas.push(alpha);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            let c = deflate.dot(&w);
            w.axpy(-c, deflate, 1.0);
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let beta = w.norm();

        let k = j + 1;
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (idx, ritz) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        let residual = beta * eig.eigenvectors[(k - 1, idx)].abs();

        if beta <= 1e-13 || k == dim || ((ritz - prev_ritz).abs() < tol && residual < tol) {
            return Ok(ritz);
        }
        prev_ritz = ritz;
        betas.push(beta);
        v = &w / beta;
    }
    Err(Error::NoConvergence(budget))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutOptima {
    /// `h(G) = min |dA| / |A|` over `0 < |A| <= |V|/2`.
    pub cheeger: f64,
    /// `phi(G) = min |dA| / vol(A)` over `0 < vol(A) <= vol(V)/2`.
    pub conductance: f64,
}

/// Exhaustive minimisation of both cut ratios. The last node is held outside
/// `A`; since `dA = d(A^c)`, each unordered pair `{A, A^c}` is scored once
/// against the smaller side. Subsets are walked in Gray-code order so each
/// step touches one node.
pub fn cut_optima_exact(g: &Graph) -> Result<CutOptima> {
    let n = g.num_nodes();
    if n > CHEEGER_EXACT_LIMIT {
        return Err(Error::TooLarge {
            num_nodes: n,
            limit: CHEEGER_EXACT_LIMIT,
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument("cut ratios need at least two nodes".into()));
    }
    let deg: Vec<i64> = (0..n).map(|v| g.degree(v) as i64).collect();
    let total_vol: i64 = deg.iter().sum();

    let mut inside = vec![false; n];
    let mut links = vec![0i64; n]; // edges from v into A
    let (mut size, mut vol, mut boundary) = (0i64, 0i64, 0i64);
    let mut cheeger = f64::INFINITY;
    let mut conductance = f64::INFINITY;

    for i in 1u64..(1u64 << (n - 1)) {
        let v = i.trailing_zeros() as usize;
        if inside[v] {
            for &u in g.neighbors(v) {
                links[u] -= 1;
            }
            boundary -= deg[v] - 2 * links[v];
            size -= 1;
            vol -= deg[v];
        } else {
            boundary += deg[v] - 2 * links[v];
            for &u in g.neighbors(v) {
                links[u] += 1;
            }
            size += 1;
            vol += deg[v];
        }
        inside[v] = !inside[v];

        let small = size.min(n as i64 - size);
        cheeger = cheeger.min(boundary as f64 / small as f64);
        let small_vol = vol.min(total_vol - vol);
        if small_vol > 0 {
            conductance = conductance.min(boundary as f64 / small_vol as f64);
        }
    }
    Ok(CutOptima {
        cheeger,
        conductance,
    })
}

pub fn cheeger_exact(g: &Graph) -> Result<f64> {
    cut_optima_exact(g).map(|c| c.cheeger)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConductanceBound {
    /// `sqrt(2 lambda'_1)`, an upper bound on the conductance.
    pub conductance_upper: f64,
    /// `max_degree * sqrt(2 lambda'_1)`, an upper bound on the Cheeger
    /// constant via `h(G) <= phi(G) * max_degree`.
    pub cheeger_upper: f64,
}

pub fn conductance_bound(g: &Graph, gap: &EigenGap) -> ConductanceBound {
    let conductance_upper = (2.0 * gap.lambda1_normalized).sqrt();
    ConductanceBound {
        conductance_upper,
        cheeger_upper: g.max_degree() as f64 * conductance_upper,
    }
}

/// `2 * ceil((max_degree + lambda1) / (4 lambda1) * ln(|V| - 1))`.
///
/// The expression vanishes at `|V| = 2`; it is raised to 1 there, the
/// diameter of any connected two-node graph.
pub fn mohar_bound(max_degree: usize, lambda1: f64, num_nodes: usize) -> usize {
    if num_nodes < 2 {
        return 0;
    }
    let scale = (max_degree as f64 + lambda1) / (4.0 * lambda1);
    let raw = 2 * (scale * ((num_nodes - 1) as f64).ln()).ceil() as usize;
    raw.max(1)
}

pub fn diameter_and_mohar(g: &Graph, gap: &EigenGap) -> Result<(usize, usize)> {
    let diameter = g.diameter().ok_or(Error::Disconnected)?;
    Ok((diameter, mohar_bound(g.max_degree(), gap.lambda1, g.num_nodes())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub lambda1: f64,
    pub lambda1_normalized: f64,
    pub cheeger_exact: Option<f64>,
    pub conductance_exact: Option<f64>,
    /// `lambda1 / 2`.
    pub cheeger_lower: f64,
    /// `max_degree * sqrt(2 lambda'_1)`.
    pub cheeger_upper: f64,
    /// `sqrt(2 lambda'_1)`.
    pub conductance_upper: f64,
    pub diameter: usize,
    pub mohar_bound: usize,
    pub max_degree: usize,
    pub log_base: String,
}

impl SpectralReport {
    /// All internal inequalities hold.
    pub fn is_consistent(&self) -> bool {
        let tol = 1e-9;
        let cheeger_ok = self
            .cheeger_exact
            .is_none_or(|h| self.cheeger_lower <= h + tol && h <= self.cheeger_upper + tol);
        let conductance_ok = self
            .conductance_exact
            .is_none_or(|p| p <= self.conductance_upper + tol);
        self.diameter <= self.mohar_bound && cheeger_ok && conductance_ok
    }
}

/// Full report; exact cut ratios are included when the graph is small enough.
pub fn analyze(g: &Graph, mode: EigenMode) -> Result<SpectralReport> {
    let gap = eigen_gap(g, mode)?;
    let bound = conductance_bound(g, &gap);
    let (diameter, mohar) = diameter_and_mohar(g, &gap)?;
    let cuts = if g.num_nodes() <= CHEEGER_EXACT_LIMIT {
        Some(cut_optima_exact(g)?)
    } else {
        None
    };
    Ok(SpectralReport {
        num_nodes: g.num_nodes(),
        num_edges: g.num_edges(),
        lambda1: gap.lambda1,
        lambda1_normalized: gap.lambda1_normalized,
        cheeger_exact: cuts.map(|c| c.cheeger),
        conductance_exact: cuts.map(|c| c.conductance),
        cheeger_lower: gap.lambda1 / 2.0,
        cheeger_upper: bound.cheeger_upper,
        conductance_upper: bound.conductance_upper,
        diameter,
        mohar_bound: mohar,
        max_degree: g.max_degree(),
        log_base: "e".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn k2() -> Graph {
        Graph::new(2, vec![(0, 1)]).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let c4 = generators::cycle(4).unwrap();
        assert_eq!(laplacian_apply(&c4, &[1.0; 4]).unwrap(), vec![0.0; 4]);
        assert_eq!(laplacian_apply(&k2(), &[1.0, -1.0]).unwrap(), vec![2.0, -2.0]);
        assert_eq!(
            laplacian_apply(&c4, &[1.0, 0.0, -1.0, 0.0]).unwrap(),
            vec![2.0, 0.0, -2.0, 0.0]
        );
        assert!(matches!(
            laplacian_apply(&c4, &[1.0]),
            Err(Error::DimensionMismatch { expected: 4, actual: 1 })
        ));
    }

    #[test]
    fn laplacian_counts_multiplicity() {
        let g = Graph::new(2, vec![(0, 1), (0, 1)]).unwrap();
        assert_eq!(laplacian_apply(&g, &[1.0, 0.0]).unwrap(), vec![2.0, -2.0]);
    }

    #[test]
    fn gap_examples() {
        let gap = eigen_gap(&k2(), EigenMode::Exact).unwrap();
        assert!((gap.lambda1 - 2.0).abs() < 1e-12);
        assert!((gap.lambda1_normalized - 2.0).abs() < 1e-12);

        let c4 = generators::cycle(4).unwrap();
        let ev = sorted_eigenvalues(laplacian_matrix(&c4));
        for (a, b) in ev.iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let gap = eigen_gap(&c4, EigenMode::Exact).unwrap();
        assert!((gap.lambda1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn iterative_matches_exact_on_irregular_graphs() {
        let tol = 1e-10;
        for g in [
            generators::path(9).unwrap(),
            generators::barbell(5).unwrap(),
            generators::binary_tree(3).unwrap(),
        ] {
            let exact = eigen_gap(&g, EigenMode::Exact).unwrap();
            let iter = eigen_gap(&g, EigenMode::Iterative { tol, max_iter: 500 }).unwrap();
            assert!((exact.lambda1 - iter.lambda1).abs() < 10.0 * tol);
            assert!((exact.lambda1_normalized - iter.lambda1_normalized).abs() < 10.0 * tol);
        }
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert!(matches!(eigen_gap(&g, EigenMode::Exact), Err(Error::Disconnected)));
        let single = Graph::new(1, vec![]).unwrap();
        assert!(eigen_gap(&single, EigenMode::Exact).is_err());
    }

    #[test]
    fn cheeger_examples() {
        assert_eq!(cheeger_exact(&k2()).unwrap(), 1.0);
        let p6 = generators::path(6).unwrap();
        assert!((cheeger_exact(&p6).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let big = generators::path(25).unwrap();
        assert!(matches!(cheeger_exact(&big), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn tree_cheeger_is_inverse_half_size() {
        for n in 2..=16 {
            let p = generators::path(n).unwrap();
            let h = cheeger_exact(&p).unwrap();
            assert!((h - 1.0 / (n / 2) as f64).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn conductance_sandwich_on_k2_and_path() {
        let gap = eigen_gap(&k2(), EigenMode::Exact).unwrap();
        let b = conductance_bound(&k2(), &gap);
        assert!((b.conductance_upper - 2.0).abs() < 1e-12);
        let phi = cut_optima_exact(&k2()).unwrap().conductance;
        assert_eq!(phi, 1.0);

        let p6 = generators::path(6).unwrap();
        let gap = eigen_gap(&p6, EigenMode::Exact).unwrap();
        let phi = cut_optima_exact(&p6).unwrap().conductance;
        // middle edge: 1 / vol({0,1,2}) = 1/5
        assert!((phi - 0.2).abs() < 1e-15);
        assert!(phi <= conductance_bound(&p6, &gap).conductance_upper);
        assert!(gap.lambda1_normalized / 2.0 <= phi);
    }

    #[test]
    fn mohar_examples() {
        let gap = eigen_gap(&k2(), EigenMode::Exact).unwrap();
        assert_eq!(diameter_and_mohar(&k2(), &gap).unwrap(), (1, 1));
        // 4-cycle: 2 * ceil((2 + 2) / 8 * ln 3) = 2
        let c4 = generators::cycle(4).unwrap();
        let gap = eigen_gap(&c4, EigenMode::Exact).unwrap();
        assert_eq!(diameter_and_mohar(&c4, &gap).unwrap(), (2, 2));
    }

    #[test]
    fn report_serializes_with_field_names() {
        let r = analyze(&generators::path(6).unwrap(), EigenMode::Exact).unwrap();
        assert!(r.is_consistent());
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in [
            "lambda1",
            "lambda1_normalized",
            "cheeger_exact",
            "cheeger_lower",
            "cheeger_upper",
            "conductance_upper",
            "diameter",
            "mohar_bound",
            "max_degree",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!((r.cheeger_exact.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }
}
