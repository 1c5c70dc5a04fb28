//! Forward-only GIN message passing with layers alternating between the
//! input graph and a size-matched Cayley overlay.
//!
//! A GIN layer computes `h_u = phi((1 + eps) x_u + sum_{v in N(u)} x_v)`,
//! where the sum runs over incident edges (parallel edges count once per
//! copy) and `phi` is `W2 relu(W1 x + b1) + b2`.
//!
//! Weights are drawn uniformly from `[-a, a]` with
//! `a = sqrt(6 / (fan_in + fan_out))`, biases start at zero, and all draws
//! come from a ChaCha8 stream seeded with the model seed, layer by layer.

use nalgebra::{DMatrix, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{overlay_for, SlicedAdjacency};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Node features, one row per node. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(DMatrix<f64>);

impl FeatureMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if let Some(x) = m.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("feature entry {x}")));
        }
        Ok(FeatureMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: r.len(),
            });
        }
        Self::new(DMatrix::from_fn(rows.len(), dim, |r, c| rows[r][c]))
    }

    /// Uniform `[-1, 1)` features from a seeded stream.
    pub fn random(num_nodes: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureMatrix(DMatrix::from_fn(num_nodes, dim, |_, _| rng.gen_range(-1.0..1.0)))
    }

    /// One-hot encoding of node degree, width `max_degree + 1`.
    pub fn degree_one_hot(g: &Graph) -> Self {
        let width = g.max_degree() + 1;
        FeatureMatrix(DMatrix::from_fn(g.num_nodes(), width, |r, c| {
            if g.degree(r) == c {
                1.0
            } else {
                0.0
            }
        }))
    }

    pub fn num_nodes(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Moves row `v` to row `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.num_nodes(),
                actual: perm.len(),
            });
        }
        let mut out = DMatrix::zeros(self.num_nodes(), self.dim());
        for (v, &p) in perm.iter().enumerate() {
            out.set_row(p, &self.0.row(v));
        }
        Ok(FeatureMatrix(out))
    }
}

/// `W2 relu(W1 x + b1) + b2`, applied row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerMlp {
    pub w1: DMatrix<f64>,
    pub b1: RowDVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: RowDVector<f64>,
}

impl TwoLayerMlp {
    pub fn seeded(in_dim: usize, hidden: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        TwoLayerMlp {
            w1: glorot(in_dim, hidden, rng),
            b1: RowDVector::zeros(hidden),
            w2: glorot(hidden, out_dim, rng),
            b2: RowDVector::zeros(out_dim),
        }
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = x * &self.w1;
        for mut row in z.row_iter_mut() {
            row += &self.b1;
            row.apply(|v| *v = v.max(0.0));
        }
        let mut out = z * &self.w2;
        for mut row in out.row_iter_mut() {
            row += &self.b2;
        }
        out
    }
}

fn glorot(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    DMatrix::from_fn(fan_in, fan_out, |_, _| rng.gen_range(-a..=a))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phi {
    Identity,
    Mlp(TwoLayerMlp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GinLayer {
    pub epsilon: f64,
    pub phi: Phi,
}

impl GinLayer {
    pub fn identity(epsilon: f64) -> Self {
        GinLayer {
            epsilon,
            phi: Phi::Identity,
        }
    }

    pub fn seeded(in_dim: usize, out_dim: usize, epsilon: f64, rng: &mut ChaCha8Rng) -> Self {
        GinLayer {
            epsilon,
            phi: Phi::Mlp(TwoLayerMlp::seeded(in_dim, out_dim, out_dim, rng)),
        }
    }

    /// Input width, or `None` for the identity map.
    pub fn in_dim(&self) -> Option<usize> {
        match &self.phi {
            Phi::Identity => None,
            Phi::Mlp(m) => Some(m.w1.nrows()),
        }
    }
}

pub fn gin_forward(layer: &GinLayer, x: &FeatureMatrix, adjacency: &Graph) -> Result<FeatureMatrix> {
    if adjacency.num_nodes() != x.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: x.num_nodes(),
            actual: adjacency.num_nodes(),
        });
    }
    if let Some(d) = layer.in_dim() {
        if d != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.dim(),
            });
        }
    }
    let xm = x.as_matrix();
    let mut agg = xm * (1.0 + layer.epsilon);
    for u in 0..x.num_nodes() {
        for &v in adjacency.neighbors(u) {
            let row = xm.row(v).clone_owned();
            let mut target = agg.row_mut(u);
            target += row;
        }
    }
    let out = match &layer.phi {
        Phi::Identity => agg,
        Phi::Mlp(m) => m.apply(&agg),
    };
    FeatureMatrix::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerTag {
    InputGraph,
    CayleyGraph,
}

/// Which graph the first of two alternating layers uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// Layer 1 on the input graph, layer 2 on the Cayley graph, and so on.
    InputFirst,
    /// Odd layers on the Cayley graph, even layers on the input graph.
    CayleyFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EgpSchedule {
    pub tags: Vec<LayerTag>,
}

impl EgpSchedule {
    pub fn alternating(layers: usize, parity: Parity) -> Self {
        let (odd, even) = match parity {
            Parity::InputFirst => (LayerTag::InputGraph, LayerTag::CayleyGraph),
            Parity::CayleyFirst => (LayerTag::CayleyGraph, LayerTag::InputGraph),
        };
        EgpSchedule {
            tags: (1..=layers).map(|t| if t % 2 == 1 { odd } else { even }).collect(),
        }
    }

    pub fn input_only(layers: usize) -> Self {
        EgpSchedule {
            tags: vec![LayerTag::InputGraph; layers],
        }
    }

    /// Parses a comma-separated list of `input` / `cayley`.
    pub fn parse_tags(s: &str) -> Result<Self> {
        let tags = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| match t {
                "input" | "i" => Ok(LayerTag::InputGraph),
                "cayley" | "c" => Ok(LayerTag::CayleyGraph),
                other => Err(Error::InvalidArgument(format!("unknown layer tag '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EgpSchedule { tags })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn uses_cayley(&self) -> bool {
        self.tags.contains(&LayerTag::CayleyGraph)
    }

    pub fn count(&self, tag: LayerTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EgpModel {
    pub schedule: EgpSchedule,
    pub layers: Vec<GinLayer>,
}

impl EgpModel {
    /// `dims[t]` is the input width of layer `t`; `dims` has one more entry
    /// than the schedule has layers.
    pub fn seeded(schedule: EgpSchedule, dims: &[usize], epsilon: f64, seed: u64) -> Result<Self> {
        if dims.len() != schedule.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: schedule.len() + 1,
                actual: dims.len(),
            });
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("layer widths must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|w| GinLayer::seeded(w[0], w[1], epsilon, &mut rng))
            .collect();
        Ok(EgpModel { schedule, layers })
    }

    pub fn forward(&self, x: &FeatureMatrix, input_graph: &Graph) -> Result<FeatureMatrix> {
        let overlay = if self.schedule.uses_cayley() {
            Some(overlay_for(input_graph.num_nodes())?)
        } else {
            None
        };
        self.forward_with_overlay(x, input_graph, overlay.as_ref())
    }

    /// Forward pass with a prebuilt overlay (node `i` of the input graph is
    /// node `i` of the overlay).
    pub fn forward_with_overlay(
        &self,
        x: &FeatureMatrix,
        input_graph: &Graph,
        overlay: Option<&SlicedAdjacency>,
    ) -> Result<FeatureMatrix> {
        if input_graph.num_nodes() == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut h = x.clone();
        for (layer, tag) in self.layers.iter().zip(&self.schedule.tags) {
            let adjacency = match tag {
                LayerTag::InputGraph => input_graph,
                LayerTag::CayleyGraph => {
                    let o = overlay.ok_or_else(|| {
                        Error::InvalidArgument("schedule needs a Cayley overlay".into())
                    })?;
                    if o.num_nodes() != input_graph.num_nodes() {
                        return Err(Error::DimensionMismatch {
                            expected: input_graph.num_nodes(),
                            actual: o.num_nodes(),
                        });
                    }
                    &o.graph
                }
            };
            h = gin_forward(layer, &h, adjacency)?;
        }
        Ok(h)
    }
}

/// `layers` alternating GIN layers (input graph first) of constant width,
/// with `eps = 0`.
pub fn egp_forward(x: &FeatureMatrix, input_graph: &Graph, layers: usize, seed: u64) -> Result<FeatureMatrix> {
    if layers == 0 {
        return Err(Error::InvalidArgument("need at least one layer".into()));
    }
    let dims = vec![x.dim(); layers + 1];
    EgpModel::seeded(EgpSchedule::alternating(layers, Parity::InputFirst), &dims, 0.0, seed)?
        .forward(x, input_graph)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub dim: usize,
    pub step: f64,
    pub seeds: Vec<u64>,
    pub epsilon: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            dim: 4,
            step: 1e-4,
            seeds: vec![0, 1, 2],
            epsilon: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    /// Mean over seeds of the Frobenius norm of `d h_target / d x_source`.
    pub influence: f64,
    /// Mean over seeds of that norm divided by the sum of the norms of
    /// `d h_target / d x_u` over every node `u`.
    pub relative_influence: f64,
    pub per_seed: Vec<(u64, f64, f64)>,
}

/// Central-difference Jacobian blocks `d h_target / d x_u` for every `u`,
/// returned as Frobenius norms.
fn jacobian_norms(
    model: &EgpModel,
    x: &FeatureMatrix,
    input_graph: &Graph,
    overlay: Option<&SlicedAdjacency>,
    target: usize,
    step: f64,
) -> Result<Vec<f64>> {
    let n = x.num_nodes();
    let mut norms = vec![0.0; n];
    for (u, norm) in norms.iter_mut().enumerate() {
        let mut sq = 0.0;
        for c in 0..x.dim() {
            let mut plus = x.as_matrix().clone();
            let mut minus = x.as_matrix().clone();
            plus[(u, c)] += step;
            minus[(u, c)] -= step;
            let hp = model.forward_with_overlay(&FeatureMatrix(plus), input_graph, overlay)?;
            let hm = model.forward_with_overlay(&FeatureMatrix(minus), input_graph, overlay)?;
            for k in 0..hp.dim() {
                let d = (hp.0[(target, k)] - hm.0[(target, k)]) / (2.0 * step);
                if !d.is_finite() {
                    return Err(Error::NonFinite("Jacobian entry".into()));
                }
                sq += d * d;
            }
        }
        *norm = sq.sqrt();
    }
    Ok(norms)
}

/// Influence of `source`'s input features on `target`'s output under a
/// seeded model with constant width `opts.dim`, averaged over `opts.seeds`.
/// Each seed draws both the weights and the input features.
pub fn sensitivity_probe(
    input_graph: &Graph,
    schedule: &EgpSchedule,
    source: usize,
    target: usize,
    opts: &ProbeOptions,
) -> Result<ProbeResult> {
    input_graph.check_node(source)?;
    input_graph.check_node(target)?;
    if opts.seeds.is_empty() {
        return Err(Error::InvalidArgument("probe needs at least one seed".into()));
    }
    let n = input_graph.num_nodes();
    let overlay = if schedule.uses_cayley() {
        Some(overlay_for(n)?)
    } else {
        None
    };
    let dims = vec![opts.dim; schedule.len() + 1];
    let mut per_seed = Vec::with_capacity(opts.seeds.len());
    for &seed in &opts.seeds {
        let model = EgpModel::seeded(schedule.clone(), &dims, opts.epsilon, seed)?;
        let x = FeatureMatrix::random(n, opts.dim, seed ^ 0x5eed_f00d);
        let norms = jacobian_norms(&model, &x, input_graph, overlay.as_ref(), target, opts.step)?;
        let total: f64 = norms.iter().sum();
        let relative = if total > 0.0 { norms[source] / total } else { 0.0 };
        per_seed.push((seed, norms[source], relative));
    }
    let k = per_seed.len() as f64;
    Ok(ProbeResult {
        influence: per_seed.iter().map(|p| p.1).sum::<f64>() / k,
        relative_influence: per_seed.iter().map(|p| p.2).sum::<f64>() / k,
        per_seed,
    })
}
