//! Generator-labelled balls in Cayley graphs and their comparison.
//!
//! A ball is grown by BFS from one center (a vertex) or two (the endpoints
//! of an edge), expanding generator slots in order. Each ball vertex keeps
//! the first shortest generator word that reached it, and the ball keeps
//! every labelled arc between its vertices.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use num_bigint::BigInt;

use crate::cayley::CayleyGraph;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::modular_group::{inverse_slot, operator_norm_generator, NUM_GENERATORS};

/// Largest radius accepted by [`infinite_ball`]; the ball holds roughly
/// `2 * 3^r` vertices.
pub const INFINITE_BALL_MAX_RADIUS: usize = 12;

/// Anything that can be walked by right-multiplying with generator slots.
pub trait GeneratorWalk {
    type Node: Clone + Eq + Hash;

    fn step(&self, node: &Self::Node, slot: usize) -> Self::Node;
}

impl GeneratorWalk for CayleyGraph {
    type Node = usize;

    fn step(&self, node: &usize, slot: usize) -> usize {
        CayleyGraph::step(self, *node, slot)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallVertex {
    /// Generator slots from the first center to this vertex.
    pub word: Vec<u8>,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledBall {
    pub radius: usize,
    pub alphabet: usize,
    /// Ball indices of the centers: `[0]` for a vertex ball, `[0, 1]` for an
    /// edge ball.
    pub centers: Vec<usize>,
    /// Generator slot of the center edge, for edge balls.
    pub center_slot: Option<usize>,
    pub vertices: Vec<BallVertex>,
    /// `arcs[x][s]` is the ball index of `x * s` when that vertex is in the ball.
    pub arcs: Vec<[Option<usize>; NUM_GENERATORS]>,
}

impl LabelledBall {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.iter().flatten().flatten().count()
    }

    /// Vertex count at each exact distance `0..=radius` from the centers.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.radius + 1];
        for v in &self.vertices {
            out[v.distance] += 1;
        }
        out
    }

    /// Undirected multigraph view: each arc pair `(x, s)` / `(x*s, s^-1)`
    /// becomes one edge.
    pub fn to_graph(&self) -> Graph {
        let edges = self
            .arcs
            .iter()
            .enumerate()
            .flat_map(|(x, row)| {
                row.iter().enumerate().filter_map(move |(s, t)| {
                    t.filter(|_| s < inverse_slot(s)).map(|t| (x, t))
                })
            })
            .collect();
        Graph::new(self.num_vertices(), edges).expect("ball arcs are in range and loop-free")
    }
}

/// Ball of the given radius around `centers`, which must be listed with the
/// second (if any) equal to `centers[0] * center_slot`.
pub fn grow_ball<W: GeneratorWalk>(
    walk: &W,
    centers: &[W::Node],
    center_slot: Option<usize>,
    radius: usize,
) -> LabelledBall {
    let mut index: HashMap<W::Node, usize> = HashMap::new();
    let mut nodes: Vec<W::Node> = Vec::new();
    let mut vertices: Vec<BallVertex> = Vec::new();
    let mut queue = VecDeque::new();

    for (i, c) in centers.iter().enumerate() {
        if index.contains_key(c) {
            continue;
        }
        let word = match (i, center_slot) {
            (0, _) | (_, None) => Vec::new(),
            (_, Some(s)) => vec![s as u8],
        };
        index.insert(c.clone(), nodes.len());
        queue.push_back(nodes.len());
        nodes.push(c.clone());
        vertices.push(BallVertex { word, distance: 0 });
    }

    while let Some(x) = queue.pop_front() {
        if vertices[x].distance >= radius {
            continue;
        }
        for s in 0..NUM_GENERATORS {
            let y = walk.step(&nodes[x], s);
            if !index.contains_key(&y) {
                let mut word = vertices[x].word.clone();
                word.push(s as u8);
                index.insert(y.clone(), nodes.len());
                queue.push_back(nodes.len());
                nodes.push(y);
                vertices.push(BallVertex {
                    word,
                    distance: vertices[x].distance + 1,
                });
            }
        }
    }

    let arcs = nodes
        .iter()
        .map(|x| {
            let mut row = [None; NUM_GENERATORS];
            for (s, slot) in row.iter_mut().enumerate() {
                *slot = index.get(&walk.step(x, s)).copied();
            }
            row
        })
        .collect();

    LabelledBall {
        radius,
        alphabet: NUM_GENERATORS,
        centers: (0..centers.len().min(nodes.len())).collect(),
        center_slot,
        vertices,
        arcs,
    }
}

/// Nodes within `hops` of either endpoint of the edge `(u, v)`, with labels.
pub fn neighborhood(g: &CayleyGraph, u: usize, v: usize, hops: usize) -> Result<LabelledBall> {
    for x in [u, v] {
        if x >= g.num_nodes() {
            return Err(Error::NodeOutOfRange {
                index: x,
                num_nodes: g.num_nodes(),
            });
        }
    }
    let slot = (0..NUM_GENERATORS)
        .find(|&s| g.step(u, s) == v)
        .ok_or(Error::EdgeNotFound(u, v))?;
    Ok(grow_ball(g, &[u, v], Some(slot), hops))
}

/// Nodes within `radius` of vertex `v`.
pub fn vertex_ball(g: &CayleyGraph, v: usize, radius: usize) -> Result<LabelledBall> {
    if v >= g.num_nodes() {
        return Err(Error::NodeOutOfRange {
            index: v,
            num_nodes: g.num_nodes(),
        });
    }
    Ok(grow_ball(g, &[v], None, radius))
}

/// Whether the label-respecting map anchored at the centers is a bijection
/// that carries every labelled arc of one ball onto an arc of the other.
///
/// Starting from the paired centers, each arc `x --s--> y` in the first ball
/// must be matched by `f(x) --s--> f(y)` in the second. Because each vertex
/// has at most one out-arc per slot, the map is forced, so this runs in
/// linear time.
pub fn labelled_isomorphic(b1: &LabelledBall, b2: &LabelledBall) -> Result<bool> {
    if b1.alphabet != b2.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    if b1.num_vertices() != b2.num_vertices()
        || b1.centers.len() != b2.centers.len()
        || b1.center_slot != b2.center_slot
    {
        return Ok(false);
    }
    let n = b1.num_vertices();
    let mut forward = vec![usize::MAX; n];
    let mut backward = vec![usize::MAX; n];
    let mut queue = VecDeque::new();

    for (&c1, &c2) in b1.centers.iter().zip(&b2.centers) {
        if !pair(&mut forward, &mut backward, c1, c2, &mut queue) {
            return Ok(false);
        }
    }
    while let Some(x) = queue.pop_front() {
        let y = forward[x];
        for s in 0..b1.alphabet {
            match (b1.arcs[x][s], b2.arcs[y][s]) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    if !pair(&mut forward, &mut backward, a, b, &mut queue) {
                        return Ok(false);
                    }
                }
                _ => return Ok(false),
            }
        }
    }
    Ok(forward.iter().all(|&f| f != usize::MAX))
}

/// Extends the partial bijection with `x -> y`, or checks it is already there.
fn pair(
    forward: &mut [usize],
    backward: &mut [usize],
    x: usize,
    y: usize,
    queue: &mut VecDeque<usize>,
) -> bool {
    match (forward[x], backward[y]) {
        (usize::MAX, usize::MAX) => {
            forward[x] = y;
            backward[y] = x;
            queue.push_back(x);
            true
        }
        (fx, _) => fx == y,
    }
}

/// Largest integer `r` with `r < ln(n - 1) / (2 ln((1 + sqrt 5) / 2))`,
/// floored at 0. Up to this radius the identity ball of `G_n` matches the
/// identity ball of the Cayley graph of SL(2, Z).
pub fn tree_like_radius(n: u64) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidModulus(n));
    }
    let bound = ((n - 1) as f64).ln() / (2.0 * operator_norm_generator().ln());
    Ok((bound.ceil() - 1.0).max(0.0) as usize)
}

/// SL(2, Z) with the generators `s1, s2, s1^-1, s2^-1`, in exact arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct InfiniteModularGroup;

/// Row-major `[[a, b], [c, d]]` over the integers.
pub type IntMatrix = [BigInt; 4];

impl InfiniteModularGroup {
    pub fn identity() -> IntMatrix {
        [1.into(), 0.into(), 0.into(), 1.into()]
    }

    fn generator(slot: usize) -> [i64; 4] {
        match slot {
            0 => [1, 1, 0, 1],
            1 => [1, 0, 1, 1],
            2 => [1, -1, 0, 1],
            3 => [1, 0, -1, 1],
            _ => unreachable!("generator slot {slot}"),
        }
    }
}

impl GeneratorWalk for InfiniteModularGroup {
    type Node = IntMatrix;

    fn step(&self, m: &IntMatrix, slot: usize) -> IntMatrix {
        let [e, f, g, h] = Self::generator(slot);
        let [a, b, c, d] = m;
        [
            a * e + b * g,
            a * f + b * h,
            c * e + d * g,
            c * f + d * h,
        ]
    }
}

/// Ball of radius `r` around the identity in the Cayley graph of SL(2, Z).
pub fn infinite_ball(r: usize) -> Result<LabelledBall> {
    if r > INFINITE_BALL_MAX_RADIUS {
        return Err(Error::RadiusTooLarge {
            radius: r,
            limit: INFINITE_BALL_MAX_RADIUS,
        });
    }
    Ok(grow_ball(
        &InfiniteModularGroup,
        &[InfiniteModularGroup::identity()],
        None,
        r,
    ))
}
