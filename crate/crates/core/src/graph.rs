//! Weighted Whitehead graph of a cyclic word and the features derived from it.
//!
//! Vertices are the letters of `X^{±1}` in the order `x_1 < x_1⁻¹ < x_2 < ...`.
//! Edges are unordered vertex pairs, indexed lexicographically by
//! `(low, high)`; this is the `canonical-v1` edge order used by feature
//! vectors and model files.

use serde::{Deserialize, Serialize};

use crate::automorphism::{NielsenAuto, Side};
use crate::error::{Error, Result};
use crate::word::{Letter, Word};

pub const EDGE_ORDER: &str = "canonical-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeIndexer {
    rank: u32,
}

impl EdgeIndexer {
    pub fn new(rank: u32) -> Self {
        EdgeIndexer { rank }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    fn vertices(&self) -> usize {
        2 * self.rank as usize
    }

    /// `n(2n−1)`
    pub fn edge_count(&self) -> usize {
        let v = self.vertices();
        v * (v - 1) / 2
    }

    pub fn index(&self, u: Letter, v: Letter) -> usize {
        let (a, b) = (u.vertex(), v.vertex());
        debug_assert_ne!(a, b, "loops never occur in a Whitehead graph");
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let n = self.vertices();
        lo * (2 * n - lo - 1) / 2 + (hi - lo - 1)
    }

    /// Endpoints `(low, high)` of edge `e` in vertex order.
    pub fn endpoints(&self, e: usize) -> (Letter, Letter) {
        let n = self.vertices();
        let mut lo = 0;
        let mut start = 0;
        while start + (n - lo - 1) <= e {
            start += n - lo - 1;
            lo += 1;
        }
        let hi = lo + 1 + (e - start);
        (Letter::from_vertex(lo), Letter::from_vertex(hi))
    }

    /// Whether `e` joins a letter to its own inverse (the `x²` edges).
    pub fn is_square(&self, e: usize) -> bool {
        let (u, v) = self.endpoints(e);
        u == v.inverse()
    }

    /// Edges of `E′`, ascending.
    pub fn reducible_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edge_count()).filter(|&e| !self.is_square(e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: Vec<u32>,
    pub word_length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        squared_distance(&self.0, other).sqrt()
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Edge weights of `WG(w)`: each cyclic pair `(y_i, y_{i+1})` adds one to
/// the edge `{y_i, y_{i+1}⁻¹}`.
pub fn whitehead_graph(w: &Word) -> Result<WeightVector> {
    if w.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let idx = EdgeIndexer::new(w.rank());
    let mut weights = vec![0u32; idx.edge_count()];
    let letters = w.letters();
    let n = letters.len();
    for i in 0..n {
        let (y, z) = (letters[i], letters[(i + 1) % n]);
        weights[idx.index(y, z.inverse())] += 1;
    }
    Ok(WeightVector { weights, word_length: n })
}

/// `l(w) / |w|`
pub fn feature_vector(w: &Word) -> Result<FeatureVector> {
    let g = whitehead_graph(w)?;
    let len = g.word_length as f64;
    Ok(FeatureVector(g.weights.iter().map(|&x| x as f64 / len).collect()))
}

/// The two Nielsen automorphisms shortening the subwords `(xy)^{±1}` of edge
/// `e = {x, y⁻¹}`, with `x` the lower endpoint: `ψ^x: x → x y⁻¹` then
/// `ψ^y: y → x⁻¹ y`.
pub fn edge_autos(idx: &EdgeIndexer, e: usize) -> Result<(NielsenAuto, NielsenAuto)> {
    if e >= idx.edge_count() {
        return Err(Error::InvalidInput(format!("edge {e} out of range")));
    }
    if idx.is_square(e) {
        return Err(Error::NoEdgeAutomorphism(e));
    }
    let (x, y_inv) = idx.endpoints(e);
    let y = y_inv.inverse();
    Ok((multiply_right(x, y.inverse()), multiply_left(y, x.inverse())))
}

/// Nielsen move sending the letter `x` to `x · m`.
fn multiply_right(x: Letter, m: Letter) -> NielsenAuto {
    if x.is_inverse() {
        // x_g⁻¹ → x_g⁻¹ m  ⇔  x_g → m⁻¹ x_g
        NielsenAuto { target: x.generator(), side: Side::Left, mult: m.inverse() }
    } else {
        NielsenAuto { target: x.generator(), side: Side::Right, mult: m }
    }
}

/// Nielsen move sending the letter `y` to `m · y`.
fn multiply_left(y: Letter, m: Letter) -> NielsenAuto {
    if y.is_inverse() {
        NielsenAuto { target: y.generator(), side: Side::Right, mult: m.inverse() }
    } else {
        NielsenAuto { target: y.generator(), side: Side::Left, mult: m }
    }
}

/// `E′` sorted by weight descending (ties by edge index), flattened to
/// `ψ^x, ψ^y` pairs.
pub fn max_weight_edges(weights: &[u32], idx: &EdgeIndexer) -> Vec<usize> {
    let mut edges: Vec<usize> = idx.reducible_edges().collect();
    edges.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    edges
}

pub fn max_weight_ordering(w: &Word) -> Vec<NielsenAuto> {
    let idx = EdgeIndexer::new(w.rank());
    let weights = match whitehead_graph(w) {
        Ok(g) => g.weights,
        Err(_) => vec![0; idx.edge_count()],
    };
    max_weight_edges(&weights, &idx)
        .into_iter()
        .flat_map(|e| {
            let (p, q) = edge_autos(&idx, e).expect("E′ edges always have a pair");
            [p, q]
        })
        .collect()
}
