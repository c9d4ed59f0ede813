//! Forward-only LiDAR graph layers.
//!
//! One layer connects each point to its k nearest neighbors in the current
//! feature space, maps every edge feature `concat(h_i, h_j - h_i)` through a
//! linear layer, and max-pools over the neighborhood (the max supplies the
//! nonlinearity). Stacking layers rebuilds the graph in each new embedding
//! space, so points far apart in the input can become neighbors once their
//! embeddings agree.

use crate::cloud::{FeatureSet, PointCloud};
use crate::error::{Error, Result};
use crate::exec;
use crate::knn::{knn_graph, KnnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixed linear weights of shape `d_out x 2*d_in`, applied to the edge
/// feature `concat(h_i, h_j - h_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    d_out: usize,
    d_in: usize,
    matrix: Vec<f64>,
    seed: Option<u64>,
}

impl LayerWeights {
    /// Weights drawn uniformly from `[-1/sqrt(2*d_in), 1/sqrt(2*d_in)]` by a
    /// seeded ChaCha generator; the same seed yields bit-identical weights on
    /// every platform.
    pub fn seeded(d_out: usize, d_in: usize, seed: u64) -> Self {
        let bound = 1.0 / ((2 * d_in) as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = (0..d_out * 2 * d_in)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            d_out,
            d_in,
            matrix,
            seed: Some(seed),
        }
    }

    /// Explicit weights; `matrix` is row-major `d_out x 2*d_in`.
    pub fn from_matrix(d_out: usize, d_in: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != d_out * 2 * d_in {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for a {}x{} edge map",
                matrix.len(),
                d_out,
                2 * d_in
            )));
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("layer weights"));
        }
        Ok(Self {
            d_out,
            d_in,
            matrix,
            seed: None,
        })
    }

    /// The `[I | 0]` block layout: the identity on `h_i`, zero on the
    /// neighbor term, so the layer passes features through unchanged.
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![0.0; dim * 2 * dim];
        for o in 0..dim {
            matrix[o * 2 * dim + o] = 1.0;
        }
        Self {
            d_out: dim,
            d_in: dim,
            matrix,
            seed: None,
        }
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    fn row(&self, o: usize) -> &[f64] {
        &self.matrix[o * 2 * self.d_in..(o + 1) * 2 * self.d_in]
    }
}

/// Applies one graph layer: `out_i = max_{j in N(i)} W * concat(h_i, h_j - h_i)`,
/// elementwise over the output dimensions.
pub fn graph_layer_forward(
    features: &FeatureSet,
    graph: &KnnGraph,
    weights: &LayerWeights,
) -> Result<FeatureSet> {
    let n = features.len();
    if graph.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "graph over {} nodes applied to {} feature rows",
            graph.n(),
            n
        )));
    }
    if weights.d_in != features.dim() {
        return Err(Error::DimensionMismatch(format!(
            "weights expect input dimension {}, features have {}",
            weights.d_in,
            features.dim()
        )));
    }
    let d_in = weights.d_in;
    let d_out = weights.d_out;

    let values = exec::flat_map_range(n, |i| {
        let h_i = features.row(i);
        let mut out = vec![f64::NEG_INFINITY; d_out];
        for &j in graph.neighbors(i) {
            let h_j = features.row(j as usize);
            for (o, slot) in out.iter_mut().enumerate() {
                let row = weights.row(o);
                let mut acc = 0.0;
                for d in 0..d_in {
                    acc += row[d] * h_i[d];
                    acc += row[d_in + d] * (h_j[d] - h_i[d]);
                }
                if acc > *slot {
                    *slot = acc;
                }
            }
        }
        out
    });
    FeatureSet::new(d_out, values)
}

/// Stacks graph layers over a cloud: the graph is rebuilt in the current
/// feature space before every layer, and per-layer weights derive
/// deterministically from `seed`. Returns the feature set after each layer.
pub fn stack_encoder(
    cloud: &PointCloud,
    widths: &[usize],
    k: usize,
    seed: u64,
) -> Result<Vec<FeatureSet>> {
    if widths.is_empty() {
        return Err(Error::InvalidConfig("widths must be non-empty".into()));
    }
    if widths.iter().any(|&w| w == 0) {
        return Err(Error::InvalidConfig("layer widths must be >= 1".into()));
    }
    let mut features = cloud.to_feature_set();
    let mut outputs = Vec::with_capacity(widths.len());
    for (layer, &width) in widths.iter().enumerate() {
        let graph = knn_graph(&features, k)?;
        let weights = LayerWeights::seeded(width, features.dim(), layer_seed(seed, layer));
        features = graph_layer_forward(&features, &graph, &weights)?;
        outputs.push(features.clone());
    }
    Ok(outputs)
}

/// Splitmix-style per-layer seed derivation.
fn layer_seed(seed: u64, layer: usize) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(layer as u64 + 1))
}
