//! Point-cloud and feature-set containers.
//!
//! A [`PointCloud`] is an ordered list of 3-D points, optionally carrying a
//! per-point feature vector of uniform dimension. A [`FeatureSet`] is the
//! plain n x D row-major matrix used wherever points live in an embedding
//! space rather than in metric 3-space (graph-layer outputs, filtrations over
//! latent representations).

use crate::error::{Error, Result};

/// A 3-D point in meters.
pub type Point3 = [f64; 3];

/// Row-major n x D matrix of per-point real feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    dim: usize,
    values: Vec<f64>,
}

impl FeatureSet {
    /// Builds a feature set from row-major values. Length must be a multiple
    /// of `dim` and every entry finite.
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("feature dimension must be >= 1".into()));
        }
        if values.len() % dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} values do not form rows of dimension {}",
                values.len(),
                dim
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("feature values"));
        }
        Ok(Self { dim, values })
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Feature dimension D.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `i`-th row.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// All values, row-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }
}

/// Squared Euclidean distance between two equal-length slices.
///
/// Accumulates in index order; every distance computation in the crate goes
/// through here so that alternative search paths return bitwise-identical
/// values.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Euclidean distance between two equal-length slices.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// An ordered set of 3-D points with optional per-point features.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    features: Option<FeatureSet>,
}

impl PointCloud {
    /// Builds a cloud, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if !points.iter().all(|p| p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(Self {
            points,
            features: None,
        })
    }

    /// Builds a cloud with one feature vector per point.
    pub fn with_features(points: Vec<Point3>, features: FeatureSet) -> Result<Self> {
        if features.len() != points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows for {} points",
                features.len(),
                points.len()
            )));
        }
        let mut cloud = Self::new(points)?;
        cloud.features = Some(features);
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point3 {
        self.points[i]
    }

    pub fn features(&self) -> Option<&FeatureSet> {
        self.features.as_ref()
    }

    /// Copies the coordinates into an n x 3 feature set.
    pub fn to_feature_set(&self) -> FeatureSet {
        let values: Vec<f64> = self.points.iter().flatten().copied().collect();
        FeatureSet { dim: 3, values }
    }

    /// Returns the cloud translated by `offset`.
    pub fn translated(&self, offset: Point3) -> PointCloud {
        let points = self
            .points
            .iter()
            .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
            .collect();
        PointCloud {
            points,
            features: self.features.clone(),
        }
    }
}
