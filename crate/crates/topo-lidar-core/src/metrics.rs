//! Point-cloud and range-image comparison metrics.
//!
//! - Chamfer distance: summed squared nearest-neighbor mismatch, both ways.
//! - EMD: exact minimum transport over bijections between equal-size clouds.
//! - JSD: Jensen-Shannon divergence between bird's-eye occupancy histograms.
//! - MMD: RKHS distance between Gaussian-kernel mean embeddings.
//! - RMSE: root mean squared range difference over co-valid image cells.

use crate::assignment::min_cost_assignment;
use crate::cloud::{dist, sq_dist, PointCloud};
use crate::error::{Error, Result};
use crate::exec;
use crate::knn::KdTree;
use crate::range_image::RangeImage;

/// Bird's-eye histogram over the `(x, y)` plane for JSD. `smoothing` is added
/// to every bin before normalizing; points outside the extent are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramConfig {
    pub bins_x: usize,
    pub bins_y: usize,
    /// `(xmin, xmax, ymin, ymax)` in meters.
    pub extent: (f64, f64, f64, f64),
    pub smoothing: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins_x: 100,
            bins_y: 100,
            extent: (-50.0, 50.0, -50.0, 50.0),
            smoothing: 1e-12,
        }
    }
}

impl HistogramConfig {
    fn validate(&self) -> Result<()> {
        let (xmin, xmax, ymin, ymax) = self.extent;
        if self.bins_x < 1 || self.bins_y < 1 {
            return Err(Error::InvalidConfig("histogram needs at least 1 bin per axis".into()));
        }
        if !(xmin < xmax && ymin < ymax) {
            return Err(Error::InvalidConfig(format!(
                "extent ({xmin}, {xmax}, {ymin}, {ymax}) is not well-ordered"
            )));
        }
        if !(self.smoothing >= 0.0) || !self.smoothing.is_finite() {
            return Err(Error::InvalidConfig("smoothing must be >= 0 and finite".into()));
        }
        Ok(())
    }
}

/// Gaussian-kernel bandwidth for MMD: fixed, or the median pairwise distance
/// over the pooled clouds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub bandwidth: Bandwidth,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::Median,
        }
    }
}

/// Chamfer distance: `sum_x min_y ||x-y||^2 + sum_y min_x ||x-y||^2`.
pub fn chamfer(s: &PointCloud, t: &PointCloud) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptyInput("chamfer operand"));
    }
    Ok(directed_sq_sum(s, t) + directed_sq_sum(t, s))
}

fn directed_sq_sum(from: &PointCloud, to: &PointCloud) -> f64 {
    let to_feats = to.to_feature_set();
    let tree = KdTree::build(&to_feats);
    let mins = exec::map_range(from.len(), |i| {
        crate::knn::nearest_sq_dist(&tree, &from.point(i))
    });
    mins.iter().sum()
}

/// Exact Earth Mover's Distance between equal-size clouds: the minimum over
/// bijections of the summed Euclidean transport `||x - phi(x)||`.
pub fn emd_exact(s: &PointCloud, t: &PointCloud) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptyInput("EMD operand"));
    }
    if s.len() != t.len() {
        return Err(Error::EmdSizeMismatch(s.len(), t.len()));
    }
    let n = s.len();
    let cost: Vec<f64> = exec::flat_map_range(n, |i| {
        let p = s.point(i);
        (0..n).map(|j| dist(&p, &t.point(j))).collect()
    });
    let (_, total) = min_cost_assignment(n, &cost)?;
    Ok(total)
}

/// Jensen-Shannon divergence between the bird's-eye histograms of two clouds,
/// with natural logarithm. Always in `[0, ln 2]`.
pub fn jsd(s: &PointCloud, t: &PointCloud, cfg: &HistogramConfig) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptyInput("JSD operand"));
    }
    cfg.validate()?;
    let p = histogram(s, cfg, "first")?;
    let q = histogram(t, cfg, "second")?;
    let mut acc = 0.0;
    for (pi, qi) in p.iter().zip(&q) {
        let m = 0.5 * (pi + qi);
        if *pi > 0.0 {
            acc += 0.5 * pi * (pi / m).ln();
        }
        if *qi > 0.0 {
            acc += 0.5 * qi * (qi / m).ln();
        }
    }
    Ok(acc.clamp(0.0, std::f64::consts::LN_2))
}

fn histogram(cloud: &PointCloud, cfg: &HistogramConfig, which: &'static str) -> Result<Vec<f64>> {
    let (xmin, xmax, ymin, ymax) = cfg.extent;
    let mut counts = vec![0.0f64; cfg.bins_x * cfg.bins_y];
    let mut inside = 0usize;
    for p in cloud.points() {
        let (x, y) = (p[0], p[1]);
        if x < xmin || x > xmax || y < ymin || y > ymax {
            continue;
        }
        let bx = (((x - xmin) / (xmax - xmin) * cfg.bins_x as f64) as usize).min(cfg.bins_x - 1);
        let by = (((y - ymin) / (ymax - ymin) * cfg.bins_y as f64) as usize).min(cfg.bins_y - 1);
        counts[by * cfg.bins_x + bx] += 1.0;
        inside += 1;
    }
    if inside == 0 {
        return Err(Error::EmptyHistogram(which));
    }
    let total: f64 = inside as f64 + cfg.smoothing * counts.len() as f64;
    for c in &mut counts {
        *c = (*c + cfg.smoothing) / total;
    }
    Ok(counts)
}

/// Maximum mean discrepancy under a Gaussian kernel, computed via the kernel
/// trick and clamped at 0 against negative round-off.
pub fn mmd(s: &PointCloud, t: &PointCloud, cfg: &KernelConfig) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptyInput("MMD operand"));
    }
    let sigma = resolve_bandwidth(s, t, cfg)?;
    let gamma = 1.0 / (2.0 * sigma * sigma);
    let k_ss = mean_kernel(s, s, gamma);
    let k_tt = mean_kernel(t, t, gamma);
    let k_st = mean_kernel(s, t, gamma);
    Ok((k_ss + k_tt - 2.0 * k_st).max(0.0).sqrt())
}

fn mean_kernel(a: &PointCloud, b: &PointCloud, gamma: f64) -> f64 {
    let rows = exec::map_range(a.len(), |i| {
        let p = a.point(i);
        let mut acc = 0.0;
        for j in 0..b.len() {
            acc += (-gamma * sq_dist(&p, &b.point(j))).exp();
        }
        acc
    });
    rows.iter().sum::<f64>() / (a.len() * b.len()) as f64
}

fn resolve_bandwidth(s: &PointCloud, t: &PointCloud, cfg: &KernelConfig) -> Result<f64> {
    match cfg.bandwidth {
        Bandwidth::Fixed(sigma) => {
            if !(sigma > 0.0) || !sigma.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "kernel bandwidth must be positive and finite, got {sigma}"
                )));
            }
            Ok(sigma)
        }
        Bandwidth::Median => {
            let pooled: Vec<[f64; 3]> = s
                .points()
                .iter()
                .chain(t.points())
                .copied()
                .collect();
            let mut dists = Vec::with_capacity(pooled.len() * (pooled.len() - 1) / 2);
            for i in 0..pooled.len() {
                for j in i + 1..pooled.len() {
                    dists.push(dist(&pooled[i], &pooled[j]));
                }
            }
            if dists.is_empty() {
                return Ok(1.0);
            }
            let mid = dists.len() / 2;
            let (_, median, _) = dists.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
            // All points coincident: any bandwidth gives MMD 0.
            if *median == 0.0 {
                return Ok(1.0);
            }
            Ok(*median)
        }
    }
}

/// Root mean squared range difference over cells valid in both images.
pub fn rmse(a: &RangeImage, b: &RangeImage) -> Result<f64> {
    if a.shape() != b.shape() {
        let (h1, w1) = a.shape();
        let (h2, w2) = b.shape();
        return Err(Error::ShapeMismatch(h1, w1, h2, w2));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (ca, cb) in a.cells().iter().zip(b.cells()) {
        if ca.is_valid() && cb.is_valid() {
            let d = ca.range - cb.range;
            sum += d * d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::NoCoValidCells);
    }
    Ok((sum / count as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::range_image::{to_range_image, ProjectionConfig};
    use approx::assert_relative_eq;

    fn cloud(points: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(points.to_vec()).unwrap()
    }

    #[test]
    fn chamfer_one_dimensional_example() {
        let s = cloud(&[[0.0, 0.0, 0.0]]);
        let t = cloud(&[[3.0, 0.0, 0.0]]);
        assert_relative_eq!(chamfer(&s, &t).unwrap(), 18.0);
        assert_relative_eq!(chamfer(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn emd_square_example() {
        let s = cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let t = cloud(&[[0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]);
        assert_relative_eq!(emd_exact(&s, &t).unwrap(), 2.0);
        assert_relative_eq!(emd_exact(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn emd_rejects_size_mismatch() {
        let s = cloud(&[[0.0; 3]]);
        let t = cloud(&[[0.0; 3], [1.0, 0.0, 0.0]]);
        assert!(matches!(
            emd_exact(&s, &t),
            Err(Error::EmdSizeMismatch(1, 2))
        ));
    }

    #[test]
    fn jsd_identical_and_disjoint() {
        let cfg = HistogramConfig {
            bins_x: 4,
            bins_y: 4,
            extent: (0.0, 4.0, 0.0, 4.0),
            smoothing: 0.0,
        };
        let s = cloud(&[[0.5, 0.5, 0.0], [1.5, 2.5, 0.0]]);
        assert_relative_eq!(jsd(&s, &s, &cfg).unwrap(), 0.0);

        let t = cloud(&[[3.5, 3.5, 0.0]]);
        assert_relative_eq!(jsd(&s, &t, &cfg).unwrap(), std::f64::consts::LN_2);
    }

    #[test]
    fn jsd_rejects_out_of_extent_clouds() {
        let cfg = HistogramConfig::default();
        let s = cloud(&[[0.0, 0.0, 0.0]]);
        let far = cloud(&[[1000.0, 1000.0, 0.0]]);
        assert!(matches!(
            jsd(&s, &far, &cfg),
            Err(Error::EmptyHistogram("second"))
        ));
    }

    #[test]
    fn mmd_singletons_expand_to_two_point_formula() {
        let x = cloud(&[[0.0, 0.0, 0.0]]);
        let y = cloud(&[[2.0, 0.0, 0.0]]);
        let sigma = 1.5;
        let cfg = KernelConfig {
            bandwidth: Bandwidth::Fixed(sigma),
        };
        let k = (-4.0 / (2.0 * sigma * sigma)).exp();
        assert_relative_eq!(mmd(&x, &y, &cfg).unwrap(), (2.0 - 2.0 * k).sqrt(), epsilon = 1e-12);
        assert!(mmd(&x, &x, &cfg).unwrap() <= 1e-12);
    }

    #[test]
    fn mmd_median_bandwidth_of_identical_clouds_is_zero_distance() {
        let s = cloud(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]);
        let cfg = KernelConfig::default();
        assert!(mmd(&s, &s, &cfg).unwrap() <= 1e-12);
    }

    #[test]
    fn rmse_offset_ranges() {
        let cfg = ProjectionConfig::new(2, 4, 3.0, -25.0).unwrap();
        let a = to_range_image(&cloud(&[[10.0, 0.0, 0.0]]), &cfg).unwrap();
        let b = to_range_image(&cloud(&[[12.5, 0.0, 0.0]]), &cfg).unwrap();
        assert_relative_eq!(rmse(&a, &b).unwrap(), 2.5, epsilon = 1e-12);
        assert_relative_eq!(rmse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn rmse_needs_co_valid_cells() {
        let cfg = ProjectionConfig::new(2, 4, 3.0, -25.0).unwrap();
        let a = to_range_image(&cloud(&[[10.0, 0.0, 0.0]]), &cfg).unwrap();
        let b = to_range_image(&cloud(&[[-10.0, 0.0, 0.0]]), &cfg).unwrap();
        assert!(matches!(rmse(&a, &b), Err(Error::NoCoValidCells)));
    }

    #[test]
    fn empty_clouds_rejected_everywhere() {
        let e = cloud(&[]);
        let s = cloud(&[[0.0; 3]]);
        assert!(chamfer(&e, &s).is_err());
        assert!(emd_exact(&e, &e).is_err());
        assert!(jsd(&e, &s, &HistogramConfig::default()).is_err());
        assert!(mmd(&s, &e, &KernelConfig::default()).is_err());
    }
}
