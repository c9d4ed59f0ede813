//! Topological loss over 0-dimensional persistence and its analytic gradient.
//!
//! The loss is the total persistence of the non-essential classes. For a flag
//! filtration all births are 0, so the loss equals the total weight of the
//! Euclidean minimum spanning tree, and each finite death contributes the
//! gradient of one edge length with respect to its endpoint coordinates.
//! Driving the loss to 0 leaves a single connected component.

use crate::cloud::{FeatureSet, PointCloud};
use crate::error::{Error, Result};
use crate::persistence::{flag_ph0, flag_ph0_features, PersistenceDiagram};
use crate::range_image::{to_point_cloud, RangeImage};

/// Loss value, per-point gradient, and the MST edges that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TopoLossReport {
    /// Sum of finite persistences (total MST weight in the flag case).
    pub loss: f64,
    /// Gradient of the loss with respect to each point's coordinates. Points
    /// touched by no MST edge have a zero row.
    pub per_point_grad: Vec<[f64; 3]>,
    /// The `(u, v, weight)` edges contributing to the loss, in ascending
    /// `(weight, u, v)` order.
    pub contributing_edges: Vec<(usize, usize, f64)>,
    /// Set when an MST edge had coincident endpoints; that edge contributes a
    /// zero subgradient.
    pub degenerate: bool,
}

/// Sum of `death - birth` over the finite pairs of a diagram. Essential bars
/// are excluded.
pub fn topo_loss(diagram: &PersistenceDiagram) -> f64 {
    diagram.total_persistence()
}

/// Computes the flag-filtration loss of a cloud together with its gradient.
///
/// For each MST edge `(u, v)` of weight `w`, the edge length contributes
/// `(x_u - x_v) / w` to `grad[u]` and the negation to `grad[v]`. Accumulation
/// runs sequentially over edges in ascending `(weight, u, v)` order, so the
/// result is deterministic even at MST ties.
pub fn topo_loss_grad(cloud: &PointCloud) -> Result<TopoLossReport> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::DegenerateGraph(n));
    }
    let diagram = flag_ph0(cloud, None)?;
    let mut grad = vec![[0.0; 3]; n];
    let mut edges = Vec::with_capacity(diagram.finite_pairs().len());
    let mut degenerate = false;
    let mut loss = 0.0;
    for pair in diagram.finite_pairs() {
        let (u, v) = pair.edge.expect("flag pairs carry their generator edge");
        let w = pair.death;
        loss += w;
        edges.push((u, v, w));
        if w == 0.0 {
            degenerate = true;
            continue;
        }
        let pu = cloud.point(u);
        let pv = cloud.point(v);
        for c in 0..3 {
            let g = (pu[c] - pv[c]) / w;
            grad[u][c] += g;
            grad[v][c] -= g;
        }
    }
    Ok(TopoLossReport {
        loss,
        per_point_grad: grad,
        contributing_edges: edges,
        degenerate,
    })
}

/// The combined objective: topological loss of the augmented scan, plus the
/// topological losses of the intermediate embeddings, plus the mean absolute
/// coordinate error between the augmented and target images over cells valid
/// in both.
pub fn total_loss(
    aug: &RangeImage,
    target: &RangeImage,
    embeddings: &[FeatureSet],
) -> Result<f64> {
    if aug.shape() != target.shape() {
        let (h1, w1) = aug.shape();
        let (h2, w2) = target.shape();
        return Err(Error::ShapeMismatch(h1, w1, h2, w2));
    }
    let points = to_point_cloud(aug);
    let mut loss = topo_loss(&flag_ph0(&points, None)?);
    for emb in embeddings {
        loss += topo_loss(&flag_ph0_features(emb, None)?);
    }
    loss += absolute_error(aug, target);
    Ok(loss)
}

/// Mean over co-valid cells of the L1 coordinate difference. Zero when no
/// cell is valid in both images.
pub fn absolute_error(a: &RangeImage, b: &RangeImage) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (ca, cb) in a.cells().iter().zip(b.cells()) {
        if ca.is_valid() && cb.is_valid() {
            sum += (ca.x - cb.x).abs() + (ca.y - cb.y).abs() + (ca.z - cb.z).abs();
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
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
    fn two_point_gradient_is_unit_vector() {
        let c = cloud(&[[0.0; 3], [3.0, 4.0, 0.0]]);
        let report = topo_loss_grad(&c).unwrap();
        assert_relative_eq!(report.loss, 5.0);
        assert_relative_eq!(report.per_point_grad[0][0], -0.6);
        assert_relative_eq!(report.per_point_grad[0][1], -0.8);
        assert_relative_eq!(report.per_point_grad[1][0], 0.6);
        assert_relative_eq!(report.per_point_grad[1][1], 0.8);
        assert_eq!(report.contributing_edges, vec![(0, 1, 5.0)]);
        assert!(!report.degenerate);
    }

    #[test]
    fn equilateral_triangle_uses_first_two_sides() {
        let s = 2.0;
        let h = s * 3f64.sqrt() / 2.0;
        let c = cloud(&[[0.0; 3], [s, 0.0, 0.0], [s / 2.0, h, 0.0]]);
        let report = topo_loss_grad(&c).unwrap();
        assert_relative_eq!(report.loss, 2.0 * s, epsilon = 1e-12);
        // Ties on weight resolve by (u, v): edges (0,1) and (0,2) win.
        let uv: Vec<(usize, usize)> = report
            .contributing_edges
            .iter()
            .map(|&(u, v, _)| (u, v))
            .collect();
        assert_eq!(uv, vec![(0, 1), (0, 2)]);
        // Each gradient row is the sum of its incident MST-edge unit vectors.
        let unit01 = [-1.0, 0.0, 0.0];
        let unit02 = [-0.5, -h / s, 0.0];
        for c in 0..3 {
            assert_relative_eq!(
                report.per_point_grad[0][c],
                unit01[c] + unit02[c],
                epsilon = 1e-12
            );
            assert_relative_eq!(report.per_point_grad[1][c], -unit01[c], epsilon = 1e-12);
            assert_relative_eq!(report.per_point_grad[2][c], -unit02[c], epsilon = 1e-12);
        }
    }

    #[test]
    fn coincident_points_flag_degeneracy() {
        let c = cloud(&[[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]);
        let report = topo_loss_grad(&c).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.loss, 0.0);
        assert_eq!(report.per_point_grad, vec![[0.0; 3]; 2]);
    }

    #[test]
    fn single_point_diagram_has_zero_loss() {
        let d = flag_ph0(&cloud(&[[0.0; 3]]), None).unwrap();
        assert_eq!(topo_loss(&d), 0.0);
    }

    #[test]
    fn unit_square_loss_is_three() {
        let d = flag_ph0(
            &cloud(&[
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [1.0, 1.0, 0.0],
            ]),
            None,
        )
        .unwrap();
        assert_relative_eq!(topo_loss(&d), 3.0);
    }

    #[test]
    fn total_loss_of_identical_single_point_is_zero() {
        let cfg = ProjectionConfig::new(2, 4, 3.0, -25.0).unwrap();
        let img = to_range_image(&cloud(&[[10.0, 0.0, 0.0]]), &cfg).unwrap();
        let loss = total_loss(&img, &img, &[]).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn total_loss_shift_contributes_absolute_error() {
        let cfg = ProjectionConfig::new(2, 4, 3.0, -25.0).unwrap();
        let img = to_range_image(&cloud(&[[10.0, 0.0, 0.0]]), &cfg).unwrap();
        let shifted = to_range_image(&cloud(&[[10.5, 0.0, 0.0]]), &cfg).unwrap();
        let loss = total_loss(&shifted, &img, &[]).unwrap();
        assert_relative_eq!(loss, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn total_loss_rejects_shape_mismatch() {
        let a = RangeImage::empty(2, 4);
        let b = RangeImage::empty(4, 4);
        assert!(matches!(
            total_loss(&a, &b, &[]),
            Err(Error::ShapeMismatch(..))
        ));
    }
}
