//! Trajectory error metrics with closed-form rigid alignment.
//!
//! ATE measures global consistency: the estimated trajectory is aligned onto
//! the ground truth by the least-squares rigid transform over translations,
//! and the RMSE of the residual translations is reported. RPE measures local
//! accuracy: relative motions over a fixed frame interval are compared
//! directly, which cancels the global frames of both trajectories.

use crate::error::{Error, Result};
use crate::exec;
use nalgebra::{Matrix3, Vector3};

const ROTATION_TOL: f64 = 1e-6;
/// Relative threshold on the second singular value below which the
/// translation set is considered collinear and alignment is ill-posed.
const RANK_TOL: f64 = 1e-9;

/// A rigid body transform: rotation then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    /// Validates that `rotation` is orthonormal with determinant +1 within
    /// 1e-6.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().all(|v| v.is_finite()) || !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("rigid transform"));
        }
        let gram = rotation.transpose() * rotation;
        let defect = (gram - Matrix3::identity()).abs().max();
        if defect > ROTATION_TOL || (rotation.determinant() - 1.0).abs() > ROTATION_TOL {
            return Err(Error::InvalidRotation);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    fn new_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new_unchecked(Matrix3::identity(), Vector3::zeros())
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new_unchecked(rt, -(rt * self.translation))
    }

    /// `self` after `other`: `(self * other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new_unchecked(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Rotation angle in radians, in `[0, pi]`.
    pub fn rotation_angle(&self) -> f64 {
        (((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0)).acos()
    }
}

/// A time-ordered sequence of rigid poses.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTrajectory {
    poses: Vec<RigidTransform>,
}

impl PoseTrajectory {
    pub fn new(poses: Vec<RigidTransform>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::EmptyInput("pose trajectory"));
        }
        Ok(Self { poses })
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn pose(&self, i: usize) -> &RigidTransform {
        &self.poses[i]
    }

    pub fn poses(&self) -> &[RigidTransform] {
        &self.poses
    }

    /// Applies a global rigid pre-transform: every pose `T_i` becomes
    /// `g * T_i`.
    pub fn transformed(&self, g: &RigidTransform) -> Self {
        Self {
            poses: self.poses.iter().map(|p| g.compose(p)).collect(),
        }
    }
}

/// Least-squares rigid transform mapping the translations of `p` onto the
/// translations of `q` (no scale). Requires equal lengths of at least 3 and
/// non-collinear translations.
pub fn align_umeyama(p: &PoseTrajectory, q: &PoseTrajectory) -> Result<RigidTransform> {
    if p.len() != q.len() {
        return Err(Error::TrajectoryLengthMismatch(p.len(), q.len()));
    }
    let n = p.len();
    if n < 3 {
        return Err(Error::InvalidConfig(format!(
            "alignment needs at least 3 poses, got {n}"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let p_mean: Vector3<f64> = p.poses.iter().map(|t| t.translation).sum::<Vector3<f64>>() * inv_n;
    let q_mean: Vector3<f64> = q.poses.iter().map(|t| t.translation).sum::<Vector3<f64>>() * inv_n;

    let mut cross = Matrix3::zeros();
    for (tp, tq) in p.poses.iter().zip(&q.poses) {
        cross += (tp.translation - p_mean) * (tq.translation - q_mean).transpose();
    }

    let svd = cross.svd(true, true);
    let u = svd.u.expect("3x3 SVD always yields U");
    let v = svd.v_t.expect("3x3 SVD always yields V^T").transpose();
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if sv[0] <= 0.0 || sv[1] <= RANK_TOL * sv[0] {
        return Err(Error::DegenerateAlignment);
    }

    let d = (v * u.transpose()).determinant();
    let correction = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d.signum()));
    let rotation = v * correction * u.transpose();
    let translation = q_mean - rotation * p_mean;
    Ok(RigidTransform::new_unchecked(rotation, translation))
}

/// Absolute trajectory error: aligns `p` onto `q`, forms the error transforms
/// `E_i = Q_i^-1 S P_i`, and returns the RMSE of their translation norms.
pub fn ate(p: &PoseTrajectory, q: &PoseTrajectory) -> Result<f64> {
    let s = align_umeyama(p, q)?;
    let sq = exec::map_range(p.len(), |i| {
        let e = q.pose(i).inverse().compose(&s.compose(p.pose(i)));
        e.translation.norm_squared()
    });
    Ok(rms(&sq))
}

/// Relative pose error over windows of `delta` frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpeResult {
    /// RMSE of relative translation error in meters.
    pub trans: f64,
    /// RMSE of relative rotation error in radians.
    pub rot: f64,
}

/// Relative pose error: compares the relative motion of each trajectory over
/// every window `[i, i + delta]` and returns translation and rotation RMSEs.
pub fn rpe(p: &PoseTrajectory, q: &PoseTrajectory, delta: usize) -> Result<RpeResult> {
    if p.len() != q.len() {
        return Err(Error::TrajectoryLengthMismatch(p.len(), q.len()));
    }
    if delta < 1 || delta >= p.len() {
        return Err(Error::DeltaOutOfRange {
            delta,
            len: p.len(),
        });
    }
    let m = p.len() - delta;
    let errors = exec::map_range(m, |i| {
        let rel_p = p.pose(i).inverse().compose(p.pose(i + delta));
        let rel_q = q.pose(i).inverse().compose(q.pose(i + delta));
        let e = rel_p.inverse().compose(&rel_q);
        (e.translation.norm_squared(), e.rotation_angle())
    });
    let trans_sq: Vec<f64> = errors.iter().map(|e| e.0).collect();
    let rot_sq: Vec<f64> = errors.iter().map(|e| e.1 * e.1).collect();
    Ok(RpeResult {
        trans: rms(&trans_sq),
        rot: rms(&rot_sq),
    })
}

/// Root of the mean of already-squared terms, accumulated pairwise for a
/// deterministic, well-conditioned reduction.
fn rms(squares: &[f64]) -> f64 {
    (pairwise_sum(squares) / squares.len() as f64).sqrt()
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn straight_line(n: usize, step: f64) -> PoseTrajectory {
        PoseTrajectory::new(
            (0..n)
                .map(|i| {
                    RigidTransform::new_unchecked(
                        Matrix3::identity(),
                        Vector3::new(step * i as f64, 0.0, 0.0),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    fn bent_path(n: usize) -> PoseTrajectory {
        PoseTrajectory::new(
            (0..n)
                .map(|i| {
                    let t = i as f64;
                    RigidTransform::new_unchecked(
                        rot_z(0.05 * t),
                        Vector3::new(t, 0.1 * t * t, (0.2 * t).sin()),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    fn rot_z(a: f64) -> Matrix3<f64> {
        Matrix3::new(
            a.cos(),
            -a.sin(),
            0.0,
            a.sin(),
            a.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        )
    }

    #[test]
    fn rigid_transform_validation() {
        assert!(RigidTransform::new(Matrix3::identity(), Vector3::zeros()).is_ok());
        assert!(RigidTransform::new(Matrix3::identity() * 2.0, Vector3::zeros()).is_err());
        // A reflection has determinant -1.
        let mut refl = Matrix3::identity();
        refl[(0, 0)] = -1.0;
        assert!(RigidTransform::new(refl, Vector3::zeros()).is_err());
    }

    #[test]
    fn compose_and_inverse_are_consistent() {
        let a = RigidTransform::new(rot_z(0.3), Vector3::new(1.0, -2.0, 0.5)).unwrap();
        let p = Vector3::new(0.2, 0.4, -0.6);
        let roundtrip = a.inverse().apply(&a.apply(&p));
        assert_relative_eq!(roundtrip, p, epsilon = 1e-12);
        let id = a.compose(&a.inverse());
        assert_relative_eq!(id.rotation_angle(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn umeyama_recovers_exact_transform() {
        let p = bent_path(20);
        let g = RigidTransform::new(rot_z(1.1), Vector3::new(4.0, -2.0, 7.0)).unwrap();
        let q = p.transformed(&g);
        let s = align_umeyama(&p, &q).unwrap();
        assert_relative_eq!(s.rotation, g.rotation, epsilon = 1e-9);
        assert_relative_eq!(s.translation, g.translation, epsilon = 1e-9);
    }

    #[test]
    fn umeyama_identity_for_equal_trajectories() {
        let p = bent_path(10);
        let s = align_umeyama(&p, &p).unwrap();
        assert_relative_eq!(s.rotation, Matrix3::identity(), epsilon = 1e-9);
        assert_relative_eq!(s.translation, Vector3::zeros(), epsilon = 1e-9);
    }

    #[test]
    fn umeyama_rejects_collinear_translations() {
        let p = straight_line(10, 1.0);
        assert!(matches!(
            align_umeyama(&p, &p),
            Err(Error::DegenerateAlignment)
        ));
    }

    #[test]
    fn ate_zero_for_globally_transformed_estimate() {
        let q = bent_path(30);
        assert_relative_eq!(ate(&q, &q).unwrap(), 0.0, epsilon = 1e-12);
        let g = RigidTransform::new(rot_z(-0.7), Vector3::new(3.0, 3.0, -1.0)).unwrap();
        let p = q.transformed(&g);
        assert!(ate(&p, &q).unwrap() < 1e-9);
    }

    #[test]
    fn rpe_straight_line_speed_offset() {
        let q = straight_line(50, 1.0);
        let p = straight_line(50, 1.1);
        let r = rpe(&p, &q, 1).unwrap();
        assert_relative_eq!(r.trans, 0.1, epsilon = 1e-10);
        assert_relative_eq!(r.rot, 0.0, epsilon = 1e-10);
        let same = rpe(&q, &q, 1).unwrap();
        assert_eq!((same.trans, same.rot), (0.0, 0.0));
    }

    #[test]
    fn rpe_delta_bounds() {
        let q = straight_line(5, 1.0);
        assert!(rpe(&q, &q, 0).is_err());
        assert!(rpe(&q, &q, 5).is_err());
        assert!(rpe(&q, &q, 4).is_ok());
    }

    #[test]
    fn trajectory_needs_poses() {
        assert!(PoseTrajectory::new(vec![]).is_err());
    }
}
