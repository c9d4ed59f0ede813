//! Direct coordinate optimization of the topological loss.
//!
//! Gradient descent on point coordinates under the flag-filtration loss,
//! optionally anchored to a target cloud by a mean-L1 pull on corresponding
//! points. Driving the topological term down merges the cloud into a single
//! connected component: the static backbone. The spanning tree is recomputed
//! every step since the active edge set changes as points move.

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};
use crate::topo_loss::topo_loss_grad;

/// Armijo sufficient-decrease constant for the backtracking line search.
const ARMIJO_C: f64 = 1e-4;
/// Give up on a step after this many halvings.
const MAX_HALVINGS: u32 = 60;

/// Gradient-descent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub steps: usize,
    pub step_size: f64,
    /// Weight on the mean-L1 pull toward the target cloud.
    pub anchor_weight: f64,
    /// When set, each step is halved until the total loss does not increase
    /// (Armijo condition), making the recorded loss non-increasing.
    pub backtracking: bool,
    /// Snapshot the cloud every this many accepted steps.
    pub record_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            steps: 100,
            step_size: 0.1,
            anchor_weight: 0.0,
            backtracking: true,
            record_every: 10,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::InvalidConfig("steps must be >= 1".into()));
        }
        if self.record_every < 1 {
            return Err(Error::InvalidConfig("record_every must be >= 1".into()));
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "step_size must be positive and finite, got {}",
                self.step_size
            )));
        }
        if !(self.anchor_weight >= 0.0) || !self.anchor_weight.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "anchor_weight must be >= 0 and finite, got {}",
                self.anchor_weight
            )));
        }
        Ok(())
    }
}

/// State recorded at a snapshot step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub cloud: PointCloud,
    pub topo_loss: f64,
    /// Unweighted anchor term (mean L1 distance to the target), 0 without a
    /// target.
    pub anchor_loss: f64,
}

/// One row of the per-step loss history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub step: usize,
    pub topo: f64,
    pub anchor: f64,
    /// `topo + anchor_weight * anchor`.
    pub total: f64,
}

/// Full record of an optimization run: the per-step loss history, periodic
/// cloud snapshots (always including step 0 and the final state), and the
/// final cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub snapshots: Vec<Snapshot>,
    pub history: Vec<LossRecord>,
    pub final_cloud: PointCloud,
}

struct Objective<'a> {
    target: Option<&'a PointCloud>,
    anchor_weight: f64,
}

struct Evaluation {
    topo: f64,
    anchor: f64,
    total: f64,
    grad: Vec<[f64; 3]>,
}

impl Objective<'_> {
    fn eval(&self, points: &[Point3], step: usize) -> Result<Evaluation> {
        let cloud = PointCloud::new(points.to_vec())
            .map_err(|_| Error::NonFiniteAtStep { what: "coordinates", step })?;
        let report = topo_loss_grad(&cloud)?;
        let mut grad = report.per_point_grad;
        let mut anchor = 0.0;
        if let Some(target) = self.target {
            let n = points.len() as f64;
            let scale = self.anchor_weight / n;
            for (i, (p, t)) in points.iter().zip(target.points()).enumerate() {
                for c in 0..3 {
                    let d = p[c] - t[c];
                    anchor += d.abs();
                    if d != 0.0 {
                        grad[i][c] += scale * d.signum();
                    }
                }
            }
            anchor /= n;
        }
        let total = report.loss + self.anchor_weight * anchor;
        if !total.is_finite() {
            return Err(Error::NonFiniteAtStep { what: "loss", step });
        }
        if grad.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteAtStep { what: "gradient", step });
        }
        Ok(Evaluation {
            topo: report.loss,
            anchor,
            total,
            grad,
        })
    }
}

/// Runs gradient descent on the cloud's coordinates.
///
/// With a target, the objective is `topo_loss + anchor_weight * mean(|x - t|_1)`
/// over index-corresponding points. Returns an error if the target length
/// differs from the cloud or if a non-finite loss or gradient appears.
pub fn optimize_backbone(
    cloud: &PointCloud,
    target: Option<&PointCloud>,
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    cfg.validate()?;
    let n = cloud.len();
    if n < 2 {
        return Err(Error::DegenerateGraph(n));
    }
    if let Some(t) = target {
        if t.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "target has {} points, cloud has {}",
                t.len(),
                n
            )));
        }
    }

    let objective = Objective {
        target,
        anchor_weight: cfg.anchor_weight,
    };
    let mut points: Vec<Point3> = cloud.points().to_vec();
    let mut eval = objective.eval(&points, 0)?;

    let mut trace = OptimizationTrace {
        snapshots: Vec::new(),
        history: Vec::new(),
        final_cloud: cloud.clone(),
    };
    record(&mut trace, 0, &eval);
    snapshot(&mut trace, 0, &points, &eval);

    let mut last_snapshot_step = 0;
    let mut step = 0;
    for s in 1..=cfg.steps {
        let grad_sq: f64 = eval.grad.iter().flatten().map(|g| g * g).sum();
        if grad_sq == 0.0 {
            break;
        }

        let next = if cfg.backtracking {
            let mut accepted = None;
            let mut stride = cfg.step_size;
            for _ in 0..=MAX_HALVINGS {
                let candidate = step_points(&points, &eval.grad, stride);
                let cand_eval = objective.eval(&candidate, s)?;
                if cand_eval.total <= eval.total - ARMIJO_C * stride * grad_sq {
                    accepted = Some((candidate, cand_eval));
                    break;
                }
                stride *= 0.5;
            }
            match accepted {
                Some(next) => next,
                // No decreasing step exists at float precision; stop here.
                None => break,
            }
        } else {
            let candidate = step_points(&points, &eval.grad, cfg.step_size);
            let cand_eval = objective.eval(&candidate, s)?;
            (candidate, cand_eval)
        };

        points = next.0;
        eval = next.1;
        step = s;
        record(&mut trace, s, &eval);
        if s % cfg.record_every == 0 {
            snapshot(&mut trace, s, &points, &eval);
            last_snapshot_step = s;
        }
    }

    if last_snapshot_step != step {
        snapshot(&mut trace, step, &points, &eval);
    }
    trace.final_cloud = PointCloud::new(points).expect("optimizer keeps coordinates finite");
    Ok(trace)
}

fn record(trace: &mut OptimizationTrace, step: usize, e: &Evaluation) {
    trace.history.push(LossRecord {
        step,
        topo: e.topo,
        anchor: e.anchor,
        total: e.total,
    });
}

fn snapshot(trace: &mut OptimizationTrace, step: usize, points: &[Point3], e: &Evaluation) {
    trace.snapshots.push(Snapshot {
        step,
        cloud: PointCloud::new(points.to_vec()).expect("optimizer keeps coordinates finite"),
        topo_loss: e.topo,
        anchor_loss: e.anchor,
    });
}

fn step_points(points: &[Point3], grad: &[[f64; 3]], stride: f64) -> Vec<Point3> {
    points
        .iter()
        .zip(grad)
        .map(|(p, g)| [p[0] - stride * g[0], p[1] - stride * g[1], p[2] - stride * g[2]])
        .collect()
}
