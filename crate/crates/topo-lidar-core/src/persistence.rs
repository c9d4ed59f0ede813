//! 0-dimensional persistent homology.
//!
//! Two filtrations are supported. The flag filtration over a point set grows
//! an edge between every pair of points at their Euclidean distance; all
//! vertices are born at 0, and the finite deaths are exactly the edge weights
//! of the Euclidean minimum spanning tree. The sub-level set filtration over
//! a scalar grid births each cell at its value and inserts grid edges at the
//! maximum of their endpoint values.
//!
//! Both reduce to Kruskal's algorithm with an elder-rule union-find: edges
//! are processed in ascending `(value, u, v)` order, which pins every
//! tie-break and makes diagrams (including generator edges) deterministic.
//! Edge-weight computation may run in parallel; the sort and union-find
//! phases are sequential.

use crate::cloud::{dist, FeatureSet, PointCloud};
use crate::error::{Error, Result};
use crate::exec;
use crate::union_find::ElderUnionFind;

/// A finite birth/death pair together with the edge whose insertion killed
/// the class (the merging edge), when known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
    pub edge: Option<(usize, usize)>,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Multiset of finite 0-dimensional pairs plus the births of essential
/// (never-dying) classes, one per connected component at the end of the
/// filtration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    finite: Vec<PersistencePair>,
    essential_births: Vec<f64>,
}

impl PersistenceDiagram {
    pub fn new(finite: Vec<PersistencePair>, essential_births: Vec<f64>) -> Self {
        Self {
            finite,
            essential_births,
        }
    }

    pub fn finite_pairs(&self) -> &[PersistencePair] {
        &self.finite
    }

    pub fn essential_births(&self) -> &[f64] {
        &self.essential_births
    }

    /// Number of classes alive at scale `alpha`: finite bars with
    /// `birth <= alpha < death` plus essential bars with `birth <= alpha`.
    pub fn betti0_at(&self, alpha: f64) -> usize {
        let finite = self
            .finite
            .iter()
            .filter(|p| p.birth <= alpha && alpha < p.death)
            .count();
        let essential = self
            .essential_births
            .iter()
            .filter(|&&b| b <= alpha)
            .count();
        finite + essential
    }

    /// Sum of `death - birth` over the finite pairs.
    pub fn total_persistence(&self) -> f64 {
        self.finite.iter().map(|p| p.persistence()).sum()
    }
}

/// Number of components alive at `alpha` (free-function form of
/// [`PersistenceDiagram::betti0_at`]).
pub fn betti0_at(diagram: &PersistenceDiagram, alpha: f64) -> usize {
    diagram.betti0_at(alpha)
}

/// An edge of a filtration: vertex pair `u < v` appearing at `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationEdge {
    pub u: usize,
    pub v: usize,
    pub value: f64,
}

impl FiltrationEdge {
    pub fn new(u: usize, v: usize, value: f64) -> Result<Self> {
        if u >= v {
            return Err(Error::InvalidConfig(format!(
                "filtration edge requires u < v, got ({u}, {v})"
            )));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite("filtration edge value"));
        }
        Ok(Self { u, v, value })
    }
}

#[derive(Clone, Copy)]
struct RawEdge {
    w: f64,
    u: u32,
    v: u32,
}

/// 0-dim persistence of the flag filtration over a 3-D point cloud.
///
/// All vertices are born at 0. With `alpha_max` set, edges longer than the
/// cap never enter the filtration, so clusters farther apart than the cap
/// stay separate and each contributes an essential bar.
pub fn flag_ph0(cloud: &PointCloud, alpha_max: Option<f64>) -> Result<PersistenceDiagram> {
    flag_ph0_features(&cloud.to_feature_set(), alpha_max)
}

/// Flag filtration under Euclidean distance in an arbitrary feature space.
pub fn flag_ph0_features(
    points: &FeatureSet,
    alpha_max: Option<f64>,
) -> Result<PersistenceDiagram> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyInput("flag filtration"));
    }

    let mut edges: Vec<RawEdge> = exec::flat_map_range(n, |u| {
        let row_u = points.row(u);
        let mut out = Vec::with_capacity(n - 1 - u);
        for v in u + 1..n {
            let w = dist(row_u, points.row(v));
            if alpha_max.is_none_or(|cap| w <= cap) {
                out.push(RawEdge {
                    w,
                    u: u as u32,
                    v: v as u32,
                });
            }
        }
        out
    });
    edges.sort_unstable_by(|a, b| {
        a.w.total_cmp(&b.w)
            .then(a.u.cmp(&b.u))
            .then(a.v.cmp(&b.v))
    });

    let mut uf = ElderUnionFind::new_uniform(n, 0.0);
    let mut finite = Vec::with_capacity(n.saturating_sub(1));
    for e in &edges {
        if let Some(birth) = uf.union_elder(e.u, e.v) {
            finite.push(PersistencePair {
                birth,
                death: e.w,
                edge: Some((e.u as usize, e.v as usize)),
            });
            if finite.len() == n - 1 {
                break;
            }
        }
    }
    let essential_births = uf.component_births();
    Ok(PersistenceDiagram {
        finite,
        essential_births,
    })
}

/// Neighborhood structure of the grid filtration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridConnectivity {
    /// Horizontal and vertical neighbors.
    Four,
    /// 4-connectivity plus one fixed diagonal `(r, c)-(r+1, c+1)` per cell.
    Triangulated,
}

/// Non-empty H x W grid of finite scalars, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || values.is_empty() {
            return Err(Error::EmptyInput("scalar grid"));
        }
        if values.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                height,
                width
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("scalar grid values"));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Sub-level set persistence of a scalar grid. Zero-persistence pairs are
/// suppressed; use [`sublevel_ph0_with`] to retain them.
pub fn sublevel_ph0(grid: &ScalarGrid, connectivity: GridConnectivity) -> Result<PersistenceDiagram> {
    sublevel_ph0_with(grid, connectivity, false)
}

/// Sub-level set persistence with explicit control over pairs that die at
/// their birth value.
pub fn sublevel_ph0_with(
    grid: &ScalarGrid,
    connectivity: GridConnectivity,
    keep_zero_persistence: bool,
) -> Result<PersistenceDiagram> {
    let (h, w) = (grid.height, grid.width);
    let idx = |r: usize, c: usize| (r * w + c) as u32;

    let mut edges: Vec<RawEdge> = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let u = idx(r, c);
            let fu = grid.value(r, c);
            if c + 1 < w {
                let v = idx(r, c + 1);
                edges.push(RawEdge {
                    w: fu.max(grid.value(r, c + 1)),
                    u,
                    v,
                });
            }
            if r + 1 < h {
                let v = idx(r + 1, c);
                edges.push(RawEdge {
                    w: fu.max(grid.value(r + 1, c)),
                    u,
                    v,
                });
            }
            if connectivity == GridConnectivity::Triangulated && r + 1 < h && c + 1 < w {
                let v = idx(r + 1, c + 1);
                edges.push(RawEdge {
                    w: fu.max(grid.value(r + 1, c + 1)),
                    u,
                    v,
                });
            }
        }
    }
    edges.sort_unstable_by(|a, b| {
        a.w.total_cmp(&b.w)
            .then(a.u.cmp(&b.u))
            .then(a.v.cmp(&b.v))
    });

    let mut uf = ElderUnionFind::new_with_births(grid.values());
    let mut finite = Vec::new();
    for e in &edges {
        if let Some(birth) = uf.union_elder(e.u, e.v) {
            if keep_zero_persistence || e.w > birth {
                finite.push(PersistencePair {
                    birth,
                    death: e.w,
                    edge: Some((e.u as usize, e.v as usize)),
                });
            }
        }
    }
    let essential_births = uf.component_births();
    Ok(PersistenceDiagram {
        finite,
        essential_births,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(points.to_vec()).unwrap()
    }

    fn deaths(d: &PersistenceDiagram) -> Vec<f64> {
        let mut v: Vec<f64> = d.finite_pairs().iter().map(|p| p.death).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn collinear_points_pair_on_gaps() {
        let d = flag_ph0(&cloud(&[[0.0; 3], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]]), None).unwrap();
        assert_eq!(deaths(&d), vec![1.0, 2.0]);
        assert!(d.finite_pairs().iter().all(|p| p.birth == 0.0));
        assert_eq!(d.essential_births(), &[0.0]);

        assert_eq!(d.betti0_at(1.5), 2);
        assert_eq!(d.betti0_at(2.0), 1);
        assert_eq!(d.betti0_at(-0.5), 0);
    }

    #[test]
    fn unit_square_diagonal_never_enters_mst() {
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
        assert_eq!(deaths(&d), vec![1.0, 1.0, 1.0]);
        assert_eq!(d.essential_births().len(), 1);
    }

    #[test]
    fn alpha_cap_splits_clusters() {
        let d = flag_ph0(
            &cloud(&[[0.0; 3], [0.5, 0.0, 0.0], [10.0, 0.0, 0.0], [10.5, 0.0, 0.0]]),
            Some(1.0),
        )
        .unwrap();
        assert_eq!(d.essential_births().len(), 2);
        assert_eq!(deaths(&d), vec![0.5, 0.5]);
    }

    #[test]
    fn single_point_is_one_essential_bar() {
        let d = flag_ph0(&cloud(&[[1.0, 2.0, 3.0]]), None).unwrap();
        assert!(d.finite_pairs().is_empty());
        assert_eq!(d.essential_births(), &[0.0]);
    }

    #[test]
    fn generator_edges_are_mst_edges() {
        let d = flag_ph0(&cloud(&[[0.0; 3], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]]), None).unwrap();
        let edges: Vec<_> = d.finite_pairs().iter().map(|p| p.edge.unwrap()).collect();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn sublevel_worked_example_1x5() {
        let grid = ScalarGrid::new(1, 5, vec![2.0, 5.0, 1.0, 6.0, 3.0]).unwrap();
        let d = sublevel_ph0(&grid, GridConnectivity::Four).unwrap();
        let mut pairs: Vec<(f64, f64)> =
            d.finite_pairs().iter().map(|p| (p.birth, p.death)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(pairs, vec![(2.0, 5.0), (3.0, 6.0)]);
        assert_eq!(d.essential_births(), &[1.0]);
    }

    #[test]
    fn constant_grid_has_one_essential_bar() {
        let grid = ScalarGrid::new(3, 3, vec![7.0; 9]).unwrap();
        let d = sublevel_ph0(&grid, GridConnectivity::Four).unwrap();
        assert!(d.finite_pairs().is_empty());
        assert_eq!(d.essential_births(), &[7.0]);
    }

    #[test]
    fn zero_persistence_retention_accounts_for_all_merges() {
        let grid = ScalarGrid::new(2, 2, vec![1.0, 1.0, 2.0, 1.0]).unwrap();
        let kept = sublevel_ph0_with(&grid, GridConnectivity::Four, true).unwrap();
        // 4 vertices merging into 1 component means exactly 3 finite pairs.
        assert_eq!(kept.finite_pairs().len(), 3);
        let suppressed = sublevel_ph0(&grid, GridConnectivity::Four).unwrap();
        assert!(suppressed.finite_pairs().len() < 3);
        assert_eq!(kept.essential_births(), suppressed.essential_births());
    }

    #[test]
    fn triangulated_connects_diagonal_neighbors() {
        // Low corners on the main diagonal, high elsewhere.
        let grid = ScalarGrid::new(2, 2, vec![0.0, 9.0, 9.0, 1.0]).unwrap();
        let four = sublevel_ph0(&grid, GridConnectivity::Four).unwrap();
        // Under 4-connectivity the two low cells only meet through value 9.
        assert!(four.finite_pairs().iter().any(|p| p.death == 9.0));
        let tri = sublevel_ph0(&grid, GridConnectivity::Triangulated).unwrap();
        // The diagonal edge joins them at value 1, a zero-persistence merge.
        assert!(tri.finite_pairs().is_empty());
        assert_eq!(tri.essential_births(), &[0.0]);
    }

    #[test]
    fn filtration_edge_validation() {
        assert!(FiltrationEdge::new(2, 1, 0.5).is_err());
        assert!(FiltrationEdge::new(1, 2, f64::NAN).is_err());
        assert!(FiltrationEdge::new(1, 2, 0.5).is_ok());
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(flag_ph0(&cloud(&[]), None).is_err());
        assert!(ScalarGrid::new(0, 3, vec![]).is_err());
    }
}
