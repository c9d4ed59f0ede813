//! Exact k-nearest-neighbor graph construction.
//!
//! Low-dimensional inputs go through a kd-tree, high-dimensional ones through
//! a brute-force scan; both rank candidates by `(squared distance, index)` so
//! the result is deterministic and identical across the two paths. Distance
//! ties are broken toward the smaller point index.

use crate::cloud::{sq_dist, FeatureSet};
use crate::error::{Error, Result};
use crate::exec;

/// Above this dimension a kd-tree no longer prunes effectively and the
/// brute-force scan wins.
const KDTREE_MAX_DIM: usize = 8;
const KDTREE_MIN_POINTS: usize = 64;
const LEAF_SIZE: usize = 16;

/// k-nearest-neighbor graph: for each node, its `k` neighbors ordered by
/// ascending distance (ties by smaller index). Self-loops are excluded and
/// `k` is clamped to `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    n: usize,
    k: usize,
    neighbors: Vec<u32>,
}

impl KnnGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbors per node (after clamping to `n - 1`).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Ordered neighbor indices of node `i`.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }
}

/// Builds the exact k-NN graph of `points` under Euclidean distance in the
/// feature space.
pub fn knn_graph(points: &FeatureSet, k: usize) -> Result<KnnGraph> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateGraph(n));
    }
    if k < 1 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let k = k.min(n - 1);

    let neighbors = if points.dim() <= KDTREE_MAX_DIM && n >= KDTREE_MIN_POINTS {
        let tree = KdTree::build(points);
        exec::flat_map_range(n, |i| {
            let mut best = BestK::new(k);
            tree.search(points.row(i), Some(i as u32), &mut best);
            best.into_indices()
        })
    } else {
        exec::flat_map_range(n, |i| {
            let query = points.row(i);
            let mut candidates: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (sq_dist(query, points.row(j)), j as u32))
                .collect();
            candidates.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            candidates.truncate(k);
            candidates.into_iter().map(|(_, j)| j).collect()
        })
    };

    Ok(KnnGraph { n, k, neighbors })
}

/// Squared distance from `query` to its nearest point in `points`.
pub(crate) fn nearest_sq_dist(tree: &KdTree, query: &[f64]) -> f64 {
    let mut best = BestK::new(1);
    tree.search(query, None, &mut best);
    best.entries[0].0
}

/// Bounded candidate list ordered by `(squared distance, index)`.
struct BestK {
    k: usize,
    entries: Vec<(f64, u32)>,
}

impl BestK {
    fn new(k: usize) -> Self {
        Self {
            k,
            entries: Vec::with_capacity(k + 1),
        }
    }

    fn worst_sq(&self) -> Option<f64> {
        if self.entries.len() < self.k {
            None
        } else {
            Some(self.entries[self.k - 1].0)
        }
    }

    fn offer(&mut self, sq: f64, idx: u32) {
        let cand = (sq, idx);
        if self.entries.len() == self.k {
            let worst = self.entries[self.k - 1];
            if cand.0.total_cmp(&worst.0).then(cand.1.cmp(&worst.1)).is_ge() {
                return;
            }
        }
        let pos = self
            .entries
            .partition_point(|e| e.0.total_cmp(&cand.0).then(e.1.cmp(&cand.1)).is_lt());
        self.entries.insert(pos, cand);
        self.entries.truncate(self.k);
    }

    fn into_indices(self) -> Vec<u32> {
        self.entries.into_iter().map(|(_, j)| j).collect()
    }
}

enum KdNode {
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        start: usize,
        len: usize,
    },
}

/// Static kd-tree over a feature set. Queries return exact results: a subtree
/// is pruned only when its distance lower bound strictly exceeds the current
/// worst candidate, so equidistant points are still visited and the index
/// tie-break stays exact.
pub(crate) struct KdTree<'a> {
    points: &'a FeatureSet,
    nodes: Vec<KdNode>,
    order: Vec<u32>,
}

impl<'a> KdTree<'a> {
    pub(crate) fn build(points: &'a FeatureSet) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        build_node(points, &mut order, 0, points.len(), &mut nodes);
        Self {
            points,
            nodes,
            order,
        }
    }

    fn search(&self, query: &[f64], skip: Option<u32>, best: &mut BestK) {
        self.search_node(self.nodes.len() - 1, query, skip, best);
    }

    fn search_node(&self, node: usize, query: &[f64], skip: Option<u32>, best: &mut BestK) {
        match self.nodes[node] {
            KdNode::Leaf { start, len } => {
                for &idx in &self.order[start..start + len] {
                    if skip == Some(idx) {
                        continue;
                    }
                    let sq = sq_dist(query, self.points.row(idx as usize));
                    best.offer(sq, idx);
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let gap = query[axis] - value;
                let (near, far) = if gap < 0.0 { (left, right) } else { (right, left) };
                self.search_node(near, query, skip, best);
                let bound = gap * gap;
                if best.worst_sq().is_none_or(|w| bound <= w) {
                    self.search_node(far, query, skip, best);
                }
            }
        }
    }
}

/// Builds the subtree over `order[lo..hi]`; returns its node index.
fn build_node(
    points: &FeatureSet,
    order: &mut [u32],
    lo: usize,
    hi: usize,
    nodes: &mut Vec<KdNode>,
) -> usize {
    let len = hi - lo;
    if len <= LEAF_SIZE {
        nodes.push(KdNode::Leaf { start: lo, len });
        return nodes.len() - 1;
    }

    // Split on the axis with the widest spread.
    let dim = points.dim();
    let mut axis = 0;
    let mut best_spread = f64::NEG_INFINITY;
    for d in 0..dim {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &idx in &order[lo..hi] {
            let v = points.row(idx as usize)[d];
            min = min.min(v);
            max = max.max(v);
        }
        let spread = max - min;
        if spread > best_spread {
            best_spread = spread;
            axis = d;
        }
    }

    let mid = len / 2;
    order[lo..hi].select_nth_unstable_by(mid, |&a, &b| {
        let va = points.row(a as usize)[axis];
        let vb = points.row(b as usize)[axis];
        va.total_cmp(&vb).then(a.cmp(&b))
    });
    let value = points.row(order[lo + mid] as usize)[axis];

    let left = build_node(points, order, lo, lo + mid, nodes);
    let right = build_node(points, order, lo + mid, hi, nodes);
    nodes.push(KdNode::Split {
        axis,
        value,
        left,
        right,
    });
    nodes.len() - 1
}
