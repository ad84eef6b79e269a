//! k-nearest-neighbor regression over a kd-tree.
//!
//! Neighbors are the k smallest (squared distance, training index) pairs in
//! lexicographic order, so results are fully deterministic even under
//! distance ties, and the kd-tree returns exactly what a brute-force scan
//! would. `leaf_size` tunes only the tree granularity and never changes
//! predictions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnWeights {
    Uniform,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub n_neighbors: usize,
    pub weights: KnnWeights,
    pub leaf_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum KdNode {
    Leaf {
        rows: Vec<usize>,
    },
    Split {
        dim: usize,
        value: f64,
        left: Box<KdNode>,
        right: Box<KdNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct KdTree {
    root: KdNode,
}

/// Squared Euclidean distance, summed in dimension order (the same order a
/// brute-force scan uses, so the floats agree exactly).
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

fn build_node(points: &[Vec<f64>], mut rows: Vec<usize>, leaf_size: usize) -> KdNode {
    if rows.len() <= leaf_size.max(1) {
        return KdNode::Leaf { rows };
    }
    // Split on the widest dimension; ties go to the lowest index.
    let d = points[rows[0]].len();
    let mut dim = 0;
    let mut best_spread = f64::NEG_INFINITY;
    for j in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in &rows {
            lo = lo.min(points[i][j]);
            hi = hi.max(points[i][j]);
        }
        if hi - lo > best_spread {
            best_spread = hi - lo;
            dim = j;
        }
    }
    if best_spread == 0.0 {
        // All points identical on every dimension.
        return KdNode::Leaf { rows };
    }
    rows.sort_by(|&a, &b| {
        points[a][dim]
            .total_cmp(&points[b][dim])
            .then(a.cmp(&b))
    });
    let mid = rows.len() / 2;
    let value = points[rows[mid]][dim];
    let right_rows = rows.split_off(mid);
    KdNode::Split {
        dim,
        value,
        left: Box::new(build_node(points, rows, leaf_size)),
        right: Box::new(build_node(points, right_rows, leaf_size)),
    }
}

/// Neighbor candidate ordered by (squared distance, index).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Neighbor {
    d2: f64,
    row: usize,
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.row.cmp(&other.row))
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct KnnSearch<'a> {
    points: &'a [Vec<f64>],
    query: &'a [f64],
    k: usize,
    /// Max-heap: the worst kept neighbor sits on top.
    heap: BinaryHeap<Neighbor>,
}

impl<'a> KnnSearch<'a> {
    fn offer(&mut self, row: usize) {
        let cand = Neighbor {
            d2: dist2(self.query, &self.points[row]),
            row,
        };
        if self.heap.len() < self.k {
            self.heap.push(cand);
        } else if cand < *self.heap.peek().unwrap() {
            self.heap.pop();
            self.heap.push(cand);
        }
    }

    fn visit(&mut self, node: &KdNode) {
        match node {
            KdNode::Leaf { rows } => {
                for &row in rows {
                    self.offer(row);
                }
            }
            KdNode::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = self.query[*dim] - value;
                let (near, far) = if diff <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.visit(near);
                // The far side can only hold points at least |diff| away in
                // this dimension. Equality still explores: an equally distant
                // point with a lower index would win the tie-break.
                if self.heap.len() < self.k || diff * diff <= self.heap.peek().unwrap().d2 {
                    self.visit(far);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnRegressor {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    params: KnnParams,
    tree: KdTree,
    n_features: usize,
}

impl KnnRegressor {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: KnnParams) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if params.n_neighbors == 0 {
            return Err(Error::InvalidValue {
                field: "n_neighbors",
                reason: "must be at least 1".into(),
            });
        }
        if params.n_neighbors > x.len() {
            return Err(Error::KTooLarge {
                k: params.n_neighbors,
                n: x.len(),
            });
        }
        let tree = KdTree {
            root: build_node(x, (0..x.len()).collect(), params.leaf_size),
        };
        Ok(KnnRegressor {
            x: x.to_vec(),
            y: y.to_vec(),
            params,
            tree,
            n_features: x[0].len(),
        })
    }

    /// The k nearest (squared distance, row) pairs, ascending.
    fn neighbors(&self, q: &[f64]) -> Vec<Neighbor> {
        let mut search = KnnSearch {
            points: &self.x,
            query: q,
            k: self.params.n_neighbors,
            heap: BinaryHeap::with_capacity(self.params.n_neighbors + 1),
        };
        search.visit(&self.tree.root);
        let mut out = search.heap.into_vec();
        out.sort();
        out
    }

    pub fn predict_one(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.n_features {
            return Err(Error::WrongDimension {
                expected: self.n_features,
                got: q.len(),
            });
        }
        let neighbors = self.neighbors(q);
        Ok(weighted_prediction(
            &neighbors
                .iter()
                .map(|n| (n.d2, self.y[n.row]))
                .collect::<Vec<_>>(),
            self.params.weights,
        ))
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

/// Combines (squared distance, target) pairs, ascending by distance.
/// Distance weighting uses 1/d; exact matches (distance zero) average the
/// zero-distance targets only.
fn weighted_prediction(pairs: &[(f64, f64)], weights: KnnWeights) -> f64 {
    match weights {
        KnnWeights::Uniform => {
            let s: f64 = pairs.iter().map(|(_, y)| y).sum();
            s / pairs.len() as f64
        }
        KnnWeights::Distance => {
            let zero: Vec<f64> = pairs
                .iter()
                .filter(|(d2, _)| *d2 == 0.0)
                .map(|(_, y)| *y)
                .collect();
            if !zero.is_empty() {
                return zero.iter().sum::<f64>() / zero.len() as f64;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for (d2, y) in pairs {
                let w = 1.0 / d2.sqrt();
                num += w * y;
                den += w;
            }
            num / den
        }
    }
}
