//! Regression tree with exhaustive MAE split search.
//!
//! Every split is chosen by scanning all (feature, threshold) candidates,
//! with thresholds at midpoints between consecutive distinct sorted feature
//! values, and minimizing the total absolute deviation of both children
//! from their medians. Ties break to the lowest feature index, then the
//! smallest threshold. Leaves predict the median (even counts: mean of the
//! two middle values).
//!
//! Child costs are always computed by summing the child's target values in
//! ascending value order, so costs — and therefore whole trees — are exact
//! functions of the data multiset, independent of row order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Depth 0 means a single leaf at the root.
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: f64,
        n: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    root: TreeNode,
    n_features: usize,
}

/// Median of values already sorted ascending.
fn sorted_median(ys: &[f64]) -> f64 {
    let m = ys.len();
    debug_assert!(m > 0);
    if m % 2 == 1 {
        ys[m / 2]
    } else {
        (ys[m / 2 - 1] + ys[m / 2]) / 2.0
    }
}

/// Total absolute deviation from the median for values sorted ascending:
/// sum of the top half minus sum of the bottom half.
fn sorted_abs_cost(ys: &[f64]) -> f64 {
    let m = ys.len();
    let h = m / 2;
    let bottom: f64 = ys[..h].iter().sum();
    let top: f64 = ys[m - h..].iter().sum();
    top - bottom
}

/// Target values of a child kept sorted while the sweep moves rows across
/// the split point.
struct SortedTargets {
    ys: Vec<f64>,
}

impl SortedTargets {
    fn empty(capacity: usize) -> Self {
        SortedTargets {
            ys: Vec::with_capacity(capacity),
        }
    }

    fn full(mut ys: Vec<f64>) -> Self {
        ys.sort_by(f64::total_cmp);
        SortedTargets { ys }
    }

    fn insert(&mut self, y: f64) {
        let pos = self.ys.partition_point(|v| *v < y);
        self.ys.insert(pos, y);
    }

    fn remove(&mut self, y: f64) {
        let pos = self.ys.partition_point(|v| *v < y);
        debug_assert!(self.ys[pos] == y);
        self.ys.remove(pos);
    }

    fn cost(&self) -> f64 {
        sorted_abs_cost(&self.ys)
    }
}

struct BestSplit {
    cost: f64,
    feature: usize,
    threshold: f64,
}

fn find_best_split(x: &[Vec<f64>], y: &[f64], rows: &[usize]) -> Option<BestSplit> {
    let m = rows.len();
    let d = x[rows[0]].len();
    let mut best: Option<BestSplit> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for feature in 0..d {
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        let mut left = SortedTargets::empty(m);
        let mut right = SortedTargets::full(order.iter().map(|&i| y[i]).collect());
        for k in 0..m - 1 {
            let moved = y[order[k]];
            right.remove(moved);
            left.insert(moved);
            let (a, b) = (x[order[k]][feature], x[order[k + 1]][feature]);
            if a == b {
                continue;
            }
            let threshold = (a + b) / 2.0;
            let cost = left.cost() + right.cost();
            // Strict comparison plus ascending enumeration implements the
            // (cost, feature, threshold) tie-break.
            if best.as_ref().is_none_or(|s| cost < s.cost) {
                best = Some(BestSplit {
                    cost,
                    feature,
                    threshold,
                });
            }
        }
    }
    best
}

fn build_node(x: &[Vec<f64>], y: &[f64], rows: &[usize], depth_left: usize) -> TreeNode {
    let mut ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    ys.sort_by(f64::total_cmp);
    let pure = ys.windows(2).all(|w| w[0] == w[1]);
    if depth_left == 0 || rows.len() < 2 || pure {
        return TreeNode::Leaf {
            value: sorted_median(&ys),
            n: rows.len(),
        };
    }
    let Some(split) = find_best_split(x, y, rows) else {
        // Every feature is constant on this node.
        return TreeNode::Leaf {
            value: sorted_median(&ys),
            n: rows.len(),
        };
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| x[i][split.feature] <= split.threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(build_node(x, y, &left_rows, depth_left - 1)),
        right: Box::new(build_node(x, y, &right_rows, depth_left - 1)),
    }
}

impl RegressionTree {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: TreeParams) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        debug_assert_eq!(x.len(), y.len());
        let rows: Vec<usize> = (0..x.len()).collect();
        Ok(RegressionTree {
            root: build_node(x, y, &rows, params.max_depth),
            n_features: x[0].len(),
        })
    }

    pub fn predict_one(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.n_features {
            return Err(Error::WrongDimension {
                expected: self.n_features,
                got: q.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return Ok(*value),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if q[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn splits_step_data_at_the_gap() {
        let x = column(&[1.0, 2.0, 3.0, 4.0]);
        let y = [0.0, 0.0, 10.0, 10.0];
        let tree = RegressionTree::fit(&x, &y, TreeParams { max_depth: 2 }).unwrap();
        match tree.root() {
            TreeNode::Split {
                feature, threshold, left, right,
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
                assert_eq!(**left, TreeNode::Leaf { value: 0.0, n: 2 });
                assert_eq!(**right, TreeNode::Leaf { value: 10.0, n: 2 });
            }
            other => panic!("expected a split, got {other:?}"),
        }
        for (xi, yi) in x.iter().zip(y) {
            assert_eq!(tree.predict_one(xi).unwrap(), yi);
        }
    }

    #[test]
    fn constant_targets_give_a_single_leaf() {
        let x = column(&[1.0, 2.0, 3.0]);
        let y = [4.2, 4.2, 4.2];
        let tree = RegressionTree::fit(&x, &y, TreeParams { max_depth: 5 }).unwrap();
        assert_eq!(*tree.root(), TreeNode::Leaf { value: 4.2, n: 3 });
    }

    #[test]
    fn depth_zero_predicts_the_median() {
        let x = column(&[1.0, 2.0, 3.0, 4.0]);
        let y = [1.0, 2.0, 10.0, 20.0];
        let tree = RegressionTree::fit(&x, &y, TreeParams { max_depth: 0 }).unwrap();
        // Even count: mean of the two middle values.
        assert_eq!(*tree.root(), TreeNode::Leaf { value: 6.0, n: 4 });
        let y_odd = [1.0, 7.0, 20.0];
        let tree = RegressionTree::fit(&column(&[1.0, 2.0, 3.0]), &y_odd, TreeParams { max_depth: 0 })
            .unwrap();
        assert_eq!(*tree.root(), TreeNode::Leaf { value: 7.0, n: 3 });
    }

    #[test]
    fn constant_features_with_mixed_targets_become_a_leaf() {
        let x = vec![vec![1.0, 2.0]; 4];
        let y = [0.0, 1.0, 2.0, 3.0];
        let tree = RegressionTree::fit(&x, &y, TreeParams { max_depth: 3 }).unwrap();
        assert_eq!(*tree.root(), TreeNode::Leaf { value: 1.5, n: 4 });
    }

    #[test]
    fn training_mae_is_non_increasing_in_depth() {
        // Deterministic wiggly data.
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 3.0).collect();
        let x = column(&xs);
        let y: Vec<f64> = xs.iter().map(|v| (v * 1.3).sin() * 5.0 + v * 0.2).collect();
        let mut prev = f64::INFINITY;
        for depth in 0..8 {
            let tree = RegressionTree::fit(&x, &y, TreeParams { max_depth: depth }).unwrap();
            let mae: f64 = x
                .iter()
                .zip(&y)
                .map(|(xi, yi)| (tree.predict_one(xi).unwrap() - yi).abs())
                .sum::<f64>()
                / y.len() as f64;
            assert!(
                mae <= prev + 1e-12,
                "depth {depth}: mae {mae} > previous {prev}"
            );
            prev = mae;
        }
    }

    #[test]
    fn equal_cost_splits_prefer_lowest_feature_then_smallest_threshold() {
        // Feature 1 separates the targets exactly like feature 0.
        let x = vec![
            vec![0.0, 10.0],
            vec![1.0, 11.0],
            vec![2.0, 12.0],
            vec![3.0, 13.0],
        ];
        let y = [0.0, 0.0, 8.0, 8.0];
        let tree = RegressionTree::fit(&x, &y, TreeParams { max_depth: 1 }).unwrap();
        match tree.root() {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 1.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn row_order_does_not_change_the_tree() {
        let x = vec![
            vec![0.5, 3.0],
            vec![1.5, 1.0],
            vec![2.5, 4.0],
            vec![3.5, 1.5],
            vec![4.5, 2.0],
            vec![5.5, 0.5],
        ];
        let y = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let tree = RegressionTree::fit(&x, &y, TreeParams { max_depth: 4 }).unwrap();
        let perm = [5usize, 2, 0, 4, 1, 3];
        let xp: Vec<Vec<f64>> = perm.iter().map(|&i| x[i].clone()).collect();
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let tree_p = RegressionTree::fit(&xp, &yp, TreeParams { max_depth: 4 }).unwrap();
        assert_eq!(tree.root(), tree_p.root());
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let tree =
            RegressionTree::fit(&column(&[1.0, 2.0]), &[1.0, 2.0], TreeParams { max_depth: 1 })
                .unwrap();
        assert!(matches!(
            tree.predict_one(&[1.0, 2.0]),
            Err(Error::WrongDimension { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn empty_training_set_is_an_error() {
        let e = RegressionTree::fit(&[], &[], TreeParams { max_depth: 1 });
        assert!(matches!(e, Err(Error::EmptyTrainingSet)));
    }
}
