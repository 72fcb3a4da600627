//! Bagged CART regression trees.
//!
//! Tree `t` draws its bootstrap sample from `ChaCha8Rng::seed_from_u64(seed)` on stream
//! `t`, so trees can be built in any order or on any number of threads and the forest is
//! identical. Predictions are summed in tree order.

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    /// `None` grows until leaves are pure or features are exhausted.
    pub max_depth: Option<usize>,
    pub n_estimators: usize,
    /// Disabling bootstrap trains every tree on the full set (diagnostic mode).
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            max_depth: Some(10),
            n_estimators: 800,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, x: ArrayView1<f64>) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn fit(x: ArrayView2<f64>, y: ArrayView1<f64>, rows: Vec<usize>, max_depth: Option<usize>) -> Self {
        let mut tree = RegressionTree { nodes: Vec::new() };
        let mut builder = Builder {
            x,
            y,
            max_depth,
            nodes: &mut tree.nodes,
        };
        builder.grow(rows, 0);
        tree
    }
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    y: ArrayView1<'a, f64>,
    max_depth: Option<usize>,
    nodes: &'a mut Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let mean = rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64;
        self.nodes.push(Node::Leaf { value: mean });
        let pure = rows.iter().all(|&r| self.y[r] == self.y[rows[0]]);
        if pure || self.max_depth.is_some_and(|d| depth >= d) {
            return id;
        }
        let Some(best) = self.best_split(&rows) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.x[[i, best.feature]] <= best.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Minimising the children's summed squared error is maximising `Σₗ²/nₗ + Σᵣ²/nᵣ`.
    fn best_split(&self, rows: &[usize]) -> Option<BestSplit> {
        let n = rows.len();
        let total: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let mut best: Option<BestSplit> = None;
        let mut order = rows.to_vec();
        for f in 0..self.x.ncols() {
            order.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.y[order[k]];
                let (lo, hi) = (self.x[[order[k], f]], self.x[[order[k + 1], f]]);
                if lo == hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = (n - k - 1) as f64;
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / nl + right_sum * right_sum / nr;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    // Keep the midpoint strictly below `hi` when the values are adjacent floats.
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub trees: Vec<RegressionTree>,
}

impl ForestModel {
    pub fn fit(x: ArrayView2<f64>, y: ArrayView1<f64>, config: ForestConfig) -> Result<Self> {
        if config.n_estimators == 0 {
            return Err(Error::domain("n_estimators must be at least 1"));
        }
        if config.max_depth == Some(0) {
            return Err(Error::domain("max_depth must be at least 1"));
        }
        let n = x.nrows();
        if n == 0 || n != y.len() {
            return Err(Error::domain("training set is empty or mismatched"));
        }
        let trees = (0..config.n_estimators)
            .into_par_iter()
            .map(|t| {
                let rows = if config.bootstrap {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(t as u64);
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit(x, y, rows, config.max_depth)
            })
            .collect();
        Ok(ForestModel { config, trees })
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        self.predict_prefix(x, self.trees.len())
    }

    /// Prediction of the sub-forest made of the first `k` trees.
    pub fn predict_prefix(&self, x: ArrayView2<f64>, k: usize) -> Array1<f64> {
        let k = k.clamp(1, self.trees.len());
        x.rows()
            .into_iter()
            .map(|row| self.trees[..k].iter().map(|t| t.predict_row(row)).sum::<f64>() / k as f64)
            .collect()
    }
}
