//! K-fold grid search over forest depth and tree count.

use std::io::Write;

use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::{ForestConfig, ForestModel};
use super::metrics::rmse;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunePoint {
    pub max_depth: usize,
    pub n_estimators: usize,
    /// Mean of the per-fold validation RMSEs.
    pub cv_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: TunePoint,
    pub folds: usize,
    /// Every grid point, depth-major, both axes ascending.
    pub grid: Vec<TunePoint>,
}

impl TuneResult {
    /// CV loss against depth at the best tree count.
    pub fn depth_curve(&self) -> Vec<TunePoint> {
        self.grid
            .iter()
            .copied()
            .filter(|p| p.n_estimators == self.best.n_estimators)
            .collect()
    }

    /// CV loss against tree count at the best depth.
    pub fn tree_curve(&self) -> Vec<TunePoint> {
        self.grid
            .iter()
            .copied()
            .filter(|p| p.max_depth == self.best.max_depth)
            .collect()
    }

    /// `max_depth,n_estimators,cv_rmse`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "max_depth,n_estimators,cv_rmse")?;
        for p in &self.grid {
            writeln!(out, "{},{},{}", p.max_depth, p.n_estimators, p.cv_rmse)?;
        }
        Ok(())
    }
}

fn sorted_unique(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Pools training and validation rows and scores every `(depth, trees)` pair by k-fold
/// cross-validation. Ties go to the smaller depth, then to fewer trees.
///
/// Tree `t` of a forest depends only on the seed and `t`, so one forest with the largest
/// tree count per `(depth, fold)` yields every smaller count as a prefix.
#[allow(clippy::too_many_arguments)]
pub fn tune_forest(
    train_x: ArrayView2<f64>,
    train_y: ArrayView1<f64>,
    val_x: ArrayView2<f64>,
    val_y: ArrayView1<f64>,
    depth_grid: &[usize],
    estimator_grid: &[usize],
    folds: usize,
    seed: u64,
) -> Result<TuneResult> {
    let depths = sorted_unique(depth_grid);
    let trees = sorted_unique(estimator_grid);
    if depths.is_empty() || trees.is_empty() {
        return Err(Error::domain("tuning grids must not be empty"));
    }
    if depths[0] == 0 || trees[0] == 0 {
        return Err(Error::domain("depths and tree counts must be positive"));
    }
    if folds < 2 {
        return Err(Error::domain("cross-validation needs at least two folds"));
    }
    let x: Array2<f64> = concatenate(Axis(0), &[train_x, val_x])
        .map_err(|e| Error::domain(format!("feature shapes differ: {e}")))?;
    let y: Array1<f64> = concatenate(Axis(0), &[train_y, val_y])
        .map_err(|e| Error::domain(format!("target shapes differ: {e}")))?;
    let n = x.nrows();
    if n < folds {
        return Err(Error::domain(format!("{n} samples cannot fill {folds} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let fold_of: Vec<Vec<usize>> = {
        let (base, extra) = (n / folds, n % folds);
        let mut out = Vec::with_capacity(folds);
        let mut start = 0;
        for k in 0..folds {
            let len = base + usize::from(k < extra);
            out.push(order[start..start + len].to_vec());
            start += len;
        }
        out
    };
    let max_trees = *trees.last().expect("non-empty");

    let tasks: Vec<(usize, usize)> = depths
        .iter()
        .flat_map(|&d| (0..folds).map(move |k| (d, k)))
        .collect();
    // scores[task][tree index] = RMSE on the held-out fold.
    let scores: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(depth, k)| {
            let held = &fold_of[k];
            let fit_rows: Vec<usize> = (0..folds)
                .filter(|&j| j != k)
                .flat_map(|j| fold_of[j].iter().copied())
                .collect();
            let fx = x.select(Axis(0), &fit_rows);
            let fy = y.select(Axis(0), &fit_rows);
            let hx = x.select(Axis(0), held);
            let hy = y.select(Axis(0), held);
            let forest = ForestModel::fit(
                fx.view(),
                fy.view(),
                ForestConfig {
                    max_depth: Some(depth),
                    n_estimators: max_trees,
                    bootstrap: true,
                    seed,
                },
            )?;
            let truth = hy.to_vec();
            trees
                .iter()
                .map(|&t| rmse(&truth, &forest.predict_prefix(hx.view(), t).to_vec()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut grid = Vec::with_capacity(depths.len() * trees.len());
    for (di, &depth) in depths.iter().enumerate() {
        for (ti, &t) in trees.iter().enumerate() {
            let cv = (0..folds).map(|k| scores[di * folds + k][ti]).sum::<f64>() / folds as f64;
            grid.push(TunePoint {
                max_depth: depth,
                n_estimators: t,
                cv_rmse: cv,
            });
        }
    }
    let best = grid
        .iter()
        .copied()
        .reduce(|a, b| if b.cv_rmse < a.cv_rmse { b } else { a })
        .expect("non-empty grid");
    Ok(TuneResult { best, folds, grid })
}
