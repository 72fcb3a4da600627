//! Cross-validated forest tuning: CV RMSE against depth and against tree count.

use metashap::dataset::{generate_bragg, GridSpec, SplitKind, Target};
use metashap::regress::{tune_forest, FeatureMap};
use metashap::sensitivity::DispersionEvaluator;

fn main() -> metashap::Result<()> {
    let ds = generate_bragg(&GridSpec::default(), &DispersionEvaluator::default())?.split(0.2, 0.2, 0)?;
    let (tx, ty) = ds.view(SplitKind::Train, Target::Cutoff);
    let (vx, vy) = ds.view(SplitKind::Val, Target::Cutoff);
    let (tx, vx) = (FeatureMap::Log10E.apply(tx.view()), FeatureMap::Log10E.apply(vx.view()));

    let depths: Vec<usize> = (2..=14).step_by(2).collect();
    let result = tune_forest(tx.view(), ty.view(), vx.view(), vy.view(), &depths, &[50, 100, 200], 5, 0)?;

    println!("depth curve at {} trees", result.best.n_estimators);
    for p in result.depth_curve() {
        println!("  depth {:>2}: {:.4}", p.max_depth, p.cv_rmse);
    }
    println!("tree curve at depth {}", result.best.max_depth);
    for p in result.tree_curve() {
        println!("  {:>4} trees: {:.4}", p.n_estimators, p.cv_rmse);
    }
    println!(
        "best: depth {}, {} trees, cv rmse {:.4}",
        result.best.max_depth, result.best.n_estimators, result.best.cv_rmse
    );
    Ok(())
}
