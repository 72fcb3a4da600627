//! Random-forest surrogates for both band-gap quantities on the generated Bragg grid.

use std::time::Instant;

use metashap::dataset::{generate_bragg, GridSpec, SplitKind, Target};
use metashap::regress::{FeatureMap, ForestConfig, Surrogate};
use metashap::sensitivity::DispersionEvaluator;

fn main() -> metashap::Result<()> {
    let ds = generate_bragg(&GridSpec::default(), &DispersionEvaluator::default())?.split(0.2, 0.2, 0)?;
    for (target, trees) in [(Target::Cutoff, 800), (Target::Width, 1100)] {
        let start = Instant::now();
        let config = ForestConfig {
            n_estimators: trees,
            ..ForestConfig::default()
        };
        let model = Surrogate::fit_forest(&ds, target, config, FeatureMap::Log10E)?;
        let test = model.evaluate(&ds, SplitKind::Test)?;
        println!(
            "{:<6} {trees} trees: test rmse {:.3} Hz, r2 {:.5}  ({:.1?})",
            target.name(),
            test.rmse,
            test.r2,
            start.elapsed()
        );
        println!("        prediction at (50, 2, 1): {:.3} Hz", model.predict_one([50.0, 2.0, 1.0])?);
    }
    Ok(())
}
