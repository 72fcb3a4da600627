//! MLP surrogate for the first cutoff, with the per-epoch loss curve written to CSV.
//!
//! Runs a tenth of the preset epochs so the example finishes quickly; pass `full` for all of them.

use std::fs::File;

use metashap::dataset::{generate_bragg, GridSpec, SplitKind, Target};
use metashap::regress::{FeatureMap, MlpConfig, Surrogate};
use metashap::sensitivity::DispersionEvaluator;

fn main() -> metashap::Result<()> {
    let full = std::env::args().any(|a| a == "full");
    let ds = generate_bragg(&GridSpec::default(), &DispersionEvaluator::default())?.split(0.2, 0.2, 0)?;

    let mut config = MlpConfig::bragg_cutoff();
    if !full {
        config.epochs /= 10;
    }
    let model = Surrogate::fit_mlp(&ds, Target::Cutoff, &config, FeatureMap::Log10E)?;
    for which in [SplitKind::Train, SplitKind::Val, SplitKind::Test] {
        let m = model.evaluate(&ds, which)?;
        println!("{:<5} rmse {:>8.4}  r2 {:.5}", which.name(), m.rmse, m.r2);
    }
    if let Some(history) = &model.loss_history {
        history.write_csv(File::create("mlp_loss_history.csv")?)?;
        let last = history.train.len() - 1;
        println!("loss after {} epochs: train {:.5}, val {:.5}", last + 1, history.train[last], history.val[last]);
    }
    Ok(())
}
