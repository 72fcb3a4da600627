//! Generates the default Bragg training grid and writes it as CSV plus a provenance sidecar.
//!
//! `cargo run --release --example bragg_dataset -- [out_dir]`

use std::path::PathBuf;

use metashap::dataset::{generate_bragg, GridSpec, SplitKind, Target};
use metashap::sensitivity::DispersionEvaluator;

fn main() -> metashap::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "bragg_data".into()));
    std::fs::create_dir_all(&dir)?;

    let ds = generate_bragg(&GridSpec::default(), &DispersionEvaluator::default())?.split(0.2, 0.2, 0)?;
    ds.export_csv(&dir.join("dataset.csv"))?;
    ds.write_provenance(&dir.join("dataset.provenance.json"))?;

    println!("{} samples, {} grid points without a gap", ds.len(), ds.provenance().excluded_count);
    for which in [SplitKind::Train, SplitKind::Val, SplitKind::Test] {
        let (_, y) = ds.view(which, Target::Cutoff);
        let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        println!("{:<5} {:>5} rows, cutoff {lo:.2} .. {hi:.2} Hz", which.name(), y.len());
    }
    println!("written to {}", dir.display());
    Ok(())
}
