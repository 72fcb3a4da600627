//! Dominance from an external QoI table instead of the dispersion solver.
//!
//! The synthetic table lowers the cutoff with density alone, so every cell away from the
//! base density should be labelled RHO.

use metashap::dataset::{Dataset, Provenance, Sample};
use metashap::sensitivity::{dominance_map, Direction, LookupTable, QoiKind, SweepSpec};

fn main() -> metashap::Result<()> {
    let spec = SweepSpec::sonic(4, Direction::Decrease, QoiKind::FirstCutoff)?;
    let samples = spec
        .grid_points()
        .into_iter()
        .map(|[e, rho, h]| {
            let cutoff = 250.0 / rho.sqrt();
            Sample::new([e, rho, h], Some(cutoff), Some(cutoff / 6.0))
        })
        .collect::<metashap::Result<Vec<_>>>()?;
    let table = Dataset::from_samples(
        samples,
        Provenance {
            source: "synthetic".into(),
            grid: None,
            path: None,
            excluded_count: 0,
            seed: None,
        },
    );

    let map = dominance_map(&spec, &LookupTable::from_dataset(&table)?)?;
    let mut out = std::io::stdout().lock();
    map.write_csv(&mut out)?;
    Ok(())
}
