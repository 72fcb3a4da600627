//! Polynomial regression degree sweep for both quantities.

use metashap::dataset::{generate_bragg, GridSpec, SplitKind, Target};
use metashap::regress::{FeatureMap, Surrogate, SurrogateBody};
use metashap::sensitivity::DispersionEvaluator;

fn main() -> metashap::Result<()> {
    let ds = generate_bragg(&GridSpec::default(), &DispersionEvaluator::default())?.split(0.2, 0.2, 0)?;
    println!("{:<7} {:>6} {:>7} {:>10} {:>9}", "target", "degree", "coeffs", "test rmse", "test r2");
    for target in [Target::Cutoff, Target::Width] {
        for degree in 1..=5 {
            let model = Surrogate::fit_poly(&ds, target, degree, FeatureMap::Log10E)?;
            let SurrogateBody::Poly(poly) = &model.body else { unreachable!() };
            let m = model.evaluate(&ds, SplitKind::Test)?;
            let flag = if poly.rank_deficient { " (rank deficient)" } else { "" };
            println!(
                "{:<7} {degree:>6} {:>7} {:>10.3} {:>9.4}{flag}",
                target.name(),
                poly.coefficients.len(),
                m.rmse,
                m.r2
            );
        }
    }
    Ok(())
}
