//! Band gaps of a rubber-based bilayer for a few ratio triples, plus a coarse pass/stop strip.

use metashap::dispersion::{band_diagram, qois, LayeredUnitCell, Material, ParameterRatios, ScanSettings};

fn main() -> metashap::Result<()> {
    let settings = ScanSettings::default();
    for triple in [[50.0, 2.0, 1.0], [0.1, 0.1, 0.1], [1.0, 1.0, 1.0], [2000.0, 7.5, 4.0]] {
        let ratios = ParameterRatios::from_array(triple)?;
        let report = qois(ratios, Material::RUBBER, &settings)?;
        println!("ratios {triple:?}: {} gap(s) below {:.1} rad/s", report.gaps.len(), report.omega_max_searched);
        for g in report.gaps.iter().take(3) {
            println!("  {:>10.3} .. {:>10.3} Hz  (width {:.3})", g.lower_hz, g.upper_hz, g.width_hz());
        }

        let cell = LayeredUnitCell::from_ratios(ratios, Material::RUBBER)?;
        let strip: String = band_diagram(&cell, report.omega_max_searched, 72)?
            .iter()
            .map(|p| if p.propagating { '-' } else { '#' })
            .collect();
        println!("  {strip}");
    }
    Ok(())
}
