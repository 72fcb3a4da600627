//! Bragg dominance map on a coarse sub-grid, printed as one E × h table per density slice.
//!
//! `cargo run --release --example dominance_map -- [decrease|increase] [cutoff|width] [n]`

use metashap::sensitivity::{dominance_map, Direction, DispersionEvaluator, QoiKind, SweepSpec};

fn main() -> metashap::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let direction = match args.first().map(String::as_str) {
        Some("increase") => Direction::Increase,
        _ => Direction::Decrease,
    };
    let qoi = match args.get(1).map(String::as_str) {
        Some("width") => QoiKind::GapWidth,
        _ => QoiKind::FirstCutoff,
    };
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5);

    let spec = SweepSpec::bragg(n, direction, qoi)?;
    let map = dominance_map(&spec, &DispersionEvaluator::default())?;
    let [e_axis, rho_axis, h_axis] = &spec.axes;

    println!("{direction:?} / {qoi:?}, base {:?}", spec.base);
    for (j, rho) in rho_axis.values().iter().enumerate() {
        println!("\nrho = {rho}");
        print!("{:>10}", "E \\ h");
        for h in h_axis.values() {
            print!("{h:>12.3}");
        }
        println!();
        for (i, e) in e_axis.values().iter().enumerate() {
            print!("{e:>10.3}");
            for k in 0..h_axis.len() {
                print!("{:>12}", map.cell(i, j, k).label.to_string());
            }
            println!();
        }
    }
    Ok(())
}
