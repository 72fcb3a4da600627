//! Dominance of a smooth two-input function over a square grid, drawn as ASCII.
//!
//! For `3x1^2 + x2^2 - x1*x2` the two Shapley values cross on the ray `x2 = sqrt(3) x1`.

use metashap::sensitivity::{continuous_map, quadratic_demo, uniform_axis, CONTINUOUS_NAMES};

fn main() {
    let axis = uniform_axis(10.0, 40);
    let map = continuous_map(quadratic_demo, &axis, &axis, (0.0, 0.0), 1e-9);
    // Cells are x1-major; print x2 descending so the plot reads like a graph.
    for row in (0..axis.len()).rev() {
        let line: String = (0..axis.len())
            .map(|col| match map.cells[col * axis.len() + row].label.render(&CONTINUOUS_NAMES).as_str() {
                "X1" => '1',
                "X2" => '2',
                "NONE" => '.',
                _ => '=',
            })
            .collect();
        println!("{line}");
    }
    let p = metashap::sensitivity::continuous_shapley(quadratic_demo, (2.0, 5.0), (0.0, 0.0), 1e-9);
    println!("\nat (2, 5): phi = {:?}, dominance % = {:?}", p.values, p.dominance_pct);
}
