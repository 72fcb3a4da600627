//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{OracleCell, TestRng};
use metashap::dataset::{generate_bragg, GridSpec, SplitKind, Target};
use metashap::dispersion::{dispersion_rhs, qois, LayeredUnitCell, Material, ParameterRatios, ScanSettings};
use metashap::game::{demos, monotone_modify, shapley_values, CooperativeGame, DEFAULT_TIE_TOL};
use metashap::regress::{r2, rmse, FeatureMap, ForestConfig, MlpConfig, MlpModel, Surrogate};
use metashap::sensitivity::{
    continuous_map, dominance_map, quadratic_demo, uniform_axis, CellLabel, ContinuousMap, Direction,
    DispersionEvaluator, DominanceMap, QoiKind, SweepSpec, CONTINUOUS_NAMES,
};
use ndarray::{Array1, Array2};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close_all(got: &[f64], want: &[f64], tol: f64, what: &str) -> Result<(), String> {
    ensure(
        got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= tol),
        || format!("{what}: got {got:.4?}, want {want:?}"),
    )
}

fn shapley_exactness() -> Outcome {
    let check = |g: &CooperativeGame, values: &[f64], pct: Option<&[f64]>, what: &str| -> Result<(), String> {
        let r = shapley_values(g, DEFAULT_TIE_TOL).map_err(|e| e.to_string())?;
        close_all(&r.values, values, 0.01, what)?;
        if let Some(p) = pct {
            let got = r.dominance_pct.ok_or(format!("{what}: no dominance percentages"))?;
            close_all(&got, p, 0.01, what)?;
        }
        Ok(())
    };
    check(&demos::report_writing(), &[24.5, 34.0, 41.5], None, "report-writing game")?;
    check(&demos::non_superadditive(), &[-0.5, 31.5, 39.0], None, "non-superadditive game")?;
    check(
        &monotone_modify(&demos::non_superadditive()),
        &[6.67, 29.67, 37.67],
        Some(&[9.01, 40.09, 50.91]),
        "repaired game",
    )?;
    check(&demos::two_player(), &[33.0, 41.0], Some(&[44.59, 55.41]), "two-player game")?;
    Ok("four demo games within 0.01".into())
}

fn modification_rule() -> Outcome {
    let g = monotone_modify(&demos::non_superadditive());
    let v = |m: &[&str]| g.value(g.coalition_of(m).unwrap());
    let got = [v(&["A", "B"]), v(&["A", "C"]), v(&["B", "C"]), v(&["A", "B", "C"])];
    ensure(got == [27.0, 35.0, 74.0, 74.0], || format!("pair/grand entries {got:?}"))?;
    let singles = [v(&["A"]), v(&["B"]), v(&["C"])];
    ensure(singles == [20.0, 27.0, 35.0], || format!("singletons changed: {singles:?}"))?;
    Ok("AB 27, AC 35, BC 74, ABC 74 exactly".into())
}

fn continuous_demo() -> Outcome {
    let step = 0.1;
    let axis = uniform_axis(10.0, 100);
    let map: ContinuousMap = continuous_map(quadratic_demo, &axis, &axis, (0.0, 0.0), DEFAULT_TIE_TOL);
    let mut counts = [0usize; 3];
    for c in &map.cells {
        if c.x1 == 0.0 && c.x2 == 0.0 {
            continue;
        }
        let offset = c.x2 - 3f64.sqrt() * c.x1;
        let label = c.label.render(&CONTINUOUS_NAMES);
        let consistent = match label.as_str() {
            "X1" => {
                counts[0] += 1;
                offset <= step
            }
            "X2" => {
                counts[1] += 1;
                offset >= -step
            }
            "TIE:X1+X2" => {
                counts[2] += 1;
                offset.abs() <= step
            }
            _ => false,
        };
        ensure(consistent, || format!("({}, {}) labelled {label}", c.x1, c.x2))?;
    }
    ensure(counts[0] > 0 && counts[1] > 0, || format!("one-sided map {counts:?}"))?;
    Ok(format!(
        "{} cells, X1 {} / X2 {} / ties {}, boundary on x2 = sqrt(3) x1 within one cell",
        map.cells.len(),
        counts[0],
        counts[1],
        counts[2]
    ))
}

fn random_ratios(rng: &mut TestRng) -> [f64; 3] {
    [rng.log_uniform(0.1, 50000.0), rng.uniform(0.1, 9.5), rng.uniform(0.1, 11.0)]
}

fn dispersion_invariants() -> Outcome {
    let mut rng = TestRng::new(2024);
    let settings = ScanSettings::default();
    let rubber = Material::RUBBER;
    let cell_of = |p: [f64; 3]| LayeredUnitCell::from_ratios(ParameterRatios::from_array(p).unwrap(), rubber).unwrap();

    for _ in 0..100 {
        let r = rng.log_uniform(1e-3, 1e3);
        let h = rng.uniform(0.05, 20.0);
        let report = qois(ParameterRatios::new(r, 1.0 / r, h).unwrap(), rubber, &settings).map_err(|e| e.to_string())?;
        ensure(report.gaps.is_empty(), || format!("impedance-matched ({r}, {}, {h}) has gaps", 1.0 / r))?;
    }

    let mut worst_swap: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut edges = 0;
    for _ in 0..20 {
        let p = random_ratios(&mut rng);
        let cell = cell_of(p);
        for _ in 0..50 {
            let w = rng.uniform(0.0, 2.0 * cell.default_omega_max());
            let (a, b) = (dispersion_rhs(w, &cell), dispersion_rhs(w, &cell.swapped()));
            worst_swap = worst_swap.max((a - b).abs() / (1.0 + a.abs()));
        }
        let report = qois(ParameterRatios::from_array(p).unwrap(), rubber, &settings).map_err(|e| e.to_string())?;
        for g in &report.gaps {
            for w in [g.lower_omega(), g.upper_omega()] {
                if w < report.omega_max_searched {
                    worst_residual = worst_residual.max((dispersion_rhs(w, &cell).abs() - 1.0).abs());
                }
            }
        }
        let dense = OracleCell::from_ratios(p[0], p[1], p[2]).dense_gaps(report.omega_max_searched, 1_000_000);
        ensure(dense.len() == report.gaps.len(), || {
            format!("{p:?}: {} gaps vs {} from the dense oracle", report.gaps.len(), dense.len())
        })?;
        for (g, (lo, hi)) in report.gaps.iter().zip(&dense) {
            worst_oracle = worst_oracle.max(((g.lower_hz - lo) / lo).abs());
            if !(report.last_gap_open && std::ptr::eq(g, report.gaps.last().unwrap())) {
                worst_oracle = worst_oracle.max(((g.upper_hz - hi) / hi).abs());
            }
            edges += 2;
        }
    }
    ensure(worst_swap <= 1e-12, || format!("layer swap differs by {worst_swap:e}"))?;
    ensure(worst_residual <= 1e-6, || format!("edge residual {worst_residual:e}"))?;
    ensure(worst_oracle <= 1e-4, || format!("oracle mismatch {worst_oracle:e}"))?;
    Ok(format!(
        "100 matched cells gap-free; swap {worst_swap:.1e}; residual {worst_residual:.1e}; {edges} edges vs oracle {worst_oracle:.1e}"
    ))
}

fn bragg_map(direction: Direction, qoi: QoiKind) -> Result<DominanceMap, String> {
    let spec = SweepSpec::bragg(5, direction, qoi).map_err(|e| e.to_string())?;
    dominance_map(&spec, &DispersionEvaluator::default()).map_err(|e| e.to_string())
}

fn bragg_regions() -> Outcome {
    const E: usize = 0;
    const RHO: usize = 1;
    const H: usize = 2;
    let cutoff = bragg_map(Direction::Decrease, QoiKind::FirstCutoff)?;
    let mut with_values = 0;
    for c in &cutoff.cells {
        if let Some(s) = &c.shapley {
            with_values += 1;
            ensure(s.values[E] == 0.0, || format!("{:?}: E value {}", c.point, s.values[E]))?;
        }
    }
    // Axis indices: rho 0.1, 2.45, 4.8, 7.15, 9.5; h 0.1, 2.825, 5.55, 8.275, 11.
    for i in 0..5 {
        for j in 0..3 {
            for k in 1..3 {
                let c = cutoff.cell(i, j, k);
                ensure(c.label == CellLabel::Dominant(H), || format!("{:?}: {} (low rho, h)", c.point, c.label))?;
            }
        }
        for j in 3..5 {
            for k in 3..5 {
                let c = cutoff.cell(i, j, k);
                ensure(c.label == CellLabel::Dominant(RHO), || format!("{:?}: {} (high rho)", c.point, c.label))?;
            }
        }
    }
    let width = bragg_map(Direction::Increase, QoiKind::GapWidth)?;
    for i in 0..5 {
        for j in 0..5 {
            for k in 1..4 {
                let c = width.cell(i, j, k);
                ensure(c.label == CellLabel::Dominant(H), || format!("{:?}: {} (width, low h)", c.point, c.label))?;
            }
        }
    }
    Ok(format!(
        "E value 0 in all {with_values} scored cutoff cells; H at low (rho, h), RHO at high rho; width H at low h"
    ))
}

fn surrogate_quality() -> Outcome {
    let ds = generate_bragg(&GridSpec::default(), &DispersionEvaluator::default())
        .and_then(|d| d.split(0.2, 0.2, 0))
        .map_err(|e| e.to_string())?;
    let mut lines = vec![format!("{} samples", ds.len())];
    let score = |m: metashap::Result<Surrogate>| -> Result<f64, String> {
        let m = m.map_err(|e| e.to_string())?;
        Ok(m.evaluate(&ds, SplitKind::Test).map_err(|e| e.to_string())?.r2)
    };
    let forest = |trees| ForestConfig {
        n_estimators: trees,
        ..ForestConfig::default()
    };
    let fmap = FeatureMap::Log10E;
    let scores = [
        ("forest cutoff", score(Surrogate::fit_forest(&ds, Target::Cutoff, forest(800), fmap))?, 0.99, 1.0),
        ("forest width", score(Surrogate::fit_forest(&ds, Target::Width, forest(1100), fmap))?, 0.99, 1.0),
        ("poly3 cutoff", score(Surrogate::fit_poly(&ds, Target::Cutoff, 3, fmap))?, 0.75, 0.90),
        ("mlp cutoff", score(Surrogate::fit_mlp(&ds, Target::Cutoff, &MlpConfig::bragg_cutoff(), fmap))?, 0.98, 1.0),
        ("mlp width", score(Surrogate::fit_mlp(&ds, Target::Width, &MlpConfig::bragg_width(), fmap))?, 0.98, 1.0),
    ];
    let mut failures = Vec::new();
    for (name, r2, lo, hi) in scores {
        lines.push(format!("{name} R2 {r2:.4}"));
        if !(lo..=hi).contains(&r2) {
            failures.push(format!("{name} R2 {r2:.4} outside [{lo}, {hi}]"));
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(lines.join(", "))
}

fn metric_identities() -> Outcome {
    let mut rng = TestRng::new(7);
    for trial in 0..1000 {
        let n = 2 + (rng.uniform(0.0, 100.0) as usize);
        let y: Vec<f64> = (0..n).map(|_| rng.uniform(-100.0, 100.0)).collect();
        let yhat: Vec<f64> = (0..n).map(|_| rng.uniform(-100.0, 100.0)).collect();
        let mean = y.iter().sum::<f64>() / n as f64;
        let flat = vec![mean; n];
        let e = rmse(&y, &yhat).map_err(|e| e.to_string())?;
        let r = r2(&y, &yhat).map_err(|e| e.to_string())?;
        let ss: f64 = y.iter().zip(&yhat).map(|(a, b)| (a - b) * (a - b)).sum();
        let base = rmse(&y, &flat).map_err(|e| e.to_string())?;
        let ok = rmse(&y, &y).ok() == Some(0.0)
            && r2(&y, &y).ok() == Some(1.0)
            && r2(&y, &flat).is_ok_and(|v| v.abs() < 1e-12)
            && (e * e * n as f64 - ss).abs() <= 1e-10 * ss
            && (r - (1.0 - (e / base).powi(2))).abs() <= 1e-10 * r.abs().max(1.0)
            && r <= 1.0;
        ensure(ok, || format!("identity broken on trial {trial}"))?;
    }
    Ok("1000 random vectors".into())
}

fn gradient_check() -> Outcome {
    let mut rng = TestRng::new(88);
    let step = 1e-6;
    let mut worst: f64 = 0.0;
    for point in 0..10u64 {
        let config = MlpConfig {
            hidden: vec![4, 4],
            seed: 100 + point,
            ..MlpConfig::default()
        };
        let model = MlpModel::init(3, &config).map_err(|e| e.to_string())?;
        let x = Array2::from_shape_fn((1, 3), |_| rng.uniform(-2.0, 2.0));
        let y = Array1::from_elem(1, rng.uniform(-3.0, 3.0));
        let analytic = model.loss_and_gradient(x.view(), y.view()).1.flatten();
        let theta = model.flat_parameters();
        let mut probe = model.clone();
        for k in 0..theta.len() {
            let mut t = theta.clone();
            t[k] += step;
            probe.set_flat_parameters(&t).map_err(|e| e.to_string())?;
            let up = probe.loss(x.view(), y.view());
            t[k] = theta[k] - step;
            probe.set_flat_parameters(&t).map_err(|e| e.to_string())?;
            let down = probe.loss(x.view(), y.view());
            let numeric = (up - down) / (2.0 * step);
            let scale = analytic[k].abs().max(numeric.abs());
            let err = if scale > 1e-8 { (analytic[k] - numeric).abs() / scale } else { 0.0 };
            worst = worst.max(err);
        }
    }
    ensure(worst <= 1e-5, || format!("max relative error {worst:e}"))?;
    Ok(format!("3-4-4-1 network, 10 points, max relative error {worst:.1e}"))
}

fn cli(out: &Path, args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_metashap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn same_files(a: &Path, b: &Path, files: &[&str]) -> Result<(), String> {
    for f in files {
        let (x, y) = (fs::read(a.join(f)), fs::read(b.join(f)));
        let (x, y) = (x.map_err(|e| format!("{f}: {e}"))?, y.map_err(|e| format!("{f}: {e}"))?);
        ensure(x == y, || format!("{f} differs between worker counts"))?;
    }
    Ok(())
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = |name: &str| root.path().join(name);
    cli(&dir("data"), &["dataset", "gen", "--jobs", "8"])?;
    let data = dir("data").join("dataset.csv");
    let data = data.to_str().unwrap();
    for jobs in ["1", "8"] {
        cli(&dir(&format!("dom{jobs}")), &["dominance", "--jobs", jobs, "--seed", "3", "--cells-json"])?;
        cli(
            &dir(&format!("rf{jobs}")),
            &["train", "--model", "forest", "--data", data, "--jobs", jobs, "--seed", "3"],
        )?;
    }
    same_files(&dir("dom1"), &dir("dom8"), &["dominance.csv", "dominance_cells.json", "dominance.config.txt"])?;
    same_files(&dir("rf1"), &dir("rf8"), &["model.json", "metrics.json", "train.config.txt"])?;
    Ok("dominance and forest outputs byte-identical for 1 and 8 workers".into())
}

struct Criterion {
    number: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { number: 1, name: "Shapley exactness", budget: Duration::from_secs(1), run: shapley_exactness },
        Criterion { number: 2, name: "modification rule", budget: Duration::from_secs(1), run: modification_rule },
        Criterion { number: 3, name: "continuous demo", budget: Duration::from_secs(5), run: continuous_demo },
        Criterion { number: 4, name: "dispersion invariants", budget: Duration::from_secs(60), run: dispersion_invariants },
        Criterion { number: 5, name: "Bragg dominance regions", budget: Duration::from_secs(300), run: bragg_regions },
        Criterion { number: 6, name: "surrogate quality", budget: Duration::from_secs(900), run: surrogate_quality },
        Criterion { number: 7, name: "metric identities", budget: Duration::from_secs(1), run: metric_identities },
        Criterion { number: 8, name: "MLP gradient check", budget: Duration::from_secs(1), run: gradient_check },
        Criterion { number: 9, name: "determinism", budget: Duration::from_secs(300), run: determinism },
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.number)) {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.budget => Err(format!("took {elapsed:.2?}, budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {} ({detail}) [{elapsed:.2?}]", c.number, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {} ({why}) [{elapsed:.2?}]", c.number, c.name);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
