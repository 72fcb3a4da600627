//! Command-line front end.
//!
//! Every command reads its parameters from a [`RunConfig`]: a `key = value` file given
//! with `--config`, then `--set key=value` overrides, then the dedicated flags. Each run
//! writes `<out>/<command>.config.txt` listing every value it used, defaults included,
//! which can be fed back through `--config` to repeat the run. `jobs` and `out` are left
//! out of the echo because they do not affect results.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dataset::{generate_bragg, AxisSpec, Dataset, GridSpec, SplitKind, Target};
use crate::dispersion::{band_diagram, qois, write_band_csv, LayeredUnitCell, Material, ParameterRatios, ScanSettings};
use crate::error::{Error, Result};
use crate::game::{
    demos, dominance, is_superadditive, monotone_modify, shapley_by_permutations, shapley_values,
    CooperativeGame, ShapleyResult, DEFAULT_TIE_TOL,
};
use crate::regress::{tune_forest, FeatureMap, ForestConfig, MlpConfig, OptimizerKind, SplitInfo, Surrogate};
use crate::sensitivity::{
    continuous_map, dominance_map, quadratic_demo, uniform_axis, Axis, AxisScale, CellLabel, Direction,
    DispersionEvaluator, LookupTable, QoiEvaluator, QoiKind, SweepSpec, CONTINUOUS_NAMES,
};

/// Console summary line; a closed stdout (e.g. piped into `head`) must not abort the run.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "metashap", version, about = "Band gaps, Shapley dominance maps and surrogate models for layered metamaterials")]
pub struct Cli {
    /// Key-value configuration file (`key = value` per line, `#` comments).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for splits, bootstraps and initialisation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set axis.e=log:0.1:50000:5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band diagram CSV and gap list for one ratio triple.
    Band(RatioArgs),
    /// First cut-off and first gap width for one ratio triple.
    Qoi(RatioArgs),
    /// Shapley values of a built-in demo game or a game file.
    Shapley(ShapleyArgs),
    /// Dominance map over a parameter grid.
    Dominance(DominanceArgs),
    /// Generate or import a QoI dataset.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Fit a surrogate model.
    Train(TrainArgs),
    /// Cross-validated forest hyper-parameter search.
    Tune(TuneArgs),
    /// Score a saved model on a dataset split.
    Eval(EvalArgs),
    /// Predict one target value with a saved model.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    /// `e,rho,h`
    #[arg(long)]
    pub ratios: Option<String>,
}

#[derive(Debug, Args)]
pub struct ShapleyArgs {
    /// One of `report-writing`, `non-superadditive`, `two-player`.
    #[arg(long)]
    pub demo: Option<String>,
    /// Game JSON file.
    #[arg(long)]
    pub game: Option<PathBuf>,
    /// Apply the monotone-closure repair first.
    #[arg(long)]
    pub modify: bool,
    /// Use permutation enumeration instead of the subset formula.
    #[arg(long)]
    pub permutations: bool,
}

#[derive(Debug, Args)]
pub struct DominanceArgs {
    /// `bragg`, `sonic` or `continuous`.
    #[arg(long)]
    pub mode: Option<String>,
    /// QoI lookup CSV for sonic mode.
    #[arg(long)]
    pub lookup: Option<PathBuf>,
    /// `decrease` or `increase`.
    #[arg(long)]
    pub direction: Option<String>,
    /// `cutoff` or `width`.
    #[arg(long)]
    pub qoi: Option<String>,
    /// Also write per-cell JSON.
    #[arg(long)]
    pub cells_json: bool,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Evaluate the dispersion relation over a grid.
    Gen,
    /// Validate and normalise an external QoI table.
    Import {
        #[arg(long)]
        path: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// `poly`, `forest` or `mlp`.
    #[arg(long)]
    pub model: Option<String>,
    /// `cutoff` or `width`.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// `bragg-cutoff`, `bragg-width`, `sonic-cutoff` or `sonic-width`.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    /// Comma-separated depths.
    #[arg(long)]
    pub depths: Option<String>,
    /// Comma-separated tree counts.
    #[arg(long)]
    pub trees: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// `train`, `val`, `test` or `all`.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// `e,rho,h`
    #[arg(long)]
    pub ratios: Option<String>,
}

/// Flat string configuration that remembers every value it hands out.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

const NOT_ECHOED: [&str; 3] = ["jobs", "out", "config"];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", i + 1), format!("expected `key = value`, found `{line}`"))
            })?;
            cfg.set(k.trim(), v.trim());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config("--set", format!("expected KEY=VALUE, found `{assignment}`")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    fn record(&mut self, key: &str, value: String) {
        if !NOT_ECHOED.contains(&key) {
            self.resolved.insert(key.to_string(), value);
        }
    }

    /// Raw value if present; recorded in the echo.
    pub fn get_opt(&mut self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.record(key, v.clone());
        }
        v
    }

    pub fn get_str(&mut self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    pub fn require(&mut self, key: &str) -> Result<String> {
        self.get_opt(key).ok_or_else(|| Error::config(key, "missing value"))
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.values.get(key).cloned() {
            Some(s) => {
                let v = s.parse::<T>().map_err(|e| Error::config(key, format!("invalid value `{s}`: {e}")))?;
                self.record(key, s);
                Ok(v)
            }
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn echo(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        _ => 1,
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        cfg.set_override(o)?;
    }
    if let Some(s) = cli.seed {
        cfg.set("seed", s.to_string());
    }
    if let Some(o) = &cli.out {
        cfg.set("out", o.display().to_string());
    }
    if let Some(j) = cli.jobs {
        cfg.set("jobs", j.to_string());
    }
    let jobs: usize = cfg.get("jobs", 0)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    pool.install(|| dispatch(cli.command, &mut cfg))
}

fn dispatch(command: Command, cfg: &mut RunConfig) -> Result<()> {
    let out_dir = PathBuf::from(cfg.get_str("out", "."));
    let name = match &command {
        Command::Band(_) => "band",
        Command::Qoi(_) => "qoi",
        Command::Shapley(_) => "shapley",
        Command::Dominance(_) => "dominance",
        Command::Dataset(DatasetCommand::Gen) => "dataset-gen",
        Command::Dataset(DatasetCommand::Import { .. }) => "dataset-import",
        Command::Train(_) => "train",
        Command::Tune(_) => "tune",
        Command::Eval(_) => "eval",
        Command::Predict(_) => "predict",
    };
    let out = Output { dir: out_dir };
    match command {
        Command::Band(a) => {
            set_opt(cfg, "ratios", a.ratios);
            cmd_band(cfg, &out)?
        }
        Command::Qoi(a) => {
            set_opt(cfg, "ratios", a.ratios);
            cmd_qoi(cfg, &out)?
        }
        Command::Shapley(a) => {
            set_opt(cfg, "shapley.demo", a.demo);
            set_opt(cfg, "shapley.game", a.game.map(|p| p.display().to_string()));
            set_flag(cfg, "shapley.modify", a.modify);
            if a.permutations {
                cfg.set("shapley.method", "permutations");
            }
            cmd_shapley(cfg, &out)?
        }
        Command::Dominance(a) => {
            set_opt(cfg, "dominance.mode", a.mode);
            set_opt(cfg, "lookup", a.lookup.map(|p| p.display().to_string()));
            set_opt(cfg, "direction", a.direction);
            set_opt(cfg, "qoi", a.qoi);
            set_flag(cfg, "cells_json", a.cells_json);
            cmd_dominance(cfg, &out)?
        }
        Command::Dataset(DatasetCommand::Gen) => cmd_dataset_gen(cfg, &out)?,
        Command::Dataset(DatasetCommand::Import { path }) => {
            set_opt(cfg, "import.path", path.map(|p| p.display().to_string()));
            cmd_dataset_import(cfg, &out)?
        }
        Command::Train(a) => {
            set_opt(cfg, "data", a.data.map(|p| p.display().to_string()));
            set_opt(cfg, "model", a.model);
            set_opt(cfg, "target", a.target);
            set_opt(cfg, "poly.degree", a.degree.map(|d| d.to_string()));
            set_opt(cfg, "forest.depth", a.depth);
            set_opt(cfg, "forest.trees", a.trees.map(|d| d.to_string()));
            set_opt(cfg, "mlp.epochs", a.epochs.map(|d| d.to_string()));
            set_opt(cfg, "mlp.preset", a.preset);
            cmd_train(cfg, &out)?
        }
        Command::Tune(a) => {
            set_opt(cfg, "data", a.data.map(|p| p.display().to_string()));
            set_opt(cfg, "target", a.target);
            set_opt(cfg, "tune.depths", a.depths);
            set_opt(cfg, "tune.trees", a.trees);
            set_opt(cfg, "tune.folds", a.folds.map(|d| d.to_string()));
            cmd_tune(cfg, &out)?
        }
        Command::Eval(a) => {
            set_opt(cfg, "model_path", a.model.map(|p| p.display().to_string()));
            set_opt(cfg, "data", a.data.map(|p| p.display().to_string()));
            set_opt(cfg, "eval.split", a.split);
            cmd_eval(cfg, &out)?
        }
        Command::Predict(a) => {
            set_opt(cfg, "model_path", a.model.map(|p| p.display().to_string()));
            set_opt(cfg, "ratios", a.ratios);
            cmd_predict(cfg, &out)?
        }
    }
    out.write_text(&format!("{name}.config.txt"), &cfg.echo())
}

fn set_opt(cfg: &mut RunConfig, key: &str, v: Option<String>) {
    if let Some(v) = v {
        cfg.set(key, v);
    }
}

fn set_flag(cfg: &mut RunConfig, key: &str, on: bool) {
    if on {
        cfg.set(key, "true");
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn path(&self, file: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        Ok(self.dir.join(file))
    }

    fn create(&self, file: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(file)?)?))
    }

    fn write_text(&self, file: &str, text: &str) -> Result<()> {
        fs::write(self.path(file)?, text)?;
        Ok(())
    }

    fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<()> {
        let mut w = self.create(file)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

pub fn parse_triple(key: &str, s: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::config(key, format!("expected three comma-separated numbers, found `{s}`")));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse::<f64>()
            .map_err(|_| Error::config(key, format!("invalid number `{p}`")))?;
    }
    Ok(out)
}

fn parse_list<T>(key: &str, s: &str) -> Result<Vec<T>>
where
    T: FromStr,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|_| Error::config(key, format!("invalid entry `{p}`"))))
        .collect()
}

fn positive_ratios(key: &str, r: [f64; 3]) -> Result<ParameterRatios> {
    ParameterRatios::from_array(r).map_err(|e| Error::config(key, e.to_string()))
}

/// `log:min:max:n`, `lin:min:max:n` or `list:v1,v2,...`.
pub fn parse_axis(key: &str, s: &str) -> Result<Axis> {
    let bad = |msg: String| Error::config(key, msg);
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad(format!("expected `lin:`, `log:` or `list:`, found `{s}`")))?;
    match kind {
        "list" => {
            let values: Vec<f64> = parse_list(key, rest)?;
            if values.is_empty() {
                return Err(bad("axis is empty".into()));
            }
            Axis::new(values, AxisScale::Linear).map_err(|e| bad(e.to_string()))
        }
        "lin" | "log" => {
            let spec = parse_axis_spec(key, s)?;
            spec.to_axis().map_err(|e| bad(e.to_string()))
        }
        other => Err(bad(format!("unknown axis kind `{other}`"))),
    }
}

fn parse_axis_spec(key: &str, s: &str) -> Result<AxisSpec> {
    let bad = |msg: String| Error::config(key, msg);
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(bad(format!("expected `lin|log:min:max:count`, found `{s}`")));
    }
    let scale = match parts[0] {
        "lin" => AxisScale::Linear,
        "log" => AxisScale::Logarithmic,
        other => return Err(bad(format!("unknown axis kind `{other}`"))),
    };
    let num = |p: &str| p.parse::<f64>().map_err(|_| bad(format!("invalid number `{p}`")));
    let count = parts[3]
        .parse::<usize>()
        .map_err(|_| bad(format!("invalid count `{}`", parts[3])))?;
    if count == 0 {
        return Err(bad("axis is empty".into()));
    }
    Ok(AxisSpec {
        min: num(parts[1])?,
        max: num(parts[2])?,
        count,
        scale,
    })
}

fn axis_spec_string(a: &AxisSpec) -> String {
    let kind = match a.scale {
        AxisScale::Linear => "lin",
        AxisScale::Logarithmic => "log",
    };
    format!("{kind}:{}:{}:{}", a.min, a.max, a.count)
}

fn scan_settings(cfg: &mut RunConfig) -> Result<ScanSettings> {
    let d = ScanSettings::default();
    let omega_max = match cfg.get_str("scan.omega_max", "auto").as_str() {
        "auto" => None,
        s => Some(s.parse::<f64>().map_err(|_| Error::config("scan.omega_max", format!("invalid value `{s}`")))?),
    };
    Ok(ScanSettings {
        omega_max,
        n_samples: cfg.get("scan.samples", d.n_samples)?,
        edge_tol: cfg.get("scan.edge_tol", d.edge_tol)?,
        max_doublings: cfg.get("scan.max_doublings", d.max_doublings)?,
    })
}

fn reference_material(cfg: &mut RunConfig) -> Result<Material> {
    let e = cfg.get("reference.youngs_modulus", Material::RUBBER.youngs_modulus)?;
    let rho = cfg.get("reference.density", Material::RUBBER.density)?;
    Material::new(e, rho).map_err(|err| Error::config("reference", err.to_string()))
}

fn cmd_band(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let ratios = positive_ratios("ratios", parse_triple("ratios", &cfg.require("ratios")?)?)?;
    let reference = reference_material(cfg)?;
    let search = scan_settings(cfg)?;
    let report = qois(ratios, reference, &search)?;
    let cell = LayeredUnitCell::from_ratios(ratios, reference)?;
    let omega_max = match cfg.get_str("band.omega_max", "auto").as_str() {
        "auto" => report.omega_max_searched,
        s => s
            .parse::<f64>()
            .map_err(|_| Error::config("band.omega_max", format!("invalid value `{s}`")))?,
    };
    let samples: usize = cfg.get("band.samples", 2000)?;
    let points = band_diagram(&cell, omega_max, samples)?;
    let mut w = out.create("band.csv")?;
    write_band_csv(&mut w, &points)?;
    w.flush()?;
    let json = report.to_json();
    out.write_json("gaps.json", &json)?;
    say!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

fn cmd_qoi(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let ratios = positive_ratios("ratios", parse_triple("ratios", &cfg.require("ratios")?)?)?;
    let reference = reference_material(cfg)?;
    let search = scan_settings(cfg)?;
    let report = qois(ratios, reference, &search)?;
    let json = serde_json::json!({
        "ratios": ratios.to_array(),
        "first_cutoff_hz": report.first_cutoff_hz,
        "first_gap_width_hz": report.first_gap_width_hz,
    });
    out.write_json("qoi.json", &json)?;
    say!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

#[derive(Serialize)]
struct ShapleyReport<'a> {
    game: String,
    method: String,
    modified: bool,
    superadditive: bool,
    violations: usize,
    label: String,
    result: &'a ShapleyResult,
}

fn cmd_shapley(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let game_path = cfg.get_opt("shapley.game");
    let (game, name) = match game_path {
        Some(p) => (CooperativeGame::read_json(File::open(&p)?)?, p),
        None => {
            let demo = cfg.get_str("shapley.demo", "report-writing");
            let g = demos::by_name(&demo).ok_or_else(|| {
                Error::config("shapley.demo", format!("unknown demo `{demo}`; choose one of {:?}", demos::NAMES))
            })?;
            (g, demo)
        }
    };
    let modify: bool = cfg.get("shapley.modify", false)?;
    let method = cfg.get_str("shapley.method", "subsets");
    let tie_tol: f64 = cfg.get("tie_tol", DEFAULT_TIE_TOL)?;
    let report = is_superadditive(&game);
    let game = if modify { monotone_modify(&game) } else { game };
    let result = match method.as_str() {
        "subsets" => shapley_values(&game, tie_tol)?,
        "permutations" => shapley_by_permutations(&game, tie_tol)?,
        other => return Err(Error::config("shapley.method", format!("unknown method `{other}`"))),
    };
    let names: Vec<&str> = game.players().iter().map(String::as_str).collect();
    let label = label_of(&result, &names);
    say!("{:<12} {:>14} {:>12}", "player", "shapley", "dominance_%");
    for (i, p) in result.players.iter().enumerate() {
        let pct = result
            .dominance_pct
            .as_ref()
            .map_or("-".to_string(), |d| format!("{:.2}", d[i]));
        say!("{:<12} {:>14.4} {:>12}", p, result.values[i], pct);
    }
    say!("total {:.4}  dominant: {label}", result.total);
    out.write_json(
        "shapley.json",
        &ShapleyReport {
            game: name,
            method,
            modified: modify,
            superadditive: report.superadditive,
            violations: report.violations.len(),
            label,
            result: &result,
        },
    )
}

fn label_of(result: &ShapleyResult, names: &[&str]) -> String {
    let label = match dominance(result) {
        crate::game::Dominance::Dominant(i) => CellLabel::Dominant(i),
        crate::game::Dominance::Tie(v) => CellLabel::Tie(v),
        crate::game::Dominance::None => CellLabel::None,
    };
    label.render(names)
}

fn parse_direction(cfg: &mut RunConfig) -> Result<Direction> {
    match cfg.get_str("direction", "decrease").as_str() {
        "decrease" => Ok(Direction::Decrease),
        "increase" => Ok(Direction::Increase),
        other => Err(Error::config("direction", format!("expected decrease|increase, found `{other}`"))),
    }
}

fn parse_qoi(cfg: &mut RunConfig) -> Result<QoiKind> {
    match cfg.get_str("qoi", "cutoff").as_str() {
        "cutoff" => Ok(QoiKind::FirstCutoff),
        "width" => Ok(QoiKind::GapWidth),
        other => Err(Error::config("qoi", format!("expected cutoff|width, found `{other}`"))),
    }
}

fn cmd_dominance(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let mode = cfg.get_str("dominance.mode", "bragg");
    let tie_tol: f64 = cfg.get("tie_tol", DEFAULT_TIE_TOL)?;
    if mode == "continuous" {
        let max: f64 = cfg.get("continuous.max", 10.0)?;
        let divisions: usize = cfg.get("continuous.divisions", 100)?;
        if divisions == 0 {
            return Err(Error::config("continuous.divisions", "axis is empty"));
        }
        let base = parse_pair("continuous.base", &cfg.get_str("continuous.base", "0,0"))?;
        let axis = uniform_axis(max, divisions);
        let map = continuous_map(quadratic_demo, &axis, &axis, base, tie_tol);
        let mut w = out.create("dominance.csv")?;
        map.write_csv(&mut w)?;
        w.flush()?;
        let count = |name: &str| {
            map.cells
                .iter()
                .filter(|c| c.label.render(&CONTINUOUS_NAMES) == name)
                .count()
        };
        say!("{} cells: X1 {}, X2 {}", map.cells.len(), count("X1"), count("X2"));
        return Ok(());
    }

    let direction = parse_direction(cfg)?;
    let qoi = parse_qoi(cfg)?;
    let (evaluator, defaults): (Box<dyn QoiEvaluator>, [String; 4]) = match mode.as_str() {
        "bragg" => {
            let reference = reference_material(cfg)?;
            let search = scan_settings(cfg)?;
            (
                Box::new(DispersionEvaluator { reference, search }),
                [
                    "log:0.1:50000:5".into(),
                    "lin:0.1:9.5:5".into(),
                    "lin:0.1:11:5".into(),
                    "0.1,0.1,0.1".into(),
                ],
            )
        }
        "sonic" => {
            let path = cfg.require("lookup")?;
            let ds = Dataset::import_csv(Path::new(&path))?;
            let defaults = lookup_axes(&ds);
            (Box::new(LookupTable::from_dataset(&ds)?), defaults)
        }
        other => {
            return Err(Error::config(
                "dominance.mode",
                format!("expected bragg|sonic|continuous, found `{other}`"),
            ))
        }
    };
    let axes = [
        parse_axis("axis.e", &cfg.get_str("axis.e", &defaults[0]))?,
        parse_axis("axis.rho", &cfg.get_str("axis.rho", &defaults[1]))?,
        parse_axis("axis.h", &cfg.get_str("axis.h", &defaults[2]))?,
    ];
    let base = parse_triple("base", &cfg.get_str("base", &defaults[3]))?;
    let spec = SweepSpec::new(axes, base, direction, qoi)
        .map_err(|e| Error::config("base", e.to_string()))?
        .with_tie_tol(tie_tol);
    let map = dominance_map(&spec, evaluator.as_ref())?;
    let mut w = out.create("dominance.csv")?;
    map.write_csv(&mut w)?;
    w.flush()?;
    if cfg.get("cells_json", false)? {
        let mut w = out.create("dominance_cells.json")?;
        map.write_cells_json(&mut w)?;
        w.flush()?;
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for c in &map.cells {
        *counts.entry(c.label.to_string()).or_default() += 1;
    }
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{k} {v}")).collect();
    say!("{} cells: {}", map.cells.len(), summary.join(", "));
    Ok(())
}

fn parse_pair(key: &str, s: &str) -> Result<(f64, f64)> {
    let v: Vec<f64> = parse_list(key, s)?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::config(key, format!("expected two numbers, found `{s}`"))),
    }
}

/// Default sweep for a lookup table: every distinct value on each axis, base = smallest.
fn lookup_axes(ds: &Dataset) -> [String; 4] {
    let mut cols: [Vec<f64>; 3] = Default::default();
    for s in ds.samples() {
        for (c, v) in cols.iter_mut().zip(s.features) {
            c.push(v);
        }
    }
    let mut out: [String; 4] = Default::default();
    let mut base = [0.0; 3];
    for (i, c) in cols.iter_mut().enumerate() {
        c.sort_by(f64::total_cmp);
        c.dedup();
        base[i] = c.first().copied().unwrap_or(1.0);
        out[i] = format!(
            "list:{}",
            c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        );
    }
    out[3] = format!("{},{},{}", base[0], base[1], base[2]);
    out
}

fn write_dataset(ds: &Dataset, out: &Output) -> Result<()> {
    ds.export_csv(&out.path("dataset.csv")?)?;
    ds.write_provenance(&out.path("dataset.provenance.json")?)
}

fn cmd_dataset_gen(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let d = GridSpec::default();
    let grid = GridSpec {
        e_ratio: parse_axis_spec("grid.e", &cfg.get_str("grid.e", &axis_spec_string(&d.e_ratio)))?,
        rho_ratio: parse_axis_spec("grid.rho", &cfg.get_str("grid.rho", &axis_spec_string(&d.rho_ratio)))?,
        h_ratio: parse_axis_spec("grid.h", &cfg.get_str("grid.h", &axis_spec_string(&d.h_ratio)))?,
    };
    for (key, a) in [("grid.e", grid.e_ratio), ("grid.rho", grid.rho_ratio), ("grid.h", grid.h_ratio)] {
        a.to_axis().map_err(|e| Error::config(key, e.to_string()))?;
    }
    let reference = reference_material(cfg)?;
    let search = scan_settings(cfg)?;
    let ds = generate_bragg(&grid, &DispersionEvaluator { reference, search })?;
    write_dataset(&ds, out)?;
    say!(
        "{} samples written, {} grid points without a gap excluded",
        ds.len(),
        ds.provenance().excluded_count
    );
    Ok(())
}

fn cmd_dataset_import(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let path = cfg.require("import.path")?;
    let ds = Dataset::import_csv(Path::new(&path))?;
    write_dataset(&ds, out)?;
    say!("{} samples imported", ds.len());
    Ok(())
}

fn parse_target(cfg: &mut RunConfig) -> Result<Target> {
    let s = cfg.get_str("target", "cutoff");
    Target::parse(&s).ok_or_else(|| Error::config("target", format!("expected cutoff|width, found `{s}`")))
}

fn parse_feature_map(cfg: &mut RunConfig) -> Result<FeatureMap> {
    let s = cfg.get_str("feature_map", "log10e");
    FeatureMap::parse(&s).ok_or_else(|| Error::config("feature_map", format!("expected raw|log10e, found `{s}`")))
}

fn load_split(cfg: &mut RunConfig) -> Result<(Dataset, SplitInfo)> {
    let path = cfg.require("data")?;
    let info = SplitInfo {
        seed: cfg.get("seed", 0)?,
        test_frac: cfg.get("split.test", 0.2)?,
        val_frac: cfg.get("split.val", 0.2)?,
    };
    let ds = Dataset::import_csv(Path::new(&path))?
        .split(info.test_frac, info.val_frac, info.seed)
        .map_err(|e| Error::config("split", e.to_string()))?;
    Ok((ds, info))
}

fn mlp_config(cfg: &mut RunConfig, target: Target, seed: u64) -> Result<MlpConfig> {
    let default_preset = match target {
        Target::Cutoff => "bragg-cutoff",
        Target::Width => "bragg-width",
    };
    let preset = cfg.get_str("mlp.preset", default_preset);
    let p = MlpConfig::preset(&preset)
        .ok_or_else(|| Error::config("mlp.preset", format!("unknown preset `{preset}`")))?;
    let hidden_default = p.hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",");
    let hidden: Vec<usize> = parse_list("mlp.hidden", &cfg.get_str("mlp.hidden", &hidden_default))?;
    if hidden.is_empty() || hidden.contains(&0) {
        return Err(Error::config("mlp.hidden", "layer widths must be positive"));
    }
    let optimizer = match cfg
        .get_str(
            "mlp.optimizer",
            match p.optimizer {
                OptimizerKind::Adam => "adam",
                OptimizerKind::Sgd => "sgd",
            },
        )
        .as_str()
    {
        "adam" => OptimizerKind::Adam,
        "sgd" => OptimizerKind::Sgd,
        other => return Err(Error::config("mlp.optimizer", format!("expected adam|sgd, found `{other}`"))),
    };
    let batch = match cfg
        .get_str("mlp.batch", &p.batch_size.map_or("full".into(), |b| b.to_string()))
        .as_str()
    {
        "full" => None,
        s => Some(
            s.parse::<usize>()
                .ok()
                .filter(|&b| b > 0)
                .ok_or_else(|| Error::config("mlp.batch", format!("invalid batch size `{s}`")))?,
        ),
    };
    Ok(MlpConfig {
        hidden,
        optimizer,
        learning_rate: cfg.get("mlp.lr", p.learning_rate)?,
        weight_decay: cfg.get("mlp.weight_decay", p.weight_decay)?,
        epochs: cfg.get("mlp.epochs", p.epochs)?,
        batch_size: batch,
        seed,
    })
}

fn cmd_train(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let (ds, info) = load_split(cfg)?;
    let target = parse_target(cfg)?;
    let feature_map = parse_feature_map(cfg)?;
    let kind = cfg.get_str("model", "forest");
    let mut model = match kind.as_str() {
        "poly" => {
            let degree: usize = cfg.get("poly.degree", 3)?;
            Surrogate::fit_poly(&ds, target, degree, feature_map)?
        }
        "forest" => {
            let depth = match cfg.get_str("forest.depth", "10").as_str() {
                "none" => None,
                s => Some(
                    s.parse::<usize>()
                        .ok()
                        .filter(|&d| d > 0)
                        .ok_or_else(|| Error::config("forest.depth", format!("invalid depth `{s}`")))?,
                ),
            };
            let config = ForestConfig {
                max_depth: depth,
                n_estimators: cfg.get("forest.trees", 800)?,
                bootstrap: cfg.get("forest.bootstrap", true)?,
                seed: info.seed,
            };
            if config.n_estimators == 0 {
                return Err(Error::config("forest.trees", "must be at least 1"));
            }
            Surrogate::fit_forest(&ds, target, config, feature_map)?
        }
        "mlp" => {
            let config = mlp_config(cfg, target, info.seed)?;
            Surrogate::fit_mlp(&ds, target, &config, feature_map)?
        }
        other => return Err(Error::config("model", format!("expected poly|forest|mlp, found `{other}`"))),
    };
    model.split = Some(info);
    model.save(&out.path("model.json")?)?;
    if let Some(h) = &model.loss_history {
        let mut w = out.create("loss_history.csv")?;
        h.write_csv(&mut w)?;
        w.flush()?;
    }
    let mut reports = Vec::new();
    for which in [SplitKind::Train, SplitKind::Val, SplitKind::Test] {
        if !ds.view(which, target).1.is_empty() {
            let r = model.evaluate(&ds, which)?;
            say!("{:<6} {:<6} {:<5} rmse {:.6} r2 {:.6} n {}", r.model, target.name(), which.name(), r.rmse, r.r2, r.n);
            reports.push(r);
        }
    }
    out.write_json("metrics.json", &reports)
}

fn cmd_tune(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let (ds, info) = load_split(cfg)?;
    let target = parse_target(cfg)?;
    let feature_map = parse_feature_map(cfg)?;
    let depths: Vec<usize> = parse_list("tune.depths", &cfg.get_str("tune.depths", "2,4,6,8,10,12,14"))?;
    let trees: Vec<usize> = parse_list("tune.trees", &cfg.get_str("tune.trees", "100,200,400,800"))?;
    if depths.is_empty() || depths.contains(&0) {
        return Err(Error::config("tune.depths", "need positive depths"));
    }
    if trees.is_empty() || trees.contains(&0) {
        return Err(Error::config("tune.trees", "need positive tree counts"));
    }
    let folds: usize = cfg.get("tune.folds", 5)?;
    if folds < 2 {
        return Err(Error::config("tune.folds", "need at least two folds"));
    }
    let (tx, ty) = ds.view(SplitKind::Train, target);
    let (vx, vy) = ds.view(SplitKind::Val, target);
    let result = tune_forest(
        feature_map.apply(tx.view()).view(),
        ty.view(),
        feature_map.apply(vx.view()).view(),
        vy.view(),
        &depths,
        &trees,
        folds,
        info.seed,
    )?;
    let mut w = out.create("tune.csv")?;
    result.write_csv(&mut w)?;
    w.flush()?;
    out.write_json("tune.json", &result)?;
    say!(
        "best depth {} trees {} cv_rmse {:.6}",
        result.best.max_depth, result.best.n_estimators, result.best.cv_rmse
    );
    Ok(())
}

fn cmd_eval(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let model = Surrogate::load(Path::new(&cfg.require("model_path")?))?;
    let path = cfg.require("data")?;
    let which_s = cfg.get_str("eval.split", "test");
    let which = SplitKind::parse(&which_s)
        .ok_or_else(|| Error::config("eval.split", format!("expected train|val|test|all, found `{which_s}`")))?;
    let mut ds = Dataset::import_csv(Path::new(&path))?;
    if which != SplitKind::All {
        let info = model
            .split
            .ok_or_else(|| Error::config("eval.split", "model carries no split record; use `all`"))?;
        ds = ds.split(info.test_frac, info.val_frac, info.seed)?;
    }
    let report = model.evaluate(&ds, which)?;
    say!("{}", serde_json::to_string_pretty(&report)?);
    out.write_json(&format!("metrics_{}.json", which.name()), &report)
}

fn cmd_predict(cfg: &mut RunConfig, out: &Output) -> Result<()> {
    let model = Surrogate::load(Path::new(&cfg.require("model_path")?))?;
    let ratios = positive_ratios("ratios", parse_triple("ratios", &cfg.require("ratios")?)?)?;
    let value = model.predict_one(ratios.to_array())?;
    say!("{value}");
    out.write_json(
        "prediction.json",
        &serde_json::json!({ "ratios": ratios.to_array(), "target": model.target, "value": value }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing_and_echo() {
        let mut c = RunConfig::parse("# comment\nseed = 5\naxis.e = log:1:10:3\n").unwrap();
        assert_eq!(c.get::<u64>("seed", 0).unwrap(), 5);
        assert_eq!(c.get::<usize>("tune.folds", 5).unwrap(), 5);
        c.set("jobs", "4");
        let _ = c.get::<usize>("jobs", 0);
        assert_eq!(c.echo(), "seed = 5\ntune.folds = 5\n");
        assert!(RunConfig::parse("no equals sign").is_err());
    }

    #[test]
    fn axis_strings() {
        assert_eq!(parse_axis("a", "lin:1:3:3").unwrap().values(), &[1.0, 2.0, 3.0]);
        assert_eq!(parse_axis("a", "list:1,5").unwrap().values(), &[1.0, 5.0]);
        for bad in ["list:", "lin:1:2:0", "cubic:1:2:3", "lin:1:2"] {
            let e = parse_axis("axis.h", bad).unwrap_err();
            assert!(matches!(&e, Error::Config { key, .. } if key == "axis.h"), "{bad}: {e}");
        }
    }
}
