//! Dominance maps: one cooperative game per grid point, players = parameter ratios.
//!
//! At a grid point `p` with base configuration `b`, coalition `S` is the configuration
//! that takes `p`'s value for players in `S` and `b`'s value for the rest. Its payoff is
//! the QoI improvement over the base in the requested direction:
//!
//! * decrease: `v(S) = Q(b) − Q(c_S)`
//! * increase: `v(S) = Q(c_S) − Q(b)`
//!
//! Configurations without a band gap contribute no improvement (`v(S) = 0`). A cell whose
//! full configuration has no gap, or whose base has no gap in a game that needs the base
//! value, is labelled [`CellLabel::NoBandgap`]. The raw game is repaired with
//! [`monotone_modify`] before Shapley values are taken.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dispersion::{qois, BandGapReport, Material, ParameterRatios, ScanSettings};
use crate::error::{Error, Result};
use crate::game::{
    dominance, monotone_modify, shapley_values, Coalition, CooperativeGame, Dominance,
    ShapleyResult, DEFAULT_TIE_TOL,
};

pub const PLAYER_NAMES: [&str; 3] = ["E", "RHO", "H"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Decrease,
    Increase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QoiKind {
    FirstCutoff,
    GapWidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    values: Vec<f64>,
    scale: AxisScale,
}

impl Axis {
    pub fn new(values: Vec<f64>, scale: AxisScale) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("axis must not be empty"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::domain("axis values must be positive and finite"));
        }
        let increasing = values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::domain("axis values must be strictly monotone"));
        }
        Ok(Axis { values, scale })
    }

    pub fn linear(min: f64, max: f64, n: usize) -> Result<Self> {
        Self::new(spaced(min, max, n, |x| x, |x| x)?, AxisScale::Linear)
    }

    pub fn logarithmic(min: f64, max: f64, n: usize) -> Result<Self> {
        if min <= 0.0 {
            return Err(Error::domain("logarithmic axis needs a positive minimum"));
        }
        Self::new(spaced(min, max, n, f64::ln, f64::exp)?, AxisScale::Logarithmic)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> AxisScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `n` points from `min` to `max`, evenly spaced after `fwd`; endpoints are exact.
fn spaced(
    min: f64,
    max: f64,
    n: usize,
    fwd: fn(f64) -> f64,
    inv: fn(f64) -> f64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("axis needs at least one point"));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (fwd(min), fwd(max));
    Ok((0..n)
        .map(|i| match i {
            0 => min,
            i if i == n - 1 => max,
            i => inv(a + (b - a) * i as f64 / (n - 1) as f64),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// E-ratio, ρ-ratio, h-ratio axes.
    pub axes: [Axis; 3],
    pub base: [f64; 3],
    pub direction: Direction,
    pub qoi: QoiKind,
    pub tie_tol: f64,
}

impl SweepSpec {
    pub fn new(axes: [Axis; 3], base: [f64; 3], direction: Direction, qoi: QoiKind) -> Result<Self> {
        if base.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::domain("base values must be positive"));
        }
        Ok(SweepSpec {
            axes,
            base,
            direction,
            qoi,
            tie_tol: DEFAULT_TIE_TOL,
        })
    }

    /// Phononic ranges (E 0.1–50000 log, ρ 0.1–9.5, h 0.1–11) with base 0.1.
    pub fn bragg(points_per_axis: usize, direction: Direction, qoi: QoiKind) -> Result<Self> {
        Self::new(
            [
                Axis::logarithmic(0.1, 50000.0, points_per_axis)?,
                Axis::linear(0.1, 9.5, points_per_axis)?,
                Axis::linear(0.1, 11.0, points_per_axis)?,
            ],
            [0.1; 3],
            direction,
            qoi,
        )
    }

    /// Sonic-crystal ranges (E 1–100000 log, ρ 1–10, h 1–10) with base 1.
    pub fn sonic(points_per_axis: usize, direction: Direction, qoi: QoiKind) -> Result<Self> {
        Self::new(
            [
                Axis::logarithmic(1.0, 100000.0, points_per_axis)?,
                Axis::linear(1.0, 10.0, points_per_axis)?,
                Axis::linear(1.0, 10.0, points_per_axis)?,
            ],
            [1.0; 3],
            direction,
            qoi,
        )
    }

    pub fn with_tie_tol(mut self, tie_tol: f64) -> Self {
        self.tie_tol = tie_tol;
        self
    }

    pub fn grid_len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Grid points in e-major order (h varies fastest).
    pub fn grid_points(&self) -> Vec<[f64; 3]> {
        let [e, r, h] = &self.axes;
        let mut out = Vec::with_capacity(self.grid_len());
        for &x in e.values() {
            for &y in r.values() {
                for &z in h.values() {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }
}

/// The two quantities of interest at one configuration; `None` means no band gap.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Qois {
    pub first_cutoff_hz: Option<f64>,
    pub first_gap_width_hz: Option<f64>,
}

impl Qois {
    pub fn get(&self, kind: QoiKind) -> Option<f64> {
        match kind {
            QoiKind::FirstCutoff => self.first_cutoff_hz,
            QoiKind::GapWidth => self.first_gap_width_hz,
        }
    }

    /// `c · Q` for both quantities.
    pub fn scaled(&self, c: f64) -> Qois {
        Qois {
            first_cutoff_hz: self.first_cutoff_hz.map(|q| c * q),
            first_gap_width_hz: self.first_gap_width_hz.map(|q| c * q),
        }
    }
}

impl From<&BandGapReport> for Qois {
    fn from(r: &BandGapReport) -> Self {
        Qois {
            first_cutoff_hz: r.first_cutoff_hz,
            first_gap_width_hz: r.first_gap_width_hz,
        }
    }
}

/// Source of QoIs for a ratio triple. Must be pure: maps evaluate it concurrently.
pub trait QoiEvaluator: Sync {
    fn evaluate(&self, point: [f64; 3]) -> Result<Qois>;
}

/// QoIs from the layered-medium dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionEvaluator {
    pub reference: Material,
    pub search: ScanSettings,
}

impl Default for DispersionEvaluator {
    fn default() -> Self {
        DispersionEvaluator {
            reference: Material::RUBBER,
            search: ScanSettings::default(),
        }
    }
}

impl QoiEvaluator for DispersionEvaluator {
    fn evaluate(&self, point: [f64; 3]) -> Result<Qois> {
        let report = qois(ParameterRatios::from_array(point)?, self.reference, &self.search)?;
        Ok(Qois::from(&report))
    }
}

/// Adapter for closures.
pub struct FnEvaluator<F>(pub F);

impl<F> QoiEvaluator for FnEvaluator<F>
where
    F: Fn([f64; 3]) -> Result<Qois> + Sync,
{
    fn evaluate(&self, point: [f64; 3]) -> Result<Qois> {
        (self.0)(point)
    }
}

/// Exact-match lookup into an imported QoI table (e.g. finite-element results).
#[derive(Debug, Clone, Default)]
pub struct LookupTable {
    rows: HashMap<[u64; 3], Qois>,
}

impl LookupTable {
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        let mut rows = HashMap::with_capacity(ds.samples().len());
        for s in ds.samples() {
            let key = point_key(s.features);
            let q = Qois {
                first_cutoff_hz: s.first_cutoff_hz,
                first_gap_width_hz: s.gap_width_hz,
            };
            if rows.insert(key, q).is_some() {
                return Err(Error::format(format!(
                    "duplicate lookup row for ratios {:?}",
                    s.features
                )));
            }
        }
        Ok(LookupTable { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl QoiEvaluator for LookupTable {
    fn evaluate(&self, point: [f64; 3]) -> Result<Qois> {
        self.rows.get(&point_key(point)).copied().ok_or_else(|| Error::Evaluation {
            point,
            message: "configuration missing from lookup table".into(),
        })
    }
}

fn point_key(p: [f64; 3]) -> [u64; 3] {
    // +0.0 and -0.0 never occur: ratios are positive.
    p.map(f64::to_bits)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellLabel {
    Dominant(usize),
    Tie(Vec<usize>),
    None,
    NoBandgap,
}

impl CellLabel {
    fn from_dominance(d: Dominance) -> Self {
        match d {
            Dominance::Dominant(i) => CellLabel::Dominant(i),
            Dominance::Tie(v) => CellLabel::Tie(v),
            Dominance::None => CellLabel::None,
        }
    }

    pub fn render(&self, names: &[&str]) -> String {
        match self {
            CellLabel::Dominant(i) => names[*i].to_string(),
            CellLabel::Tie(v) => format!(
                "TIE:{}",
                v.iter().map(|&i| names[i]).collect::<Vec<_>>().join("+")
            ),
            CellLabel::None => "NONE".into(),
            CellLabel::NoBandgap => "NO_BANDGAP".into(),
        }
    }
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&PLAYER_NAMES))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub point: [f64; 3],
    pub label: CellLabel,
    /// Coalition payoffs before modification, indexed by bitmask (E = bit 0, ρ = 1, h = 2).
    pub raw_payoffs: Vec<f64>,
    /// Shapley analysis of the modified game; absent for no-bandgap cells.
    pub shapley: Option<ShapleyResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceMap {
    pub spec: SweepSpec,
    /// One cell per grid point, e-major order.
    pub cells: Vec<MapCell>,
}

impl DominanceMap {
    pub fn cell(&self, i: usize, j: usize, k: usize) -> &MapCell {
        let [_, r, h] = &self.spec.axes;
        &self.cells[(i * r.len() + j) * h.len() + k]
    }

    /// `e_ratio,rho_ratio,h_ratio,label,phi_e,phi_rho,phi_h,dom_e_pct,dom_rho_pct,dom_h_pct`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "e_ratio,rho_ratio,h_ratio,label,phi_e,phi_rho,phi_h,dom_e_pct,dom_rho_pct,dom_h_pct"
        )?;
        for c in &self.cells {
            let [e, r, h] = c.point;
            write!(out, "{e},{r},{h},{}", c.label)?;
            match &c.shapley {
                Some(s) => {
                    for v in &s.values {
                        write!(out, ",{v}")?;
                    }
                    match &s.dominance_pct {
                        Some(p) => {
                            for v in p {
                                write!(out, ",{v}")?;
                            }
                        }
                        None => write!(out, ",,,")?,
                    }
                }
                None => write!(out, ",,,,,,")?,
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_cells_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.cells)?;
        Ok(())
    }
}

/// Configuration of coalition `s`: point values for members, base values otherwise.
pub fn configuration(point: [f64; 3], base: [f64; 3], s: Coalition) -> [f64; 3] {
    std::array::from_fn(|i| if s >> i & 1 == 1 { point[i] } else { base[i] })
}

fn players() -> Vec<String> {
    PLAYER_NAMES.iter().map(|s| s.to_string()).collect()
}

/// Raw game plus whether the cell must be reported as having no band gap.
fn point_game<F>(point: [f64; 3], spec: &SweepSpec, mut q: F) -> Result<(CooperativeGame, bool)>
where
    F: FnMut([f64; 3]) -> Result<Qois>,
{
    let kind = spec.qoi;
    let base_q = q(spec.base)?.get(kind);
    let full_q = q(point)?.get(kind);
    // A missing gap has zero width, so width-increase games can start from a gap-less base.
    let reference = match (base_q, spec.direction, kind) {
        (Some(b), _, _) => Some(b),
        (None, Direction::Increase, QoiKind::GapWidth) => Some(0.0),
        (None, _, _) => None,
    };
    let mut failure = None;
    let game = CooperativeGame::from_fn(players(), |s| {
        let config = configuration(point, spec.base, s);
        match q(config) {
            Ok(qs) => match (qs.get(kind), reference) {
                (Some(value), Some(r)) => match spec.direction {
                    Direction::Decrease => r - value,
                    Direction::Increase => value - r,
                },
                _ => 0.0,
            },
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((game, full_q.is_none() || reference.is_none()))
}

/// Cooperative game at one grid point (before modification).
pub fn build_game_at(
    point: [f64; 3],
    spec: &SweepSpec,
    evaluator: &dyn QoiEvaluator,
) -> Result<CooperativeGame> {
    point_game(point, spec, |p| evaluator.evaluate(p)).map(|(g, _)| g)
}

fn analyze<F>(point: [f64; 3], spec: &SweepSpec, q: F) -> Result<MapCell>
where
    F: FnMut([f64; 3]) -> Result<Qois>,
{
    let (game, no_gap) = point_game(point, spec, q)?;
    let raw_payoffs = game.values().to_vec();
    if no_gap {
        return Ok(MapCell {
            point,
            label: CellLabel::NoBandgap,
            raw_payoffs,
            shapley: None,
        });
    }
    let result = shapley_values(&monotone_modify(&game), spec.tie_tol)?;
    Ok(MapCell {
        point,
        label: CellLabel::from_dominance(dominance(&result)),
        raw_payoffs,
        shapley: Some(result),
    })
}

/// Full pipeline at a single grid point: game, repair, Shapley values, label.
pub fn analyze_point(
    point: [f64; 3],
    spec: &SweepSpec,
    evaluator: &dyn QoiEvaluator,
) -> Result<MapCell> {
    analyze(point, spec, |p| evaluator.evaluate(p))
}

/// Dominance label for every grid point of `spec`.
///
/// Every distinct configuration is evaluated once, in parallel, and cells are assembled
/// by grid index, so the result does not depend on the number of worker threads.
pub fn dominance_map(spec: &SweepSpec, evaluator: &dyn QoiEvaluator) -> Result<DominanceMap> {
    let extended: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            let mut v = spec.axes[i].values().to_vec();
            v.push(spec.base[i]);
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let mut configs = Vec::with_capacity(extended.iter().map(Vec::len).product());
    for &e in &extended[0] {
        for &r in &extended[1] {
            for &h in &extended[2] {
                configs.push([e, r, h]);
            }
        }
    }
    let evaluated: Vec<Result<Qois>> = configs.par_iter().map(|&p| evaluator.evaluate(p)).collect();
    let mut table = HashMap::with_capacity(configs.len());
    for (p, q) in configs.iter().zip(evaluated) {
        let q = q.map_err(|e| match e {
            Error::Evaluation { .. } => e,
            other => Error::Evaluation {
                point: *p,
                message: other.to_string(),
            },
        })?;
        table.insert(point_key(*p), q);
    }
    let cells = spec
        .grid_points()
        .into_par_iter()
        .map(|point| analyze(point, spec, |p| Ok(table[&point_key(p)])))
        .collect::<Result<Vec<_>>>()?;
    Ok(DominanceMap {
        spec: spec.clone(),
        cells,
    })
}

/// Two-player Shapley analysis of a scalar function: `v(S) = f(c_S) − f(base)`.
pub fn continuous_shapley<F>(f: F, point: (f64, f64), base: (f64, f64), tie_tol: f64) -> ShapleyResult
where
    F: Fn(f64, f64) -> f64,
{
    let f0 = f(base.0, base.1);
    let values = vec![
        0.0,
        f(point.0, base.1) - f0,
        f(base.0, point.1) - f0,
        f(point.0, point.1) - f0,
    ];
    let game = CooperativeGame::new(vec!["x1".into(), "x2".into()], values)
        .expect("two-player game from finite values");
    shapley_values(&game, tie_tol).expect("non-empty game")
}

/// `f(x₁, x₂) = 3x₁² + x₂² − x₁x₂`, the two-input demonstration model.
pub fn quadratic_demo(x1: f64, x2: f64) -> f64 {
    3.0 * x1 * x1 + x2 * x2 - x1 * x2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousCell {
    pub x1: f64,
    pub x2: f64,
    pub label: CellLabel,
    pub shapley: ShapleyResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousMap {
    pub x1_axis: Vec<f64>,
    pub x2_axis: Vec<f64>,
    /// x1-major order.
    pub cells: Vec<ContinuousCell>,
}

pub const CONTINUOUS_NAMES: [&str; 2] = ["X1", "X2"];

impl ContinuousMap {
    pub fn cell(&self, i: usize, j: usize) -> &ContinuousCell {
        &self.cells[i * self.x2_axis.len() + j]
    }

    /// `x1,x2,label,phi_x1,phi_x2,dom_x1_pct,dom_x2_pct`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x1,x2,label,phi_x1,phi_x2,dom_x1_pct,dom_x2_pct")?;
        for c in &self.cells {
            write!(
                out,
                "{},{},{},{},{}",
                c.x1,
                c.x2,
                c.label.render(&CONTINUOUS_NAMES),
                c.shapley.values[0],
                c.shapley.values[1]
            )?;
            match &c.shapley.dominance_pct {
                Some(p) => writeln!(out, ",{},{}", p[0], p[1])?,
                None => writeln!(out, ",,")?,
            }
        }
        Ok(())
    }
}

/// Shapley dominance of `f` over a two-axis grid.
pub fn continuous_map<F>(f: F, x1_axis: &[f64], x2_axis: &[f64], base: (f64, f64), tie_tol: f64) -> ContinuousMap
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let points: Vec<(f64, f64)> = x1_axis
        .iter()
        .flat_map(|&a| x2_axis.iter().map(move |&b| (a, b)))
        .collect();
    let cells = points
        .into_par_iter()
        .map(|(x1, x2)| {
            let shapley = continuous_shapley(&f, (x1, x2), base, tie_tol);
            ContinuousCell {
                x1,
                x2,
                label: CellLabel::from_dominance(dominance(&shapley)),
                shapley,
            }
        })
        .collect();
    ContinuousMap {
        x1_axis: x1_axis.to_vec(),
        x2_axis: x2_axis.to_vec(),
        cells,
    }
}

/// `0, step, 2·step, …, max`, computed as `i / divisions · max` to avoid drift.
pub fn uniform_axis(max: f64, divisions: usize) -> Vec<f64> {
    (0..=divisions)
        .map(|i| max * i as f64 / divisions as f64)
        .collect()
}
