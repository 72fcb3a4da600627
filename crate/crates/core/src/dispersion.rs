//! Longitudinal waves in an infinite stack of two-layer unit cells.
//!
//! For a cell made of layers `(E₁, ρ₁, h₁)` and `(E₂, ρ₂, h₂)` the Bloch wave number `k`
//! satisfies `cos(k h) = D(ω)` with
//!
//! ```text
//! D(ω) = cos(ωh₁/C₁)·cos(ωh₂/C₂) − ½(Z₁/Z₂ + Z₂/Z₁)·sin(ωh₁/C₁)·sin(ωh₂/C₂)
//! ```
//!
//! where `Cₙ = √(Eₙ/ρₙ)` and `Zₙ = ρₙCₙ`. Frequencies with `|D(ω)| > 1` admit no real
//! wave number and form the band gaps.
//!
//! The gap scan relies on a property of periodic Sturm–Liouville problems: inside a
//! propagating band `D` is strictly monotone. Two consequences make a coarse uniform grid
//! reliable:
//!
//! * a local extremum among three propagating samples hides a narrow gap (or a closed
//!   gap, when the extremum is exactly ±1);
//! * consecutive gap samples of opposite sign hide a narrow propagating band, because
//!   adjacent gaps always alternate between `D > 1` and `D < −1`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|D|` must exceed one by more than this for a sample or peak to count as a gap.
/// Covers rounding in `D` at exact tangencies (closed gaps, impedance-matched cells).
pub const TANGENCY_MARGIN: f64 = 1e-12;

/// Edge refinement keeps bisecting past `edge_tol` until the residual `||D|-1|` is below this.
const EDGE_RESIDUAL: f64 = 1e-10;

const MAX_BISECTIONS: usize = 400;

/// Bulk elastic properties of a base material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Pa
    pub youngs_modulus: f64,
    /// kg/m³
    pub density: f64,
}

impl Material {
    /// Rubber, the reference material of the second layer.
    pub const RUBBER: Material = Material {
        youngs_modulus: 3.49e6,
        density: 1100.0,
    };

    pub fn new(youngs_modulus: f64, density: f64) -> Result<Self> {
        check_positive("youngs_modulus", youngs_modulus)?;
        check_positive("density", density)?;
        Ok(Material {
            youngs_modulus,
            density,
        })
    }

    pub fn wave_speed(&self) -> Result<f64> {
        wave_speed(self.youngs_modulus, self.density)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialLayer {
    pub youngs_modulus: f64,
    pub density: f64,
    /// In cell units; the default cell has total width 1, read as metres.
    pub thickness: f64,
}

impl MaterialLayer {
    pub fn new(youngs_modulus: f64, density: f64, thickness: f64) -> Result<Self> {
        check_positive("youngs_modulus", youngs_modulus)?;
        check_positive("density", density)?;
        check_positive("thickness", thickness)?;
        Ok(MaterialLayer {
            youngs_modulus,
            density,
            thickness,
        })
    }

    pub fn from_material(material: Material, thickness: f64) -> Result<Self> {
        Self::new(material.youngs_modulus, material.density, thickness)
    }

    fn speed(&self) -> f64 {
        (self.youngs_modulus / self.density).sqrt()
    }

    fn impedance(&self) -> f64 {
        self.density * self.speed()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayeredUnitCell {
    pub layer1: MaterialLayer,
    pub layer2: MaterialLayer,
}

impl LayeredUnitCell {
    pub fn new(layer1: MaterialLayer, layer2: MaterialLayer) -> Self {
        LayeredUnitCell { layer1, layer2 }
    }

    /// Cell whose layer 1 is `ratios × reference` and whose total width is 1.
    pub fn from_ratios(ratios: ParameterRatios, reference: Material) -> Result<Self> {
        let h = ratios.h_ratio;
        let layer1 = MaterialLayer::new(
            ratios.e_ratio * reference.youngs_modulus,
            ratios.rho_ratio * reference.density,
            h / (1.0 + h),
        )?;
        let layer2 = MaterialLayer::from_material(reference, 1.0 / (1.0 + h))?;
        Ok(LayeredUnitCell { layer1, layer2 })
    }

    pub fn width(&self) -> f64 {
        self.layer1.thickness + self.layer2.thickness
    }

    pub fn swapped(&self) -> Self {
        LayeredUnitCell {
            layer1: self.layer2,
            layer2: self.layer1,
        }
    }

    /// Initial scan ceiling, `40π · min(C₁/h₁, C₂/h₂)`.
    pub fn default_omega_max(&self) -> f64 {
        let s1 = self.layer1.speed() / self.layer1.thickness;
        let s2 = self.layer2.speed() / self.layer2.thickness;
        40.0 * PI * s1.min(s2)
    }

    fn validate(&self) -> Result<()> {
        for layer in [&self.layer1, &self.layer2] {
            MaterialLayer::new(layer.youngs_modulus, layer.density, layer.thickness)?;
        }
        Ok(())
    }
}

/// Layer-1 : layer-2 ratios of Young's modulus, density and thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRatios {
    pub e_ratio: f64,
    pub rho_ratio: f64,
    pub h_ratio: f64,
}

impl ParameterRatios {
    pub fn new(e_ratio: f64, rho_ratio: f64, h_ratio: f64) -> Result<Self> {
        check_positive("e_ratio", e_ratio)?;
        check_positive("rho_ratio", rho_ratio)?;
        check_positive("h_ratio", h_ratio)?;
        Ok(ParameterRatios {
            e_ratio,
            rho_ratio,
            h_ratio,
        })
    }

    pub fn from_array(values: [f64; 3]) -> Result<Self> {
        Self::new(values[0], values[1], values[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.e_ratio, self.rho_ratio, self.h_ratio]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapInterval {
    pub lower_hz: f64,
    pub upper_hz: f64,
}

impl GapInterval {
    pub fn width_hz(&self) -> f64 {
        self.upper_hz - self.lower_hz
    }

    pub fn lower_omega(&self) -> f64 {
        self.lower_hz * TAU
    }

    pub fn upper_omega(&self) -> f64 {
        self.upper_hz * TAU
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandGapReport {
    pub gaps: Vec<GapInterval>,
    pub first_cutoff_hz: Option<f64>,
    pub first_gap_width_hz: Option<f64>,
    /// Scan ceiling actually used, rad/s.
    pub omega_max_searched: f64,
    /// The last gap was still open at the scan ceiling, so its upper edge is the ceiling.
    pub last_gap_open: bool,
}

impl BandGapReport {
    fn from_omega_gaps(gaps: Vec<(f64, f64)>, omega_max: f64, last_gap_open: bool) -> Self {
        let gaps: Vec<GapInterval> = gaps
            .into_iter()
            .map(|(lo, hi)| GapInterval {
                lower_hz: lo / TAU,
                upper_hz: hi / TAU,
            })
            .collect();
        let first = gaps.first().copied();
        BandGapReport {
            first_cutoff_hz: first.map(|g| g.lower_hz),
            first_gap_width_hz: first.map(|g| g.width_hz()),
            gaps,
            omega_max_searched: omega_max,
            last_gap_open,
        }
    }

    pub fn has_gap(&self) -> bool {
        !self.gaps.is_empty()
    }

    /// `{gaps:[{lower_hz,upper_hz}], first_cutoff_hz, first_gap_width_hz}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "gaps": self.gaps,
            "first_cutoff_hz": self.first_cutoff_hz,
            "first_gap_width_hz": self.first_gap_width_hz,
        })
    }
}

/// Search settings for the adaptive scan used by [`qois`] and [`search_band_gaps`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    /// Starting ceiling in rad/s; `None` means [`LayeredUnitCell::default_omega_max`].
    pub omega_max: Option<f64>,
    pub n_samples: usize,
    pub edge_tol: f64,
    /// How many times the ceiling may double while the first gap is not yet bracketed.
    pub max_doublings: u32,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            omega_max: None,
            n_samples: 4096,
            edge_tol: 1e-9,
            max_doublings: 3,
        }
    }
}

pub fn wave_speed(youngs_modulus: f64, density: f64) -> Result<f64> {
    check_positive("youngs_modulus", youngs_modulus)?;
    check_positive("density", density)?;
    Ok((youngs_modulus / density).sqrt())
}

/// Right-hand side of the dispersion relation; a real wave number exists iff the
/// value lies in `[-1, 1]`.
pub fn dispersion_rhs(omega: f64, cell: &LayeredUnitCell) -> f64 {
    let (l1, l2) = (&cell.layer1, &cell.layer2);
    let a = omega * l1.thickness / l1.speed();
    let b = omega * l2.thickness / l2.speed();
    let z = l1.impedance() / l2.impedance();
    let mismatch = 0.5 * (z + z.recip());
    a.cos() * b.cos() - mismatch * a.sin() * b.sin()
}

/// Gaps inside `(0, omega_max]` on a fixed uniform grid of `n_samples` points.
pub fn find_band_gaps(
    cell: &LayeredUnitCell,
    omega_max: f64,
    n_samples: usize,
    edge_tol: f64,
) -> Result<BandGapReport> {
    cell.validate()?;
    check_scan(omega_max, n_samples, edge_tol)?;
    let (gaps, open) = scan_window(cell, omega_max, n_samples, edge_tol);
    Ok(BandGapReport::from_omega_gaps(gaps, omega_max, open))
}

/// Like [`find_band_gaps`] but doubles the ceiling (and the sample count, keeping the
/// density) until at least two gaps are found or the last gap closes below the ceiling.
pub fn search_band_gaps(cell: &LayeredUnitCell, settings: &ScanSettings) -> Result<BandGapReport> {
    cell.validate()?;
    let mut omega_max = settings
        .omega_max
        .unwrap_or_else(|| cell.default_omega_max());
    let mut n = settings.n_samples;
    check_scan(omega_max, n, settings.edge_tol)?;
    let mut attempt = 0;
    loop {
        let (gaps, open) = scan_window(cell, omega_max, n, settings.edge_tol);
        let bracketed = gaps.len() >= 2 || (!gaps.is_empty() && !open);
        if bracketed || attempt == settings.max_doublings {
            return Ok(BandGapReport::from_omega_gaps(gaps, omega_max, open));
        }
        attempt += 1;
        omega_max *= 2.0;
        // Old grid points stay on the new grid.
        n = 2 * n - 1;
    }
}

/// Band-gap report of the unit-width cell built from `ratios` against `reference`.
pub fn qois(
    ratios: ParameterRatios,
    reference: Material,
    search: &ScanSettings,
) -> Result<BandGapReport> {
    let ratios = ParameterRatios::from_array(ratios.to_array())?;
    let cell = LayeredUnitCell::from_ratios(ratios, reference)?;
    search_band_gaps(&cell, search)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub omega: f64,
    pub f_hz: f64,
    pub rhs: f64,
    pub propagating: bool,
}

/// `n_samples` uniform samples of the dispersion right-hand side over `[0, omega_max]`.
pub fn band_diagram(
    cell: &LayeredUnitCell,
    omega_max: f64,
    n_samples: usize,
) -> Result<Vec<BandPoint>> {
    cell.validate()?;
    check_scan(omega_max, n_samples, 1e-9)?;
    Ok(sample_grid(omega_max, n_samples)
        .map(|omega| {
            let rhs = dispersion_rhs(omega, cell);
            BandPoint {
                omega,
                f_hz: omega / TAU,
                rhs,
                propagating: rhs.abs() <= 1.0,
            }
        })
        .collect())
}

/// CSV with header `omega_rad_s,f_hz,rhs,propagating`.
pub fn write_band_csv<W: Write>(mut out: W, points: &[BandPoint]) -> Result<()> {
    writeln!(out, "omega_rad_s,f_hz,rhs,propagating")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.omega,
            p.f_hz,
            p.rhs,
            u8::from(p.propagating)
        )?;
    }
    Ok(())
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {value}")))
    }
}

fn check_scan(omega_max: f64, n_samples: usize, edge_tol: f64) -> Result<()> {
    check_positive("omega_max", omega_max)?;
    check_positive("edge_tol", edge_tol)?;
    if n_samples < 2 {
        return Err(Error::domain(format!("n_samples must be >= 2, got {n_samples}")));
    }
    Ok(())
}

fn sample_grid(omega_max: f64, n: usize) -> impl Iterator<Item = f64> {
    let last = (n - 1) as f64;
    (0..n).map(move |i| omega_max * (i as f64 / last))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zone {
    Pass,
    Above,
    Below,
}

impl Zone {
    fn of(rhs: f64) -> Zone {
        if rhs > 1.0 + TANGENCY_MARGIN {
            Zone::Above
        } else if rhs < -1.0 - TANGENCY_MARGIN {
            Zone::Below
        } else {
            Zone::Pass
        }
    }

    fn level(self) -> f64 {
        match self {
            Zone::Above => 1.0,
            Zone::Below => -1.0,
            Zone::Pass => 0.0,
        }
    }
}

/// Gap intervals in rad/s, plus whether the last one is still open at `omega_max`.
fn scan_window(
    cell: &LayeredUnitCell,
    omega_max: f64,
    n: usize,
    edge_tol: f64,
) -> (Vec<(f64, f64)>, bool) {
    let d = |w: f64| dispersion_rhs(w, cell);
    let excess = |w: f64| d(w).abs() - 1.0;
    let omega: Vec<f64> = sample_grid(omega_max, n).collect();
    let rhs: Vec<f64> = omega.iter().map(|&w| d(w)).collect();
    let zone: Vec<Zone> = rhs.iter().map(|&r| Zone::of(r)).collect();

    let mut gaps: Vec<(f64, f64)> = Vec::new();
    let mut open_at: Option<f64> = None;
    for k in 1..n {
        let (w0, w1) = (omega[k - 1], omega[k]);
        match (zone[k - 1], zone[k]) {
            (Zone::Pass, Zone::Pass) => {
                if k >= 2 && zone[k - 2] == Zone::Pass {
                    let (r0, r1, r2) = (rhs[k - 2], rhs[k - 1], rhs[k]);
                    if (r1 - r0) * (r2 - r1) <= 0.0 {
                        let sign = if r1 >= 0.0 { 1.0 } else { -1.0 };
                        let lo = omega[k - 2];
                        let (peak, value) = golden_max(|w| sign * d(w), lo, w1);
                        if value > 1.0 + TANGENCY_MARGIN {
                            let a = refine_edge(&excess, lo, peak, edge_tol);
                            let b = refine_edge(&excess, peak, w1, edge_tol);
                            push_gap(&mut gaps, a, b);
                        }
                    }
                }
            }
            (Zone::Pass, _) => open_at = Some(refine_edge(&excess, w0, w1, edge_tol)),
            (_, Zone::Pass) => {
                let hi = refine_edge(&excess, w0, w1, edge_tol);
                if let Some(lo) = open_at.take() {
                    push_gap(&mut gaps, lo, hi);
                }
            }
            (a, b) if a != b => {
                // A whole propagating band fits between the two samples.
                let (la, lb) = (a.level(), b.level());
                let leave = refine_edge(&|w: f64| d(w) - la, w0, w1, edge_tol);
                let enter = refine_edge(&|w: f64| d(w) - lb, w0, w1, edge_tol);
                if let Some(lo) = open_at.take() {
                    push_gap(&mut gaps, lo, leave.min(enter));
                }
                open_at = Some(leave.max(enter));
            }
            _ => {}
        }
    }
    let open = open_at.is_some();
    if let Some(lo) = open_at {
        push_gap(&mut gaps, lo, omega_max);
    }
    (gaps, open)
}

fn push_gap(gaps: &mut Vec<(f64, f64)>, lo: f64, hi: f64) {
    if hi <= lo {
        return;
    }
    match gaps.last_mut() {
        Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
        _ => gaps.push((lo, hi)),
    }
}

/// Root of `f` in `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops once the bracket is narrower than `rel_tol · hi` and the residual is below
/// [`EDGE_RESIDUAL`], or the bracket cannot be split further.
fn refine_edge<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    let lo_positive = f_lo > 0.0;
    for _ in 0..MAX_BISECTIONS {
        let narrow = hi - lo <= rel_tol * hi.abs();
        if narrow && f_lo.abs().min(f_hi.abs()) <= EDGE_RESIDUAL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if (f_mid > 0.0) == lo_positive {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Golden-section maximum of a unimodal `f` on `[a, b]`.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-15 * b.abs() {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rubber_cell(e: f64, rho: f64, h: f64) -> LayeredUnitCell {
        LayeredUnitCell::from_ratios(ParameterRatios::new(e, rho, h).unwrap(), Material::RUBBER)
            .unwrap()
    }

    #[test]
    fn wave_speed_values() {
        assert_eq!(wave_speed(4.0, 1.0).unwrap(), 2.0);
        let c = wave_speed(3.49e6, 1100.0).unwrap();
        assert!((c - 56.326_967_544_216_98).abs() < 1e-10);
        assert!(matches!(wave_speed(0.0, 1.0), Err(Error::Domain(_))));
        assert!(wave_speed(1.0, -2.0).is_err());
    }

    #[test]
    fn rhs_is_one_at_zero_frequency() {
        assert_eq!(dispersion_rhs(0.0, &rubber_cell(50.0, 2.0, 1.0)), 1.0);
        assert_eq!(dispersion_rhs(0.0, &rubber_cell(0.1, 9.5, 11.0)), 1.0);
    }

    #[test]
    fn identical_layers_reach_minus_one_at_half_period() {
        let layer = MaterialLayer::new(4.0, 1.0, 0.5).unwrap();
        let cell = LayeredUnitCell::new(layer, layer);
        // C = 2, total travel time 0.5 → ω = 2π.
        let v = dispersion_rhs(2.0 * PI, &cell);
        assert!((v + 1.0).abs() < 1e-14);
    }

    #[test]
    fn rhs_at_100_hz_matches_high_precision_value() {
        // 40-digit term-by-term evaluation: 3.2765054217616139802...
        let v = dispersion_rhs(TAU * 100.0, &rubber_cell(50.0, 2.0, 1.0));
        assert!((v - 3.276_505_421_761_614).abs() < 1e-12);
    }

    #[test]
    fn identical_and_matched_cells_have_no_gaps() {
        let s = ScanSettings::default();
        assert!(!qois(ParameterRatios::new(1.0, 1.0, 1.0).unwrap(), Material::RUBBER, &s)
            .unwrap()
            .has_gap());
        let r = qois(ParameterRatios::new(4.0, 0.25, 3.0).unwrap(), Material::RUBBER, &s).unwrap();
        assert!(r.gaps.is_empty());
        assert_eq!(r.first_cutoff_hz, None);
        assert_eq!(r.first_gap_width_hz, None);
    }

    #[test]
    fn first_gap_of_reference_cells() {
        // Edges from mpmath root finding on the 30-digit relation.
        let s = ScanSettings::default();
        let r = qois(ParameterRatios::new(50.0, 2.0, 1.0).unwrap(), Material::RUBBER, &s).unwrap();
        let g = r.gaps[0];
        assert!((g.lower_hz / 23.369_015_906_538_398 - 1.0).abs() < 1e-9);
        assert!((g.upper_hz / 55.187_372_825_250_607 - 1.0).abs() < 1e-9);

        let r = qois(ParameterRatios::new(0.1, 0.1, 0.1).unwrap(), Material::RUBBER, &s).unwrap();
        let g = r.gaps[0];
        assert!((g.lower_hz / 16.952_545_284_559_738 - 1.0).abs() < 1e-9);
        assert!((g.upper_hz / 30.670_654_320_385_22 - 1.0).abs() < 1e-9);
        assert_eq!(r.first_cutoff_hz, Some(g.lower_hz));
        assert_eq!(r.first_gap_width_hz, Some(g.upper_hz - g.lower_hz));
    }

    #[test]
    fn narrow_gap_between_samples_is_found() {
        // Near impedance match with a thin second layer: the first gap is ~1.5 mHz wide,
        // far below the 30 mHz grid spacing.
        let cell = rubber_cell(0.1, 9.5, 11.0);
        let r = search_band_gaps(&cell, &ScanSettings::default()).unwrap();
        let g = r.gaps[0];
        assert!((g.lower_hz - 3.122_3).abs() < 1e-3, "{g:?}");
        assert!(g.width_hz() < 0.01);
        for w in [g.lower_omega(), g.upper_omega()] {
            assert!((dispersion_rhs(w, &cell).abs() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn narrow_band_inside_gap_run_is_found() {
        // Stiff heavy core: a ~1.4 Hz pass band near 338 Hz splits what a plain grid
        // would report as one gap reaching ~2 kHz.
        let r = qois(
            ParameterRatios::new(50000.0, 9.5, 11.0).unwrap(),
            Material::RUBBER,
            &ScanSettings::default(),
        )
        .unwrap();
        let g = r.gaps[0];
        assert!(g.upper_hz < 400.0 && g.upper_hz > 300.0, "{g:?}");
        assert!(r.gaps[1].lower_hz - g.upper_hz < 2.0);
        assert!((g.width_hz() - 316.87).abs() < 0.01, "{g:?}");
    }

    #[test]
    fn gap_open_at_ceiling_is_flagged() {
        let cell = rubber_cell(50.0, 2.0, 1.0);
        // 40 Hz lies inside the first gap.
        let r = find_band_gaps(&cell, TAU * 40.0, 512, 1e-9).unwrap();
        assert_eq!(r.gaps.len(), 1);
        assert!(r.last_gap_open);
        assert_eq!(r.gaps[0].upper_omega(), TAU * 40.0);
    }

    #[test]
    fn scan_argument_errors() {
        let cell = rubber_cell(50.0, 2.0, 1.0);
        assert!(find_band_gaps(&cell, 0.0, 100, 1e-9).is_err());
        assert!(find_band_gaps(&cell, 10.0, 1, 1e-9).is_err());
        assert!(ParameterRatios::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn band_csv_header_and_rows() {
        let cell = rubber_cell(50.0, 2.0, 1.0);
        let pts = band_diagram(&cell, 1000.0, 5).unwrap();
        let mut buf = Vec::new();
        write_band_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("omega_rad_s,f_hz,rhs,propagating"));
        assert_eq!(lines.next(), Some("0,0,1,1"));
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn gap_json_shape() {
        let r = qois(
            ParameterRatios::new(1.0, 1.0, 1.0).unwrap(),
            Material::RUBBER,
            &ScanSettings::default(),
        )
        .unwrap();
        assert_eq!(
            r.to_json().to_string(),
            r#"{"first_cutoff_hz":null,"first_gap_width_hz":null,"gaps":[]}"#
        );
    }
}
