//! `(ratios -> QoIs)` tables: generation from the dispersion relation, CSV exchange,
//! seeded train/validation/test splits and z-score feature scaling.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView2, Axis as NdAxis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensitivity::{Axis, AxisScale, QoiEvaluator};

pub const CSV_HEADER: &str = "e_ratio,rho_ratio,h_ratio,f_cutoff_hz,gap_width_hz";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// `(e_ratio, rho_ratio, h_ratio)`, all positive.
    pub features: [f64; 3],
    pub first_cutoff_hz: Option<f64>,
    pub gap_width_hz: Option<f64>,
}

impl Sample {
    pub fn new(features: [f64; 3], first_cutoff_hz: Option<f64>, gap_width_hz: Option<f64>) -> Result<Self> {
        if features.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::domain(format!("ratios must be positive and finite, got {features:?}")));
        }
        for t in [first_cutoff_hz, gap_width_hz].into_iter().flatten() {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::domain(format!("targets must be non-negative, got {t}")));
            }
        }
        Ok(Sample {
            features,
            first_cutoff_hz,
            gap_width_hz,
        })
    }

    pub fn target(&self, target: Target) -> Option<f64> {
        match target {
            Target::Cutoff => self.first_cutoff_hz,
            Target::Width => self.gap_width_hz,
        }
    }

    fn has_any_target(&self) -> bool {
        self.first_cutoff_hz.is_some() || self.gap_width_hz.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Cutoff,
    Width,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Cutoff => "cutoff",
            Target::Width => "width",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cutoff" | "first_cutoff" | "f_cutoff_hz" => Some(Target::Cutoff),
            "width" | "gap_width" | "gap_width_hz" => Some(Target::Width),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: AxisScale,
}

impl AxisSpec {
    pub fn to_axis(&self) -> Result<Axis> {
        match self.scale {
            AxisScale::Linear => Axis::linear(self.min, self.max, self.count),
            AxisScale::Logarithmic => Axis::logarithmic(self.min, self.max, self.count),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub e_ratio: AxisSpec,
    pub rho_ratio: AxisSpec,
    pub h_ratio: AxisSpec,
}

impl Default for GridSpec {
    /// 19 × 11 × 11 over E 0.1–50000 (log), ρ 0.1–9.5, h 0.1–11; every point has a gap.
    fn default() -> Self {
        GridSpec {
            e_ratio: AxisSpec {
                min: 0.1,
                max: 50000.0,
                count: 19,
                scale: AxisScale::Logarithmic,
            },
            rho_ratio: AxisSpec {
                min: 0.1,
                max: 9.5,
                count: 11,
                scale: AxisScale::Linear,
            },
            h_ratio: AxisSpec {
                min: 0.1,
                max: 11.0,
                count: 11,
                scale: AxisScale::Linear,
            },
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<[f64; 3]>> {
        let (e, r, h) = (
            self.e_ratio.to_axis()?,
            self.rho_ratio.to_axis()?,
            self.h_ratio.to_axis()?,
        );
        let mut out = Vec::with_capacity(e.len() * r.len() * h.len());
        for &x in e.values() {
            for &y in r.values() {
                for &z in h.values() {
                    out.push([x, y, z]);
                }
            }
        }
        Ok(out)
    }
}

/// Where a dataset came from; serialised as the provenance sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `"generated"`, `"imported"` or `"points"`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub excluded_count: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Train,
    Val,
    Test,
    All,
}

impl SplitKind {
    pub fn name(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Val => "val",
            SplitKind::Test => "test",
            SplitKind::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(SplitKind::Train),
            "val" | "validation" => Some(SplitKind::Val),
            "test" => Some(SplitKind::Test),
            "all" => Some(SplitKind::All),
            _ => None,
        }
    }
}

/// Index sets into [`Dataset::samples`]; disjoint, and together they cover every sample
/// that carries at least one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub seed: u64,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    provenance: Provenance,
    splits: Option<Splits>,
}

impl Dataset {
    pub fn from_samples(samples: Vec<Sample>, provenance: Provenance) -> Self {
        Dataset {
            samples,
            provenance,
            splits: None,
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn splits(&self) -> Option<&Splits> {
        self.splits.as_ref()
    }

    /// Indices of samples that carry at least one target.
    pub fn retained_indices(&self) -> Vec<usize> {
        (0..self.samples.len())
            .filter(|&i| self.samples[i].has_any_target())
            .collect()
    }

    /// Seeded shuffle, then `test = ⌊n·test_frac⌋`, `val = ⌊(n − test)·val_frac⌋`,
    /// training gets the remainder.
    pub fn split(&self, test_frac: f64, val_frac: f64, seed: u64) -> Result<Dataset> {
        for (name, f) in [("test_frac", test_frac), ("val_frac", val_frac)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0, 1), got {f}")));
            }
        }
        let mut idx = self.retained_indices();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_test = floor_count(n, test_frac);
        let n_val = floor_count(n - n_test, val_frac);
        let test = idx[..n_test].to_vec();
        let val = idx[n_test..n_test + n_val].to_vec();
        let train = idx[n_test + n_val..].to_vec();
        let mut out = self.clone();
        out.provenance.seed = Some(seed);
        out.splits = Some(Splits {
            seed,
            train,
            val,
            test,
        });
        Ok(out)
    }

    /// Sample indices of one split; `All` (or an unsplit dataset) means every retained sample.
    pub fn indices(&self, which: SplitKind) -> Vec<usize> {
        match (&self.splits, which) {
            (Some(s), SplitKind::Train) => s.train.clone(),
            (Some(s), SplitKind::Val) => s.val.clone(),
            (Some(s), SplitKind::Test) => s.test.clone(),
            _ => self.retained_indices(),
        }
    }

    /// Feature matrix (rows = samples) and target vector for one split, skipping samples
    /// where `target` is absent.
    pub fn view(&self, which: SplitKind, target: Target) -> (Array2<f64>, Array1<f64>) {
        let rows: Vec<&Sample> = self
            .indices(which)
            .into_iter()
            .map(|i| &self.samples[i])
            .filter(|s| s.target(target).is_some())
            .collect();
        let mut x = Array2::zeros((rows.len(), 3));
        let mut y = Array1::zeros(rows.len());
        for (r, s) in rows.iter().enumerate() {
            for c in 0..3 {
                x[[r, c]] = s.features[c];
            }
            y[r] = s.target(target).expect("filtered");
        }
        (x, y)
    }

    pub fn import_csv(path: &Path) -> Result<Dataset> {
        let file = File::open(path)?;
        let samples = read_samples(BufReader::new(file), path)?;
        Ok(Dataset::from_samples(
            samples,
            Provenance {
                source: "imported".into(),
                grid: None,
                path: Some(path.to_path_buf()),
                excluded_count: 0,
                seed: None,
            },
        ))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            let [e, r, h] = s.features;
            write!(out, "{e},{r},{h},")?;
            if let Some(c) = s.first_cutoff_hz {
                write!(out, "{c}")?;
            }
            out.write_all(b",")?;
            if let Some(w) = s.gap_width_hz {
                write!(out, "{w}")?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_provenance(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &self.provenance)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

fn floor_count(n: usize, frac: f64) -> usize {
    // The epsilon keeps exact products such as 5·0.2 from landing just below an integer.
    ((n as f64) * frac + 1e-9).floor() as usize
}

/// Parses the CSV schema; errors carry the 1-based line number.
pub fn read_samples<R: Read>(reader: R, path: &Path) -> Result<Vec<Sample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(reader);
    let line_err = |line: u64, message: String| Error::Line {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(Error::format(format!("{}: empty file", path.display()))),
    };
    let got: Vec<&str> = header.iter().collect();
    if got.join(",") != CSV_HEADER {
        return Err(Error::format(format!(
            "{}: expected header `{CSV_HEADER}`, found `{}`",
            path.display(),
            got.join(",")
        )));
    }
    let mut samples = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 5 {
            return Err(line_err(line, format!("expected 5 fields, found {}", rec.len())));
        }
        let mut features = [0.0; 3];
        for (c, f) in features.iter_mut().enumerate() {
            *f = rec[c]
                .parse::<f64>()
                .map_err(|_| line_err(line, format!("invalid number `{}` in column {}", &rec[c], c + 1)))?;
        }
        let mut targets = [None; 2];
        for (k, t) in targets.iter_mut().enumerate() {
            let field = &rec[3 + k];
            if !field.is_empty() {
                *t = Some(field.parse::<f64>().map_err(|_| {
                    line_err(line, format!("invalid number `{field}` in column {}", 4 + k))
                })?);
            }
        }
        let sample = Sample::new(features, targets[0], targets[1]).map_err(|e| line_err(line, e.to_string()))?;
        samples.push(sample);
    }
    Ok(samples)
}

/// QoIs at every grid point; points without a band gap are dropped and counted.
pub fn generate_bragg(grid: &GridSpec, evaluator: &dyn QoiEvaluator) -> Result<Dataset> {
    let points = grid.points()?;
    let evaluated = points
        .par_iter()
        .map(|&p| evaluator.evaluate(p).map(|q| (p, q)))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::with_capacity(evaluated.len());
    let mut excluded = 0;
    for (p, q) in evaluated {
        match (q.first_cutoff_hz, q.first_gap_width_hz) {
            (Some(c), Some(w)) => samples.push(Sample::new(p, Some(c), Some(w))?),
            _ => excluded += 1,
        }
    }
    Ok(Dataset::from_samples(
        samples,
        Provenance {
            source: "generated".into(),
            grid: Some(*grid),
            path: None,
            excluded_count: excluded,
            seed: None,
        },
    ))
}

/// Same as [`generate_bragg`] for an explicit list of points.
pub fn generate_points(points: &[[f64; 3]], evaluator: &dyn QoiEvaluator) -> Result<Dataset> {
    let evaluated = points
        .par_iter()
        .map(|&p| evaluator.evaluate(p).map(|q| (p, q)))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    let mut excluded = 0;
    for (p, q) in evaluated {
        match (q.first_cutoff_hz, q.first_gap_width_hz) {
            (Some(c), Some(w)) => samples.push(Sample::new(p, Some(c), Some(w))?),
            _ => excluded += 1,
        }
    }
    Ok(Dataset::from_samples(
        samples,
        Provenance {
            source: "points".into(),
            grid: None,
            path: None,
            excluded_count: excluded,
            seed: None,
        },
    ))
}

/// Per-feature z-score with population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: ArrayView2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::domain("cannot fit a scaler on zero rows"));
        }
        let mean = x.mean_axis(NdAxis(0)).expect("non-empty");
        let std = x.std_axis(NdAxis(0), 0.0);
        Ok(Scaler {
            mean: mean.to_vec(),
            std: std.to_vec(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    /// Zero-spread columns map to 0.
    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for (c, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.mean[c], self.std[c]);
            col.mapv_inplace(|v| if s > 0.0 { (v - m) / s } else { 0.0 });
        }
        out
    }

    pub fn inverse_transform(&self, z: ArrayView2<f64>) -> Array2<f64> {
        let mut out = z.to_owned();
        for (c, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.mean[c], self.std[c]);
            col.mapv_inplace(|v| if s > 0.0 { v * s + m } else { m });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy(n: usize) -> Dataset {
        let samples = (0..n)
            .map(|i| Sample::new([1.0 + i as f64, 1.0, 1.0], Some(i as f64), Some(1.0)).unwrap())
            .collect();
        Dataset::from_samples(
            samples,
            Provenance {
                source: "points".into(),
                grid: None,
                path: None,
                excluded_count: 0,
                seed: None,
            },
        )
    }

    #[test]
    fn split_sizes_use_floor() {
        let s = toy(2269).split(0.2, 0.2, 7).unwrap();
        let sp = s.splits().unwrap();
        assert_eq!((sp.test.len(), sp.val.len(), sp.train.len()), (453, 363, 1453));
        let s = toy(5).split(0.2, 0.2, 7).unwrap();
        let sp = s.splits().unwrap();
        assert_eq!((sp.test.len(), sp.val.len(), sp.train.len()), (1, 0, 4));
    }

    #[test]
    fn split_is_seeded() {
        let a = toy(100).split(0.2, 0.2, 1).unwrap();
        let b = toy(100).split(0.2, 0.2, 1).unwrap();
        let c = toy(100).split(0.2, 0.2, 2).unwrap();
        assert_eq!(a.splits(), b.splits());
        assert_ne!(a.splits(), c.splits());
        assert!(toy(10).split(0.0, 0.2, 1).is_err());
    }

    #[test]
    fn scaler_examples() {
        let x = array![[1.0, 5.0], [3.0, 5.0]];
        let s = Scaler::fit(x.view()).unwrap();
        let z = s.transform(x.view());
        assert_eq!(z, array![[-1.0, 0.0], [1.0, 0.0]]);
        assert_eq!(s.inverse_transform(z.view()), x);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let text = format!("{CSV_HEADER}\n1,2,3,4,5\n1,-2,3,4,5\n");
        let err = read_samples(text.as_bytes(), Path::new("t.csv")).unwrap_err();
        assert!(matches!(err, Error::Line { line: 3, .. }), "{err}");
        let err = read_samples("a,b,c,d,e\n".as_bytes(), Path::new("t.csv")).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        let ok = read_samples(format!("{CSV_HEADER}\n1,2,3,,\n").as_bytes(), Path::new("t.csv")).unwrap();
        assert_eq!(ok[0].first_cutoff_hz, None);
    }
}
