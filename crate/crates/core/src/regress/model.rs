use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::forest::{ForestConfig, ForestModel};
use super::metrics::metrics;
use super::mlp::{LossHistory, MlpConfig, MlpModel};
use super::poly::PolyModel;
use crate::dataset::{Dataset, Scaler, SplitKind, Target};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Transform applied to raw `(e, ρ, h)` ratios before fitting.
///
/// The modulus ratio spans several decades; `Log10E` replaces it by its base-10 logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMap {
    Raw,
    #[default]
    Log10E,
}

impl FeatureMap {
    pub fn apply(self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        if self == FeatureMap::Log10E {
            out.column_mut(0).mapv_inplace(f64::log10);
        }
        out
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(FeatureMap::Raw),
            "log10e" | "log10_e" | "log" => Some(FeatureMap::Log10E),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurrogateBody {
    Poly(PolyModel),
    Forest(ForestModel),
    Mlp(MlpModel),
}

/// A fitted regressor together with everything needed to apply it to raw ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    pub format_version: u32,
    pub target: Target,
    pub feature_map: FeatureMap,
    /// Fitted on the training features only (after the feature map).
    pub scaler: Option<Scaler>,
    pub body: SurrogateBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_history: Option<LossHistory>,
    /// Split the model was trained on, so evaluation can rebuild the same subsets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub seed: u64,
    pub test_frac: f64,
    pub val_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub target: Target,
    pub split: SplitKind,
    pub rmse: f64,
    pub r2: f64,
    pub n: usize,
}

fn training_view(ds: &Dataset, target: Target, which: SplitKind) -> Result<(Array2<f64>, Array1<f64>)> {
    let (x, y) = ds.view(which, target);
    if x.nrows() == 0 {
        return Err(Error::domain(format!(
            "no {} samples with a {} target",
            which.name(),
            target.name()
        )));
    }
    Ok((x, y))
}

impl Surrogate {
    fn prepare(&self, raw: ArrayView2<f64>) -> Array2<f64> {
        let mapped = self.feature_map.apply(raw);
        match &self.scaler {
            Some(s) => s.transform(mapped.view()),
            None => mapped,
        }
    }

    pub fn fit_poly(ds: &Dataset, target: Target, degree: usize, feature_map: FeatureMap) -> Result<Self> {
        let (x, y) = training_view(ds, target, SplitKind::Train)?;
        let mapped = feature_map.apply(x.view());
        let scaler = Scaler::fit(mapped.view())?;
        let model = PolyModel::fit(scaler.transform(mapped.view()).view(), y.view(), degree)?;
        Ok(Surrogate {
            format_version: MODEL_FORMAT_VERSION,
            target,
            feature_map,
            scaler: Some(scaler),
            body: SurrogateBody::Poly(model),
            loss_history: None,
            split: None,
        })
    }

    pub fn fit_forest(ds: &Dataset, target: Target, config: ForestConfig, feature_map: FeatureMap) -> Result<Self> {
        let (x, y) = training_view(ds, target, SplitKind::Train)?;
        let model = ForestModel::fit(feature_map.apply(x.view()).view(), y.view(), config)?;
        Ok(Surrogate {
            format_version: MODEL_FORMAT_VERSION,
            target,
            feature_map,
            scaler: None,
            body: SurrogateBody::Forest(model),
            loss_history: None,
            split: None,
        })
    }

    /// Trains on the training split; the validation split only feeds the loss history.
    pub fn fit_mlp(ds: &Dataset, target: Target, config: &MlpConfig, feature_map: FeatureMap) -> Result<Self> {
        let (x, y) = training_view(ds, target, SplitKind::Train)?;
        let (vx, vy) = ds.view(SplitKind::Val, target);
        let mapped = feature_map.apply(x.view());
        let scaler = Scaler::fit(mapped.view())?;
        let xs = scaler.transform(mapped.view());
        let vxs = scaler.transform(feature_map.apply(vx.view()).view());
        let (model, history) = MlpModel::fit(xs.view(), y.view(), Some((vxs.view(), vy.view())), config)?;
        Ok(Surrogate {
            format_version: MODEL_FORMAT_VERSION,
            target,
            feature_map,
            scaler: Some(scaler),
            body: SurrogateBody::Mlp(model),
            loss_history: Some(history),
            split: None,
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.body {
            SurrogateBody::Poly(_) => "poly",
            SurrogateBody::Forest(_) => "forest",
            SurrogateBody::Mlp(_) => "mlp",
        }
    }

    /// Predictions for rows of raw `(e, ρ, h)` ratios.
    pub fn predict(&self, raw: ArrayView2<f64>) -> Result<Array1<f64>> {
        if raw.ncols() != 3 {
            return Err(Error::domain(format!("expected 3 feature columns, got {}", raw.ncols())));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("features must be finite"));
        }
        let x = self.prepare(raw);
        Ok(match &self.body {
            SurrogateBody::Poly(m) => m.predict(x.view()),
            SurrogateBody::Forest(m) => m.predict(x.view()),
            SurrogateBody::Mlp(m) => m.predict(x.view()),
        })
    }

    pub fn predict_one(&self, ratios: [f64; 3]) -> Result<f64> {
        let x = Array2::from_shape_vec((1, 3), ratios.to_vec()).expect("1×3");
        Ok(self.predict(x.view())?[0])
    }

    pub fn evaluate(&self, ds: &Dataset, which: SplitKind) -> Result<MetricsReport> {
        let (x, y) = training_view(ds, self.target, which)?;
        let p = self.predict(x.view())?;
        let m = metrics(&y.to_vec(), &p.to_vec())?;
        Ok(MetricsReport {
            model: self.kind_name().into(),
            target: self.target,
            split: which,
            rmse: m.rmse,
            r2: m.r2,
            n: m.n,
        })
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let model: Surrogate = serde_json::from_reader(reader)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_json(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_json(BufReader::new(File::open(path)?))
    }
}
