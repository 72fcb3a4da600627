//! Fully connected ReLU network with a linear output, trained on mean squared error.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    /// Decoupled: every step multiplies each parameter by `1 − lr·weight_decay`.
    pub weight_decay: f64,
    pub epochs: usize,
    /// `None` trains on the full batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![64, 64],
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-3,
            weight_decay: 0.0,
            epochs: 1000,
            batch_size: None,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn bragg_cutoff() -> Self {
        MlpConfig {
            learning_rate: 0.0025,
            weight_decay: 0.3,
            epochs: 10_000,
            ..Default::default()
        }
    }

    pub fn bragg_width() -> Self {
        MlpConfig {
            learning_rate: 0.0008,
            weight_decay: 0.5,
            epochs: 25_000,
            ..Default::default()
        }
    }

    pub fn sonic_cutoff() -> Self {
        MlpConfig {
            learning_rate: 0.0002,
            epochs: 12_500,
            ..Default::default()
        }
    }

    pub fn sonic_width() -> Self {
        MlpConfig {
            optimizer: OptimizerKind::Sgd,
            learning_rate: 0.0002,
            epochs: 1500,
            batch_size: Some(64),
            ..Default::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "bragg-cutoff" => Some(Self::bragg_cutoff()),
            "bragg-width" => Some(Self::bragg_width()),
            "sonic-cutoff" => Some(Self::sonic_cutoff()),
            "sonic-width" => Some(Self::sonic_width()),
            _ => None,
        }
    }
}

/// Per-epoch mean squared error. `train[e]` averages the mini-batch losses seen during
/// epoch `e`; `val[e]` is measured after the epoch's updates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossHistory {
    pub train: Vec<f64>,
    pub val: Vec<f64>,
}

impl LossHistory {
    /// `epoch,train_loss,val_loss`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "epoch,train_loss,val_loss")?;
        for (e, t) in self.train.iter().enumerate() {
            write!(out, "{},{t},", e + 1)?;
            if let Some(v) = self.val.get(e) {
                write!(out, "{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Weights are stored `fan_in × fan_out` so a batch forward pass is `X·W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Params {
    fn zeros_like(other: &Params) -> Params {
        Params {
            weights: other.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: other.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    fn assign(&mut self, flat: &[f64]) -> Result<()> {
        let total: usize = self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>();
        if flat.len() != total {
            return Err(Error::domain(format!("expected {total} parameters, got {}", flat.len())));
        }
        let mut it = flat.iter();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut().for_each(|v| *v = *it.next().expect("length checked"));
            b.iter_mut().for_each(|v| *v = *it.next().expect("length checked"));
        }
        Ok(())
    }

    fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub params: Params,
    pub config: MlpConfig,
}

impl MlpModel {
    /// Seeded initialisation, `U(±1/√fan_in)` for weights and biases.
    pub fn init(n_inputs: usize, config: &MlpConfig) -> Result<Self> {
        if n_inputs == 0 || config.hidden.contains(&0) {
            return Err(Error::domain("layer sizes must be positive"));
        }
        let mut layer_sizes = vec![n_inputs];
        layer_sizes.extend(&config.hidden);
        layer_sizes.push(1);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            weights.push(Array2::from_shape_simple_fn((fan_in, fan_out), || {
                rng.random_range(-bound..bound)
            }));
            biases.push(Array1::from_shape_simple_fn(fan_out, || rng.random_range(-bound..bound)));
        }
        Ok(MlpModel {
            layer_sizes,
            params: Params { weights, biases },
            config: config.clone(),
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn flat_parameters(&self) -> Vec<f64> {
        self.params.flatten()
    }

    pub fn set_flat_parameters(&mut self, flat: &[f64]) -> Result<()> {
        self.params.assign(flat)
    }

    /// Activations of every layer, input first, output last.
    fn forward_all(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let last = self.params.weights.len() - 1;
        let mut acts = vec![x.to_owned()];
        for (l, (w, b)) in self.params.weights.iter().zip(&self.params.biases).enumerate() {
            let mut z = acts[l].dot(w);
            z += b;
            if l < last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        self.forward_all(x).pop().expect("output layer").column(0).to_owned()
    }

    pub fn loss(&self, x: ArrayView2<f64>, y: ArrayView1<f64>) -> f64 {
        let p = self.predict(x);
        (&p - &y).mapv(|d| d * d).mean().unwrap_or(f64::NAN)
    }

    /// Mean squared error and its gradient with respect to every parameter.
    pub fn loss_and_gradient(&self, x: ArrayView2<f64>, y: ArrayView1<f64>) -> (f64, Params) {
        let acts = self.forward_all(x);
        let n = x.nrows() as f64;
        let out = acts.last().expect("output layer");
        let diff = &out.column(0) - &y;
        let loss = diff.mapv(|d| d * d).sum() / n;
        let mut delta = (diff * (2.0 / n)).insert_axis(Axis(1));
        let mut grad = Params::zeros_like(&self.params);
        for l in (0..self.params.weights.len()).rev() {
            grad.weights[l] = acts[l].t().dot(&delta);
            grad.biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut back = delta.dot(&self.params.weights[l].t());
                Zip::from(&mut back).and(&acts[l]).for_each(|d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = back;
            }
        }
        (loss, grad)
    }

    /// Trains from the seeded initialisation. `val` only feeds the loss history.
    pub fn fit(
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        val: Option<(ArrayView2<f64>, ArrayView1<f64>)>,
        config: &MlpConfig,
    ) -> Result<(Self, LossHistory)> {
        if config.learning_rate.is_nan() || config.learning_rate <= 0.0 {
            return Err(Error::domain("learning rate must be positive"));
        }
        if x.nrows() == 0 || x.nrows() != y.len() {
            return Err(Error::domain("training set is empty or mismatched"));
        }
        if config.batch_size == Some(0) {
            return Err(Error::domain("batch size must be positive"));
        }
        let mut model = Self::init(x.ncols(), config)?;
        let mut opt = Optimizer::new(config, &model.params);
        let mut history = LossHistory::default();
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        let mut batch_rng = ChaCha8Rng::seed_from_u64(config.seed);
        batch_rng.set_stream(1);

        for epoch in 0..config.epochs {
            let epoch_loss = match config.batch_size {
                None => {
                    let (loss, grad) = model.loss_and_gradient(x, y);
                    opt.step(&mut model.params, &grad);
                    loss
                }
                Some(bs) => {
                    order.shuffle(&mut batch_rng);
                    let mut weighted = 0.0;
                    for chunk in order.chunks(bs) {
                        let xb = x.select(Axis(0), chunk);
                        let yb = y.select(Axis(0), chunk);
                        let (loss, grad) = model.loss_and_gradient(xb.view(), yb.view());
                        opt.step(&mut model.params, &grad);
                        weighted += loss * chunk.len() as f64;
                    }
                    weighted / x.nrows() as f64
                }
            };
            history.train.push(epoch_loss);
            if let Some((vx, vy)) = val {
                if vx.nrows() > 0 {
                    history.val.push(model.loss(vx, vy));
                }
            }
            if !epoch_loss.is_finite() || !model.params.all_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    history,
                });
            }
        }
        Ok((model, history))
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    decay: f64,
    step: i32,
    m: Params,
    v: Params,
}

impl Optimizer {
    fn new(config: &MlpConfig, params: &Params) -> Self {
        Optimizer {
            kind: config.optimizer,
            lr: config.learning_rate,
            decay: 1.0 - config.learning_rate * config.weight_decay,
            step: 0,
            m: Params::zeros_like(params),
            v: Params::zeros_like(params),
        }
    }

    fn step(&mut self, params: &mut Params, grad: &Params) {
        self.step += 1;
        let (lr, decay) = (self.lr, self.decay);
        match self.kind {
            OptimizerKind::Sgd => {
                let update = |p: &mut f64, g: &f64| *p = *p * decay - lr * g;
                for (p, g) in params.weights.iter_mut().zip(&grad.weights) {
                    Zip::from(p).and(g).for_each(update);
                }
                for (p, g) in params.biases.iter_mut().zip(&grad.biases) {
                    Zip::from(p).and(g).for_each(update);
                }
            }
            OptimizerKind::Adam => {
                let c1 = 1.0 - BETA1.powi(self.step);
                let c2 = 1.0 - BETA2.powi(self.step);
                let update = |p: &mut f64, g: &f64, m: &mut f64, v: &mut f64| {
                    *p *= decay;
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                };
                for l in 0..params.weights.len() {
                    Zip::from(&mut params.weights[l])
                        .and(&grad.weights[l])
                        .and(&mut self.m.weights[l])
                        .and(&mut self.v.weights[l])
                        .for_each(update);
                    Zip::from(&mut params.biases[l])
                        .and(&grad.biases[l])
                        .and(&mut self.m.biases[l])
                        .and(&mut self.v.biases[l])
                        .for_each(update);
                }
            }
        }
    }
}
