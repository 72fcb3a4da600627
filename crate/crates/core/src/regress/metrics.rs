use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub r2: f64,
    pub n: usize,
}

fn check_lengths(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::domain(format!(
            "length mismatch: {} targets vs {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::domain("metrics need at least one sample"));
    }
    Ok(())
}

fn sum_squared_residuals(y: &[f64], yhat: &[f64]) -> f64 {
    y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Root-mean-square error.
pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    Ok((sum_squared_residuals(y, yhat) / y.len() as f64).sqrt())
}

/// Coefficient of determination, `1 − SS_res / SS_tot`.
pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    if y.len() < 2 {
        return Err(Error::domain("r2 needs at least two samples"));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::domain("r2 is undefined for constant targets"));
    }
    Ok(1.0 - sum_squared_residuals(y, yhat) / ss_tot)
}

pub fn metrics(y: &[f64], yhat: &[f64]) -> Result<Metrics> {
    Ok(Metrics {
        rmse: rmse(y, yhat)?,
        r2: r2(y, yhat)?,
        n: y.len(),
    })
}
