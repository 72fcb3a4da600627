use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 6;

/// Least-squares fit over every monomial of total degree ≤ `degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyModel {
    pub degree: usize,
    pub n_features: usize,
    /// Exponent vector of each basis monomial, graded order starting with the constant.
    pub exponents: Vec<Vec<u32>>,
    pub coefficients: Vec<f64>,
    pub rank: usize,
    /// The design matrix lacked full column rank; coefficients are the minimum-norm solution.
    pub rank_deficient: bool,
}

/// Exponent vectors for `n_features` variables up to `degree`, grouped by total degree
/// and lexicographically descending within a group (`x₁² , x₁x₂, …`).
pub fn monomial_exponents(n_features: usize, degree: usize) -> Vec<Vec<u32>> {
    fn fill(rest: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() - 1 {
            cur[pos] = rest;
            out.push(cur.clone());
            return;
        }
        for e in (0..=rest).rev() {
            cur[pos] = e;
            fill(rest - e, pos + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    if n_features == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur = vec![0; n_features];
    for d in 0..=degree as u32 {
        fill(d, 0, &mut cur, &mut out);
    }
    out
}

fn basis_row(x: ArrayView1<f64>, exponents: &[Vec<u32>], out: &mut [f64]) {
    for (slot, exp) in out.iter_mut().zip(exponents) {
        *slot = exp
            .iter()
            .zip(x.iter())
            .map(|(&e, &v)| v.powi(e as i32))
            .product();
    }
}

impl PolyModel {
    pub fn fit(x: ArrayView2<f64>, y: ArrayView1<f64>, degree: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::domain(format!("degree must lie in 1..={MAX_DEGREE}, got {degree}")));
        }
        if x.nrows() == 0 || x.nrows() != y.len() {
            return Err(Error::domain("training set is empty or mismatched"));
        }
        let exponents = monomial_exponents(x.ncols(), degree);
        let m = exponents.len();
        let n = x.nrows();
        let mut design = DMatrix::<f64>::zeros(n, m);
        let mut row = vec![0.0; m];
        for r in 0..n {
            basis_row(x.row(r), &exponents, &mut row);
            for (c, v) in row.iter().enumerate() {
                design[(r, c)] = *v;
            }
        }
        let rhs = DVector::from_iterator(n, y.iter().copied());
        let svd = design.svd(true, true);
        let max_sv = svd.singular_values.max();
        let eps = max_sv * (n.max(m) as f64) * f64::EPSILON;
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        let solution = svd
            .solve(&rhs, eps)
            .map_err(|e| Error::domain(format!("least-squares solve failed: {e}")))?;
        Ok(PolyModel {
            degree,
            n_features: x.ncols(),
            exponents,
            coefficients: solution.iter().copied().collect(),
            rank,
            rank_deficient: rank < m,
        })
    }

    pub fn n_coefficients(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        let mut row = vec![0.0; self.exponents.len()];
        x.rows()
            .into_iter()
            .map(|r| {
                basis_row(r, &self.exponents, &mut row);
                row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}
