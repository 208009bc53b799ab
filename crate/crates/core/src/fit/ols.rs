use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use super::Dataset;
use crate::error::{Error, Result};

/// Ordinary least squares fit of y on the mean design.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedOls {
    pub coef: Vec<f64>,
    /// sqrt(RSS / (n − k)).
    pub resid_sd: f64,
    pub fitted: Vec<f64>,
    /// Residual standard deviation is numerically zero (y exactly linear in X).
    pub degenerate: bool,
}

/// Solves the normal equations XᵀX b = Xᵀv by Cholesky.
pub(crate) fn least_squares(x: &DMatrix<f64>, v: &[f64]) -> Result<Vec<f64>> {
    let xtx = x.transpose() * x;
    let xtv = x.transpose() * DVector::from_column_slice(v);
    let chol = xtx.cholesky().ok_or(Error::RankDeficient {
        matrix: "least squares design",
        rank: 0,
        cols: x.ncols(),
    })?;
    Ok(chol.solve(&xtv).as_slice().to_vec())
}

pub fn fit_ols(data: &Dataset) -> Result<FittedOls> {
    let x = data.x();
    let y = data.y();
    let (n, k) = (x.nrows(), x.ncols());
    let coef = least_squares(x, y)?;
    let fitted: Vec<f64> = (0..n).map(|t| (0..k).map(|i| x[(t, i)] * coef[i]).sum()).collect();
    let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    let resid_sd = (rss / (n - k) as f64).sqrt();
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(FittedOls {
        coef,
        resid_sd,
        fitted,
        degenerate: resid_sd <= 1e-10 * (1.0 + scale),
    })
}
