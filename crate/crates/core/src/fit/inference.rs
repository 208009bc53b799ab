use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use super::likelihood::Objective;
use super::{Dataset, FittedBetaReg, ModelSpec};
use crate::error::{Error, Result};
use crate::specfun::{chi_square_sf, normal_two_sided_p};

/// Relative step for the central-difference Hessian of the score.
const HESSIAN_STEP: f64 = 1e-5;

/// Observed information −∇²ℓ, by central differences of the analytic score
/// with step 1e-5·max(1, |θᵢ|), symmetrized.
pub(crate) fn numerical_information(objective: &Objective<'_>, theta: &[f64]) -> DMatrix<f64> {
    let p = theta.len();
    let mut h = DMatrix::zeros(p, p);
    let mut work = theta.to_vec();
    let mut g_plus = vec![0.0; p];
    let mut g_minus = vec![0.0; p];
    for j in 0..p {
        let step = HESSIAN_STEP * theta[j].abs().max(1.0);
        work[j] = theta[j] + step;
        objective.value_and_grad(&work, &mut g_plus);
        work[j] = theta[j] - step;
        objective.value_and_grad(&work, &mut g_minus);
        work[j] = theta[j];
        for i in 0..p {
            h[(i, j)] = -(g_plus[i] - g_minus[i]) / (2.0 * step);
        }
    }
    (&h + h.transpose()) * 0.5
}

pub fn observed_information(spec: &ModelSpec, data: &Dataset, theta: &[f64]) -> Result<DMatrix<f64>> {
    spec.check(data)?;
    let objective = Objective::new(spec, data);
    if theta.len() != objective.dim() {
        return Err(Error::Usage("coefficient vector has the wrong length".into()));
    }
    Ok(numerical_information(&objective, theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Submodel {
    Mean,
    Dispersion,
}

/// One line of a coefficient table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoefficientRow {
    pub submodel: Submodel,
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z_stat: f64,
    pub p_value: f64,
}

/// Wald table: standard errors from the inverse observed information,
/// z = estimate / se, two-sided normal p-values.
pub fn inference(fit: &FittedBetaReg, spec: &ModelSpec, data: &Dataset) -> Result<Vec<CoefficientRow>> {
    let theta = fit.theta();
    let vcov = match &fit.vcov {
        Some(v) => v.clone(),
        None => observed_information(spec, data, &theta)?
            .cholesky()
            .ok_or(Error::SingularInformation)?
            .inverse(),
    };
    let names = spec
        .mean_cols
        .iter()
        .map(|n| (Submodel::Mean, n))
        .chain(spec.disp_cols.iter().map(|n| (Submodel::Dispersion, n)));
    Ok(names
        .zip(theta)
        .enumerate()
        .map(|(i, ((submodel, name), estimate))| {
            let std_error = vcov[(i, i)].max(0.0).sqrt();
            let (z_stat, p_value) = wald(estimate, std_error);
            CoefficientRow {
                submodel,
                name: name.clone(),
                estimate,
                std_error,
                z_stat,
                p_value,
            }
        })
        .collect())
}

pub(crate) fn wald(estimate: f64, std_error: f64) -> (f64, f64) {
    if estimate == 0.0 {
        return (0.0, 1.0);
    }
    let z = estimate / std_error;
    (z, normal_two_sided_p(z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LrTestResult {
    pub stat: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Slack below zero tolerated in 2(ℓ̂ − ℓ̃) before it is treated as a failed
/// nesting rather than round-off.
const LR_SLACK: f64 = 1e-8;

/// LR = 2[ℓ(β̂, γ̂) − ℓ(β̃, γ̃)], referred to χ² with s_full − s_reduced df.
pub fn lr_constant_dispersion(full: &FittedBetaReg, reduced: &FittedBetaReg) -> Result<LrTestResult> {
    if full.spec.mean_cols != reduced.spec.mean_cols
        || full.spec.mean_link != reduced.spec.mean_link
        || full.spec.disp_link != reduced.spec.disp_link
        || full.mu_hat.len() != reduced.mu_hat.len()
    {
        return Err(Error::Usage(
            "likelihood ratio test needs the same mean submodel and data in both fits".into(),
        ));
    }
    if reduced.gamma_hat.len() > full.gamma_hat.len() {
        return Err(Error::Usage("the reduced model has more dispersion terms than the full one".into()));
    }
    let df = (full.gamma_hat.len() - reduced.gamma_hat.len()) as u32;
    let raw = 2.0 * (full.loglik - reduced.loglik);
    if df == 0 {
        return Ok(LrTestResult {
            stat: 0.0,
            df: 0,
            p_value: 1.0,
        });
    }
    if raw < -LR_SLACK {
        return Err(Error::Usage(alloc::format!(
            "restricted fit has the larger log-likelihood (LR = {raw:e}); the models are not nested or a fit is not at its optimum"
        )));
    }
    let stat = raw.max(0.0);
    Ok(LrTestResult {
        stat,
        df,
        p_value: chi_square_sf(stat, df)?,
    })
}
