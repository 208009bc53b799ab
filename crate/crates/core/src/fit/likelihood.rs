//! Log-likelihood and analytic score of the varying-dispersion beta
//! regression model.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use super::{Dataset, ModelSpec};
use crate::betadist::{log_pdf_unchecked, precision};
use crate::error::{Error, Result};
use crate::links::LinkKind;
use crate::specfun::digamma_unchecked;

/// Precomputed response transforms plus links, evaluated at θ = (β, γ).
pub(crate) struct Objective<'a> {
    data: &'a Dataset,
    mean_link: LinkKind,
    disp_link: LinkKind,
    ln_y: Vec<f64>,
    ln_1my: Vec<f64>,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(spec: &ModelSpec, data: &'a Dataset) -> Self {
        let ln_y = data.y().iter().map(|y| y.ln()).collect();
        let ln_1my = data.y().iter().map(|y| (-y).ln_1p()).collect();
        Self {
            data,
            mean_link: spec.mean_link,
            disp_link: spec.disp_link,
            ln_y,
            ln_1my,
        }
    }

    #[inline]
    pub(crate) fn k(&self) -> usize {
        self.data.x().ncols()
    }

    #[inline]
    pub(crate) fn s(&self) -> usize {
        self.data.z().ncols()
    }

    pub(crate) fn dim(&self) -> usize {
        self.k() + self.s()
    }

    #[inline]
    fn predictors(&self, t: usize, theta: &[f64]) -> (f64, f64) {
        let (beta, gamma) = theta.split_at(self.k());
        let x = self.data.x();
        let z = self.data.z();
        let eta = beta.iter().enumerate().map(|(i, b)| x[(t, i)] * b).sum::<f64>();
        let zeta = gamma.iter().enumerate().map(|(i, g)| z[(t, i)] * g).sum::<f64>();
        (eta, zeta)
    }

    pub(crate) fn value(&self, theta: &[f64]) -> f64 {
        let y = self.data.y();
        let mut total = 0.0;
        for t in 0..y.len() {
            let (eta, zeta) = self.predictors(t, theta);
            let mu = self.mean_link.inv(eta);
            let sigma = self.disp_link.inv(zeta);
            total += log_pdf_unchecked(y[t], mu, precision(sigma));
        }
        total
    }

    /// Log-likelihood with its gradient written into `grad`.
    pub(crate) fn value_and_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let k = self.k();
        let y = self.data.y();
        let x = self.data.x();
        let z = self.data.z();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for t in 0..y.len() {
            let (eta, zeta) = self.predictors(t, theta);
            let mu = self.mean_link.inv(eta);
            let sigma = self.disp_link.inv(zeta);
            let phi = precision(sigma);
            let a = mu * phi;
            let b = (1.0 - mu) * phi;
            total += log_pdf_unchecked(y[t], mu, phi);

            let psi_a = digamma_unchecked(a);
            let psi_b = digamma_unchecked(b);
            let y_star = self.ln_y[t] - self.ln_1my[t];
            let mu_star = psi_a - psi_b;
            let d_mu = phi * (y_star - mu_star);
            let d_phi = mu * (y_star - mu_star) + self.ln_1my[t] - psi_b + digamma_unchecked(phi);
            let d_sigma = d_phi * (-2.0 / (sigma * sigma * sigma));

            let w_mean = d_mu * self.mean_link.inv_deriv(eta);
            let w_disp = d_sigma * self.disp_link.inv_deriv(zeta);
            for (i, g) in grad[..k].iter_mut().enumerate() {
                *g += w_mean * x[(t, i)];
            }
            for (i, g) in grad[k..].iter_mut().enumerate() {
                *g += w_disp * z[(t, i)];
            }
        }
        total
    }

    pub(crate) fn grad(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.value_and_grad(theta, &mut g);
        g
    }
}

fn check_dims(beta: &[f64], gamma: &[f64], spec: &ModelSpec, data: &Dataset) -> Result<()> {
    spec.check(data)?;
    if beta.len() != data.x().ncols() || gamma.len() != data.z().ncols() {
        return Err(Error::Usage(alloc::format!(
            "coefficient lengths ({}, {}) do not match design widths ({}, {})",
            beta.len(),
            gamma.len(),
            data.x().ncols(),
            data.z().ncols()
        )));
    }
    if beta.iter().chain(gamma).any(|v| !v.is_finite()) {
        return Err(Error::Usage("coefficients must be finite".into()));
    }
    Ok(())
}

fn concat(beta: &[f64], gamma: &[f64]) -> Vec<f64> {
    beta.iter().chain(gamma).copied().collect()
}

/// ℓ(β, γ) = Σₜ ln f(yₜ; μₜ, σₜ).
pub fn loglik(beta: &[f64], gamma: &[f64], spec: &ModelSpec, data: &Dataset) -> Result<f64> {
    check_dims(beta, gamma, spec, data)?;
    let v = Objective::new(spec, data).value(&concat(beta, gamma));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Data("log-likelihood is not finite at these coefficients".into()))
    }
}

/// ∂ℓ/∂(β, γ), mean block first.
pub fn score(beta: &[f64], gamma: &[f64], spec: &ModelSpec, data: &Dataset) -> Result<Vec<f64>> {
    check_dims(beta, gamma, spec, data)?;
    let g = Objective::new(spec, data).grad(&concat(beta, gamma));
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::Data("score is not finite at these coefficients".into()))
    }
}
