//! Beta regression with mean and dispersion submodels, the normal linear
//! model used by the regression chart, and likelihood-based inference.
//!
//! The model is
//!
//! ```text
//! g(μₜ) = xₜᵀβ,   h(σₜ) = zₜᵀγ,   yₜ ~ Beta(μₜ, σₜ)
//! ```
//!
//! fitted by maximum likelihood (BFGS ascent on the analytic score).
//! Standard errors come from the observed information, i.e. a central
//! difference Hessian of the analytic score at the optimum.

mod inference;
mod likelihood;
mod ols;
mod optim;

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::links::LinkKind;
use likelihood::Objective;
use optim::{max_abs, AscentOptions};

pub use inference::{
    inference, lr_constant_dispersion, observed_information, CoefficientRow, LrTestResult, Submodel,
};
pub use likelihood::{loglik, score};
pub use ols::{fit_ols, FittedOls};

/// Name used for an intercept column in [`ModelSpec`].
pub const INTERCEPT: &str = "(Intercept)";

/// Responses closer than this to 0 or 1 are refused by the fitter.
pub const BOUNDARY_MARGIN: f64 = 1e-10;

/// Which columns enter each submodel, and through which link.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub mean_cols: Vec<String>,
    pub disp_cols: Vec<String>,
    pub mean_link: LinkKind,
    pub disp_link: LinkKind,
}

impl ModelSpec {
    pub fn new(mean_cols: Vec<String>, disp_cols: Vec<String>) -> Self {
        Self {
            mean_cols,
            disp_cols,
            mean_link: LinkKind::Logit,
            disp_link: LinkKind::Logit,
        }
    }

    /// Intercept-only mean and dispersion: the covariate-free beta model.
    pub fn intercept_only() -> Self {
        Self::new(vec![INTERCEPT.to_string()], vec![INTERCEPT.to_string()])
    }

    pub fn with_links(mut self, mean_link: LinkKind, disp_link: LinkKind) -> Self {
        self.mean_link = mean_link;
        self.disp_link = disp_link;
        self
    }

    /// Same mean submodel, dispersion reduced to its intercept.
    pub fn constant_dispersion(&self) -> Self {
        Self {
            disp_cols: vec![INTERCEPT.to_string()],
            ..self.clone()
        }
    }

    pub fn k(&self) -> usize {
        self.mean_cols.len()
    }

    pub fn s(&self) -> usize {
        self.disp_cols.len()
    }

    pub(crate) fn check(&self, data: &Dataset) -> Result<()> {
        if self.k() == 0 || self.s() == 0 {
            return Err(Error::Usage("both submodels need at least one column".into()));
        }
        if self.k() != data.x().ncols() || self.s() != data.z().ncols() {
            return Err(Error::Usage(alloc::format!(
                "model names {} mean and {} dispersion columns but the design has {} and {}",
                self.k(),
                self.s(),
                data.x().ncols(),
                data.z().ncols()
            )));
        }
        Ok(())
    }
}

/// Validated mean (X) and dispersion (Z) design matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    x: DMatrix<f64>,
    z: DMatrix<f64>,
}

impl Design {
    pub fn new(x: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != z.nrows() {
            return Err(Error::Data(alloc::format!(
                "mean design has {} rows, dispersion design {}",
                x.nrows(),
                z.nrows()
            )));
        }
        if x.iter().chain(z.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Data("design matrices contain non-finite entries".into()));
        }
        if x.nrows() <= x.ncols() + z.ncols() {
            return Err(Error::Data(alloc::format!(
                "{} observations cannot identify {} coefficients",
                x.nrows(),
                x.ncols() + z.ncols()
            )));
        }
        check_rank("mean (X)", &x)?;
        check_rank("dispersion (Z)", &z)?;
        Ok(Self { x, z })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Same X, dispersion design replaced by a column of ones.
    pub fn constant_dispersion(&self) -> Result<Self> {
        Self::new(self.x.clone(), DMatrix::from_element(self.n(), 1, 1.0))
    }
}

fn check_rank(matrix: &'static str, m: &DMatrix<f64>) -> Result<()> {
    let cols = m.ncols();
    let sv = m.clone().svd(false, false).singular_values;
    let largest = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let rank = sv.iter().filter(|&&v| v > 1e-10 * largest).count();
    if largest == 0.0 || rank < cols {
        return Err(Error::RankDeficient { matrix, rank, cols });
    }
    Ok(())
}

/// Responses in (0, 1) together with their design.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    design: Arc<Design>,
}

impl Dataset {
    pub fn new(y: Vec<f64>, x: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self> {
        Self::with_design(y, Arc::new(Design::new(x, z)?))
    }

    pub fn with_design(y: Vec<f64>, design: Arc<Design>) -> Result<Self> {
        if y.len() != design.n() {
            return Err(Error::Data(alloc::format!(
                "{} responses for a design with {} rows",
                y.len(),
                design.n()
            )));
        }
        if let Some((t, v)) = y
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= BOUNDARY_MARGIN && **v <= 1.0 - BOUNDARY_MARGIN))
        {
            return Err(Error::Data(alloc::format!(
                "response {} (row {}) is not strictly inside (0, 1); apply the boundary adjustment before fitting",
                v,
                t + 1
            )));
        }
        Ok(Self { y, design })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.design.x
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.design.z
    }

    pub fn design(&self) -> &Arc<Design> {
        &self.design
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }
}

/// A converged maximum likelihood fit.
#[derive(Debug, Clone)]
pub struct FittedBetaReg {
    pub spec: ModelSpec,
    pub beta_hat: Vec<f64>,
    pub gamma_hat: Vec<f64>,
    pub loglik: f64,
    /// Inverse observed information; `None` when the fit was run without it.
    pub vcov: Option<DMatrix<f64>>,
    pub mu_hat: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl FittedBetaReg {
    pub fn theta(&self) -> Vec<f64> {
        self.beta_hat.iter().chain(&self.gamma_hat).copied().collect()
    }

    /// (μ, σ) at new covariate rows under the frozen coefficients.
    pub fn predict(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.ncols() != self.beta_hat.len() || z.ncols() != self.gamma_hat.len() || x.nrows() != z.nrows() {
            return Err(Error::Usage("covariate rows do not match the fitted model".into()));
        }
        let mu = (0..x.nrows())
            .map(|t| {
                let eta = (0..x.ncols()).map(|i| x[(t, i)] * self.beta_hat[i]).sum::<f64>();
                self.spec.mean_link.inv(eta)
            })
            .collect();
        let sigma = (0..z.nrows())
            .map(|t| {
                let zeta = (0..z.ncols()).map(|i| z[(t, i)] * self.gamma_hat[i]).sum::<f64>();
                self.spec.disp_link.inv(zeta)
            })
            .collect();
        Ok((mu, sigma))
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iter: usize,
    pub compute_vcov: bool,
    /// Overrides the moment-based starting point, (β, γ) concatenated.
    pub start: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            compute_vcov: true,
            start: None,
        }
    }
}

pub const SCORE_TOL: f64 = 1e-6;
pub const LOGLIK_REL_TOL: f64 = 1e-10;

pub fn fit_betareg(spec: &ModelSpec, data: &Dataset) -> Result<FittedBetaReg> {
    fit_betareg_with(spec, data, &FitOptions::default())
}

pub fn fit_betareg_with(spec: &ModelSpec, data: &Dataset, opts: &FitOptions) -> Result<FittedBetaReg> {
    spec.check(data)?;
    let objective = Objective::new(spec, data);
    let start = match &opts.start {
        Some(s) if s.len() == objective.dim() => s.clone(),
        Some(_) => return Err(Error::Usage("starting vector has the wrong length".into())),
        None => starting_values(spec, data)?,
    };
    let ascent = AscentOptions {
        max_iter: opts.max_iter,
        grad_tol: SCORE_TOL,
        rel_change_tol: LOGLIK_REL_TOL,
    };
    let inv_info = |theta: &[f64]| {
        let info = inference::numerical_information(&objective, theta);
        info.cholesky().map(|c| c.inverse())
    };
    let mut out = optim::maximize(|theta, grad| objective.value_and_grad(theta, grad), inv_info, start, &ascent);
    if !out.converged {
        out = optim::newton_polish(|theta, grad| objective.value_and_grad(theta, grad), inv_info, out, &ascent);
    }
    if !out.converged {
        return Err(Error::FitNonConvergence {
            iterations: out.iterations,
            max_score: max_abs(&out.grad),
            last_iterate: out.theta,
        });
    }

    let k = spec.k();
    let vcov = if opts.compute_vcov {
        let info = inference::numerical_information(&objective, &out.theta);
        Some(info.cholesky().ok_or(Error::SingularInformation)?.inverse())
    } else {
        None
    };
    let beta_hat = out.theta[..k].to_vec();
    let gamma_hat = out.theta[k..].to_vec();
    let mut fit = FittedBetaReg {
        spec: spec.clone(),
        beta_hat,
        gamma_hat,
        loglik: out.value,
        vcov,
        mu_hat: Vec::new(),
        sigma_hat: Vec::new(),
        converged: true,
        iterations: out.iterations,
    };
    let (mu, sigma) = fit.predict(data.x(), data.z())?;
    fit.mu_hat = mu;
    fit.sigma_hat = sigma;
    Ok(fit)
}

/// Least squares of g(ỹ) on X for β, where ỹ shrinks y away from {0, 1};
/// the dispersion intercept matches the moment estimate of the precision
/// implied by the residual variance, all other γ start at zero.
pub(crate) fn starting_values(spec: &ModelSpec, data: &Dataset) -> Result<Vec<f64>> {
    let n = data.n() as f64;
    let x = data.x();
    let z = data.z();
    let shrunk: Vec<f64> = data.y().iter().map(|y| (y * (n - 1.0) + 0.5) / n).collect();
    let g_y = shrunk
        .iter()
        .map(|&v| spec.mean_link.eval(v))
        .collect::<Result<Vec<f64>>>()?;
    let beta0 = ols::least_squares(x, &g_y)?;

    let k = x.ncols();
    let mut rss = 0.0;
    let mut eta = vec![0.0; data.n()];
    for t in 0..data.n() {
        eta[t] = (0..k).map(|i| x[(t, i)] * beta0[i]).sum::<f64>();
        rss += (g_y[t] - eta[t]).powi(2);
    }
    let s2 = rss / (n - k as f64);
    let mut phi_sum = 0.0;
    for &e in &eta {
        let mu = spec.mean_link.inv(e);
        let dmu = spec.mean_link.inv_deriv(e);
        let var_y = (s2 * dmu * dmu).max(f64::MIN_POSITIVE);
        phi_sum += mu * (1.0 - mu) / var_y;
    }
    let phi = (phi_sum / n - 1.0).clamp(0.5, 1e8);
    let sigma = (1.0 / (1.0 + phi)).sqrt();
    let disp_intercept = spec.disp_link.eval(sigma)?;

    let mut gamma0 = vec![0.0; z.ncols()];
    match (0..z.ncols()).find(|&j| z.column(j).iter().all(|&v| v == 1.0)) {
        Some(j) => gamma0[j] = disp_intercept,
        None => gamma0 = ols::least_squares(z, &vec![disp_intercept; data.n()])?,
    }
    Ok(beta0.into_iter().chain(gamma0).collect())
}
