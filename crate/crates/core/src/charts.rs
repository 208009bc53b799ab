//! Control limits for the beta (BCC), regression (RCC) and beta regression
//! (BRCC, BRCC_C) charts, and signal detection.
//!
//! All charts use probability limits at α/2 and 1 − α/2. An observation on
//! or beyond a limit is a signal.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;

use crate::betadist::{quantile, MuSigma};
use crate::error::{Error, Result};
use crate::fit::{fit_betareg, Dataset, FittedBetaReg, FittedOls, ModelSpec};
use crate::specfun::normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ChartKind {
    #[cfg_attr(feature = "serde", serde(rename = "BCC"))]
    Bcc,
    #[cfg_attr(feature = "serde", serde(rename = "RCC"))]
    Rcc,
    #[cfg_attr(feature = "serde", serde(rename = "BRCC"))]
    Brcc,
    #[cfg_attr(feature = "serde", serde(rename = "BRCC_C"))]
    BrccC,
}

impl ChartKind {
    pub const ALL: [ChartKind; 4] = [ChartKind::Bcc, ChartKind::Rcc, ChartKind::Brcc, ChartKind::BrccC];

    pub fn name(self) -> &'static str {
        match self {
            ChartKind::Bcc => "BCC",
            ChartKind::Rcc => "RCC",
            ChartKind::Brcc => "BRCC",
            ChartKind::BrccC => "BRCC_C",
        }
    }

    /// Whether limits are beta quantiles (and so stay inside (0, 1)).
    pub fn is_beta(self) -> bool {
        !matches!(self, ChartKind::Rcc)
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChartKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bcc" => Ok(ChartKind::Bcc),
            "rcc" => Ok(ChartKind::Rcc),
            "brcc" => Ok(ChartKind::Brcc),
            "brcc_c" | "brccc" => Ok(ChartKind::BrccC),
            other => Err(Error::Usage(alloc::format!(
                "unknown chart '{other}' (expected bcc, rcc, brcc or brcc_c)"
            ))),
        }
    }
}

/// How the false-alarm probability is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AlphaPolicy {
    /// α = 1 / ARL₀.
    Arl0Target(f64),
    Alpha(f64),
}

impl Default for AlphaPolicy {
    fn default() -> Self {
        AlphaPolicy::Arl0Target(200.0)
    }
}

impl AlphaPolicy {
    pub fn alpha(self) -> Result<f64> {
        match self {
            AlphaPolicy::Arl0Target(arl0) if arl0.is_finite() && arl0 > 1.0 => Ok(1.0 / arl0),
            AlphaPolicy::Arl0Target(arl0) => Err(Error::Usage(alloc::format!("ARL0 target must exceed 1, got {arl0}"))),
            AlphaPolicy::Alpha(a) if a > 0.0 && a < 1.0 => Ok(a),
            AlphaPolicy::Alpha(a) => Err(Error::Usage(alloc::format!("alpha must lie in (0, 1), got {a}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChartRow {
    /// 1-based observation index.
    pub t: usize,
    pub y: f64,
    pub lcl: f64,
    pub ucl: f64,
    pub signal: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChartResult {
    pub kind: ChartKind,
    pub alpha: f64,
    pub rows: Vec<ChartRow>,
}

/// y on or outside [lcl, ucl].
#[inline]
pub fn is_signal(y: f64, lcl: f64, ucl: f64) -> bool {
    y <= lcl || y >= ucl
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Usage(alloc::format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn build(kind: ChartKind, alpha: f64, y: &[f64], limits: impl Iterator<Item = (f64, f64)>) -> Result<ChartResult> {
    let mut rows = Vec::with_capacity(y.len());
    for (t, (&yt, (lcl, ucl))) in y.iter().zip(limits).enumerate() {
        if !(lcl < ucl) {
            return Err(Error::DegenerateChart(alloc::format!(
                "{kind} limits collapse at observation {} (lcl = {lcl}, ucl = {ucl})",
                t + 1
            )));
        }
        rows.push(ChartRow {
            t: t + 1,
            y: yt,
            lcl,
            ucl,
            signal: is_signal(yt, lcl, ucl),
        });
    }
    if rows.len() != y.len() {
        return Err(Error::Usage("fewer limits than observations".into()));
    }
    Ok(ChartResult { kind, alpha, rows })
}

/// Beta quantiles at α/2 and 1 − α/2.
pub fn beta_limits(mu: f64, sigma: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let p = MuSigma::new(mu, sigma)?;
    Ok((quantile(alpha / 2.0, p)?, quantile(1.0 - alpha / 2.0, p)?))
}

/// Constant limits from a covariate-free beta fit.
pub fn bcc_limits(y: &[f64], alpha: f64) -> Result<ChartResult> {
    check_alpha(alpha)?;
    let n = y.len();
    let ones = DMatrix::from_element(n, 1, 1.0);
    let data = Dataset::new(y.to_vec(), ones.clone(), ones)?;
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::Data("all responses are equal; a beta law cannot be fitted".into()));
    }
    let fit = fit_betareg(&ModelSpec::intercept_only(), &data)?;
    let (lcl, ucl) = beta_limits(fit.mu_hat[0], fit.sigma_hat[0], alpha)?;
    build(ChartKind::Bcc, alpha, y, core::iter::repeat((lcl, ucl)))
}

/// ŷₜ ± z_{1−α/2}·s.
pub fn rcc_limits(fit: &FittedOls, y: &[f64], alpha: f64) -> Result<ChartResult> {
    check_alpha(alpha)?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    rcc_limits_with_multiplier(fit, y, alpha, z)
}

/// ŷₜ ± multiplier·s, for conventions other than the α-matched quantile
/// (e.g. 3-sigma). Limits are not clamped to (0, 1).
pub fn rcc_limits_with_multiplier(fit: &FittedOls, y: &[f64], alpha: f64, multiplier: f64) -> Result<ChartResult> {
    check_alpha(alpha)?;
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(Error::Usage(alloc::format!("multiplier must be positive, got {multiplier}")));
    }
    if fit.degenerate || !(fit.resid_sd > 0.0) {
        return Err(Error::DegenerateChart(
            "residual standard deviation is zero; the response is an exact linear function of the covariates".to_string(),
        ));
    }
    if fit.fitted.len() != y.len() {
        return Err(Error::Usage("fit and responses differ in length".into()));
    }
    let half = multiplier * fit.resid_sd;
    build(ChartKind::Rcc, alpha, y, fit.fitted.iter().map(|f| (f - half, f + half)))
}

/// Per-observation limits Q(α/2; μ̂ₜ, σ̂ₜ), Q(1 − α/2; μ̂ₜ, σ̂ₜ). The kind is
/// BRCC_C when the dispersion submodel has a single column.
pub fn brcc_limits(fit: &FittedBetaReg, y: &[f64], alpha: f64) -> Result<ChartResult> {
    check_alpha(alpha)?;
    if !fit.converged {
        return Err(Error::Usage("chart limits need a converged fit".into()));
    }
    if fit.mu_hat.len() != y.len() {
        return Err(Error::Usage("fit and responses differ in length".into()));
    }
    let kind = if fit.gamma_hat.len() == 1 { ChartKind::BrccC } else { ChartKind::Brcc };
    let limits = fit
        .mu_hat
        .iter()
        .zip(&fit.sigma_hat)
        .map(|(&m, &s)| beta_limits(m, s, alpha))
        .collect::<Result<Vec<_>>>()?;
    build(kind, alpha, y, limits.into_iter())
}

/// Scores new observations against a frozen fit at their own covariates.
pub fn brcc_limits_at(fit: &FittedBetaReg, x: &DMatrix<f64>, z: &DMatrix<f64>, y: &[f64], alpha: f64) -> Result<ChartResult> {
    check_alpha(alpha)?;
    if x.nrows() != y.len() {
        return Err(Error::Usage("covariate rows and responses differ in length".into()));
    }
    let (mu, sigma) = fit.predict(x, z)?;
    let kind = if fit.gamma_hat.len() == 1 { ChartKind::BrccC } else { ChartKind::Brcc };
    let limits = mu
        .iter()
        .zip(&sigma)
        .map(|(&m, &s)| beta_limits(m, s, alpha))
        .collect::<Result<Vec<_>>>()?;
    build(kind, alpha, y, limits.into_iter())
}

/// 1-based indices of signalling observations, ascending.
pub fn detect_signals(c: &ChartResult) -> Vec<usize> {
    c.rows.iter().filter(|r| r.signal).map(|r| r.t).collect()
}
