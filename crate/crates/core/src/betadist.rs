//! The beta distribution in the shape form (θ₁, θ₂) and in the mean/dispersion
//! form (μ, σ) with θ₁ = μφ, θ₂ = (1 − μ)φ and φ = (1 − σ²)/σ².

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{domain, Result};
use crate::specfun::{self, log_gamma_unchecked};

/// Shape parameters (θ₁, θ₂) of the standard beta density.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapePair {
    theta1: f64,
    theta2: f64,
}

impl ShapePair {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if theta1.is_finite() && theta1 > 0.0 && theta2.is_finite() && theta2 > 0.0 {
            Ok(Self { theta1, theta2 })
        } else {
            Err(domain(
                "ShapePair",
                alloc::format!("({theta1}, {theta2}) must both be positive and finite"),
            ))
        }
    }

    #[inline]
    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    #[inline]
    pub fn theta2(&self) -> f64 {
        self.theta2
    }
}

/// Mean μ ∈ (0, 1) and dispersion σ ∈ (0, 1); Var(y) = μ(1 − μ)σ².
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MuSigma {
    mu: f64,
    sigma: f64,
}

impl MuSigma {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if mu > 0.0 && mu < 1.0 && sigma > 0.0 && sigma < 1.0 {
            Ok(Self { mu, sigma })
        } else {
            Err(domain(
                "MuSigma",
                alloc::format!("mu = {mu} and sigma = {sigma} must both lie in (0, 1)"),
            ))
        }
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Precision φ = (1 − σ²)/σ² = θ₁ + θ₂.
    #[inline]
    pub fn precision(&self) -> f64 {
        precision(self.sigma)
    }
}

#[inline]
pub(crate) fn precision(sigma: f64) -> f64 {
    (1.0 - sigma * sigma) / (sigma * sigma)
}

pub fn to_shape(p: MuSigma) -> ShapePair {
    let phi = p.precision();
    ShapePair {
        theta1: p.mu * phi,
        theta2: (1.0 - p.mu) * phi,
    }
}

pub fn to_musigma(s: ShapePair) -> MuSigma {
    let total = s.theta1 + s.theta2;
    MuSigma {
        mu: s.theta1 / total,
        sigma: (1.0 / (1.0 + total)).sqrt(),
    }
}

fn check_interior(function: &'static str, y: f64) -> Result<()> {
    if y > 0.0 && y < 1.0 {
        Ok(())
    } else {
        Err(domain(
            function,
            alloc::format!("y = {y} must lie strictly inside (0, 1); adjust boundary observations first"),
        ))
    }
}

/// ln f(y; μ, σ).
pub fn log_pdf(y: f64, p: MuSigma) -> Result<f64> {
    check_interior("log_pdf", y)?;
    Ok(log_pdf_unchecked(y, p.mu, p.precision()))
}

#[inline]
pub(crate) fn log_pdf_unchecked(y: f64, mu: f64, phi: f64) -> f64 {
    let a = mu * phi;
    let b = (1.0 - mu) * phi;
    log_gamma_unchecked(phi) - log_gamma_unchecked(a) - log_gamma_unchecked(b)
        + (a - 1.0) * y.ln()
        + (b - 1.0) * (-y).ln_1p()
}

pub fn cdf(y: f64, p: MuSigma) -> Result<f64> {
    check_interior("cdf", y)?;
    let s = to_shape(p);
    specfun::reg_inc_beta_unchecked(y, s.theta1, s.theta2)
}

/// Q(α; μ, σ).
pub fn quantile(alpha: f64, p: MuSigma) -> Result<f64> {
    let s = to_shape(p);
    specfun::inv_reg_inc_beta(alpha, s.theta1, s.theta2)
}

/// (E y, Var y) = (μ, μ(1 − μ)σ²).
pub fn mean_var(p: MuSigma) -> (f64, f64) {
    (p.mu, p.mu * (1.0 - p.mu) * p.sigma * p.sigma)
}

/// Beta variates as G₁/(G₁ + G₂) with independent unit-scale gamma variates.
#[derive(Debug, Clone, Copy)]
pub struct BetaSampler {
    g1: Gamma<f64>,
    g2: Gamma<f64>,
}

impl BetaSampler {
    pub fn new(p: MuSigma) -> Self {
        Self::from_shape(to_shape(p))
    }

    pub fn from_shape(s: ShapePair) -> Self {
        // ShapePair guarantees positive finite shapes, which Gamma::new accepts.
        Self {
            g1: Gamma::new(s.theta1, 1.0).expect("positive shape"),
            g2: Gamma::new(s.theta2, 1.0).expect("positive shape"),
        }
    }

    /// One draw strictly inside (0, 1). Draws that round to an endpoint
    /// (possible only for tiny shapes) are redrawn.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.g1.sample(rng);
            let y = self.g2.sample(rng);
            let v = x / (x + y);
            if v > 0.0 && v < 1.0 {
                return v;
            }
        }
    }
}

/// `n` i.i.d. draws from Beta(μ, σ).
pub fn sample<R: Rng + ?Sized>(rng: &mut R, p: MuSigma, n: usize) -> Vec<f64> {
    let sampler = BetaSampler::new(p);
    (0..n).map(|_| sampler.draw(rng)).collect()
}
