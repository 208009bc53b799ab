//! Link functions between (0, 1) and the real line.

use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::specfun::{normal_cdf, normal_quantile};

/// Images of `link_inv` are clamped to `[LINK_CLAMP, 1 − LINK_CLAMP]`.
pub const LINK_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LinkKind {
    #[default]
    Logit,
    Probit,
    Cloglog,
}

impl LinkKind {
    pub const ALL: [LinkKind; 3] = [LinkKind::Logit, LinkKind::Probit, LinkKind::Cloglog];

    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Logit => "logit",
            LinkKind::Probit => "probit",
            LinkKind::Cloglog => "cloglog",
        }
    }

    /// g(v) for v ∈ (0, 1).
    pub fn eval(self, v: f64) -> Result<f64> {
        if !(v > 0.0 && v < 1.0) {
            return Err(domain("link_eval", alloc::format!("{v} outside (0, 1)")));
        }
        Ok(match self {
            LinkKind::Logit => (v / (1.0 - v)).ln(),
            LinkKind::Probit => normal_quantile(v)?,
            LinkKind::Cloglog => (-(-v).ln_1p()).ln(),
        })
    }

    /// g⁻¹(η), clamped away from 0 and 1.
    #[inline]
    pub fn inv(self, eta: f64) -> f64 {
        let v = match self {
            LinkKind::Logit => {
                if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                }
            }
            LinkKind::Probit => normal_cdf(eta),
            LinkKind::Cloglog => -(-eta.exp()).exp_m1(),
        };
        v.clamp(LINK_CLAMP, 1.0 - LINK_CLAMP)
    }

    /// d g⁻¹(η) / dη, floored at the smallest positive normal float.
    #[inline]
    pub fn inv_deriv(self, eta: f64) -> f64 {
        let d = match self {
            LinkKind::Logit => {
                let e = (-eta.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            LinkKind::Probit => (-0.5 * eta * eta).exp() / (2.0 * core::f64::consts::PI).sqrt(),
            LinkKind::Cloglog => (eta - eta.exp()).exp(),
        };
        d.max(f64::MIN_POSITIVE)
    }
}

pub fn link_eval(k: LinkKind, v: f64) -> Result<f64> {
    k.eval(v)
}

pub fn link_inv(k: LinkKind, eta: f64) -> f64 {
    k.inv(eta)
}

pub fn link_inv_deriv(k: LinkKind, eta: f64) -> f64 {
    k.inv_deriv(eta)
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logit" => Ok(LinkKind::Logit),
            "probit" => Ok(LinkKind::Probit),
            "cloglog" => Ok(LinkKind::Cloglog),
            other => Err(Error::Usage(alloc::format!(
                "unknown link '{other}' (expected logit, probit or cloglog)"
            ))),
        }
    }
}
