//! Numerical core for beta regression control charts.
//!
//! * [`specfun`]: log-gamma, digamma, incomplete beta and its inverse.
//! * [`betadist`]: the beta law in shape and mean/dispersion form.
//! * [`links`]: logit, probit and complementary log-log links.
//! * [`fit`]: maximum likelihood beta regression, OLS, Wald and LR inference.
//! * [`charts`]: BCC, RCC and BRCC limits and signals.
//! * [`arl`]: Monte Carlo average run lengths.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod arl;
pub mod betadist;
pub mod charts;
pub mod error;
pub mod fit;
pub mod links;
pub mod specfun;
pub mod stream;

pub use error::{Error, Result};
