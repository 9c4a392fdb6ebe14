//! Real-valued special functions used by the crossing-rate formulas.
//!
//! Everything here is pure `f64` code with no external numerics dependency:
//! the log-gamma function, the regularized incomplete gamma functions,
//! Bessel `J0`, the modified Bessel function `I_nu` for real order, and the
//! noncentral chi-square CDF built on top of them.

mod bessel;
mod gamma;
mod ncx2;

pub use bessel::{bessel_i, bessel_i_series, bessel_j0, bessel_j0_series, ln_bessel_i};
pub use gamma::{ln_gamma, regularized_lower_gamma, regularized_upper_gamma};
pub use ncx2::{ncx2_cdf, ncx2_sf};

use thiserror::Error;

/// Outcome of an iterative special-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult {
    pub value: f64,
    pub converged: bool,
    pub terms_used: usize,
    /// Upper bound on the truncation error of `value`, when the method
    /// provides one (alternating or positive-ratio series). `f64::INFINITY`
    /// means no bound is available.
    pub error_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("{func}: argument out of domain ({detail})")]
    Domain { func: &'static str, detail: String },
    #[error("{func}: no convergence after {terms} terms")]
    NonConvergence { func: &'static str, terms: usize },
    #[error("{func}: result overflows f64 (ln value = {ln_value})")]
    Overflow { func: &'static str, ln_value: f64 },
}

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> SpecFunError {
    SpecFunError::Domain {
        func,
        detail: detail.into(),
    }
}
