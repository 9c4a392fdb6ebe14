//! Closed-form statistics of the aggregate interference: moments, ACF
//! curvature, gamma and noncentral chi-square fits, level crossing rate and
//! average exceedance duration.

mod curve;
mod fit;
mod lcr;
mod moments;

pub use curve::{default_kappa_grid, lcr_curve, log_kappa_grid, CurvePoint, LcrCurve, CSV_HEADER};
pub use fit::{ncx2_fit_moments, ncx2_fit_numeric, NumericFit, NUMERIC_TOLERANCE};
pub use lcr::{aed, aggregate_cdf, gamma_lcr, ncx2_lcr};
pub use moments::{acf, acf_curvature, effective_doppler, gamma_fit, rayleigh_moments, rician_moments};

use crate::scenario::{InterfererProfile, ScenarioError};
use crate::specfun::{regularized_lower_gamma, regularized_upper_gamma, ncx2_cdf, ncx2_sf, SpecFunError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Numeric fits with an objective above this are rejected by `AnalyticModel`.
pub const NUMERIC_ACCEPT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Profile(#[from] ScenarioError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("no valid noncentral chi-square parameters for moments {moments:?}")]
    InfeasibleFit { moments: RicianMoments },
    #[error("numeric moment fit did not converge (objective {objective:e})")]
    FitFailed { objective: f64 },
    #[error("crossing rate diverges at the origin: {0}")]
    DegenerateLcr(String),
    #[error("{0}")]
    Domain(String),
    #[error("AED undefined: crossing rate is zero at threshold {threshold}")]
    UndefinedAed { threshold: f64 },
    #[error("normalized curves need a common Doppler frequency, got {0:?}")]
    MixedDoppler(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    Rayleigh,
    Rician,
}

impl FromStr for Fading {
    type Err = AnalyticError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rayleigh" => Ok(Self::Rayleigh),
            "rician" | "rice" => Ok(Self::Rician),
            other => Err(AnalyticError::Domain(format!(
                "unknown fading {other:?} (expected rayleigh or rician)"
            ))),
        }
    }
}

impl fmt::Display for Fading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rayleigh => "rayleigh",
            Self::Rician => "rician",
        })
    }
}

/// Gamma approximation of the Rayleigh aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub shape_r: f64,
    pub rate_theta: f64,
}

/// `Y = X / alpha` with `X` noncentral chi-square (`dof_v`, `noncentrality_lambda`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ncx2Fit {
    pub dof_v: f64,
    pub noncentrality_lambda: f64,
    pub scale_alpha: f64,
}

/// Second derivative of the normalized ACF at zero lag, in s^-2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfCurvature(f64);

impl AcfCurvature {
    pub fn new(value: f64) -> Self {
        Self(value)
    }

    /// Curvature of a single Doppler frequency, `-4 pi^2 f^2`.
    pub fn from_doppler(doppler_hz: f64) -> Self {
        Self(-4.0 * PI * PI * doppler_hz * doppler_hz)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Raw moments `E[I], E[I^2], E[I^3]` of the aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianMoments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

/// Which closed form an `AnalyticModel` evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FittedDistribution {
    Gamma { fit: GammaFit, curvature: AcfCurvature },
    Ncx2 { fit: Ncx2Fit, doppler_hz: f64 },
}

/// A profile reduced to a fitted distribution plus everything the LCR
/// formulas need.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticModel {
    pub fading: Fading,
    pub distribution: FittedDistribution,
    /// `E[I^2]` of the aggregate under the chosen fading.
    pub mean_square: f64,
    /// Objective of the numeric moment fit, when the closed form was
    /// infeasible and the numeric fallback was used.
    pub numeric_objective: Option<f64>,
}

impl AnalyticModel {
    /// Rayleigh uses the gamma fit. Rician uses the noncentral chi-square
    /// fit (closed form, then numeric); a profile with `K = 0` or a fit with
    /// `lambda = 0` falls back to the gamma form it reduces to.
    pub fn new(profile: &InterfererProfile, fading: Fading) -> Result<Self, AnalyticError> {
        profile.validate()?;
        match fading {
            Fading::Rayleigh => Ok(Self::gamma(profile, fading)),
            Fading::Rician if profile.rician_k_linear == 0.0 => Ok(Self::gamma(profile, fading)),
            Fading::Rician => {
                let m = rician_moments(profile);
                let doppler_hz = effective_doppler(profile);
                let (fit, numeric_objective) = match ncx2_fit_moments(&m) {
                    Ok(fit) => (fit, None),
                    Err(AnalyticError::InfeasibleFit { .. }) => {
                        let res = ncx2_fit_numeric(&m, None)?;
                        if !(res.objective <= NUMERIC_ACCEPT) {
                            return Err(AnalyticError::FitFailed {
                                objective: res.objective,
                            });
                        }
                        (res.fit, Some(res.objective))
                    }
                    Err(e) => return Err(e),
                };
                let distribution = if fit.noncentrality_lambda == 0.0 {
                    FittedDistribution::Gamma {
                        fit: GammaFit {
                            shape_r: fit.dof_v / 2.0,
                            rate_theta: fit.scale_alpha / 2.0,
                        },
                        curvature: AcfCurvature::from_doppler(doppler_hz),
                    }
                } else {
                    FittedDistribution::Ncx2 { fit, doppler_hz }
                };
                Ok(Self {
                    fading,
                    distribution,
                    mean_square: m.m2,
                    numeric_objective,
                })
            }
        }
    }

    fn gamma(profile: &InterfererProfile, fading: Fading) -> Self {
        let (mean, var) = rayleigh_moments(profile);
        Self {
            fading,
            distribution: FittedDistribution::Gamma {
                fit: gamma_fit(profile),
                curvature: acf_curvature(profile),
            },
            mean_square: mean * mean + var,
            numeric_objective: None,
        }
    }

    /// Crossing rate (per second) at absolute threshold `t`.
    pub fn lcr(&self, t: f64) -> Result<f64, AnalyticError> {
        match self.distribution {
            FittedDistribution::Gamma { fit, curvature } => gamma_lcr(fit, curvature, t),
            FittedDistribution::Ncx2 { fit, doppler_hz } => ncx2_lcr(fit, doppler_hz, t),
        }
    }

    pub fn cdf(&self, t: f64) -> Result<f64, AnalyticError> {
        check_threshold(t)?;
        Ok(match self.distribution {
            FittedDistribution::Gamma { fit, .. } => {
                regularized_lower_gamma(fit.shape_r, fit.rate_theta * t)?
            }
            FittedDistribution::Ncx2 { fit, .. } => {
                ncx2_cdf(fit.dof_v, fit.noncentrality_lambda, fit.scale_alpha * t)?
            }
        })
    }

    /// `1 - cdf(t)`, evaluated directly so the upper tail keeps precision.
    pub fn sf(&self, t: f64) -> Result<f64, AnalyticError> {
        check_threshold(t)?;
        Ok(match self.distribution {
            FittedDistribution::Gamma { fit, .. } => {
                regularized_upper_gamma(fit.shape_r, fit.rate_theta * t)?
            }
            FittedDistribution::Ncx2 { fit, .. } => {
                ncx2_sf(fit.dof_v, fit.noncentrality_lambda, fit.scale_alpha * t)?
            }
        })
    }

    /// Average exceedance duration in seconds.
    pub fn aed(&self, t: f64) -> Result<f64, AnalyticError> {
        let lcr = self.lcr(t)?;
        if !(lcr > 0.0) {
            return Err(AnalyticError::UndefinedAed { threshold: t });
        }
        Ok(self.sf(t)? / lcr)
    }
}

pub(crate) fn check_threshold(t: f64) -> Result<(), AnalyticError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(AnalyticError::Domain(format!("threshold {t} must be finite and >= 0")))
    }
}
