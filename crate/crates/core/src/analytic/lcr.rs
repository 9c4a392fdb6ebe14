use super::{check_threshold, AcfCurvature, AnalyticError, AnalyticModel, Fading, GammaFit, Ncx2Fit};
use crate::scenario::InterfererProfile;
use crate::specfun::{ln_bessel_i, ln_gamma};
use std::f64::consts::{LN_2, PI};

/// Gamma-approximation crossing rate,
/// `1/(2 Gamma(r)) sqrt(2|R''(0)|/pi) (theta T)^(r-1/2) exp(-theta T)`.
pub fn gamma_lcr(fit: GammaFit, curvature: AcfCurvature, threshold: f64) -> Result<f64, AnalyticError> {
    check_threshold(threshold)?;
    let (r, theta) = (fit.shape_r, fit.rate_theta);
    if !(r > 0.0 && theta > 0.0 && r.is_finite() && theta.is_finite()) {
        return Err(AnalyticError::Domain(format!("invalid gamma fit {fit:?}")));
    }
    let c = curvature.value().abs();
    if c == 0.0 {
        return Ok(0.0);
    }
    if threshold == 0.0 {
        return if r > 0.5 {
            Ok(0.0)
        } else {
            Err(AnalyticError::DegenerateLcr(format!("shape r = {r} <= 0.5 at T = 0")))
        };
    }
    let x = theta * threshold;
    let ln = -LN_2 - ln_gamma(r)? + 0.5 * (2.0 * c / PI).ln() + (r - 0.5) * x.ln() - x;
    Ok(ln.exp())
}

/// Noncentral chi-square crossing rate,
/// `sqrt(pi) f (aT)^(v/4) l^(-(v-2)/4) exp(-(l+aT)/2) I_((v-2)/2)(sqrt(l a T))`,
/// assembled in log space.
pub fn ncx2_lcr(fit: Ncx2Fit, doppler_hz: f64, threshold: f64) -> Result<f64, AnalyticError> {
    check_threshold(threshold)?;
    let (v, l, a) = (fit.dof_v, fit.noncentrality_lambda, fit.scale_alpha);
    if !(v > 0.0 && a > 0.0 && v.is_finite() && a.is_finite() && l.is_finite()) {
        return Err(AnalyticError::Domain(format!("invalid fit {fit:?}")));
    }
    if !(l > 0.0) {
        return Err(AnalyticError::Domain(
            "lambda = 0: use gamma_lcr with r = v/2, theta = alpha/2".into(),
        ));
    }
    if !(doppler_hz.is_finite() && doppler_hz > 0.0) {
        return Err(AnalyticError::Domain(format!("Doppler {doppler_hz} must be > 0")));
    }
    if threshold == 0.0 {
        return if v > 1.0 {
            Ok(0.0)
        } else {
            Err(AnalyticError::DegenerateLcr(format!("v = {v} <= 1 at T = 0")))
        };
    }
    let at = a * threshold;
    let ln = 0.5 * PI.ln() + doppler_hz.ln() + 0.25 * v * at.ln() - 0.25 * (v - 2.0) * l.ln()
        - 0.5 * (l + at)
        + ln_bessel_i(0.5 * (v - 2.0), (l * at).sqrt())?;
    Ok(ln.exp())
}

/// Fitted-distribution CDF of the aggregate at `threshold`.
pub fn aggregate_cdf(profile: &InterfererProfile, fading: Fading, threshold: f64) -> Result<f64, AnalyticError> {
    AnalyticModel::new(profile, fading)?.cdf(threshold)
}

/// Average exceedance duration `(1 - F(T)) / LCR(T)` with every interferer
/// at `doppler_hz`.
pub fn aed(
    profile: &InterfererProfile,
    fading: Fading,
    doppler_hz: f64,
    threshold: f64,
) -> Result<f64, AnalyticError> {
    AnalyticModel::new(&profile.with_doppler(doppler_hz), fading)?.aed(threshold)
}
