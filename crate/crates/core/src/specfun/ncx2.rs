use super::gamma::{ln_gamma_unchecked, regularized_lower_gamma, regularized_upper_gamma};
use super::{domain, SpecFunError};

/// Poisson weights below this are dropped from the mixture.
const WEIGHT_CUTOFF: f64 = 1e-15;
const MAX_MIXTURE_TERMS: usize = 200_000;

fn check(dof: f64, nc: f64, x: f64) -> Result<(), SpecFunError> {
    if !dof.is_finite() || dof <= 0.0 {
        return Err(domain("ncx2_cdf", format!("dof = {dof}, need dof > 0")));
    }
    if !nc.is_finite() || nc < 0.0 {
        return Err(domain("ncx2_cdf", format!("noncentrality = {nc}, need >= 0")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain("ncx2_cdf", format!("x = {x}, need x >= 0")));
    }
    Ok(())
}

/// CDF of the noncentral chi-square distribution with real `dof`.
///
/// Poisson(nc/2) mixture of `P(dof/2 + j, x/2)`, summed outward from the
/// modal index so that the leading weights never underflow.
pub fn ncx2_cdf(dof: f64, nc: f64, x: f64) -> Result<f64, SpecFunError> {
    check(dof, nc, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if nc == 0.0 {
        return regularized_lower_gamma(0.5 * dof, 0.5 * x);
    }
    poisson_mixture(dof, nc, |a| regularized_lower_gamma(a, 0.5 * x))
}

/// Survival function `1 - ncx2_cdf`, accurate in the upper tail.
pub fn ncx2_sf(dof: f64, nc: f64, x: f64) -> Result<f64, SpecFunError> {
    check(dof, nc, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if nc == 0.0 {
        return regularized_upper_gamma(0.5 * dof, 0.5 * x);
    }
    poisson_mixture(dof, nc, |a| regularized_upper_gamma(a, 0.5 * x))
}

fn poisson_mixture<F>(dof: f64, nc: f64, term: F) -> Result<f64, SpecFunError>
where
    F: Fn(f64) -> Result<f64, SpecFunError>,
{
    let mean = 0.5 * nc;
    let ln_mean = mean.ln();
    let ln_weight = |j: f64| -mean + j * ln_mean - ln_gamma_unchecked(j + 1.0);
    let mode = mean.floor();

    let mut total = 0.0;
    let mut used = 0usize;

    // Downward from the mode (inclusive).
    let mut j = mode;
    loop {
        let w = ln_weight(j).exp();
        total += w * term(0.5 * dof + j)?;
        used += 1;
        if j == 0.0 || (w < WEIGHT_CUTOFF && j < mode) {
            break;
        }
        j -= 1.0;
    }
    // Upward from mode + 1.
    j = mode + 1.0;
    loop {
        let w = ln_weight(j).exp();
        total += w * term(0.5 * dof + j)?;
        used += 1;
        if w < WEIGHT_CUTOFF {
            break;
        }
        if used > MAX_MIXTURE_TERMS {
            return Err(SpecFunError::NonConvergence {
                func: "ncx2_cdf",
                terms: used,
            });
        }
        j += 1.0;
    }
    Ok(total.clamp(0.0, 1.0))
}
