use super::gamma::ln_gamma_unchecked;
use super::{domain, SpecFunError, SpecFunResult};
use std::f64::consts::{FRAC_PI_4, PI};

/// Below this |x| `J0` is summed from its power series; above it the Hankel
/// asymptotic expansion is used. At 14 the series loses at most ~1e-11 to
/// cancellation and the asymptotic series reaches ~1e-12 before diverging.
const J0_SERIES_LIMIT: f64 = 14.0;

/// Ascending series for `I_nu` up to this argument, asymptotic/rescaled beyond.
const I_SERIES_LIMIT: f64 = 30.0;

const MAX_TERMS: usize = 500;

/// Bessel function of the first kind of order zero.
pub fn bessel_j0(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(domain("bessel_j0", format!("x = {x}")));
    }
    let ax = x.abs();
    if ax <= J0_SERIES_LIMIT {
        let r = bessel_j0_series(ax, MAX_TERMS);
        if !r.converged {
            return Err(SpecFunError::NonConvergence {
                func: "bessel_j0",
                terms: r.terms_used,
            });
        }
        Ok(r.value)
    } else {
        Ok(j0_hankel(ax))
    }
}

/// Partial sum of `J0(x) = sum (-1)^m (x/2)^{2m} / (m!)^2` using at most
/// `max_terms` terms.
///
/// Stops early once a term no longer changes the sum. `error_bound` is the
/// magnitude of the first omitted term, which bounds the truncation error
/// because the tail is alternating with decreasing magnitude once `m > |x|/2`.
pub fn bessel_j0_series(x: f64, max_terms: usize) -> SpecFunResult {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut used = 0;
    let mut converged = false;
    for m in 0..max_terms.max(1) {
        if m > 0 {
            term *= -q / ((m * m) as f64);
        }
        sum += term;
        used = m + 1;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() && (m as f64) > 0.5 * x {
            converged = true;
            break;
        }
    }
    let next = -term * q / ((used * used) as f64);
    // The alternating-series bound needs monotonically shrinking terms from
    // the first omitted one onwards.
    let error_bound = if (used as f64) > 0.5 * x {
        next.abs()
    } else {
        f64::INFINITY
    };
    SpecFunResult {
        value: sum,
        converged: converged || next.abs() <= f64::EPSILON * sum.abs(),
        terms_used: used,
        error_bound,
    }
}

fn j0_hankel(x: f64) -> f64 {
    // P and Q of the Hankel expansion for nu = 0; a_k recursion
    // a_k / x^k = a_{k-1} / x^{k-1} * (4nu^2 - (2k-1)^2) / (8 k x).
    let mut term = 1.0f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= -(odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        // (-1)^{floor(k/2)} sign pattern
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let w = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * w.cos() - q * w.sin())
}

fn check_i_args(order: f64, x: f64) -> Result<(), SpecFunError> {
    if !order.is_finite() || order <= -1.0 {
        return Err(domain("bessel_i", format!("order = {order}, need order > -1")));
    }
    if x.is_nan() || x < 0.0 || x.is_infinite() {
        return Err(domain("bessel_i", format!("x = {x}, need finite x >= 0")));
    }
    Ok(())
}

/// Natural log of the modified Bessel function of the first kind `I_order(x)`.
///
/// Real order `> -1` is accepted (the noncentral chi-square density needs
/// `(v - 2) / 2` for fractional `v > 0`). Returns `-inf` for `x = 0` and
/// positive order.
pub fn ln_bessel_i(order: f64, x: f64) -> Result<f64, SpecFunError> {
    check_i_args(order, x)?;
    if x == 0.0 {
        return if order == 0.0 {
            Ok(0.0)
        } else if order > 0.0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Err(domain("bessel_i", "I_order(0) diverges for order < 0"))
        };
    }
    if x <= I_SERIES_LIMIT {
        let (ln_sum, _) = ascending_ln_sum(order, x)?;
        return Ok(order * (0.5 * x).ln() - ln_gamma_unchecked(order + 1.0) + ln_sum);
    }
    match hankel_ln_i(order, x) {
        Some(v) => Ok(v),
        None => rescaled_series_ln_i(order, x),
    }
}

/// `I_order(x)`; reports overflow instead of returning infinity.
pub fn bessel_i(order: f64, x: f64) -> Result<f64, SpecFunError> {
    let ln = ln_bessel_i(order, x)?;
    if ln > f64::MAX.ln() {
        return Err(SpecFunError::Overflow {
            func: "bessel_i",
            ln_value: ln,
        });
    }
    Ok(ln.exp())
}

/// Plain ascending series for `I_order(x)` with a rigorous tail bound.
pub fn bessel_i_series(order: f64, x: f64) -> Result<SpecFunResult, SpecFunError> {
    check_i_args(order, x)?;
    if x == 0.0 {
        let value = if order == 0.0 { 1.0 } else { 0.0 };
        if order < 0.0 {
            return Err(domain("bessel_i", "I_order(0) diverges for order < 0"));
        }
        return Ok(SpecFunResult {
            value,
            converged: true,
            terms_used: 1,
            error_bound: 0.0,
        });
    }
    let (ln_sum, terms) = ascending_ln_sum(order, x)?;
    let lead = order * (0.5 * x).ln() - ln_gamma_unchecked(order + 1.0);
    let value = (lead + ln_sum).exp();
    Ok(SpecFunResult {
        value,
        converged: value.is_finite(),
        terms_used: terms,
        error_bound: value * 4.0 * f64::EPSILON * terms as f64,
    })
}

/// ln of sum_k rho_k with rho_0 = 1, rho_k = rho_{k-1} (x^2/4) / (k (k + order)).
fn ascending_ln_sum(order: f64, x: f64) -> Result<(f64, usize), SpecFunError> {
    let y = 0.25 * x * x;
    let mut rho = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..=4 * MAX_TERMS {
        let kf = k as f64;
        rho *= y / (kf * (kf + order));
        sum += rho;
        // Once the ratio drops below 1/2 the remaining tail is below rho.
        if rho < f64::EPSILON * 0.1 * sum && y / (kf * (kf + order)) < 0.5 {
            return Ok((sum.ln(), k + 1));
        }
    }
    Err(SpecFunError::NonConvergence {
        func: "bessel_i",
        terms: 4 * MAX_TERMS,
    })
}

/// Large-argument expansion `I(x) ~ e^x / sqrt(2 pi x) sum (-1)^k a_k / x^k`.
/// Returns `None` if the terms stop shrinking before reaching full precision.
fn hankel_ln_i(order: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * order * order;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut peak = 1.0f64;
    let mut prev = 1.0f64;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * x);
        if odd * odd > mu && term.abs() > prev {
            // Past the smallest term of a diverging asymptotic series.
            return None;
        }
        prev = term.abs();
        sum += term;
        peak = peak.max(term.abs());
        if term.abs() <= 1e-17 * sum.abs() {
            // Cancellation in large intermediate terms costs precision.
            if peak > 1e3 * sum.abs() || sum <= 0.0 {
                return None;
            }
            return Some(x - 0.5 * (2.0 * PI * x).ln() + sum.ln());
        }
    }
    None
}

/// Ascending series summed outward from its largest term, in log space.
/// Slow for very large `x` but accurate for every order and argument.
fn rescaled_series_ln_i(order: f64, x: f64) -> Result<f64, SpecFunError> {
    let y = 0.25 * x * x;
    let k_peak = ((-order + (order * order + x * x).sqrt()) * 0.5).floor().max(0.0);
    let ln_peak =
        k_peak * y.ln() - ln_gamma_unchecked(k_peak + 1.0) - ln_gamma_unchecked(k_peak + order + 1.0);
    let mut sum = 1.0f64;
    let limit = 20 * (k_peak as usize + 50) + 10_000;

    let mut rho = 1.0f64;
    let mut k = k_peak;
    let mut steps = 0usize;
    loop {
        k += 1.0;
        rho *= y / (k * (k + order));
        sum += rho;
        steps += 1;
        if rho < f64::EPSILON * 0.1 * sum {
            break;
        }
        if steps > limit {
            return Err(SpecFunError::NonConvergence {
                func: "bessel_i",
                terms: steps,
            });
        }
    }
    rho = 1.0;
    k = k_peak;
    while k >= 1.0 {
        rho *= k * (k + order) / y;
        k -= 1.0;
        sum += rho;
        if rho < f64::EPSILON * 0.1 * sum {
            break;
        }
    }
    Ok(order * (0.5 * x).ln() + ln_peak + sum.ln())
}
