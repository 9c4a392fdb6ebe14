use super::{aggregate_trace, FadingSimConfig, InterferenceTrace, McSimError};
use crate::analytic::{rician_moments, Fading, LcrCurve};
use crate::scenario::InterfererProfile;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Level-crossing statistics of a trace at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingStats {
    pub up_crossings: u64,
    /// Durations of excursions above the threshold that start and end
    /// inside the trace.
    pub sojourn_durations_s: Vec<f64>,
    pub total_time_s: f64,
    pub fraction_above: f64,
}

impl CrossingStats {
    pub fn rate(&self) -> f64 {
        self.up_crossings as f64 / self.total_time_s
    }

    pub fn mean_sojourn_s(&self) -> Option<f64> {
        let n = self.sojourn_durations_s.len();
        (n > 0).then(|| self.sojourn_durations_s.iter().sum::<f64>() / n as f64)
    }
}

/// Up-crossings (`x[n] <= T < x[n+1]`) and excursions above `threshold`.
pub fn count_crossings(trace: &InterferenceTrace, threshold: f64) -> CrossingStats {
    let x = &trace.samples;
    let dt = 1.0 / trace.sample_rate_hz;
    let mut up = 0u64;
    let mut above = 0usize;
    let mut sojourns = Vec::new();
    // Start index of the current run above the threshold.
    let mut run: Option<usize> = None;
    for (i, &v) in x.iter().enumerate() {
        if v > threshold {
            above += 1;
            if run.is_none() {
                run = Some(i);
                if i > 0 {
                    up += 1;
                }
            }
        } else if let Some(start) = run.take() {
            if start > 0 {
                sojourns.push((i - start) as f64 * dt);
            }
        }
    }
    CrossingStats {
        up_crossings: up,
        sojourn_durations_s: sojourns,
        total_time_s: x.len() as f64 * dt,
        fraction_above: if x.is_empty() { 0.0 } else { above as f64 / x.len() as f64 },
    }
}

/// Fills the empirical columns of `curve` from `trace`.
pub fn fill_empirical(curve: &mut LcrCurve, trace: &InterferenceTrace) {
    let f = curve.doppler_hz;
    curve.points.par_iter_mut().for_each(|p| {
        let s = count_crossings(trace, p.threshold);
        p.lcr_norm_emp = Some(s.rate() / f);
        p.aed_norm_emp = s.mean_sojourn_s().map(|d| d * f);
        p.cdf_emp = Some(1.0 - s.fraction_above);
        p.crossings = Some(s.up_crossings);
        p.sojourns = Some(s.sojourn_durations_s.len() as u64);
    });
}

/// Simulated normalized curve. Rayleigh ignores the profile's K-factor.
pub fn empirical_curve(
    profile: &InterfererProfile,
    fading: Fading,
    kappa_grid: &[f64],
    config: &FadingSimConfig,
) -> Result<LcrCurve, McSimError> {
    let profile = match fading {
        Fading::Rayleigh => profile.with_k(0.0),
        Fading::Rician => profile.clone(),
    };
    let m2 = rician_moments(&profile).m2;
    let mut curve = LcrCurve::skeleton(&profile, fading, m2, kappa_grid)?;
    let trace = aggregate_trace(&profile, config)?;
    fill_empirical(&mut curve, &trace);
    Ok(curve)
}

/// Normalized sample autocorrelation `Re E[h(t + k) h*(t)] / E|h|^2` for
/// lags `0..=max_lag` samples.
pub fn sample_acf(h: &[Complex64], max_lag: usize) -> Vec<f64> {
    let n = h.len();
    let power = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| {
            let s: f64 = h[k..].iter().zip(h).map(|(a, b)| (a * b.conj()).re).sum();
            s / (n - k) as f64 / power
        })
        .collect()
}

/// Independent draws of `sum_i I_i |h_i|^2` (no time correlation).
pub fn static_aggregate_samples(profile: &InterfererProfile, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = profile.rician_k_linear;
    let los = (k / (k + 1.0)).sqrt();
    let sd = (0.5 / (k + 1.0)).sqrt();
    (0..n)
        .map(|_| {
            profile
                .powers
                .iter()
                .map(|&p| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    let y: f64 = StandardNormal.sample(&mut rng);
                    let (a, b) = (los + sd * x, sd * y);
                    p * (a * a + b * b)
                })
                .sum()
        })
        .collect()
}

/// Kolmogorov distance `sup |F_n - F|` between a sample and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let f = cdf(v);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Least-squares line through (bin mean level, bin variance of the
/// derivative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceLaw {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Mean level of the trace.
    pub mean_level: f64,
}

/// Bins the trace by level (equal-count bins), estimates the variance of the
/// central-difference derivative in each bin and regresses it on the bin's
/// mean level.
pub fn conditional_variance_check(
    trace: &InterferenceTrace,
    num_bins: usize,
) -> Result<VarianceLaw, McSimError> {
    const MIN_SAMPLES: usize = 100_000;
    if num_bins < 5 {
        return Err(McSimError::InvalidConfig(format!("num_bins {num_bins} must be >= 5")));
    }
    let x = &trace.samples;
    if x.len() < MIN_SAMPLES {
        return Err(McSimError::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: x.len(),
        });
    }
    let half_rate = 0.5 * trace.sample_rate_hz;
    let mut pairs: Vec<(f64, f64)> = (1..x.len() - 1)
        .map(|i| (x[i], (x[i + 1] - x[i - 1]) * half_rate))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let per_bin = pairs.len() / num_bins;
    let bins: Vec<(f64, f64)> = pairs
        .chunks(per_bin)
        .take(num_bins)
        .map(|c| {
            let n = c.len() as f64;
            let level = c.iter().map(|p| p.0).sum::<f64>() / n;
            let mean_d = c.iter().map(|p| p.1).sum::<f64>() / n;
            let var = c.iter().map(|p| (p.1 - mean_d).powi(2)).sum::<f64>() / (n - 1.0);
            (level, var)
        })
        .collect();

    let n = bins.len() as f64;
    let mx = bins.iter().map(|b| b.0).sum::<f64>() / n;
    let my = bins.iter().map(|b| b.1).sum::<f64>() / n;
    let sxx: f64 = bins.iter().map(|b| (b.0 - mx).powi(2)).sum();
    let sxy: f64 = bins.iter().map(|b| (b.0 - mx) * (b.1 - my)).sum();
    let syy: f64 = bins.iter().map(|b| (b.1 - my).powi(2)).sum();
    let scale = mx.abs().max(f64::MIN_POSITIVE);
    if sxx <= (1e-12 * scale).powi(2) * n || !(syy > 0.0) {
        return Err(McSimError::Degenerate(
            "trace level or derivative does not vary".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = sxy * sxy / (sxx * syy);
    Ok(VarianceLaw {
        slope,
        intercept,
        r_squared,
        mean_level: trace.mean(),
    })
}
