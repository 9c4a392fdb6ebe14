use super::{AcfCurvature, AnalyticError, GammaFit, RicianMoments};
use crate::scenario::InterfererProfile;
use crate::specfun::bessel_j0;
use std::f64::consts::PI;

fn power_sums(profile: &InterfererProfile) -> (f64, f64, f64) {
    profile
        .powers
        .iter()
        .fold((0.0, 0.0, 0.0), |(s1, s2, s3), &p| {
            (s1 + p, s2 + p * p, s3 + p * p * p)
        })
}

/// Mean and variance of the Rayleigh aggregate: `(sum I, sum I^2)`.
pub fn rayleigh_moments(profile: &InterfererProfile) -> (f64, f64) {
    let (s1, s2, _) = power_sums(profile);
    (s1, s2)
}

/// Normalized ACF of the Rayleigh aggregate,
/// `sum I^2 J0^2(2 pi f_D tau) / sum I^2`.
pub fn acf(profile: &InterfererProfile, tau_s: f64) -> Result<f64, AnalyticError> {
    if !(tau_s.is_finite() && tau_s >= 0.0) {
        return Err(AnalyticError::Domain(format!("tau = {tau_s} must be >= 0")));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&p, &f) in profile.powers.iter().zip(&profile.doppler_hz) {
        let j = bessel_j0(2.0 * PI * f * tau_s)?;
        num += p * p * j * j;
        den += p * p;
    }
    Ok(num / den)
}

/// Second derivative of the aggregate ACF at zero lag.
pub fn acf_curvature(profile: &InterfererProfile) -> AcfCurvature {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&p, &f) in profile.powers.iter().zip(&profile.doppler_hz) {
        num += p * p * f * f;
        den += p * p;
    }
    AcfCurvature::new(-4.0 * PI * PI * num / den)
}

/// Power-weighted RMS Doppler, `sqrt(sum I^2 f^2 / sum I^2)`; equals the
/// common Doppler when all interferers share one.
pub fn effective_doppler(profile: &InterfererProfile) -> f64 {
    (acf_curvature(profile).value().abs() / (4.0 * PI * PI)).sqrt()
}

/// Shape/rate of the gamma distribution matching mean and variance.
pub fn gamma_fit(profile: &InterfererProfile) -> GammaFit {
    let (mean, var) = rayleigh_moments(profile);
    GammaFit {
        shape_r: mean * mean / var,
        rate_theta: mean / var,
    }
}

/// Raw moments of the Rician aggregate for the profile's K-factor.
///
/// With `q = K / (K + 1)` each `|h_i|^2` has mean 1, variance `1 - q^2` and
/// third cumulant `(1 - q)^2 (2 + 4q) = 2 - 6q^2 + 4q^3`; the raw moments of
/// the weighted sum follow from adding cumulants.
pub fn rician_moments(profile: &InterfererProfile) -> RicianMoments {
    let k = profile.rician_k_linear;
    let q = k / (k + 1.0);
    let q2 = q * q;
    let (s1, s2, s3) = power_sums(profile);
    let m1 = s1;
    let m2 = s1 * s1 + s2 * (1.0 - q2);
    let m3 = s1 * s1 * s1 + 3.0 * s1 * s2 * (1.0 - q2) + s3 * (2.0 - 6.0 * q2 + 4.0 * q2 * q);
    RicianMoments { m1, m2, m3 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{fixture_profile, FixtureName};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn prof(powers: &[f64], f: f64, k: f64) -> InterfererProfile {
        InterfererProfile::with_common_doppler(powers.to_vec(), f, k).unwrap()
    }

    #[test]
    fn rayleigh_moment_sums() {
        assert_eq!(rayleigh_moments(&prof(&[1.0], 25.0, 0.0)), (1.0, 1.0));
        assert_eq!(rayleigh_moments(&prof(&[1.0, 2.0, 3.0], 25.0, 0.0)), (6.0, 14.0));
        assert_eq!(rayleigh_moments(&prof(&[1.0; 7], 25.0, 0.0)), (7.0, 7.0));
    }

    #[test]
    fn acf_at_zero_and_first_root() {
        let p = prof(&[0.3, 1.2], 25.0, 0.0);
        assert_eq!(acf(&p, 0.0).unwrap(), 1.0);
        // first zero of J0, frozen from mpmath.besseljzero(0, 1)
        let j01 = 2.404_825_557_695_772_8;
        let single = prof(&[1.0], 25.0, 0.0);
        assert!(acf(&single, j01 / (2.0 * PI * 25.0)).unwrap() < 1e-20);
        assert!(acf(&single, -1.0).is_err());
    }

    #[test]
    fn acf_equal_powers_match_single() {
        let one = prof(&[1.0], 25.0, 0.0);
        let two = prof(&[2.0, 2.0], 25.0, 0.0);
        for i in 0..50 {
            let tau = i as f64 * 0.003;
            assert_relative_eq!(acf(&one, tau).unwrap(), acf(&two, tau).unwrap(), max_relative = 1e-14);
        }
    }

    #[test]
    fn curvature_values() {
        let p = fixture_profile(FixtureName::NoDominant, 25.0, 0.0).unwrap();
        assert_relative_eq!(acf_curvature(&p).value(), -4.0 * PI * PI * 625.0, max_relative = 1e-13);
        assert!((acf_curvature(&p).value() + 24_674.01).abs() < 0.01);
        let mixed = InterfererProfile::new(vec![1.0, 1.0], vec![25.0, 50.0], 0.0).unwrap();
        assert_relative_eq!(acf_curvature(&mixed).value(), -4.0 * PI * PI * 1562.5, max_relative = 1e-13);
        let slow = prof(&[1.0], 1e-9, 0.0);
        assert!(acf_curvature(&slow).value().abs() < 1e-15);
    }

    #[test]
    fn curvature_matches_finite_difference() {
        for p in [
            fixture_profile(FixtureName::Dominant, 25.0, 0.0).unwrap(),
            InterfererProfile::new(vec![0.4, 1.0, 0.1], vec![10.0, 25.0, 80.0], 0.0).unwrap(),
        ] {
            let h = 1e-6 / p.max_doppler();
            // acf is even in tau: rho''(0) ~ 2 (rho(h) - 1) / h^2
            let fd = 2.0 * (acf(&p, h).unwrap() - 1.0) / (h * h);
            let want = acf_curvature(&p).value();
            assert!((fd - want).abs() < 1e-4 * want.abs(), "fd {fd} want {want}");
        }
    }

    #[test]
    fn gamma_fit_values() {
        let g = gamma_fit(&prof(&[1.0], 25.0, 0.0));
        assert_eq!((g.shape_r, g.rate_theta), (1.0, 1.0));
        let g = gamma_fit(&prof(&[1.0, 1.0], 25.0, 0.0));
        assert_eq!((g.shape_r, g.rate_theta), (2.0, 1.0));
        let g = gamma_fit(&prof(&[3.0, 1.0], 25.0, 0.0));
        assert_relative_eq!(g.shape_r, 1.6, max_relative = 1e-15);
        assert_relative_eq!(g.rate_theta, 0.4, max_relative = 1e-15);
    }

    #[test]
    fn gamma_fit_scale_behaviour() {
        let p = fixture_profile(FixtureName::Dominant, 25.0, 0.0).unwrap();
        let g = gamma_fit(&p);
        let g3 = gamma_fit(&p.scaled(3.0));
        assert_relative_eq!(g.shape_r, g3.shape_r, max_relative = 1e-14);
        assert_relative_eq!(g.rate_theta / 3.0, g3.rate_theta, max_relative = 1e-14);
    }

    #[test]
    fn rician_moments_reduce_to_rayleigh() {
        let p = prof(&[0.7, 0.2, 0.1], 25.0, 0.0);
        let (mean, var) = rayleigh_moments(&p);
        let m = rician_moments(&p);
        assert_eq!(m.m1, mean);
        assert_relative_eq!(m.m2, mean * mean + var, max_relative = 1e-15);
        // sum of weighted exponentials: third cumulant 2 sum I^3
        let s3: f64 = p.powers.iter().map(|x| x * x * x).sum();
        assert_relative_eq!(m.m3, mean.powi(3) + 3.0 * mean * var + 2.0 * s3, max_relative = 1e-14);
    }

    #[test]
    fn rician_moments_deterministic_limit() {
        let m = rician_moments(&prof(&[1.0], 25.0, 1e15));
        assert_relative_eq!(m.m1, 1.0);
        assert!((m.m2 - 1.0).abs() < 1e-12);
        assert!((m.m3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rician_moments_match_monte_carlo() {
        // Sampling oracle: |h|^2 with h = sqrt(q) + CN(0, 1 - q).
        let p = prof(&[2.0, 1.0], 25.0, 1.0);
        let q: f64 = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000_000usize;
        let sd = ((1.0 - q) / 2.0).sqrt();
        let mut sums = [0.0f64; 6];
        for _ in 0..n {
            let mut x = 0.0;
            for &pw in &p.powers {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let (a, b) = (q.sqrt() + sd * re, sd * im);
                x += pw * (a * a + b * b);
            }
            let mut xp = 1.0;
            for s in sums.iter_mut() {
                xp *= x;
                *s += xp;
            }
        }
        let raw: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        let m = rician_moments(&p);
        for (k, want) in [m.m1, m.m2, m.m3].into_iter().enumerate() {
            let est = raw[k];
            let var_est = raw[2 * k + 1] - est * est;
            let se = (var_est / n as f64).sqrt();
            assert!((est - want).abs() < 3.0 * se, "m{} est {est} want {want} se {se}", k + 1);
        }
    }
}
