use super::{AnalyticError, AnalyticModel, Fading};
use crate::scenario::InterfererProfile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const CSV_HEADER: &str = "kappa,threshold,lcr_norm_analytic,aed_norm_analytic,cdf_analytic,lcr_norm_emp,aed_norm_emp,cdf_emp,crossings,is_threshold";

/// One row of a normalized curve. Analytic and empirical halves are filled
/// independently; `None` means "not computed" (or AED undefined).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Threshold over the RMS level, `T / sqrt(E[I^2])`.
    pub kappa: f64,
    pub threshold: f64,
    pub lcr_norm_analytic: Option<f64>,
    pub aed_norm_analytic: Option<f64>,
    pub cdf_analytic: Option<f64>,
    pub lcr_norm_emp: Option<f64>,
    pub aed_norm_emp: Option<f64>,
    pub cdf_emp: Option<f64>,
    pub crossings: Option<u64>,
    /// Completed (uncensored) excursions above the threshold.
    pub sojourns: Option<u64>,
    pub is_threshold: bool,
}

/// LCR divided by the Doppler frequency and AED multiplied by it, against
/// `kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcrCurve {
    pub fading: Fading,
    pub doppler_hz: f64,
    pub mean_square: f64,
    pub points: Vec<CurvePoint>,
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_kappa_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, AnalyticError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite() && n >= 2) {
        return Err(AnalyticError::Domain(format!(
            "kappa grid needs 0 < lo < hi and n >= 2 (got {lo}, {hi}, {n})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// 60 points over `[0.05, 3] * kappa_threshold`.
pub fn default_kappa_grid(kappa_threshold: f64) -> Result<Vec<f64>, AnalyticError> {
    log_kappa_grid(0.05 * kappa_threshold, 3.0 * kappa_threshold, 60)
}

fn check_grid(grid: &[f64]) -> Result<(), AnalyticError> {
    if grid.is_empty() {
        return Err(AnalyticError::Domain("empty kappa grid".into()));
    }
    if grid.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(AnalyticError::Domain("kappa values must be finite and > 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalyticError::Domain("kappa grid must be strictly increasing".into()));
    }
    Ok(())
}

impl LcrCurve {
    /// Curve skeleton (kappa and absolute threshold only).
    pub fn skeleton(
        profile: &InterfererProfile,
        fading: Fading,
        mean_square: f64,
        kappa_grid: &[f64],
    ) -> Result<Self, AnalyticError> {
        check_grid(kappa_grid)?;
        let doppler_hz = profile
            .common_doppler()
            .ok_or_else(|| AnalyticError::MixedDoppler(profile.doppler_hz.clone()))?;
        let rms = mean_square.sqrt();
        let points = kappa_grid
            .iter()
            .map(|&kappa| CurvePoint {
                kappa,
                threshold: kappa * rms,
                ..CurvePoint::default()
            })
            .collect();
        Ok(Self {
            fading,
            doppler_hz,
            mean_square,
            points,
        })
    }

    /// `kappa` of an absolute interference threshold.
    pub fn kappa_of(&self, threshold: f64) -> f64 {
        threshold / self.mean_square.sqrt()
    }

    /// Flags the grid point closest (in log kappa) to `threshold`.
    pub fn mark_threshold(&mut self, threshold: f64) {
        let target = self.kappa_of(threshold).ln();
        for p in &mut self.points {
            p.is_threshold = false;
        }
        if let Some(p) = self.points.iter_mut().min_by(|a, b| {
            let da = (a.kappa.ln() - target).abs();
            let db = (b.kappa.ln() - target).abs();
            da.total_cmp(&db)
        }) {
            p.is_threshold = true;
        }
    }

    /// Kappa of the largest analytic LCR.
    pub fn analytic_peak(&self) -> Option<&CurvePoint> {
        self.points
            .iter()
            .filter(|p| p.lcr_norm_analytic.is_some())
            .max_by(|a, b| a.lcr_norm_analytic.unwrap().total_cmp(&b.lcr_norm_analytic.unwrap()))
    }

    /// Width in kappa between the first and last point with analytic
    /// normalized LCR above `level` (0 if none).
    pub fn support_width(&self, level: f64) -> f64 {
        let above: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.lcr_norm_analytic.map_or(false, |v| v > level))
            .map(|p| p.kappa)
            .collect();
        match (above.first(), above.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn to_csv(&self) -> String {
        fn cell<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut out = String::with_capacity(128 * (self.points.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                p.kappa,
                p.threshold,
                cell(p.lcr_norm_analytic),
                cell(p.aed_norm_analytic),
                cell(p.cdf_analytic),
                cell(p.lcr_norm_emp),
                cell(p.aed_norm_emp),
                cell(p.cdf_emp),
                cell(p.crossings),
                u8::from(p.is_threshold),
            );
        }
        out
    }
}

/// Analytic normalized LCR, AED and CDF over a kappa grid. Requires a
/// common Doppler frequency.
pub fn lcr_curve(
    profile: &InterfererProfile,
    fading: Fading,
    kappa_grid: &[f64],
) -> Result<LcrCurve, AnalyticError> {
    let model = AnalyticModel::new(profile, fading)?;
    let mut curve = LcrCurve::skeleton(profile, fading, model.mean_square, kappa_grid)?;
    let f = curve.doppler_hz;
    curve
        .points
        .par_iter_mut()
        .try_for_each(|p| -> Result<(), AnalyticError> {
            let lcr = model.lcr(p.threshold)?;
            let sf = model.sf(p.threshold)?;
            p.lcr_norm_analytic = Some(lcr / f);
            p.cdf_analytic = Some(model.cdf(p.threshold)?);
            p.aed_norm_analytic = (lcr > 0.0).then(|| sf / lcr * f);
            Ok(())
        })?;
    Ok(curve)
}
