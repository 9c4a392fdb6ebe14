use crate::config::{mean_square, RunConfig};
use crate::CliError;
use crlcr::analytic::{lcr_curve, LcrCurve};
use crlcr::mcsim::{aggregate_trace, fill_empirical};
use std::fs;
use std::io::{self, Write};

/// Compare passes when the worst relative LCR deviation is at most this.
pub const COMPARE_TOLERANCE: f64 = 0.15;
/// Points with analytic LCR/f_D above this enter the comparison.
pub const COMPARE_MIN_LCR_NORM: f64 = 0.1;

fn emit(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.output_path {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_scenario(config: &RunConfig) -> Result<(), CliError> {
    let profile = config.profile()?;
    emit(config, &(profile.to_json() + "\n"))?;
    eprintln!(
        "N={} total_power={:.6} largest_share={:.4}",
        profile.len(),
        profile.total_power(),
        profile.largest_share()
    );
    Ok(())
}

fn analytic(config: &RunConfig) -> Result<LcrCurve, CliError> {
    let profile = config.profile()?;
    let grid = config.kappa_grid(&profile)?;
    let mut curve = lcr_curve(&profile, config.fading(), &grid)?;
    curve.mark_threshold(config.threshold_power()?);
    Ok(curve)
}

pub fn cmd_analyze(config: &RunConfig) -> Result<(), CliError> {
    emit(config, &analytic(config)?.to_csv())
}

pub fn cmd_simulate(config: &RunConfig) -> Result<(), CliError> {
    let profile = config.profile()?;
    let fading = config.fading();
    let grid = config.kappa_grid(&profile)?;
    let mut curve = LcrCurve::skeleton(&profile, fading, mean_square(&profile, fading), &grid)?;
    curve.mark_threshold(config.threshold_power()?);
    let trace = aggregate_trace(&profile, &config.sim_config()?)?;
    fill_empirical(&mut curve, &trace);
    emit(config, &curve.to_csv())
}

/// Worst relative deviation of the empirical from the analytic LCR over
/// points with analytic LCR/f_D above `COMPARE_MIN_LCR_NORM`, and the
/// number of such points.
pub fn max_lcr_deviation(curve: &LcrCurve) -> (f64, usize) {
    curve
        .points
        .iter()
        .filter_map(|p| match (p.lcr_norm_analytic, p.lcr_norm_emp) {
            (Some(a), Some(e)) if a > COMPARE_MIN_LCR_NORM => Some((e - a).abs() / a),
            _ => None,
        })
        .fold((0.0, 0), |(w, n), d| (w.max(d), n + 1))
}

pub fn cmd_compare(config: &RunConfig) -> Result<(), CliError> {
    let mut curve = analytic(config)?;
    let sim_profile = config.profile()?.with_doppler(config.sim_doppler()?);
    let trace = aggregate_trace(&sim_profile, &config.sim_config()?)?;
    fill_empirical(&mut curve, &trace);
    emit(config, &curve.to_csv())?;
    let (dev, used) = max_lcr_deviation(&curve);
    let pass = used > 0 && dev <= COMPARE_TOLERANCE;
    eprintln!(
        "verdict: {} max_rel_lcr_dev={dev:.4} points={used} (tolerance {COMPARE_TOLERANCE}, analytic LCR/f_D > {COMPARE_MIN_LCR_NORM})",
        if pass { "PASS" } else { "FAIL" }
    );
    if pass {
        Ok(())
    } else {
        Err(CliError::CompareFailed(dev))
    }
}
