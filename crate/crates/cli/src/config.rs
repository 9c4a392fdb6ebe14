use crate::CliError;
use crlcr::analytic::{log_kappa_grid, rician_moments, Fading};
use crlcr::mcsim::FadingSimConfig;
use crlcr::scenario::{
    admitted_powers, fixture_profile, FixtureName, InterfererProfile, ScenarioParams,
};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const DEFAULT_DOPPLER_HZ: f64 = 25.0;
pub const DEFAULT_GRID_POINTS: usize = 60;
/// Default grid span as multiples of the threshold kappa.
pub const DEFAULT_KAPPA_SPAN: (f64, f64) = (0.05, 3.0);

/// Everything a command needs; loaded from `--config` and overridden by flags.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<ScenarioParams>,
    pub profile_path: Option<PathBuf>,
    pub fixture: Option<FixtureName>,
    pub fading: Option<Fading>,
    pub k_db: Option<f64>,
    pub doppler_hz: Option<f64>,
    pub kappa_min: Option<f64>,
    pub kappa_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub sim: Option<FadingSimConfig>,
    /// Doppler used by the simulation in `compare` (defaults to `doppler_hz`).
    pub sim_doppler_hz: Option<f64>,
    pub output_path: Option<PathBuf>,
}

/// Where the interferer set comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Scenario(ScenarioParams),
    Profile(PathBuf),
    Fixture(FixtureName),
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn source(&self) -> Result<Source, CliError> {
        let given = [
            self.scenario.is_some(),
            self.profile_path.is_some(),
            self.fixture.is_some(),
        ];
        match given.iter().filter(|g| **g).count() {
            0 => Err(CliError::Config(
                "one of scenario, profile_path or fixture is required".into(),
            )),
            1 => Ok(if let Some(s) = &self.scenario {
                Source::Scenario(s.clone())
            } else if let Some(p) = &self.profile_path {
                Source::Profile(p.clone())
            } else {
                Source::Fixture(self.fixture.unwrap())
            }),
            _ => Err(CliError::Config(
                "scenario, profile_path and fixture are mutually exclusive".into(),
            )),
        }
    }

    /// Explicit fading, otherwise Rician exactly when a K-factor is given.
    pub fn fading(&self) -> Fading {
        self.fading.unwrap_or(if self.k_db.is_some() {
            Fading::Rician
        } else {
            Fading::Rayleigh
        })
    }

    pub fn doppler(&self) -> Result<f64, CliError> {
        positive("doppler_hz", self.doppler_hz.unwrap_or(DEFAULT_DOPPLER_HZ))
    }

    pub fn sim_doppler(&self) -> Result<f64, CliError> {
        match self.sim_doppler_hz {
            Some(f) => positive("sim_doppler_hz", f),
            None => self.doppler(),
        }
    }

    pub fn k_linear(&self) -> Result<Option<f64>, CliError> {
        match self.k_db {
            None => Ok(None),
            Some(db) if db.is_finite() => Ok(Some(10f64.powf(db / 10.0))),
            Some(db) => Err(CliError::Config(format!("k_db = {db} must be finite"))),
        }
    }

    /// Interference budget used for the threshold marker.
    pub fn threshold_power(&self) -> Result<f64, CliError> {
        let params = self.scenario.clone().unwrap_or_default();
        Ok(params.interference_threshold()?)
    }

    pub fn sim_config(&self) -> Result<FadingSimConfig, CliError> {
        let sim = self.sim.unwrap_or_default();
        sim.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(sim)
    }

    /// Profile for the analytic side: source powers, configured Doppler and,
    /// for Rician fading, the configured K (or the profile's own).
    pub fn profile(&self) -> Result<InterfererProfile, CliError> {
        let doppler = self.doppler()?;
        let base = match self.source()? {
            Source::Fixture(name) => fixture_profile(name, doppler, 0.0)?,
            Source::Scenario(params) => {
                let powers = admitted_powers(&params)?;
                if powers.is_empty() {
                    return Err(CliError::EmptyScenario);
                }
                InterfererProfile::with_common_doppler(powers, doppler, 0.0)?
            }
            Source::Profile(path) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let p = InterfererProfile::from_json(&text)?;
                if self.doppler_hz.is_some() {
                    p.with_doppler(doppler)
                } else {
                    p
                }
            }
        };
        let k = match (self.fading(), self.k_linear()?) {
            (Fading::Rayleigh, _) => 0.0,
            (Fading::Rician, Some(k)) => k,
            (Fading::Rician, None) => base.rician_k_linear,
        };
        Ok(base.with_k(k))
    }

    /// Kappa grid: explicit bounds, or the default span around the threshold.
    pub fn kappa_grid(&self, profile: &InterfererProfile) -> Result<Vec<f64>, CliError> {
        let n = self.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        let kth = self.threshold_power()? / mean_square(profile, self.fading()).sqrt();
        let lo = self.kappa_min.unwrap_or(DEFAULT_KAPPA_SPAN.0 * kth);
        let hi = self.kappa_max.unwrap_or(DEFAULT_KAPPA_SPAN.1 * kth);
        if !(lo < hi) {
            return Err(CliError::Config(format!("kappa_min {lo} must be < kappa_max {hi}")));
        }
        if n < 2 {
            return Err(CliError::Config(format!("grid_points {n} must be >= 2")));
        }
        log_kappa_grid(lo, hi, n).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// `E[I^2]` used for the kappa normalization.
pub fn mean_square(profile: &InterfererProfile, fading: Fading) -> f64 {
    match fading {
        Fading::Rayleigh => rician_moments(&profile.with_k(0.0)).m2,
        Fading::Rician => rician_moments(profile).m2,
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} = {v} must be finite and > 0")))
    }
}
