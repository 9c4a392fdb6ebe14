//! Interferer profiles: random CR deployments, decentralized admission, and
//! the two reference fixtures (one dominant interferer vs. many small ones).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario parameter: {0}")]
    InvalidParams(String),
    #[error("invalid interferer profile: {0}")]
    InvalidProfile(String),
    #[error("unknown fixture {0:?} (expected \"dominant\" or \"no_dominant\")")]
    UnknownFixture(String),
    #[error("profile JSON: {0}")]
    Json(String),
}

/// Deployment, propagation and admission parameters of a single-PU cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    /// PU coverage radius `R` in metres.
    pub region_radius_m: f64,
    /// Exclusion radius `R_c` around the PU receiver in metres.
    pub cr_radius_m: f64,
    pub density_per_km2: f64,
    pub activity_factor: f64,
    pub shadow_sigma_db: f64,
    pub pathloss_exponent: f64,
    pub snr_penalty_db: f64,
    /// Linear noise power; interference powers are expressed relative to it.
    pub noise_power: f64,
    pub seed: u64,
    /// Overrides the default power normalization `R_c^gamma`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_norm: Option<f64>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            region_radius_m: 1000.0,
            cr_radius_m: 100.0,
            density_per_km2: 1000.0,
            activity_factor: 0.1,
            shadow_sigma_db: 8.0,
            pathloss_exponent: 3.5,
            snr_penalty_db: 2.0,
            noise_power: 1.0,
            seed: 1,
            power_norm: None,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: &str| Err(ScenarioError::InvalidParams(msg.to_string()));
        let all_finite = [
            self.region_radius_m,
            self.cr_radius_m,
            self.density_per_km2,
            self.activity_factor,
            self.shadow_sigma_db,
            self.pathloss_exponent,
            self.snr_penalty_db,
            self.noise_power,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return bad("all parameters must be finite");
        }
        if !(self.cr_radius_m > 0.0) {
            return bad("cr_radius_m must be > 0");
        }
        if !(self.region_radius_m > self.cr_radius_m) {
            return bad("region_radius_m must exceed cr_radius_m");
        }
        if self.density_per_km2 < 0.0 {
            return bad("density_per_km2 must be >= 0");
        }
        if !(self.activity_factor > 0.0 && self.activity_factor <= 1.0) {
            return bad("activity_factor must lie in (0, 1]");
        }
        if !(self.pathloss_exponent > 2.0) {
            return bad("pathloss_exponent must be > 2");
        }
        if self.shadow_sigma_db < 0.0 {
            return bad("shadow_sigma_db must be >= 0");
        }
        if self.snr_penalty_db < 0.0 {
            return bad("snr_penalty_db must be >= 0");
        }
        if !(self.noise_power > 0.0) {
            return bad("noise_power must be > 0");
        }
        if let Some(p) = self.power_norm {
            if !(p.is_finite() && p > 0.0) {
                return bad("power_norm must be finite and > 0");
            }
        }
        Ok(())
    }

    /// Power scale making a CR at distance `R_c` with no shadowing deliver
    /// unit (noise-normalized) power.
    pub fn power_norm(&self) -> f64 {
        self.power_norm
            .unwrap_or_else(|| self.cr_radius_m.powf(self.pathloss_exponent))
    }

    /// Expected number of active CRs in the disc of radius `R`.
    pub fn mean_candidate_count(&self) -> f64 {
        let r_km = self.region_radius_m / 1000.0;
        PI * r_km * r_km * self.density_per_km2 * self.activity_factor
    }

    pub fn interference_threshold(&self) -> Result<f64, ScenarioError> {
        snr_penalty_threshold(self.snr_penalty_db, self.noise_power)
    }
}

/// A CR that is active and asking for admission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateCR {
    pub distance_m: f64,
    pub shadowing_db: f64,
    /// Long-term interference power at the PU, noise-normalized.
    pub long_term_power: f64,
}

/// Long-term interference powers, Doppler frequencies and Rician K-factor of
/// an admitted interferer set. `rician_k_linear = 0` is Rayleigh fading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfererProfile {
    pub powers: Vec<f64>,
    pub doppler_hz: Vec<f64>,
    pub rician_k_linear: f64,
}

impl InterfererProfile {
    pub fn new(
        powers: Vec<f64>,
        doppler_hz: Vec<f64>,
        rician_k_linear: f64,
    ) -> Result<Self, ScenarioError> {
        let p = Self {
            powers,
            doppler_hz,
            rician_k_linear,
        };
        p.validate()?;
        Ok(p)
    }

    /// Every interferer shares the same Doppler frequency.
    pub fn with_common_doppler(
        powers: Vec<f64>,
        doppler_hz: f64,
        rician_k_linear: f64,
    ) -> Result<Self, ScenarioError> {
        let n = powers.len();
        Self::new(powers, vec![doppler_hz; n], rician_k_linear)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: String| Err(ScenarioError::InvalidProfile(msg));
        if self.powers.is_empty() {
            return bad("powers must be nonempty".into());
        }
        if self.powers.len() != self.doppler_hz.len() {
            return bad(format!(
                "{} powers but {} Doppler values",
                self.powers.len(),
                self.doppler_hz.len()
            ));
        }
        if let Some(p) = self.powers.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return bad(format!("power {p} is not finite and positive"));
        }
        if let Some(f) = self.doppler_hz.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return bad(format!("Doppler {f} Hz is not finite and positive"));
        }
        if !(self.rician_k_linear.is_finite() && self.rician_k_linear >= 0.0) {
            return bad(format!("K = {} must be finite and >= 0", self.rician_k_linear));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn largest_share(&self) -> f64 {
        let max = self.powers.iter().cloned().fold(0.0, f64::max);
        max / self.total_power()
    }

    /// The shared Doppler frequency, or `None` if interferers differ.
    pub fn common_doppler(&self) -> Option<f64> {
        let first = *self.doppler_hz.first()?;
        self.doppler_hz
            .iter()
            .all(|f| *f == first)
            .then_some(first)
    }

    pub fn max_doppler(&self) -> f64 {
        self.doppler_hz.iter().cloned().fold(0.0, f64::max)
    }

    pub fn with_k(&self, rician_k_linear: f64) -> Self {
        Self {
            rician_k_linear,
            ..self.clone()
        }
    }

    pub fn with_doppler(&self, doppler_hz: f64) -> Self {
        Self {
            doppler_hz: vec![doppler_hz; self.powers.len()],
            ..self.clone()
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            powers: self.powers.iter().map(|p| p * factor).collect(),
            ..self.clone()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let p: Self = serde_json::from_str(text).map_err(|e| ScenarioError::Json(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

/// Interference budget allowed by an SNR penalty: a loss of `penalty_db`
/// means `S / (N + I) = S / N - penalty_db`, so `I = N (10^(penalty/10) - 1)`.
pub fn snr_penalty_threshold(penalty_db: f64, noise_power: f64) -> Result<f64, ScenarioError> {
    if !(penalty_db.is_finite() && penalty_db >= 0.0) {
        return Err(ScenarioError::InvalidParams(format!(
            "penalty_db = {penalty_db} must be finite and >= 0"
        )));
    }
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(ScenarioError::InvalidParams(format!(
            "noise_power = {noise_power} must be finite and > 0"
        )));
    }
    Ok(noise_power * (10f64.powf(penalty_db / 10.0) - 1.0))
}

/// Poisson number of active CRs placed uniformly in the annulus
/// `R_c <= d <= R` around the PU, in arrival (generation) order.
pub fn generate_candidates(params: &ScenarioParams) -> Result<Vec<CandidateCR>, ScenarioError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mean = params.mean_candidate_count();
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean)
            .map_err(|e| ScenarioError::InvalidParams(format!("Poisson mean {mean}: {e}")))?;
        poisson.sample(&mut rng) as usize
    } else {
        0
    };
    let shadow = Normal::new(0.0, params.shadow_sigma_db)
        .map_err(|e| ScenarioError::InvalidParams(e.to_string()))?;
    let r2_min = params.cr_radius_m * params.cr_radius_m;
    let r2_max = params.region_radius_m * params.region_radius_m;
    let norm = params.power_norm();

    let candidates = (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            let distance_m = (r2_min + u * (r2_max - r2_min)).sqrt();
            let shadowing_db = shadow.sample(&mut rng);
            let long_term_power = distance_m.powf(-params.pathloss_exponent)
                * 10f64.powf(shadowing_db / 10.0)
                * norm;
            CandidateCR {
                distance_m,
                shadowing_db,
                long_term_power,
            }
        })
        .collect();
    Ok(candidates)
}

/// Greedy arrival-order admission: candidate `i` joins if the accepted sum
/// plus its power stays strictly below `threshold`; rejected candidates are
/// skipped and the scan continues.
pub fn decentralized_select(candidates: &[CandidateCR], threshold: f64) -> Vec<usize> {
    let mut accepted = Vec::new();
    let mut total = 0.0;
    for (i, c) in candidates.iter().enumerate() {
        if total + c.long_term_power < threshold {
            total += c.long_term_power;
            accepted.push(i);
        }
    }
    accepted
}

/// Generates a deployment and returns the powers of the admitted CRs.
pub fn admitted_powers(params: &ScenarioParams) -> Result<Vec<f64>, ScenarioError> {
    let candidates = generate_candidates(params)?;
    let threshold = params.interference_threshold()?;
    Ok(decentralized_select(&candidates, threshold)
        .into_iter()
        .map(|i| candidates[i].long_term_power)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureName {
    /// 3 interferers, the largest carrying 95% of the power.
    Dominant,
    /// 18 interferers, the largest carrying 16% of the power.
    NoDominant,
}

impl FromStr for FixtureName {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dominant" => Ok(Self::Dominant),
            "no_dominant" | "no-dominant" => Ok(Self::NoDominant),
            other => Err(ScenarioError::UnknownFixture(other.to_string())),
        }
    }
}

impl fmt::Display for FixtureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dominant => "dominant",
            Self::NoDominant => "no_dominant",
        })
    }
}

impl FixtureName {
    pub fn shares(self) -> Vec<f64> {
        match self {
            Self::Dominant => vec![0.95, 0.03, 0.02],
            Self::NoDominant => {
                let mut s = vec![0.16];
                s.extend(std::iter::repeat(0.84 / 17.0).take(17));
                s
            }
        }
    }
}

/// Reference profile whose total power equals the 2 dB interference budget.
pub fn fixture_profile(
    name: FixtureName,
    doppler_hz: f64,
    rician_k_linear: f64,
) -> Result<InterfererProfile, ScenarioError> {
    let total = snr_penalty_threshold(2.0, 1.0)?;
    let powers = name.shares().into_iter().map(|s| s * total).collect();
    InterfererProfile::with_common_doppler(powers, doppler_hz, rician_k_linear)
}
