//! Monte Carlo engine: correlated Rayleigh/Rician fading, aggregate
//! interference traces and their empirical crossing statistics.
//!
//! Fading is a sum of sinusoids per quadrature with stratified arrival
//! angles `(2 pi n - pi + theta) / (4M)` and independent random phases; its
//! ensemble ACF is `J0(2 pi f_D tau)`. The LOS component is a fixed phasor.
//!
//! Every random draw comes from a ChaCha stream selected by `(seed,
//! stream_id)` and samples are produced in fixed-size chunks anchored at
//! absolute sample indices, so results do not depend on the thread count.

mod stats;

pub use stats::{
    conditional_variance_check, count_crossings, empirical_curve, fill_empirical, ks_distance,
    sample_acf, static_aggregate_samples, CrossingStats, VarianceLaw,
};

use crate::analytic::AnalyticError;
use crate::scenario::{InterfererProfile, ScenarioError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{self, Write};
use thiserror::Error;

/// Samples generated per anchored chunk.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McSimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Profile(#[from] ScenarioError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FadingSimConfig {
    pub duration_s: f64,
    /// Samples per Doppler period.
    pub oversample: usize,
    /// Sinusoids per quadrature.
    pub oscillators: usize,
    pub seed: u64,
}

impl Default for FadingSimConfig {
    fn default() -> Self {
        Self {
            duration_s: 300.0,
            oversample: 64,
            oscillators: 32,
            seed: 1,
        }
    }
}

impl FadingSimConfig {
    pub fn validate(&self) -> Result<(), McSimError> {
        let bad = |m: String| Err(McSimError::InvalidConfig(m));
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration {} s must be > 0", self.duration_s));
        }
        if self.oversample < 8 {
            return bad(format!("oversample {} must be >= 8", self.oversample));
        }
        if self.oscillators < 8 {
            return bad(format!("oscillators {} must be >= 8", self.oscillators));
        }
        Ok(())
    }

    pub fn sample_rate(&self, doppler_hz: f64) -> f64 {
        self.oversample as f64 * doppler_hz
    }

    pub fn sample_count(&self, doppler_hz: f64) -> usize {
        (self.duration_s * self.sample_rate(doppler_hz)).ceil() as usize
    }

    fn check_for(&self, doppler_hz: f64) -> Result<usize, McSimError> {
        self.validate()?;
        if !(doppler_hz.is_finite() && doppler_hz > 0.0) {
            return Err(McSimError::InvalidConfig(format!("Doppler {doppler_hz} Hz must be > 0")));
        }
        let n = self.sample_count(doppler_hz);
        if n < 2 {
            return Err(McSimError::InsufficientSamples { needed: 2, got: n });
        }
        Ok(n)
    }
}

/// Random parameters of one fading realization, expressed per sample.
#[derive(Debug, Clone)]
struct FadingProcess {
    /// Radians per sample and initial phase, in-phase branch.
    in_phase: Vec<(f64, f64)>,
    quadrature: Vec<(f64, f64)>,
    scatter_amp: f64,
    los: Complex64,
}

impl FadingProcess {
    fn new(k_linear: f64, doppler_hz: f64, sample_rate: f64, oscillators: usize, seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        let m = oscillators as f64;
        let theta = rng.gen_range(-PI..PI);
        let w = 2.0 * PI * doppler_hz / sample_rate;
        let angles: Vec<f64> = (1..=oscillators)
            .map(|n| (2.0 * PI * n as f64 - PI + theta) / (4.0 * m))
            .collect();
        let in_phase = angles
            .iter()
            .map(|a| (w * a.cos(), rng.gen_range(-PI..PI)))
            .collect();
        let quadrature = angles
            .iter()
            .map(|a| (w * a.sin(), rng.gen_range(-PI..PI)))
            .collect();
        let los_phase = rng.gen_range(-PI..PI);
        let (scatter_amp, los) = if k_linear.is_infinite() {
            (0.0, Complex64::from_polar(1.0, los_phase))
        } else {
            (
                (1.0 / ((k_linear + 1.0) * m)).sqrt(),
                Complex64::from_polar((k_linear / (k_linear + 1.0)).sqrt(), los_phase),
            )
        };
        Self {
            in_phase,
            quadrature,
            scatter_amp,
            los,
        }
    }

    /// Samples `start .. start + out.len()`.
    fn fill(&self, start: usize, out: &mut [Complex64], re: &mut [f64], im: &mut [f64]) {
        let len = out.len();
        re[..len].fill(0.0);
        im[..len].fill(0.0);
        let k0 = start as f64;
        for (bank, acc) in [(&self.in_phase, &mut re[..len]), (&self.quadrature, &mut im[..len])] {
            for &(w, phi) in bank.iter() {
                let mut z = Complex64::from_polar(1.0, w * k0 + phi);
                let rot = Complex64::from_polar(1.0, w);
                for a in acc.iter_mut() {
                    *a += z.re;
                    z *= rot;
                }
            }
        }
        for ((h, &x), &y) in out.iter_mut().zip(re.iter()).zip(im.iter()) {
            *h = self.los + self.scatter_amp * Complex64::new(x, y);
        }
    }
}

/// Complex fading gains `h(t)` with `E|h|^2 = 1`, sampled at
/// `oversample * doppler_hz`.
pub fn gen_fading(
    k_linear: f64,
    doppler_hz: f64,
    config: &FadingSimConfig,
    stream_id: u64,
) -> Result<Vec<Complex64>, McSimError> {
    let n = config.check_for(doppler_hz)?;
    if !(k_linear >= 0.0) {
        return Err(McSimError::InvalidConfig(format!("K = {k_linear} must be >= 0")));
    }
    let rate = config.sample_rate(doppler_hz);
    let proc = FadingProcess::new(k_linear, doppler_hz, rate, config.oscillators, config.seed, stream_id);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut re = vec![0.0; CHUNK];
        let mut im = vec![0.0; CHUNK];
        proc.fill(c * CHUNK, chunk, &mut re, &mut im);
    });
    Ok(out)
}

/// Sampled aggregate interference power.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceTrace {
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
}

impl InterferenceTrace {
    pub fn new(sample_rate_hz: f64, samples: Vec<f64>) -> Result<Self, McSimError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(McSimError::InvalidConfig(format!("sample rate {sample_rate_hz}")));
        }
        if samples.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(McSimError::InvalidConfig("samples must be finite and >= 0".into()));
        }
        Ok(Self {
            sample_rate_hz,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / self.samples.len() as f64
    }

    /// Debug dump as `time_s,power` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time_s,power")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", i as f64 / self.sample_rate_hz, s)?;
        }
        Ok(())
    }
}

/// `sum_i I_i |h_i(t)|^2` with interferer `i` on stream `i`, sampled at
/// `oversample` times the largest Doppler frequency.
pub fn aggregate_trace(
    profile: &InterfererProfile,
    config: &FadingSimConfig,
) -> Result<InterferenceTrace, McSimError> {
    profile.validate()?;
    let f_max = profile.max_doppler();
    let n = config.check_for(f_max)?;
    let rate = config.sample_rate(f_max);
    let procs: Vec<FadingProcess> = profile
        .doppler_hz
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            FadingProcess::new(profile.rician_k_linear, f, rate, config.oscillators, config.seed, i as u64)
        })
        .collect();
    let mut samples = vec![0.0; n];
    samples.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut h = vec![Complex64::new(0.0, 0.0); chunk.len()];
        let mut re = vec![0.0; CHUNK];
        let mut im = vec![0.0; CHUNK];
        for (proc, &p) in procs.iter().zip(&profile.powers) {
            proc.fill(c * CHUNK, &mut h, &mut re, &mut im);
            for (s, g) in chunk.iter_mut().zip(&h) {
                *s += p * g.norm_sqr();
            }
        }
    });
    InterferenceTrace::new(rate, samples)
}
