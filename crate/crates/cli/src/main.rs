mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use crlcr::analytic::{AnalyticError, Fading};
use crlcr::mcsim::McSimError;
use crlcr::scenario::{FixtureName, ScenarioError, ScenarioParams};
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("fit failure: {0}")]
    Fit(AnalyticError),
    #[error("no interferers admitted")]
    EmptyScenario,
    #[error("comparison failed: max relative LCR deviation {0:.4}")]
    CompareFailed(f64),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Fit(_) => 3,
            Self::EmptyScenario => 4,
            Self::CompareFailed(_) => 5,
            Self::Io(_) => 1,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::InfeasibleFit { .. } | AnalyticError::FitFailed { .. } => Self::Fit(e),
            AnalyticError::Profile(p) => p.into(),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<McSimError> for CliError {
    fn from(e: McSimError) -> Self {
        match e {
            McSimError::Analytic(a) => a.into(),
            other => Self::Config(other.to_string()),
        }
    }
}

/// Level crossing rate and exceedance duration of aggregate CR interference.
#[derive(Debug, Parser)]
#[command(name = "crlcr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a deployment, run admission, write the admitted profile as JSON.
    Scenario(Opts),
    /// Write the analytic normalized LCR/AED/CDF curve as CSV.
    Analyze(Opts),
    /// Write the simulated normalized LCR/AED/CDF curve as CSV.
    Simulate(Opts),
    /// Analyze and simulate, write the merged CSV and a PASS/FAIL verdict.
    Compare(Opts),
}

#[derive(Debug, Args)]
struct Opts {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in profile: dominant or no_dominant.
    #[arg(long)]
    fixture: Option<FixtureName>,
    /// Interferer profile JSON.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// rayleigh or rician.
    #[arg(long)]
    fading: Option<Fading>,
    /// Rician K-factor in dB (implies rician unless --fading is given).
    #[arg(long, allow_hyphen_values = true)]
    k_db: Option<f64>,
    #[arg(long)]
    doppler: Option<f64>,
    /// Doppler frequency of the simulation in `compare`.
    #[arg(long)]
    sim_doppler: Option<f64>,
    /// Simulated duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    oversample: Option<usize>,
    #[arg(long)]
    oscillators: Option<usize>,
    #[arg(long)]
    kappa_min: Option<f64>,
    #[arg(long)]
    kappa_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for simulation (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
}

impl Opts {
    /// `default_scenario`: fall back to the default deployment when no
    /// interferer source is configured.
    fn run_config(&self, default_scenario: bool) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(f) = self.fixture {
            c.fixture = Some(f);
            c.profile_path = None;
            c.scenario = None;
        }
        if let Some(p) = &self.profile {
            c.profile_path = Some(p.clone());
            c.fixture = None;
            c.scenario = None;
        }
        if self.fading.is_some() {
            c.fading = self.fading;
        }
        if self.k_db.is_some() {
            c.k_db = self.k_db;
        }
        if self.doppler.is_some() {
            c.doppler_hz = self.doppler;
        }
        if self.sim_doppler.is_some() {
            c.sim_doppler_hz = self.sim_doppler;
        }
        if self.kappa_min.is_some() {
            c.kappa_min = self.kappa_min;
        }
        if self.kappa_max.is_some() {
            c.kappa_max = self.kappa_max;
        }
        if self.grid_points.is_some() {
            c.grid_points = self.grid_points;
        }
        if self.out.is_some() {
            c.output_path = self.out.clone();
        }
        let sim_flags = self.duration.is_some()
            || self.seed.is_some()
            || self.oversample.is_some()
            || self.oscillators.is_some();
        if sim_flags {
            let mut sim = c.sim.unwrap_or_default();
            if let Some(d) = self.duration {
                sim.duration_s = d;
            }
            if let Some(s) = self.seed {
                sim.seed = s;
            }
            if let Some(o) = self.oversample {
                sim.oversample = o;
            }
            if let Some(o) = self.oscillators {
                sim.oscillators = o;
            }
            c.sim = Some(sim);
        }
        if default_scenario && c.scenario.is_none() && c.profile_path.is_none() && c.fixture.is_none() {
            c.scenario = Some(ScenarioParams::default());
        }
        if let (Some(seed), Some(s)) = (self.seed, c.scenario.as_mut()) {
            s.seed = seed;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (opts, cmd): (&Opts, fn(&RunConfig) -> Result<(), CliError>) = match &cli.command {
        Command::Scenario(o) => (o, commands::cmd_scenario),
        Command::Analyze(o) => (o, commands::cmd_analyze),
        Command::Simulate(o) => (o, commands::cmd_simulate),
        Command::Compare(o) => (o, commands::cmd_compare),
    };
    if let Some(n) = opts.workers {
        if n == 0 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let config = opts.run_config(matches!(cli.command, Command::Scenario(_)))?;
    cmd(&config)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
