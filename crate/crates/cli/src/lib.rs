//! Command-line front end: configures campaigns, runs them and writes
//! schedules, statistics, bound reports and plot-ready CSV.

pub mod campaign;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod repro;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tsd_core::models::{Boundary, HubbardParams};

use crate::commands::Report;
use crate::config::{CampaignConfig, GeneratorSource, Overrides};
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "tsd", version, about = "Trotter-Suzuki product formulas under Gaussian machine error")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON campaign configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed; overrides the configuration.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Trial count; overrides the configuration.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<u64>,

    /// Output directory; overrides the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads. Changes speed only, never output.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the exponential schedule as JSON.
    Schedule,
    /// Tabulate the noiseless decomposition error over the sweep axes.
    IdealError,
    /// Monte Carlo machine-error campaign with bounds and verdicts.
    NoiseSim,
    /// Evaluate the closed-form stability bounds.
    Bounds(BoundsArgs),
    /// Evaluate the Hubbard cost and precision formulas.
    Hubbard(HubbardArgs),
    /// Run the bundled reproduction campaigns.
    Repro,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Number of factors N.
    #[arg(long)]
    pub n: u64,
    /// Matrix dimension.
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub epsilon_m: f64,
    #[arg(long)]
    pub epsilon_t: f64,
}

#[derive(Debug, Args)]
pub struct HubbardArgs {
    #[arg(long = "t-h")]
    pub t_h: Option<f64>,
    #[arg(long = "u-h")]
    pub u_h: Option<f64>,
    #[arg(long)]
    pub eta: Option<u64>,
    /// Magnitude of the simulation time.
    #[arg(long)]
    pub sim_time: Option<f64>,
    #[arg(long)]
    pub epsilon_t: Option<f64>,
    #[arg(long, value_parser = commands::parse_boundary)]
    pub boundary: Option<Boundary>,
    /// Term count m in the cost formulas (default η²).
    #[arg(long)]
    pub cost_terms: Option<u64>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, trials: self.trials, out: self.out.clone() }
    }

    fn load_config(&self) -> CliResult<CampaignConfig> {
        let mut cfg = match &self.config {
            Some(path) => CampaignConfig::load(path)?,
            None => CampaignConfig::default(),
        };
        cfg.apply(&self.overrides());
        Ok(cfg)
    }

    fn out_dir(&self, cfg: Option<&CampaignConfig>) -> PathBuf {
        match (cfg, &self.out) {
            (_, Some(out)) => out.clone(),
            (Some(cfg), None) => cfg.out_dir(),
            (None, None) => PathBuf::from(config::DEFAULT_OUT),
        }
    }

    /// Runs the command and commits its outputs; returns the stdout text.
    pub fn run(&self) -> CliResult<String> {
        let (report, dir) = match &self.command {
            Command::Schedule | Command::IdealError | Command::NoiseSim => {
                let cfg = self.load_config()?;
                let report = match self.command {
                    Command::Schedule => commands::schedule(&cfg)?,
                    Command::IdealError => commands::ideal_error_sweep(&cfg)?,
                    _ => commands::noise_sim(&cfg)?,
                };
                (report, self.out_dir(Some(&cfg)))
            }
            Command::Bounds(a) => (commands::bounds(a.n, a.dim, a.epsilon_m, a.epsilon_t)?, self.out_dir(None)),
            Command::Hubbard(a) => {
                let cfg = match &self.config {
                    Some(_) => Some(self.load_config()?),
                    None => None,
                };
                let (params, cost_terms) = hubbard_params(cfg.as_ref(), a)?;
                (commands::hubbard(&params, cost_terms)?, self.out_dir(cfg.as_ref()))
            }
            Command::Repro => {
                if self.config.is_some() {
                    return Err(CliError::invalid("repro takes no configuration file"));
                }
                let settings = repro::ReproSettings {
                    seed: self.seed.unwrap_or(repro::DEFAULT_SEED),
                    trials: self.trials,
                };
                let report = repro::run_all(&settings)?;
                let outputs = report.outputs()?;
                let n = outputs.paths().count();
                (Report { outputs, stdout: format!("{n} files\n") }, self.out_dir(None))
            }
        };
        let written = report.outputs.commit(&dir)?;
        let mut stdout = report.stdout;
        for path in written {
            stdout.push_str(&format!("wrote {}\n", path.display()));
        }
        Ok(stdout)
    }
}

/// Hubbard parameters from the configuration's generator source, with flags
/// filling in or replacing individual fields.
fn hubbard_params(cfg: Option<&CampaignConfig>, a: &HubbardArgs) -> CliResult<(HubbardParams, Option<u64>)> {
    let (base, cost_terms) = match cfg.and_then(|c| c.generators.as_ref()) {
        Some(GeneratorSource::Hubbard(h)) => (Some(h.params), h.cost_terms),
        Some(_) => return Err(CliError::invalid("hubbard needs a `hubbard` generator source")),
        None => (None, None),
    };
    let need = |flag: Option<f64>, from_cfg: Option<f64>, name: &str| {
        flag.or(from_cfg).ok_or_else(|| CliError::invalid(format!("missing --{name}")))
    };
    let params = HubbardParams {
        t_h: need(a.t_h, base.map(|b| b.t_h), "t-h")?,
        u_h: need(a.u_h, base.map(|b| b.u_h), "u-h")?,
        eta: a.eta.or(base.map(|b| b.eta)).ok_or_else(|| CliError::invalid("missing --eta"))?,
        sim_time: need(a.sim_time, base.map(|b| b.sim_time), "sim-time")?,
        epsilon_t: need(a.epsilon_t, base.map(|b| b.epsilon_t), "epsilon-t")?,
        boundary: a.boundary.or(base.map(|b| b.boundary)).unwrap_or_default(),
    };
    Ok((params, a.cost_terms.or(cost_terms)))
}
