//! Command-line front end: configuration, dataset files, the experiment
//! runner, reports and the diagnostic probes.

pub mod config;
pub mod data;
pub mod report;
pub mod run;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{DataSource, ExperimentConfig, Learner, ProbeConfig};
pub use data::{load_csv_dataset, write_csv_dataset};
pub use report::{emit_report, ReportFiles};
pub use run::{run_experiment, ResultRow};

use crate::error::{Error, Result};
use crate::evaluation::{mean_zero_probe, orthogonality_probe, ProbeLoss};
use crate::synthetic::{generate, true_cate, Scenario, ScenarioSpec, Setting};
use crate::types::validate_dataset;

#[derive(Debug, Parser)]
#[command(name = "orthosurv", version, about = "Orthogonal survival treatment-effect learners")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    Meanzero,
    Ortho,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Generate a synthetic dataset as CSV.
    Gen {
        #[arg(long)]
        scenario: u32,
        #[arg(long, default_value = "full")]
        setting: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a dataset CSV against the schema and data invariants.
    Validate {
        #[arg(long)]
        data: PathBuf,
        /// Last grid step; defaults to the largest observed time.
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Diagnostics with the true nuisances of a synthetic scenario.
    Probe {
        #[arg(long, value_enum)]
        kind: ProbeKind,
        #[arg(long)]
        config: PathBuf,
    },
}

fn synthetic_parts(cfg: &ExperimentConfig) -> Result<(Scenario, Vec<Setting>)> {
    match &cfg.data {
        DataSource::Synthetic { scenario, settings, .. } => Ok((*scenario, settings.clone())),
        DataSource::Csv { .. } => Err(Error::config("data", "probes need a synthetic scenario")),
    }
}

/// Cell table of the conditional mean-zero check, as CSV.
pub fn probe_meanzero(cfg: &ExperimentConfig) -> Result<String> {
    let (scenario, settings) = synthetic_parts(cfg)?;
    let t = cfg.probe.horizon;
    let mut s = String::from("setting,bin,arm,n,xi_s_mean,xi_s_z,xi_g_mean,xi_g_z\n");
    for setting in settings {
        let (d, gt) = generate(&ScenarioSpec {
            scenario,
            setting,
            n: cfg.probe.n,
            seed: cfg.seeds[0],
        });
        let rep = mean_zero_probe(&d, &gt, t, cfg.probe.bins, cfg.clip_eps)?;
        for c in &rep.cells {
            let _ = writeln!(
                s,
                "{setting},{},{},{},{},{},{},{}",
                c.bin, c.arm, c.n, c.xi_s.mean, c.xi_s.z, c.xi_g.mean, c.xi_g.z
            );
        }
        for (bin, arm) in &rep.empty_cells {
            log::warn!("{setting}: empty cell bin {bin} arm {arm}");
        }
    }
    Ok(s)
}

/// Orthogonality slopes per learner and direction, as CSV.
pub fn probe_ortho(cfg: &ExperimentConfig) -> Result<String> {
    let (scenario, settings) = synthetic_parts(cfg)?;
    let t = cfg.probe.horizon;
    let mut s = String::from("setting,scheme,direction_seed,slope,drifts\n");
    for setting in settings {
        let (d, gt) = generate(&ScenarioSpec {
            scenario,
            setting,
            n: cfg.probe.n,
            seed: cfg.seeds[0],
        });
        let tau = |x: &[f64]| true_cate(&gt, x, t);
        for &l in &cfg.learners {
            let loss = match l {
                Learner::Weighted(w) => ProbeLoss::Orthogonal(w),
                Learner::PlugIn => ProbeLoss::PlugIn,
            };
            for &dir in &cfg.probe.direction_seeds {
                let p = orthogonality_probe(&d, &gt, &tau, loss, t, dir, &cfg.probe.epsilons, cfg.probe.scale, cfg.probe.mode)?;
                let drifts: Vec<String> = p.drifts.iter().map(|v| format!("{v:e}")).collect();
                let _ = writeln!(s, "{setting},{l},{dir},{},{}", p.slope, drifts.join(";"));
            }
        }
    }
    Ok(s)
}

/// Executes a parsed command; returns the text to print on success.
pub fn execute(cmd: Command) -> Result<String> {
    match cmd {
        Command::Run { config, out, threads } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let rows = run_experiment(&cfg, threads)?;
            let files = emit_report(&rows, &cfg.out_dir)?;
            Ok(format!(
                "{}\nwrote {}, {}, {}",
                report::summary_markdown(&rows),
                files.results.display(),
                files.summary.display(),
                files.ratios.display()
            ))
        }
        Command::Gen { scenario, setting, n, seed, out } => {
            let spec = ScenarioSpec {
                scenario: Scenario::from_number(scenario)?,
                setting: setting.parse()?,
                n,
                seed,
            };
            let (d, _) = generate(&spec);
            write_csv_dataset(&d, &out)?;
            Ok(format!("wrote {} rows to {}", d.len(), out.display()))
        }
        Command::Validate { data, t_max } => {
            let d = load_csv_dataset(&data, t_max)?;
            debug_assert!(validate_dataset(&d).is_empty());
            Ok(format!(
                "ok: {} rows, {} covariates, t_max {}, {} treated",
                d.len(),
                d.p(),
                d.t_max(),
                d.treated_count()
            ))
        }
        Command::Probe { kind, config } => {
            let cfg = ExperimentConfig::load(&config)?;
            match kind {
                ProbeKind::Meanzero => probe_meanzero(&cfg),
                ProbeKind::Ortho => probe_ortho(&cfg),
            }
        }
    }
}
