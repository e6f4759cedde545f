//! Experiment driver: one task per (setting, seed), fanned out over a rayon
//! pool and merged by key.

use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use super::config::{DataSource, ExperimentConfig, Learner};
use super::data::load_csv_dataset;
use crate::error::{Error, Result};
use crate::evaluation::{pehe, theta_hat};
use crate::nuisance::cross_fit;
use crate::orthogonal::{pseudo_rows_from_points, PseudoConfig};
use crate::second_stage::fit_tau;
use crate::synthetic::{generate, generate_covariates, true_cate, GroundTruth, ScenarioSpec, Setting};
use crate::types::Dataset;

/// One line of the result file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub learner: Learner,
    pub setting: String,
    pub horizon: usize,
    pub seed: u64,
    /// `NaN` when no ground truth is available.
    pub pehe: f64,
    pub theta_hat: f64,
    pub n_guarded: usize,
    pub n_negative_rho: usize,
    pub train_loss_final: f64,
    pub val_loss_final: f64,
}

struct Task {
    setting: Option<Setting>,
    seed: u64,
}

const TEST_SEED_SALT: u64 = 0x7e57_0000_0000_0001;

fn run_task(cfg: &ExperimentConfig, task: &Task, observed: Option<&Dataset>) -> Result<Vec<ResultRow>> {
    let started = Instant::now();
    let (d, truth_source, x_test): (Dataset, Option<GroundTruth>, Array2<f64>) = match (&cfg.data, task.setting) {
        (DataSource::Synthetic { scenario, n_train, n_test, .. }, Some(setting)) => {
            let (d, gt) = generate(&ScenarioSpec {
                scenario: *scenario,
                setting,
                n: *n_train,
                seed: task.seed,
            });
            let xt = generate_covariates(*scenario, *n_test, task.seed ^ TEST_SEED_SALT);
            (d, Some(gt), xt)
        }
        _ => {
            let d = observed.expect("observed data loaded").clone();
            let xt = d.covariates();
            (d, None, xt)
        }
    };
    for &h in &cfg.horizons {
        if h > d.t_max() {
            return Err(Error::config("horizons", format!("{h} exceeds t_max = {}", d.t_max())));
        }
    }
    let setting_name = task.setting.map_or_else(|| "data".to_string(), |s| s.to_string());

    let fns = cross_fit(&d, cfg.crossfit_k, &cfg.nuisance_config(task.seed), task.seed)?;
    let naps = fns.evaluate_rows(&d)?;
    let test_naps = if cfg.learners.contains(&Learner::PlugIn) {
        Some(fns.evaluate_points(x_test.view())?)
    } else {
        None
    };
    let pcfg = PseudoConfig {
        rho_guard: cfg.rho_guard,
        clamp_negative_rho: cfg.clamp_negative_rho,
    };

    let mut out = Vec::new();
    for &h in &cfg.horizons {
        let truths: Option<Vec<f64>> = truth_source
            .as_ref()
            .map(|gt| x_test.rows().into_iter().map(|r| true_cate(gt, r.as_slice().unwrap(), h)).collect());
        let score = |pred: &[f64]| -> Result<f64> {
            match &truths {
                Some(t) => pehe(pred, t),
                None => Ok(f64::NAN),
            }
        };
        for &learner in &cfg.learners {
            let row = match learner {
                Learner::Weighted(scheme) => {
                    let (rows, rep) = pseudo_rows_from_points(&d, &naps, scheme, h, &pcfg);
                    let model = fit_tau(&rows, &cfg.second_stage_config(task.seed, h), h, scheme)?;
                    let pred = model.predict(x_test.view())?;
                    ResultRow {
                        learner,
                        setting: setting_name.clone(),
                        horizon: h,
                        seed: task.seed,
                        pehe: score(&pred)?,
                        theta_hat: theta_hat(&rows)?,
                        n_guarded: rep.n_guarded,
                        n_negative_rho: rep.n_negative_rho,
                        train_loss_final: model.report.final_train_loss(),
                        val_loss_final: model.report.final_val_loss(),
                    }
                }
                Learner::PlugIn => {
                    let tn = test_naps.as_ref().expect("plug-in points evaluated");
                    let pred: Vec<f64> = tn.iter().map(|n| n.s[1][h] - n.s[0][h]).collect();
                    let theta = naps.iter().map(|n| n.s[1][h] - n.s[0][h]).sum::<f64>() / naps.len() as f64;
                    ResultRow {
                        learner,
                        setting: setting_name.clone(),
                        horizon: h,
                        seed: task.seed,
                        pehe: score(&pred)?,
                        theta_hat: theta,
                        n_guarded: 0,
                        n_negative_rho: 0,
                        train_loss_final: f64::NAN,
                        val_loss_final: f64::NAN,
                    }
                }
            };
            out.push(row);
        }
    }
    log::info!(
        "setting {setting_name} seed {} done in {:.1}s",
        task.seed,
        started.elapsed().as_secs_f64()
    );
    Ok(out)
}

/// Runs every (setting, seed) task and returns result rows sorted by
/// `(setting, learner, horizon, seed)`. `threads = 0` uses rayon's default.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let (tasks, observed): (Vec<Task>, Option<Dataset>) = match &cfg.data {
        DataSource::Synthetic { settings, .. } => (
            settings
                .iter()
                .flat_map(|&s| cfg.seeds.iter().map(move |&seed| Task { setting: Some(s), seed }))
                .collect(),
            None,
        ),
        DataSource::Csv { path, t_max } => (
            cfg.seeds.iter().map(|&seed| Task { setting: None, seed }).collect(),
            Some(load_csv_dataset(path, *t_max)?),
        ),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let per_task: Vec<Result<Vec<ResultRow>>> =
        pool.install(|| tasks.par_iter().map(|t| run_task(cfg, t, observed.as_ref())).collect());
    let mut rows = Vec::new();
    for r in per_task {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| {
        (&a.setting, a.learner, a.horizon, a.seed).cmp(&(&b.setting, b.learner, b.horizon, b.seed))
    });
    Ok(rows)
}
