//! Second-stage regression of pseudo-outcomes on covariates, the plug-in
//! contrast and the restricted-mean variant.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::approximator::{self, ApproxConfig, Approximator, LossKind, OutputActivation, TrainReport, Validation};
use crate::error::{Error, Result};
use crate::nuisance::{FoldedNuisances, HazardKind, NuisanceSource};
use crate::orthogonal::{rmst_rows_from_points, GuardReport, PseudoConfig, PseudoRow};
use crate::types::Dataset;
use crate::weighting::WeightScheme;

/// Share of pseudo-rows used for fitting; the rest drive early stopping.
pub const TRAIN_FRACTION: f64 = 0.6;

/// Output clamp for single-horizon effects (a difference of probabilities
/// plus slack).
pub const TAU_CLAMP: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct TauModel {
    net: Approximator,
    pub horizon: usize,
    pub scheme: WeightScheme,
    pub clamp: f64,
    /// `sum_i f_i` over all pseudo-rows (the loss normaliser, constant in `g`).
    pub f_sum: f64,
    pub report: TrainReport,
}

/// Three hidden layers of 64 logistic units with a linear output.
pub fn default_second_stage(seed: u64) -> ApproxConfig {
    let mut c = ApproxConfig::new(1, vec![64, 64, 64], OutputActivation::Identity);
    c.epochs = 100;
    c.batch_size = 1024;
    c.learning_rate = 1e-3;
    c.patience = 10;
    c.seed = seed;
    c
}

fn rows_to_arrays(rows: &[PseudoRow], idx: &[usize]) -> (Array2<f64>, Vec<f64>, Vec<f64>) {
    let p = rows[0].x.len();
    let mut x = Array2::zeros((idx.len(), p));
    for (k, &i) in idx.iter().enumerate() {
        for (j, v) in rows[i].x.iter().enumerate() {
            x[[k, j]] = *v;
        }
    }
    let y = idx.iter().map(|&i| rows[i].phi).collect();
    let w = idx.iter().map(|&i| rows[i].rho).collect();
    (x, y, w)
}

fn fit_with_clamp(rows: &[PseudoRow], cfg: &ApproxConfig, horizon: usize, scheme: WeightScheme, clamp: f64) -> Result<TauModel> {
    if rows.is_empty() {
        return Err(Error::Empty("pseudo-rows"));
    }
    if rows.iter().all(|r| r.rho == 0.0) {
        return Err(Error::ZeroWeights);
    }
    let mut cfg = cfg.clone();
    cfg.input_dim = rows[0].x.len();
    cfg.output_activation = OutputActivation::Identity;

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0051_17a1));
    let n_train = ((rows.len() as f64 * TRAIN_FRACTION).round() as usize).clamp(1, rows.len());
    let (tr, va) = order.split_at(n_train);
    let (xt, yt, wt) = rows_to_arrays(rows, tr);
    let (net, report) = if va.is_empty() {
        approximator::train_with_validation(&cfg, xt.view(), &yt, &wt, LossKind::WeightedSquared, None)?
    } else {
        let (xv, yv, wv) = rows_to_arrays(rows, va);
        let val = Validation {
            inputs: xv.view(),
            targets: &yv,
            weights: &wv,
        };
        approximator::train_with_validation(&cfg, xt.view(), &yt, &wt, LossKind::WeightedSquared, Some(val))?
    };
    Ok(TauModel {
        net,
        horizon,
        scheme,
        clamp,
        f_sum: rows.iter().map(|r| r.f_value).sum(),
        report,
    })
}

/// Minimises `sum rho (phi - g(x))^2` over the network class of `cfg`
/// (input dimension and output activation are set here).
pub fn fit_tau(rows: &[PseudoRow], cfg: &ApproxConfig, horizon: usize, scheme: WeightScheme) -> Result<TauModel> {
    fit_with_clamp(rows, cfg, horizon, scheme, TAU_CLAMP)
}

impl TauModel {
    pub fn input_dim(&self) -> usize {
        self.net.config().input_dim
    }

    /// Clamped predictions for every row of `x`.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self
            .net
            .predict(x)?
            .iter()
            .map(|v| v.clamp(-self.clamp, self.clamp))
            .collect())
    }
}

pub fn predict_tau(m: &TauModel, x: &[f64]) -> Result<f64> {
    let xm = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
    Ok(m.predict(xm.view())?[0])
}

/// `S_t(x, 1) - S_t(x, 0)` from the event hazards of `nuis`.
pub fn plugin_tau(nuis: &dyn NuisanceSource, x: &[f64], t: usize) -> Result<f64> {
    let xm = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
    let s = |arm| -> Result<f64> {
        let h = nuis.hazards(xm.view(), arm, HazardKind::Survival)?;
        Ok(h.row(0).iter().take(t + 1).map(|l| 1.0 - l).product())
    };
    Ok(s(1)? - s(0)?)
}

/// Plug-in effects at horizon `t` for every row of `x`, averaging the fold
/// models' survival curves.
pub fn plugin_tau_batch(fns: &FoldedNuisances, x: ArrayView2<f64>, t: usize) -> Result<Vec<f64>> {
    let naps = fns.evaluate_points(x)?;
    Ok(naps.iter().map(|n| n.s[1][t] - n.s[0][t]).collect())
}

/// Restricted-mean effect learner at horizon `h`.
pub fn fit_rmst(
    d: &Dataset,
    fns: &FoldedNuisances,
    scheme: WeightScheme,
    h: usize,
    cfg: &ApproxConfig,
    pcfg: &PseudoConfig,
) -> Result<(TauModel, GuardReport)> {
    if h > d.t_max() {
        return Err(Error::config("horizon", format!("{h} exceeds t_max = {}", d.t_max())));
    }
    let naps = fns.evaluate_rows(d)?;
    let (rows, rep) = rmst_rows_from_points(d, &naps, scheme, h, pcfg);
    let m = fit_with_clamp(&rows, cfg, h, scheme, TAU_CLAMP * (h + 1) as f64)?;
    Ok((m, rep))
}
