//! Error metrics and diagnostics: PEHE, PEHE ratios over time, the weighted
//! average effect, the conditional mean-zero check of the correction terms
//! and the orthogonality slope probe.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nuisance::{evaluate_batch, HazardKind, NuisanceSource};
use crate::orthogonal::{rho, xi_s, PseudoRow};
use crate::synthetic::sigmoid;
use crate::types::{Dataset, NuisanceAtPoint, Observation};
use crate::weighting::{weight, WeightScheme};

/// Mean squared difference between predicted and true effects.
pub fn pehe(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            what: "truths",
            expected: predictions.len(),
            got: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    Ok(predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / predictions.len() as f64)
}

/// Population mean and standard deviation (zero for a single value).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

/// PEHE of one learner on one setting, per horizon and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PeheReport {
    pub scheme: String,
    pub setting: String,
    pub horizons: Vec<usize>,
    /// `values[h][s]`: PEHE at `horizons[h]` for the `s`-th seed.
    pub values: Vec<Vec<f64>>,
}

impl PeheReport {
    pub fn new(scheme: impl Into<String>, setting: impl Into<String>, horizons: Vec<usize>) -> Self {
        let values = vec![Vec::new(); horizons.len()];
        Self {
            scheme: scheme.into(),
            setting: setting.into(),
            horizons,
            values,
        }
    }

    pub fn push(&mut self, horizon: usize, value: f64) {
        let k = self.horizons.iter().position(|&h| h == horizon).expect("unknown horizon");
        self.values[k].push(value);
    }

    /// Mean over seeds at each horizon.
    pub fn means(&self) -> Vec<f64> {
        self.values.iter().map(|v| mean_sd(v).0).collect()
    }

    pub fn sds(&self) -> Vec<f64> {
        self.values.iter().map(|v| mean_sd(v).1).collect()
    }
}

/// Per-horizon ratio of mean PEHE, target over baseline.
pub fn pehe_ratio_over_time(target: &PeheReport, baseline: &PeheReport) -> Result<Vec<(usize, f64)>> {
    if target.horizons != baseline.horizons {
        return Err(Error::DimensionMismatch {
            what: "horizons",
            expected: baseline.horizons.len(),
            got: target.horizons.len(),
        });
    }
    target
        .horizons
        .iter()
        .zip(target.means().into_iter().zip(baseline.means()))
        .map(|(&h, (t, b))| if b == 0.0 { Err(Error::ZeroBaseline(h)) } else { Ok((h, t / b)) })
        .collect()
}

/// One-step weighted average effect `sum rho phi / sum f`.
pub fn theta_hat(rows: &[PseudoRow]) -> Result<f64> {
    let fs: f64 = rows.iter().map(|r| r.f_value).sum();
    if fs == 0.0 {
        return Err(Error::ZeroWeightSum);
    }
    Ok(rows.iter().map(|r| r.rho * r.phi).sum::<f64>() / fs)
}

/// Mean, standard error and z-score of a correction term within one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStat {
    pub mean: f64,
    pub se: f64,
    pub z: f64,
}

impl CellStat {
    fn of(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let se = (var / n).sqrt();
        let z = if se > 0.0 {
            mean / se
        } else if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self { mean, se, z }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanZeroCell {
    pub bin: usize,
    pub arm: u8,
    pub n: usize,
    pub xi_s: CellStat,
    pub xi_g: CellStat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanZeroReport {
    pub cells: Vec<MeanZeroCell>,
    /// `(bin, arm)` cells without any rows.
    pub empty_cells: Vec<(usize, u8)>,
}

impl MeanZeroReport {
    pub fn max_abs_z_s(&self) -> f64 {
        self.cells.iter().map(|c| c.xi_s.z.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_z_g(&self) -> f64 {
        self.cells.iter().map(|c| c.xi_g.z.abs()).fold(0.0, f64::max)
    }
}

/// Bins rows by quantiles of the first covariate crossed with the arm and
/// reports cell means of `xi_S(eta_t)` and `xi_G(eta_{t-1})`.
pub fn mean_zero_probe(d: &Dataset, source: &dyn NuisanceSource, t: usize, bins: usize, clip_eps: f64) -> Result<MeanZeroReport> {
    if bins < 2 {
        return Err(Error::config("bins", "need at least 2"));
    }
    if d.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let naps = evaluate_batch(source, d.covariates().view(), clip_eps)?;
    let mut x0: Vec<f64> = d.rows().iter().map(|r| r.x[0]).collect();
    x0.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (1..bins).map(|k| x0[k * x0.len() / bins]).collect();
    let bin_of = |v: f64| edges.iter().take_while(|&&e| v >= e).count();

    let mut cells: Vec<[Vec<f64>; 2]> = vec![[Vec::new(), Vec::new()]; 2 * bins];
    for (obs, nap) in d.rows().iter().zip(&naps) {
        let c = &mut cells[bin_of(obs.x[0]) * 2 + obs.arm()];
        c[0].push(crate::orthogonal::xi_s(obs, nap, t as isize));
        c[1].push(crate::orthogonal::xi_g(obs, nap, t as isize - 1));
    }
    let mut report = MeanZeroReport {
        cells: Vec::new(),
        empty_cells: Vec::new(),
    };
    for (k, [s, g]) in cells.into_iter().enumerate() {
        let (bin, arm) = (k / 2, (k % 2) as u8);
        if s.is_empty() {
            report.empty_cells.push((bin, arm));
            continue;
        }
        report.cells.push(MeanZeroCell {
            bin,
            arm,
            n: s.len(),
            xi_s: CellStat::of(&s),
            xi_g: CellStat::of(&g),
        });
    }
    Ok(report)
}

/// Adds `delta` to every hazard of `base` (capped below one). Used to check
/// that the mean-zero property fails away from the truth.
pub struct ShiftedHazards<'a> {
    pub base: &'a dyn NuisanceSource,
    pub delta: f64,
}

impl NuisanceSource for ShiftedHazards<'_> {
    fn t_max(&self) -> usize {
        self.base.t_max()
    }

    fn input_dim(&self) -> usize {
        self.base.input_dim()
    }

    fn propensity(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        self.base.propensity(x)
    }

    fn hazards(&self, x: ArrayView2<f64>, arm: u8, kind: HazardKind) -> Result<Array2<f64>> {
        Ok(self.base.hazards(x, arm, kind)?.mapv(|l| (l + self.delta).clamp(0.0, 0.999)))
    }
}

/// Nuisances moved along a smooth bounded direction: every component gets a
/// logit shift `eps * scale * (c0 + c1 x0)` with coefficients drawn from
/// `direction_seed`. Zero hazards stay zero.
pub struct Perturbed<'a> {
    pub base: &'a dyn NuisanceSource,
    pub eps: f64,
    pub scale: f64,
    /// `[pi, S arm 0, S arm 1, G arm 0, G arm 1]`
    coef: [[f64; 2]; 5],
}

impl<'a> Perturbed<'a> {
    pub fn new(base: &'a dyn NuisanceSource, eps: f64, scale: f64, direction_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(direction_seed);
        let mut coef = [[0.0; 2]; 5];
        for c in &mut coef {
            c[0] = rng.gen_range(-1.0..1.0);
            c[1] = rng.gen_range(-1.0..1.0);
        }
        Self {
            base,
            eps,
            scale,
            coef,
        }
    }

    fn shift(&self, k: usize, p: f64, x0: f64) -> f64 {
        if self.eps == 0.0 || p <= 0.0 {
            return p;
        }
        let p = p.clamp(1e-12, 1.0 - 1e-12);
        let c = self.coef[k];
        sigmoid((p / (1.0 - p)).ln() + self.eps * self.scale * (c[0] + c[1] * x0))
    }
}

impl NuisanceSource for Perturbed<'_> {
    fn t_max(&self) -> usize {
        self.base.t_max()
    }

    fn input_dim(&self) -> usize {
        self.base.input_dim()
    }

    fn propensity(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        let p = self.base.propensity(x)?;
        Ok(p.iter().enumerate().map(|(i, &v)| self.shift(0, v, x[[i, 0]])).collect())
    }

    fn hazards(&self, x: ArrayView2<f64>, arm: u8, kind: HazardKind) -> Result<Array2<f64>> {
        let k = match kind {
            HazardKind::Survival => 1,
            HazardKind::Censoring => 3,
        } + arm as usize;
        let mut h = self.base.hazards(x, arm, kind)?;
        for (i, mut row) in h.rows_mut().into_iter().enumerate() {
            let x0 = x[[i, 0]];
            row.mapv_inplace(|l| self.shift(k, l, x0));
        }
        Ok(h)
    }
}

/// Loss whose nuisance sensitivity is probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeLoss {
    Orthogonal(WeightScheme),
    /// `mean (S_t(x,1) - S_t(x,0) - g(x))^2` with the plug-in contrast as target.
    PlugIn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityProbe {
    pub epsilons: Vec<f64>,
    /// `||grad(eps) - grad(0)||` for each epsilon.
    pub drifts: Vec<f64>,
    /// Least-squares slope of `ln drift` on `ln eps`.
    pub slope: f64,
}

/// How the outcome part of the loss is averaged in the orthogonality probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbeMode {
    /// Observed outcomes of the sample.
    Sampled,
    /// For every sampled covariate vector, the exact expectation over
    /// treatment and outcome under the unperturbed nuisances. Removes the
    /// `O(eps / sqrt(n))` sampling term from the gradient drift.
    #[default]
    Integrated,
}

/// Every `(a, t_tilde, delta_s, delta_g)` outcome with its probability when
/// event and censoring are drawn independently at each step and a unit with
/// neither is censored at `t_max`.
fn outcome_atoms(nap: &NuisanceAtPoint, x: &[f64]) -> Vec<(f64, Observation)> {
    let tm = nap.t_max();
    let mut out = Vec::with_capacity(2 * (3 * tm + 4));
    for a in 0..2u8 {
        let pa = if a == 1 { nap.pi } else { 1.0 - nap.pi };
        let mut reach = pa;
        for t in 0..=tm {
            let ls = nap.lambda_s[a as usize][t];
            let lg = nap.lambda_g[a as usize][t];
            for (p, ds, dg) in [(ls * (1.0 - lg), 1, 0), ((1.0 - ls) * lg, 0, 1), (ls * lg, 1, 1)] {
                if reach * p > 0.0 {
                    out.push((reach * p, Observation::new(x.to_vec(), a, t, ds, dg)));
                }
            }
            reach *= (1.0 - ls) * (1.0 - lg);
        }
        if reach > 0.0 {
            out.push((reach, Observation::new(x.to_vec(), a, tm, 0, 1)));
        }
    }
    out
}

/// `rho (phi - tau)` without dividing by `rho`.
fn weighted_residual(obs: &Observation, nap: &NuisanceAtPoint, scheme: WeightScheme, t: usize, tau: f64) -> f64 {
    let r = rho(obs, nap, scheme, t);
    let f = weight(scheme, &nap.tilde_eta(t));
    let centred = f64::from(obs.a) - nap.pi;
    let correction = centred * xi_s(obs, nap, t as isize) * nap.s[obs.arm()][t] * f / (nap.pi * (1.0 - nap.pi));
    r * (nap.s[1][t] - nap.s[0][t] - tau) - correction
}

/// Gradient of the loss in `beta` at `beta = 0`, for
/// `g(x) = tau(x) + beta_0 + beta_1 x0`. `law` supplies the outcome
/// distribution in [`ProbeMode::Integrated`].
#[allow(clippy::too_many_arguments)]
fn loss_gradient(
    d: &Dataset,
    law: &[NuisanceAtPoint],
    source: &dyn NuisanceSource,
    tau: &[f64],
    loss: ProbeLoss,
    t: usize,
    clip_eps: f64,
    mode: ProbeMode,
) -> Result<[f64; 2]> {
    let naps = evaluate_batch(source, d.covariates().view(), clip_eps)?;
    let (resid, norm): (Vec<f64>, f64) = match loss {
        ProbeLoss::Orthogonal(scheme) => {
            let resid = d
                .rows()
                .par_iter()
                .enumerate()
                .map(|(i, obs)| match mode {
                    ProbeMode::Sampled => weighted_residual(obs, &naps[i], scheme, t, tau[i]),
                    ProbeMode::Integrated => outcome_atoms(&law[i], &obs.x)
                        .iter()
                        .map(|(p, o)| p * weighted_residual(o, &naps[i], scheme, t, tau[i]))
                        .sum(),
                })
                .collect();
            (resid, naps.iter().map(|n| weight(scheme, &n.tilde_eta(t))).sum())
        }
        ProbeLoss::PlugIn => (
            naps.iter().zip(tau).map(|(n, g)| n.s[1][t] - n.s[0][t] - g).collect(),
            d.len() as f64,
        ),
    };
    let mut g = [0.0; 2];
    for (obs, r) in d.rows().iter().zip(&resid) {
        g[0] -= 2.0 * r;
        g[1] -= 2.0 * r * obs.x[0];
    }
    Ok([g[0] / norm, g[1] / norm])
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::Degenerate("need at least two points"));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("abscissae coincide"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Clip level used by the probes; small enough not to bind at the truth.
const PROBE_CLIP: f64 = 1e-3;

/// Smallest accepted ratio between the largest and smallest probe epsilon.
pub const MIN_EPS_SPAN: f64 = 8.0;

/// Measures how fast the loss gradient (at the true effect) drifts when the
/// nuisances move by `eps` along a random direction. An orthogonal loss
/// drifts quadratically, a plug-in loss linearly.
#[allow(clippy::too_many_arguments)]
pub fn orthogonality_probe(
    d: &Dataset,
    source: &dyn NuisanceSource,
    tau: &dyn Fn(&[f64]) -> f64,
    loss: ProbeLoss,
    t: usize,
    direction_seed: u64,
    epsilons: &[f64],
    scale: f64,
    mode: ProbeMode,
) -> Result<OrthogonalityProbe> {
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::config("epsilons", "must be positive"));
    }
    let lo = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = epsilons.iter().copied().fold(0.0, f64::max);
    if hi < MIN_EPS_SPAN * lo * (1.0 - 1e-9) {
        return Err(Error::config("epsilons", "largest must be at least 8x the smallest"));
    }
    let truth: Vec<f64> = d.rows().iter().map(|r| tau(&r.x)).collect();
    let law = evaluate_batch(source, d.covariates().view(), PROBE_CLIP)?;
    let base = loss_gradient(d, &law, source, &truth, loss, t, PROBE_CLIP, mode)?;
    let mut drifts = Vec::with_capacity(epsilons.len());
    for &e in epsilons {
        let p = Perturbed::new(source, e, scale, direction_seed);
        let g = loss_gradient(d, &law, &p, &truth, loss, t, PROBE_CLIP, mode)?;
        drifts.push(((g[0] - base[0]).powi(2) + (g[1] - base[1]).powi(2)).sqrt());
    }
    if drifts.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Degenerate("zero or non-finite gradient drift"));
    }
    let lx: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = drifts.iter().map(|v| v.ln()).collect();
    Ok(OrthogonalityProbe {
        epsilons: epsilons.to_vec(),
        slope: ols_slope(&lx, &ly)?,
        drifts,
    })
}

/// Gradient drift at a single `eps` (zero when `eps = 0`).
#[allow(clippy::too_many_arguments)]
pub fn gradient_drift(
    d: &Dataset,
    source: &dyn NuisanceSource,
    tau: &dyn Fn(&[f64]) -> f64,
    loss: ProbeLoss,
    t: usize,
    direction_seed: u64,
    eps: f64,
    scale: f64,
    mode: ProbeMode,
) -> Result<f64> {
    let truth: Vec<f64> = d.rows().iter().map(|r| tau(&r.x)).collect();
    let law = evaluate_batch(source, d.covariates().view(), PROBE_CLIP)?;
    let base = loss_gradient(d, &law, source, &truth, loss, t, PROBE_CLIP, mode)?;
    let p = Perturbed::new(source, eps, scale, direction_seed);
    let g = loss_gradient(d, &law, &p, &truth, loss, t, PROBE_CLIP, mode)?;
    Ok(((g[0] - base[0]).powi(2) + (g[1] - base[1]).powi(2)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, true_cate, Scenario, ScenarioSpec, Setting};
    use proptest::prelude::*;

    #[test]
    fn pehe_examples() {
        assert_eq!(pehe(&[0.1, 0.2], &[0.1, 0.2]).unwrap(), 0.0);
        assert!((pehe(&[0.01; 5], &[0.0; 5]).unwrap() - 1e-4).abs() < 1e-18);
        assert!((pehe(&[0.2, 0.0], &[0.0, 0.2]).unwrap() - 0.04).abs() < 1e-15);
        assert!(matches!(pehe(&[0.0], &[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn pehe_is_permutation_invariant(v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            let mut w = v.clone();
            w.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let split = |v: &[(f64, f64)]| -> (Vec<f64>, Vec<f64>) { v.iter().copied().unzip() };
            let (a, b) = split(&v);
            let (c, e) = split(&w);
            let p1 = pehe(&a, &b).unwrap();
            prop_assert!(p1 >= 0.0);
            prop_assert!((p1 - pehe(&c, &e).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn ratio_examples() {
        let mut base = PeheReport::new("none", "full", vec![0, 1]);
        base.push(0, 2.0);
        base.push(1, 4.0);
        assert_eq!(pehe_ratio_over_time(&base, &base).unwrap(), vec![(0, 1.0), (1, 1.0)]);
        let mut half = PeheReport::new("c", "full", vec![0, 1]);
        half.push(0, 1.0);
        half.push(1, 2.0);
        assert_eq!(pehe_ratio_over_time(&half, &base).unwrap(), vec![(0, 0.5), (1, 0.5)]);
        let mut zero = PeheReport::new("none", "full", vec![0, 1]);
        zero.push(0, 0.0);
        zero.push(1, 1.0);
        assert!(matches!(pehe_ratio_over_time(&half, &zero), Err(Error::ZeroBaseline(0))));
    }

    #[test]
    fn mean_sd_uses_population_convention() {
        let (m, sd) = mean_sd(&[1e-4, 3e-4]);
        assert!((m - 2e-4).abs() < 1e-18 && (sd - 1e-4).abs() < 1e-18);
        assert_eq!(mean_sd(&[5.0]), (5.0, 0.0));
    }

    #[test]
    fn theta_of_constant_pseudo_outcomes() {
        let rows: Vec<PseudoRow> = (0..10)
            .map(|_| PseudoRow { x: vec![0.0], rho: 1.0, phi: 0.3, f_value: 1.0, xi_s: 0.0, xi_g: 0.0, raw_rho: 1.0 })
            .collect();
        assert!((theta_hat(&rows).unwrap() - 0.3).abs() < 1e-15);
        let zero: Vec<PseudoRow> = rows.iter().map(|r| PseudoRow { f_value: 0.0, ..r.clone() }).collect();
        assert!(matches!(theta_hat(&zero), Err(Error::ZeroWeightSum)));
    }

    #[test]
    fn zero_event_hazard_gives_exact_zero_cells() {
        struct NoEvent;
        impl NuisanceSource for NoEvent {
            fn t_max(&self) -> usize {
                3
            }
            fn input_dim(&self) -> usize {
                1
            }
            fn propensity(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
                Ok(vec![0.5; x.nrows()])
            }
            fn hazards(&self, x: ArrayView2<f64>, _a: u8, k: HazardKind) -> Result<Array2<f64>> {
                let v = if k == HazardKind::Survival { 0.0 } else { 0.1 };
                Ok(Array2::from_elem((x.nrows(), 4), v))
            }
        }
        let rows = (0..40)
            .map(|i| crate::types::Observation::new(vec![i as f64 / 10.0], (i % 2) as u8, 3, 0, 1))
            .collect();
        let d = Dataset::new(rows, 3).unwrap();
        let rep = mean_zero_probe(&d, &NoEvent, 1, 4, 0.01).unwrap();
        assert!(rep.cells.iter().all(|c| c.xi_s.mean == 0.0 && c.xi_s.z == 0.0));
        assert!(rep.empty_cells.is_empty());
    }

    #[test]
    fn empty_cells_are_reported() {
        let rows = (0..40)
            .map(|i| crate::types::Observation::new(vec![i as f64], 1 - u8::from(i < 2), 1, 1, 0))
            .collect();
        let d = Dataset::new(rows, 3).unwrap();
        let gt = crate::synthetic::GroundTruth::new(Scenario::One, Setting::FULL);
        let rep = mean_zero_probe(&d, &gt, 1, 4, 0.01).unwrap();
        assert_eq!(rep.empty_cells, vec![(1, 0), (2, 0), (3, 0)]);
    }

    #[test]
    fn perturbation_at_zero_is_identity() {
        let (d, gt) = generate(&ScenarioSpec { scenario: Scenario::One, setting: Setting::FULL, n: 500, seed: 1 });
        let tau = |x: &[f64]| true_cate(&gt, x, 2);
        for loss in [ProbeLoss::Orthogonal(WeightScheme::TCS), ProbeLoss::PlugIn] {
            for mode in [ProbeMode::Sampled, ProbeMode::Integrated] {
                assert_eq!(gradient_drift(&d, &gt, &tau, loss, 2, 3, 0.0, 5.0, mode).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = [0.1f64, 0.2, 0.4].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [0.1f64, 0.2, 0.4].iter().map(|v| 3.0 * v.ln() + 1.0).collect();
        assert!((ols_slope(&x, &y).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(ols_slope(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::Degenerate(_))));
    }
}
