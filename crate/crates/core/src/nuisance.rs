//! Step-one nuisance models: propensity score, event hazard and censoring
//! hazard, plus out-of-fold evaluation for cross-fitting.
//!
//! Hazards are fit as a single network per kind over the features
//! `(x, a, one_hot(t))`. Each observed row is expanded into person-period
//! records (one Bernoulli label per at-risk step) so that the Bernoulli
//! log-likelihood of the records equals the discrete-time survival
//! likelihood of the row.

use ndarray::{s, Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::approximator::{self, ApproxConfig, Approximator, LossKind, OutputActivation};
use crate::error::{Error, Result};
use crate::types::{Dataset, NuisanceAtPoint, Observation, TildeEta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HazardKind {
    /// Event of interest (`delta_s`).
    Survival,
    /// Censoring (`delta_g`).
    Censoring,
}

impl HazardKind {
    fn indicator(self, obs: &Observation) -> u8 {
        match self {
            HazardKind::Survival => obs.delta_s,
            HazardKind::Censoring => obs.delta_g,
        }
    }

    fn label(self) -> &'static str {
        match self {
            HazardKind::Survival => "event",
            HazardKind::Censoring => "censoring",
        }
    }
}

/// Anything that can report raw propensities and hazard curves.
pub trait NuisanceSource: Sync {
    fn t_max(&self) -> usize;

    fn input_dim(&self) -> usize;

    /// Unclipped `pi(x)` for every row of `x`.
    fn propensity(&self, x: ArrayView2<f64>) -> Result<Vec<f64>>;

    /// `n x (t_max + 1)` matrix of hazards for treatment arm `arm`.
    fn hazards(&self, x: ArrayView2<f64>, arm: u8, kind: HazardKind) -> Result<Array2<f64>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropensityModel {
    net: Approximator,
}

impl PropensityModel {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self.net.predict(x)?.to_vec())
    }
}

/// Fitted hazard for one event kind.
#[derive(Debug, Clone, PartialEq)]
pub enum HazardModel {
    Network {
        kind: HazardKind,
        net: Approximator,
        p: usize,
        t_max: usize,
    },
    /// Covariate-free per-step hazards. Used when a kind has no events.
    Constant { kind: HazardKind, per_step: Vec<f64> },
}

fn hazard_features(x: &[f64], a: u8, t: usize, t_max: usize, out: &mut [f64]) {
    let p = x.len();
    out[..p].copy_from_slice(x);
    out[p] = f64::from(a);
    for v in &mut out[p + 1..] {
        *v = 0.0;
    }
    out[p + 1 + t.min(t_max)] = 1.0;
}

impl HazardModel {
    pub fn kind(&self) -> HazardKind {
        match self {
            HazardModel::Network { kind, .. } | HazardModel::Constant { kind, .. } => *kind,
        }
    }

    pub fn t_max(&self) -> usize {
        match self {
            HazardModel::Network { t_max, .. } => *t_max,
            HazardModel::Constant { per_step, .. } => per_step.len() - 1,
        }
    }

    /// Hazards at every grid step for every row of `x`, treatment fixed to `a`.
    pub fn predict_curves(&self, x: ArrayView2<f64>, a: u8) -> Result<Array2<f64>> {
        let tm = self.t_max();
        let n = x.nrows();
        match self {
            HazardModel::Constant { per_step, .. } => {
                Ok(Array2::from_shape_fn((n, tm + 1), |(_, t)| per_step[t]))
            }
            HazardModel::Network { net, p, .. } => {
                if x.ncols() != *p {
                    return Err(Error::DimensionMismatch {
                        what: "covariates",
                        expected: *p,
                        got: x.ncols(),
                    });
                }
                let width = p + 2 + tm;
                let steps = tm + 1;
                let mut out = Array2::zeros((n, steps));
                const CHUNK: usize = 1024;
                let mut feats = Array2::zeros((CHUNK * steps, width));
                let mut start = 0;
                while start < n {
                    let end = (start + CHUNK).min(n);
                    let m = (end - start) * steps;
                    for i in start..end {
                        let xi = x.row(i).to_vec();
                        for t in 0..steps {
                            let r = (i - start) * steps + t;
                            hazard_features(&xi, a, t, tm, feats.row_mut(r).as_slice_mut().unwrap());
                        }
                    }
                    let pred = net.predict(feats.slice(s![..m, ..]))?;
                    for i in start..end {
                        for t in 0..steps {
                            out[[i, t]] = pred[(i - start) * steps + t];
                        }
                    }
                    start = end;
                }
                Ok(out)
            }
        }
    }

    /// Log-likelihood of one observed row under this model, written directly
    /// as `sum_{j <= t - delta} log(1 - lambda_j) + delta log lambda_t`.
    pub fn row_log_likelihood(&self, obs: &Observation) -> Result<f64> {
        let x = Array2::from_shape_vec((1, obs.x.len()), obs.x.clone()).expect("row shape");
        let h = self.predict_curves(x.view(), obs.a)?;
        let delta = self.kind().indicator(obs) as usize;
        let mut ll = 0.0;
        for j in 0..(obs.t_tilde + 1 - delta) {
            ll += (1.0 - h[[0, j]]).ln();
        }
        if delta == 1 {
            ll += h[[0, obs.t_tilde]].ln();
        }
        Ok(ll)
    }
}

/// Survival curve `[1, S_0, ..., S_t]` (the leading entry is `S_{-1}`).
pub fn survival_curve(h: &HazardModel, x: &[f64], a: u8, t: usize) -> Result<Vec<f64>> {
    let xm = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
    let curve = h.predict_curves(xm.view(), a)?;
    let t = t.min(h.t_max());
    let mut out = Vec::with_capacity(t + 2);
    out.push(1.0);
    out.extend(crate::types::survival_from_hazards(&curve.row(0).as_slice().unwrap()[..=t]));
    Ok(out)
}

/// Expands rows into `(features, labels)` person-period records for `kind`:
/// steps `0..=t_tilde`, labelled 1 only at `t_tilde` when the indicator is set.
pub fn person_period(d: &Dataset, kind: HazardKind) -> (Array2<f64>, Vec<f64>) {
    let tm = d.t_max();
    let width = d.p() + 2 + tm;
    let total: usize = d.rows().iter().map(|r| r.t_tilde + 1).sum();
    let mut feats = Array2::zeros((total, width));
    let mut labels = Vec::with_capacity(total);
    let mut k = 0;
    for r in d.rows() {
        let delta = kind.indicator(r);
        for j in 0..=r.t_tilde {
            hazard_features(&r.x, r.a, j, tm, feats.row_mut(k).as_slice_mut().unwrap());
            labels.push(if j == r.t_tilde && delta == 1 { 1.0 } else { 0.0 });
            k += 1;
        }
    }
    (feats, labels)
}

fn with_input_dim(cfg: &ApproxConfig, dim: usize) -> ApproxConfig {
    let mut c = cfg.clone();
    c.input_dim = dim;
    c.output_activation = OutputActivation::Logistic;
    c
}

/// Fits `pi(x)` by logistic likelihood on `(x, a)`. `cfg.input_dim` is
/// overwritten with the covariate dimension.
pub fn fit_propensity(d: &Dataset, cfg: &ApproxConfig) -> Result<PropensityModel> {
    if d.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let treated = d.treated_count();
    if treated == 0 {
        return Err(Error::SingleArm(0));
    }
    if treated == d.len() {
        return Err(Error::SingleArm(1));
    }
    let x = d.covariates();
    let y: Vec<f64> = d.rows().iter().map(|r| f64::from(r.a)).collect();
    let w = vec![1.0; y.len()];
    let (net, _) = approximator::train(&with_input_dim(cfg, d.p()), x.view(), &y, &w, LossKind::BernoulliLogLikelihood)?;
    Ok(PropensityModel { net })
}

/// Fits one hazard kind by maximising the discrete-time likelihood through
/// the person-period expansion.
pub fn fit_hazard(d: &Dataset, kind: HazardKind, cfg: &ApproxConfig) -> Result<HazardModel> {
    if !d.rows().iter().any(|r| kind.indicator(r) == 1) {
        return Err(Error::NoEvents(kind.label()));
    }
    let (feats, labels) = person_period(d, kind);
    let w = vec![1.0; labels.len()];
    let cfg = with_input_dim(cfg, feats.ncols());
    let (net, _) = approximator::train(&cfg, feats.view(), &labels, &w, LossKind::BernoulliLogLikelihood)?;
    Ok(HazardModel::Network {
        kind,
        net,
        p: d.p(),
        t_max: d.t_max(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceConfig {
    pub propensity: ApproxConfig,
    pub hazard_s: ApproxConfig,
    pub hazard_g: ApproxConfig,
    /// Floor for `pi`, `1 - pi`, `S` and `G` wherever they are divided by.
    pub clip_eps: f64,
}

impl NuisanceConfig {
    /// Architecture defaults: three hidden layers of 20 units for every
    /// nuisance network, dropout 0.1 on the propensity network.
    pub fn defaults(seed: u64) -> Self {
        let mut prop = ApproxConfig::new(1, vec![20, 20, 20], OutputActivation::Logistic);
        prop.epochs = 10;
        prop.batch_size = 64;
        prop.learning_rate = 1e-3;
        prop.dropout_rate = 0.1;
        prop.seed = seed;
        let mut haz = ApproxConfig::new(1, vec![20, 20, 20], OutputActivation::Logistic);
        haz.epochs = 40;
        haz.batch_size = 32;
        haz.learning_rate = 3e-4;
        haz.seed = seed.wrapping_add(1);
        let mut haz_g = haz.clone();
        haz_g.seed = seed.wrapping_add(2);
        Self {
            propensity: prop,
            hazard_s: haz,
            hazard_g: haz_g,
            clip_eps: 0.01,
        }
    }

    fn reseeded(&self, offset: u64) -> Self {
        let mut c = self.clone();
        c.propensity.seed = c.propensity.seed.wrapping_add(offset.wrapping_mul(7919));
        c.hazard_s.seed = c.hazard_s.seed.wrapping_add(offset.wrapping_mul(7919));
        c.hazard_g.seed = c.hazard_g.seed.wrapping_add(offset.wrapping_mul(7919));
        c
    }
}

/// Fitted propensity and hazard models.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceSet {
    pub propensity: PropensityModel,
    pub hazard_s: HazardModel,
    pub hazard_g: HazardModel,
    pub clip_eps: f64,
    p: usize,
}

fn fit_hazard_or_zero(d: &Dataset, kind: HazardKind, cfg: &ApproxConfig) -> Result<HazardModel> {
    match fit_hazard(d, kind, cfg) {
        Err(Error::NoEvents(_)) => {
            log::warn!("no {} events in training rows; using a zero hazard", kind.label());
            Ok(HazardModel::Constant {
                kind,
                per_step: vec![0.0; d.t_max() + 1],
            })
        }
        other => other,
    }
}

impl NuisanceSet {
    /// Fits all three nuisances on `d`. A hazard kind without any events is
    /// represented by a zero hazard.
    pub fn fit(d: &Dataset, cfg: &NuisanceConfig) -> Result<Self> {
        Ok(Self {
            propensity: fit_propensity(d, &cfg.propensity)?,
            hazard_s: fit_hazard_or_zero(d, HazardKind::Survival, &cfg.hazard_s)?,
            hazard_g: fit_hazard_or_zero(d, HazardKind::Censoring, &cfg.hazard_g)?,
            clip_eps: cfg.clip_eps,
            p: d.p(),
        })
    }
}

impl NuisanceSource for NuisanceSet {
    fn t_max(&self) -> usize {
        self.hazard_s.t_max()
    }

    fn input_dim(&self) -> usize {
        self.p
    }

    fn propensity(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        self.propensity.predict(x)
    }

    fn hazards(&self, x: ArrayView2<f64>, arm: u8, kind: HazardKind) -> Result<Array2<f64>> {
        match kind {
            HazardKind::Survival => self.hazard_s.predict_curves(x, arm),
            HazardKind::Censoring => self.hazard_g.predict_curves(x, arm),
        }
    }
}

/// Evaluates a source at every row of `x` and applies the clipping rule.
pub fn evaluate_batch(source: &dyn NuisanceSource, x: ArrayView2<f64>, clip_eps: f64) -> Result<Vec<NuisanceAtPoint>> {
    let pi = source.propensity(x)?;
    let hs = [
        source.hazards(x, 0, HazardKind::Survival)?,
        source.hazards(x, 1, HazardKind::Survival)?,
    ];
    let hg = [
        source.hazards(x, 0, HazardKind::Censoring)?,
        source.hazards(x, 1, HazardKind::Censoring)?,
    ];
    Ok((0..x.nrows())
        .map(|i| {
            NuisanceAtPoint::from_hazards(
                pi[i],
                [hs[0].row(i).to_vec(), hs[1].row(i).to_vec()],
                [hg[0].row(i).to_vec(), hg[1].row(i).to_vec()],
                clip_eps,
            )
        })
        .collect())
}

/// Nuisances at a single covariate vector, with the weighting inputs for
/// horizon `t`.
pub fn evaluate(source: &dyn NuisanceSource, x: &[f64], t: usize, clip_eps: f64) -> Result<(NuisanceAtPoint, TildeEta)> {
    let xm = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
    let nap = evaluate_batch(source, xm.view(), clip_eps)?.remove(0);
    let e = nap.tilde_eta(t);
    Ok((nap, e))
}

/// Per-fold nuisance sets; row `i` is always evaluated by the set that was
/// trained without it.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedNuisances {
    fold_of: Vec<usize>,
    sets: Vec<NuisanceSet>,
}

/// Deterministic partition of `0..n` into `k` folds whose sizes differ by at
/// most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; n];
    for (pos, &i) in idx.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    fold_of
}

/// K-fold cross-fitting.
pub fn cross_fit(d: &Dataset, k: usize, cfg: &NuisanceConfig, seed: u64) -> Result<FoldedNuisances> {
    if k < 2 || k > d.len() / 10 {
        return Err(Error::FoldCount { k, n: d.len() });
    }
    let fold_of = fold_assignment(d.len(), k, seed);
    let sets = (0..k)
        .map(|fold| {
            let train: Vec<usize> = (0..d.len()).filter(|&i| fold_of[i] != fold).collect();
            NuisanceSet::fit(&d.subset(&train), &cfg.reseeded(fold as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldedNuisances { fold_of, sets })
}

impl FoldedNuisances {
    /// A single set used for every row (no cross-fitting).
    pub fn single(set: NuisanceSet, n: usize) -> Self {
        Self {
            fold_of: vec![0; n],
            sets: vec![set],
        }
    }

    pub fn n_folds(&self) -> usize {
        self.sets.len()
    }

    pub fn fold_of(&self, row: usize) -> usize {
        self.fold_of[row]
    }

    pub fn sets(&self) -> &[NuisanceSet] {
        &self.sets
    }

    /// Rows the fold-`k` models were trained on.
    pub fn training_indices(&self, k: usize) -> Vec<usize> {
        if self.sets.len() == 1 {
            return (0..self.fold_of.len()).collect();
        }
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != k).collect()
    }

    /// Out-of-fold nuisances for every row of `d`, in row order.
    pub fn evaluate_rows(&self, d: &Dataset) -> Result<Vec<NuisanceAtPoint>> {
        if d.len() != self.fold_of.len() {
            return Err(Error::DimensionMismatch {
                what: "dataset rows",
                expected: self.fold_of.len(),
                got: d.len(),
            });
        }
        let x = d.covariates();
        let mut out: Vec<Option<NuisanceAtPoint>> = vec![None; d.len()];
        for (k, set) in self.sets.iter().enumerate() {
            let rows: Vec<usize> = (0..d.len()).filter(|&i| self.fold_of[i] == k).collect();
            if rows.is_empty() {
                continue;
            }
            let xs = x.select(ndarray::Axis(0), &rows);
            for (i, nap) in rows.into_iter().zip(evaluate_batch(set, xs.view(), set.clip_eps)?) {
                out[i] = Some(nap);
            }
        }
        Ok(out.into_iter().map(|v| v.expect("every row has a fold")).collect())
    }

    /// Average of the fold sets' predictions; used where no row identity
    /// exists (test points).
    pub fn evaluate_points(&self, x: ArrayView2<f64>) -> Result<Vec<NuisanceAtPoint>> {
        let per_fold = self
            .sets
            .iter()
            .map(|s| evaluate_batch(s, x, s.clip_eps))
            .collect::<Result<Vec<_>>>()?;
        if per_fold.len() == 1 {
            return Ok(per_fold.into_iter().next().unwrap());
        }
        let k = per_fold.len() as f64;
        let eps = self.sets[0].clip_eps;
        Ok((0..x.nrows())
            .map(|i| {
                let avg = |f: &dyn Fn(&NuisanceAtPoint) -> &Vec<f64>| -> Vec<f64> {
                    let len = f(&per_fold[0][i]).len();
                    (0..len).map(|t| per_fold.iter().map(|p| f(&p[i])[t]).sum::<f64>() / k).collect()
                };
                let pi = per_fold.iter().map(|p| p[i].pi).sum::<f64>() / k;
                NuisanceAtPoint::from_hazards(
                    pi,
                    [avg(&|n| &n.lambda_s[0]), avg(&|n| &n.lambda_s[1])],
                    [avg(&|n| &n.lambda_g[0]), avg(&|n| &n.lambda_g[1])],
                    eps,
                )
            })
            .collect())
    }
}

/// Evaluates a shared source for every row (e.g. true nuisances).
pub fn evaluate_rows_with(source: &dyn NuisanceSource, d: &Dataset, clip_eps: f64) -> Result<Vec<NuisanceAtPoint>> {
    evaluate_batch(source, d.covariates().view(), clip_eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, GroundTruth, Scenario, ScenarioSpec, Setting};
    use rand::Rng;

    fn tiny_cfg(seed: u64) -> NuisanceConfig {
        let mut c = NuisanceConfig::defaults(seed);
        c.propensity.hidden_layers = vec![4];
        c.propensity.epochs = 2;
        c.hazard_s.hidden_layers = vec![4];
        c.hazard_s.epochs = 2;
        c.hazard_g = c.hazard_s.clone();
        c
    }

    #[test]
    fn constant_zero_hazard_gives_unit_survival() {
        let h = HazardModel::Constant { kind: HazardKind::Survival, per_step: vec![0.0; 4] };
        assert_eq!(survival_curve(&h, &[0.3], 1, 3).unwrap(), vec![1.0; 5]);
    }

    #[test]
    fn survival_curve_is_product_of_complements() {
        let h = HazardModel::Constant { kind: HazardKind::Survival, per_step: vec![0.5, 0.5, 0.5] };
        assert_eq!(survival_curve(&h, &[0.0], 0, 2).unwrap(), vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn single_arm_propensity_is_an_error() {
        let rows = (0..20).map(|i| Observation::new(vec![i as f64], 1, 0, 1, 0)).collect();
        let d = Dataset::new(rows, 3).unwrap();
        assert!(matches!(fit_propensity(&d, &tiny_cfg(0).propensity), Err(Error::SingleArm(1))));
    }

    #[test]
    fn missing_events_are_an_error() {
        let rows = (0..20).map(|i| Observation::new(vec![i as f64], (i % 2) as u8, 3, 1, 0)).collect();
        let d = Dataset::new(rows, 3).unwrap();
        let r = fit_hazard(&d, HazardKind::Censoring, &tiny_cfg(0).hazard_g);
        assert!(matches!(r, Err(Error::NoEvents("censoring"))));
        assert_eq!(r.unwrap_err().to_string(), "no events of this kind (censoring)");
    }

    #[test]
    fn fold_partition_properties() {
        let f = fold_assignment(100, 2, 4);
        assert_eq!(f.iter().filter(|&&k| k == 0).count(), 50);
        assert_eq!(f.iter().filter(|&&k| k == 1).count(), 50);
        assert_eq!(f, fold_assignment(100, 2, 4));
    }

    #[test]
    fn fold_count_is_range_checked() {
        let (d, _) = generate(&ScenarioSpec { scenario: Scenario::One, setting: Setting::FULL, n: 100, seed: 1 });
        assert!(matches!(cross_fit(&d, 100, &tiny_cfg(0), 0), Err(Error::FoldCount { .. })));
        assert!(matches!(cross_fit(&d, 1, &tiny_cfg(0), 0), Err(Error::FoldCount { .. })));
    }

    #[test]
    fn out_of_fold_rows_are_never_in_training() {
        let (d, _) = generate(&ScenarioSpec { scenario: Scenario::One, setting: Setting::FULL, n: 100, seed: 1 });
        let f = cross_fit(&d, 2, &tiny_cfg(1), 9).unwrap();
        for i in 0..d.len() {
            assert!(!f.training_indices(f.fold_of(i)).contains(&i));
        }
        let naps = f.evaluate_rows(&d).unwrap();
        assert_eq!(naps.len(), 100);
    }

    #[test]
    fn evaluation_clips_propensity_and_uses_unit_convention() {
        struct Tiny;
        impl NuisanceSource for Tiny {
            fn t_max(&self) -> usize {
                2
            }
            fn input_dim(&self) -> usize {
                1
            }
            fn propensity(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
                Ok(vec![1e-9; x.nrows()])
            }
            fn hazards(&self, x: ArrayView2<f64>, _arm: u8, _k: HazardKind) -> Result<Array2<f64>> {
                Ok(Array2::from_elem((x.nrows(), 3), 0.2))
            }
        }
        let (nap, e) = evaluate(&Tiny, &[0.0], 0, 0.01).unwrap();
        assert_eq!(nap.pi, 0.01);
        assert_eq!((e.s1_prev, e.s0_prev, e.g1_prev, e.g0_prev), (1.0, 1.0, 1.0, 1.0));
        let h = HazardModel::Constant { kind: HazardKind::Survival, per_step: vec![0.2; 3] };
        let curve = survival_curve(&h, &[0.0], 1, 2).unwrap();
        assert_eq!(&curve[1..], nap.s[1].as_slice());
    }

    #[test]
    fn person_period_likelihood_matches_closed_form() {
        let (d, _) = generate(&ScenarioSpec { scenario: Scenario::One, setting: Setting::FULL, n: 60, seed: 21 });
        let cfg = with_input_dim(&tiny_cfg(3).hazard_s, d.p() + 2 + d.t_max());
        let net = Approximator::new(cfg).unwrap();
        let model = HazardModel::Network { kind: HazardKind::Survival, net: net.clone(), p: 1, t_max: d.t_max() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let r = &d.rows()[rng.gen_range(0..d.len())];
            for kind in [HazardKind::Survival, HazardKind::Censoring] {
                let model = match &model {
                    HazardModel::Network { net, p, t_max, .. } => HazardModel::Network { kind, net: net.clone(), p: *p, t_max: *t_max },
                    _ => unreachable!(),
                };
                let single = Dataset::new_unchecked(vec![r.clone()], d.t_max(), 1);
                let (f, y) = person_period(&single, kind);
                let p = net.predict(f.view()).unwrap();
                let ll: f64 = p.iter().zip(&y).map(|(&q, &l)| l * q.ln() + (1.0 - l) * (1.0 - q).ln()).sum();
                let closed = model.row_log_likelihood(r).unwrap();
                assert!((ll - closed).abs() < 1e-12, "{ll} vs {closed}");
            }
        }
    }

    #[test]
    fn true_source_matches_ground_truth() {
        let gt = GroundTruth::new(Scenario::One, Setting::LOW_SURVIVAL);
        let (nap, _) = evaluate(&gt, &[0.4], 2, 0.01).unwrap();
        assert!((nap.s[1][2] - gt.survival(&[0.4], 1, 2)).abs() < 1e-14);
        assert!((nap.g[0][3] - gt.censoring_survival(&[0.4], 0, 3)).abs() < 1e-14);
    }
}
