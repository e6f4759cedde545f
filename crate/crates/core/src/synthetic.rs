//! Synthetic benchmark processes with known nuisances and effects.
//!
//! Scenario 1 has a single standard-normal confounder on the grid `0..=5`;
//! Scenario 2 has ten independent standard-normal confounders on `0..=30`.
//! Each comes in a full-overlap version and with any combination of three
//! overlap violations (treatment, censoring, survival), each of which swaps
//! exactly one generating function.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::nuisance::{HazardKind, NuisanceSource};
use crate::types::{Dataset, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    One,
    Two,
}

impl Scenario {
    pub fn t_max(self) -> usize {
        match self {
            Scenario::One => 5,
            Scenario::Two => 30,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Scenario::One => 1,
            Scenario::Two => 10,
        }
    }

    /// Horizons at which results are reported by default.
    pub fn default_horizons(self) -> Vec<usize> {
        match self {
            Scenario::One => (0..=5).collect(),
            Scenario::Two => vec![0, 5, 10, 15],
        }
    }

    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Scenario::One),
            2 => Ok(Scenario::Two),
            _ => Err(Error::config("scenario", format!("expected 1 or 2, got {n}"))),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            Scenario::One => 1,
            Scenario::Two => 2,
        }
    }
}

/// Which generating functions are replaced by their low-overlap versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Setting {
    pub low_treatment: bool,
    pub low_censoring: bool,
    pub low_survival: bool,
}

impl Setting {
    pub const FULL: Setting = Setting {
        low_treatment: false,
        low_censoring: false,
        low_survival: false,
    };
    pub const LOW_TREATMENT: Setting = Setting {
        low_treatment: true,
        ..Setting::FULL
    };
    pub const LOW_CENSORING: Setting = Setting {
        low_censoring: true,
        ..Setting::FULL
    };
    pub const LOW_SURVIVAL: Setting = Setting {
        low_survival: true,
        ..Setting::FULL
    };
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.low_treatment {
            parts.push("low_treatment");
        }
        if self.low_censoring {
            parts.push("low_censoring");
        }
        if self.low_survival {
            parts.push("low_survival");
        }
        if parts.is_empty() {
            f.write_str("full")
        } else {
            f.write_str(&parts.join("+"))
        }
    }
}

impl FromStr for Setting {
    type Err = Error;

    /// Accepts `full`, a single violation name, or several joined with `+`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "full" {
            return Ok(Setting::FULL);
        }
        let mut out = Setting::FULL;
        for part in s.split('+') {
            match part.trim() {
                "low_treatment" => out.low_treatment = true,
                "low_censoring" => out.low_censoring = true,
                "low_survival" => out.low_survival = true,
                other => return Err(Error::config("setting", format!("unknown setting `{other}`"))),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub setting: Setting,
    pub n: usize,
    pub seed: u64,
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// True generating functions of one scenario/setting pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundTruth {
    pub scenario: Scenario,
    pub setting: Setting,
}

impl GroundTruth {
    pub fn new(scenario: Scenario, setting: Setting) -> Self {
        Self { scenario, setting }
    }

    pub fn t_max(&self) -> usize {
        self.scenario.t_max()
    }

    pub fn pi(&self, x: &[f64]) -> f64 {
        match self.scenario {
            Scenario::One => {
                if self.setting.low_treatment {
                    sigmoid(2.0 * x[0])
                } else {
                    0.5 * sigmoid(x[0]) + 0.2 * sigmoid(-x[0])
                }
            }
            Scenario::Two => {
                if self.setting.low_treatment {
                    sigmoid(3.0 * x[0])
                } else {
                    sigmoid(x.iter().sum())
                }
            }
        }
    }

    pub fn lambda_s(&self, x: &[f64], a: u8, t: usize) -> f64 {
        let a = f64::from(a);
        let t = t as f64;
        match self.scenario {
            Scenario::One => {
                if self.setting.low_survival {
                    sigmoid(-a * x[0] / (t + 1.0))
                } else {
                    0.5 * sigmoid(x[0] - t)
                }
            }
            Scenario::Two => {
                let s: f64 = x.iter().sum();
                let base = if t <= 10.0 { -0.5 * s * s } else { 10.0 * s * s };
                let shift = if self.setting.low_survival {
                    a * (0.5 + if s >= 0.0 { 1.0 } else { 0.0 })
                } else {
                    0.0
                };
                0.1 * sigmoid(base - shift)
            }
        }
    }

    pub fn lambda_g(&self, x: &[f64], a: u8, t: usize) -> f64 {
        let a = f64::from(a);
        let t = t as f64;
        match self.scenario {
            Scenario::One => {
                if self.setting.low_censoring {
                    sigmoid(1.5 * (x[0] + t))
                } else {
                    0.5 * sigmoid(x[0] + t)
                }
            }
            Scenario::Two => {
                if self.setting.low_censoring {
                    let s: f64 = x.iter().sum();
                    0.1 * sigmoid(10.0 * s + a * t)
                } else {
                    0.0
                }
            }
        }
    }

    /// `S_t(x, a)`; `t = -1` gives 1.
    pub fn survival(&self, x: &[f64], a: u8, t: isize) -> f64 {
        (0..=t).map(|i| 1.0 - self.lambda_s(x, a, i as usize)).product()
    }

    /// `G_t(x, a)`; `t = -1` gives 1.
    pub fn censoring_survival(&self, x: &[f64], a: u8, t: isize) -> f64 {
        (0..=t).map(|i| 1.0 - self.lambda_g(x, a, i as usize)).product()
    }
}

/// `tau_t(x) = S_t(x, 1) - S_t(x, 0)` from the true hazards.
pub fn true_cate(gt: &GroundTruth, x: &[f64], t: usize) -> f64 {
    gt.survival(x, 1, t as isize) - gt.survival(x, 0, t as isize)
}

/// Restricted-mean effect `sum_{t<=h} tau_t(x)`.
pub fn true_rmst_effect(gt: &GroundTruth, x: &[f64], h: usize) -> f64 {
    (0..=h).map(|t| true_cate(gt, x, t)).sum()
}

impl NuisanceSource for GroundTruth {
    fn t_max(&self) -> usize {
        self.scenario.t_max()
    }

    fn input_dim(&self) -> usize {
        self.scenario.dim()
    }

    fn propensity(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(x.rows().into_iter().map(|r| self.pi(r.as_slice().unwrap_or(&r.to_vec()))).collect())
    }

    fn hazards(&self, x: ArrayView2<f64>, arm: u8, kind: HazardKind) -> Result<Array2<f64>> {
        let tm = self.scenario.t_max();
        let mut out = Array2::zeros((x.nrows(), tm + 1));
        for (i, r) in x.rows().into_iter().enumerate() {
            let row = r.to_vec();
            for t in 0..=tm {
                out[[i, t]] = match kind {
                    HazardKind::Survival => self.lambda_s(&row, arm, t),
                    HazardKind::Censoring => self.lambda_g(&row, arm, t),
                };
            }
        }
        Ok(out)
    }
}

/// Draws `n` covariate vectors.
pub fn generate_covariates(scenario: Scenario, n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, scenario.dim()), |_| rng.sample(StandardNormal))
}

/// Simulates a dataset. Event and censoring are drawn independently at each
/// step from their hazards; a unit with neither by `t_max` is recorded as
/// censored at `t_max`.
pub fn generate(spec: &ScenarioSpec) -> (Dataset, GroundTruth) {
    let gt = GroundTruth::new(spec.scenario, spec.setting);
    let t_max = spec.scenario.t_max();
    let p = spec.scenario.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let a = u8::from(rng.gen::<f64>() < gt.pi(&x));
        let mut obs = None;
        for t in 0..=t_max {
            let event = rng.gen::<f64>() < gt.lambda_s(&x, a, t);
            let cens = rng.gen::<f64>() < gt.lambda_g(&x, a, t);
            if event || cens {
                obs = Some(Observation::new(x.clone(), a, t, u8::from(event), u8::from(cens)));
                break;
            }
        }
        rows.push(obs.unwrap_or_else(|| Observation::new(x, a, t_max, 0, 1)));
    }
    let d = Dataset::new_unchecked(rows, t_max, p);
    (d, gt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_overlap_scenario_one_has_zero_effect() {
        let gt = GroundTruth::new(Scenario::One, Setting::FULL);
        for &x in &[-2.0, -0.3, 0.0, 1.7] {
            for t in 0..=5 {
                assert_eq!(true_cate(&gt, &[x], t), 0.0);
            }
        }
    }

    #[test]
    fn low_survival_effect_at_time_zero() {
        let gt = GroundTruth::new(Scenario::One, Setting::LOW_SURVIVAL);
        let expected = sigmoid(0.0) - sigmoid(-1.0);
        assert!((true_cate(&gt, &[1.0], 0) - expected).abs() < 1e-15);
        assert!((expected - 0.2311).abs() < 1e-4);
    }

    #[test]
    fn effects_are_differences_of_probabilities() {
        for sc in [Scenario::One, Scenario::Two] {
            for st in [Setting::FULL, Setting::LOW_TREATMENT, Setting::LOW_CENSORING, Setting::LOW_SURVIVAL] {
                let gt = GroundTruth::new(sc, st);
                let xs = generate_covariates(sc, 50, 3);
                for r in xs.rows() {
                    for t in 0..=sc.t_max() {
                        let v = true_cate(&gt, r.as_slice().unwrap(), t);
                        assert!((-1.0..=1.0).contains(&v));
                    }
                }
            }
        }
    }

    #[test]
    fn propensity_at_zero() {
        let gt = GroundTruth::new(Scenario::One, Setting::FULL);
        assert!((gt.pi(&[0.0]) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn generated_rows_are_valid_and_deterministic() {
        let spec = ScenarioSpec { scenario: Scenario::One, setting: Setting::LOW_CENSORING, n: 2000, seed: 5 };
        let (a, _) = generate(&spec);
        let (b, _) = generate(&spec);
        assert_eq!(a, b);
        assert!(crate::types::validate_dataset(&a).is_empty());
    }

    #[test]
    fn ties_occur_when_both_hazards_are_positive() {
        let spec = ScenarioSpec { scenario: Scenario::One, setting: Setting::FULL, n: 30000, seed: 1 };
        let (d, _) = generate(&spec);
        assert!(d.rows().iter().any(|r| r.delta_s == 1 && r.delta_g == 1));
    }

    #[test]
    fn scenario_two_full_is_censored_only_at_grid_end() {
        let spec = ScenarioSpec { scenario: Scenario::Two, setting: Setting::FULL, n: 3000, seed: 2 };
        let (d, _) = generate(&spec);
        for r in d.rows() {
            if r.delta_g == 1 {
                assert_eq!((r.t_tilde, r.delta_s), (30, 0));
            } else {
                assert_eq!(r.delta_s, 1);
            }
        }
    }

    #[test]
    fn low_treatment_balance_near_zero() {
        let spec = ScenarioSpec { scenario: Scenario::One, setting: Setting::LOW_TREATMENT, n: 100_000, seed: 8 };
        let (d, _) = generate(&spec);
        let near: Vec<_> = d.rows().iter().filter(|r| r.x[0].abs() < 0.1).collect();
        let frac = near.iter().filter(|r| r.a == 1).count() as f64 / near.len() as f64;
        assert!((frac - 0.5).abs() < 0.05, "{frac}");
    }

    #[test]
    fn empirical_hazards_match_truth() {
        let spec = ScenarioSpec { scenario: Scenario::One, setting: Setting::FULL, n: 200_000, seed: 13 };
        let (d, gt) = generate(&spec);
        for &x0 in &[-1.0, 0.0, 1.0] {
            for t in 0..=2usize {
                let at_risk: Vec<_> = d.rows().iter().filter(|r| (r.x[0] - x0).abs() < 0.1 && r.t_tilde >= t).collect();
                let events = at_risk.iter().filter(|r| r.t_tilde == t && r.delta_s == 1).count() as f64;
                let m = at_risk.len() as f64;
                let freq = events / m;
                // Hazards vary with x inside the window, so compare against the
                // window-average of the at-risk units' true hazards.
                let expect: f64 = at_risk.iter().map(|r| gt.lambda_s(&r.x, r.a, t)).sum::<f64>() / m;
                let se = (expect * (1.0 - expect) / m).sqrt();
                assert!((freq - expect).abs() <= 3.0 * se, "x0={x0} t={t}: {freq} vs {expect} (se {se})");
                assert!((expect - gt.lambda_s(&[x0], 0, t)).abs() < 0.01);
            }
        }
    }

    #[test]
    fn setting_parsing() {
        assert_eq!("full".parse::<Setting>().unwrap(), Setting::FULL);
        let s: Setting = "low_censoring+low_survival".parse().unwrap();
        assert!(s.low_censoring && s.low_survival && !s.low_treatment);
        assert_eq!(s.to_string(), "low_censoring+low_survival");
        assert!("nope".parse::<Setting>().is_err());
    }
}
