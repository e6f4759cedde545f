//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are comma
//! separated. Network settings use dotted prefixes (`propensity.epochs`,
//! `hazard.learning_rate`, `second_stage.hidden`, ...). `hazard.*` applies to
//! both hazard networks and is overridden by `hazard_s.*` / `hazard_g.*`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::approximator::{ApproxConfig, HiddenActivation, Optimizer};
use crate::error::{Error, Result};
use crate::evaluation::ProbeMode;
use crate::nuisance::NuisanceConfig;
use crate::second_stage::default_second_stage;
use crate::synthetic::{Scenario, Setting};
use crate::weighting::WeightScheme;

/// A second-stage learner: an overlap-weighted orthogonal learner or the
/// plug-in contrast of the fitted survival curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Learner {
    Weighted(WeightScheme),
    PlugIn,
}

impl Learner {
    pub fn name(self) -> &'static str {
        match self {
            Learner::Weighted(s) => s.name(),
            Learner::PlugIn => "plugin",
        }
    }
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "plugin" {
            Ok(Learner::PlugIn)
        } else {
            s.parse().map(Learner::Weighted)
        }
    }
}

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic {
        scenario: Scenario,
        settings: Vec<Setting>,
        n_train: usize,
        n_test: usize,
    },
    /// Observed data without ground truth; PEHE is reported as `nan`.
    Csv { path: PathBuf, t_max: Option<usize> },
}

/// Settings for the `probe` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub n: usize,
    pub horizon: usize,
    pub bins: usize,
    pub epsilons: Vec<f64>,
    pub scale: f64,
    pub direction_seeds: Vec<u64>,
    pub mode: ProbeMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub learners: Vec<Learner>,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    pub propensity: ApproxConfig,
    pub hazard_s: ApproxConfig,
    pub hazard_g: ApproxConfig,
    pub second_stage: ApproxConfig,
    pub clip_eps: f64,
    pub rho_guard: f64,
    pub clamp_negative_rho: bool,
    pub crossfit_k: usize,
    pub out_dir: PathBuf,
    pub probe: ProbeConfig,
}

impl ExperimentConfig {
    /// Defaults for a synthetic scenario: all eight schemes, the scenario's
    /// default horizons and seed 1.
    pub fn synthetic(scenario: Scenario, settings: Vec<Setting>) -> Self {
        let nc = NuisanceConfig::defaults(0);
        Self {
            data: DataSource::Synthetic {
                scenario,
                settings,
                n_train: 30000,
                n_test: 3000,
            },
            learners: WeightScheme::ALL.into_iter().map(Learner::Weighted).collect(),
            horizons: scenario.default_horizons(),
            seeds: vec![1],
            propensity: nc.propensity,
            hazard_s: nc.hazard_s,
            hazard_g: nc.hazard_g,
            second_stage: default_second_stage(0),
            clip_eps: nc.clip_eps,
            rho_guard: 1e-3,
            clamp_negative_rho: false,
            crossfit_k: 2,
            out_dir: PathBuf::from("results"),
            probe: ProbeConfig {
                n: 20000,
                horizon: 3,
                bins: 10,
                epsilons: vec![0.02, 0.04, 0.08, 0.16],
                scale: 0.5,
                direction_seeds: vec![1, 2, 3, 4, 5],
                mode: ProbeMode::Integrated,
            },
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "expected `key = value`"))?;
            let k = k.trim().to_string();
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::config(k, "given more than once"));
            }
        }
        Self::from_map(kv)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn from_map(mut kv: BTreeMap<String, String>) -> Result<Self> {
        let mut take = |k: &str| kv.remove(k);

        let scenario = match take("scenario") {
            Some(v) => Scenario::from_number(parse_num(&v, "scenario")?)?,
            None => Scenario::One,
        };
        let settings = match take("settings") {
            Some(v) => parse_list(&v, "settings")?,
            None => vec![Setting::FULL],
        };
        let mut cfg = Self::synthetic(scenario, settings);

        let data_path = take("data");
        let t_max = take("t_max").map(|v| parse_num(&v, "t_max")).transpose()?;
        if let DataSource::Synthetic { n_train, n_test, .. } = &mut cfg.data {
            if let Some(v) = take("n_train") {
                *n_train = parse_num(&v, "n_train")?;
            }
            if let Some(v) = take("n_test") {
                *n_test = parse_num(&v, "n_test")?;
            }
        }
        if let Some(p) = data_path {
            cfg.data = DataSource::Csv {
                path: PathBuf::from(p),
                t_max,
            };
        }
        if let Some(v) = take("schemes") {
            cfg.learners = parse_list(&v, "schemes")?;
        }
        if let Some(v) = take("horizons") {
            cfg.horizons = parse_list(&v, "horizons")?;
        }
        if let Some(v) = take("seeds") {
            cfg.seeds = parse_list(&v, "seeds")?;
        }
        if let Some(v) = take("clip_eps") {
            cfg.clip_eps = parse_num(&v, "clip_eps")?;
        }
        if let Some(v) = take("rho_guard") {
            cfg.rho_guard = parse_num(&v, "rho_guard")?;
        }
        if let Some(v) = take("clamp_negative_rho") {
            cfg.clamp_negative_rho = parse_num(&v, "clamp_negative_rho")?;
        }
        if let Some(v) = take("crossfit.k") {
            cfg.crossfit_k = parse_num(&v, "crossfit.k")?;
        }
        if let Some(v) = take("out") {
            cfg.out_dir = PathBuf::from(v);
        }
        if let Some(v) = take("probe.n") {
            cfg.probe.n = parse_num(&v, "probe.n")?;
        }
        if let Some(v) = take("probe.horizon") {
            cfg.probe.horizon = parse_num(&v, "probe.horizon")?;
        }
        if let Some(v) = take("probe.bins") {
            cfg.probe.bins = parse_num(&v, "probe.bins")?;
        }
        if let Some(v) = take("probe.epsilons") {
            cfg.probe.epsilons = parse_list(&v, "probe.epsilons")?;
        }
        if let Some(v) = take("probe.scale") {
            cfg.probe.scale = parse_num(&v, "probe.scale")?;
        }
        if let Some(v) = take("probe.mode") {
            cfg.probe.mode = match v.as_str() {
                "integrated" => ProbeMode::Integrated,
                "sampled" => ProbeMode::Sampled,
                _ => return Err(Error::config("probe.mode", format!("expected integrated or sampled, got `{v}`"))),
            };
        }
        if let Some(v) = take("probe.direction_seeds") {
            cfg.probe.direction_seeds = parse_list(&v, "probe.direction_seeds")?;
        }

        // Shared hazard keys first, specific ones override.
        let shared: Vec<(String, String)> = extract_prefix(&mut kv, "hazard.");
        for (k, v) in &shared {
            apply_net_key(&mut cfg.hazard_s, "hazard", k, v)?;
            apply_net_key(&mut cfg.hazard_g, "hazard", k, v)?;
        }
        for (prefix, target) in [
            ("propensity.", &mut cfg.propensity),
            ("hazard_s.", &mut cfg.hazard_s),
            ("hazard_g.", &mut cfg.hazard_g),
            ("second_stage.", &mut cfg.second_stage),
        ] {
            for (k, v) in extract_prefix(&mut kv, prefix) {
                apply_net_key(target, prefix.trim_end_matches('.'), &k, &v)?;
            }
        }

        if let Some(k) = kv.keys().next() {
            return Err(Error::config(k.clone(), "unknown key"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(Error::config("schemes", "at least one scheme is required"));
        }
        if self.horizons.is_empty() {
            return Err(Error::config("horizons", "at least one horizon is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 0.5) {
            return Err(Error::config("clip_eps", "must lie in (0, 0.5)"));
        }
        if !(self.rho_guard >= 0.0) {
            return Err(Error::config("rho_guard", "must be non-negative"));
        }
        if self.crossfit_k < 2 {
            return Err(Error::config("crossfit.k", "must be at least 2"));
        }
        if let DataSource::Synthetic { scenario, settings, n_train, n_test } = &self.data {
            if settings.is_empty() {
                return Err(Error::config("settings", "at least one setting is required"));
            }
            if let Some(h) = self.horizons.iter().find(|&&h| h > scenario.t_max()) {
                return Err(Error::config("horizons", format!("{h} exceeds t_max = {}", scenario.t_max())));
            }
            if *n_train < 10 * self.crossfit_k {
                return Err(Error::config("n_train", "too small for the number of folds"));
            }
            if *n_test == 0 {
                return Err(Error::config("n_test", "must be positive"));
            }
        }
        for (name, c) in [
            ("propensity", &self.propensity),
            ("hazard_s", &self.hazard_s),
            ("hazard_g", &self.hazard_g),
            ("second_stage", &self.second_stage),
        ] {
            c.validate().map_err(|e| match e {
                Error::Config { field, reason } => Error::config(format!("{name}.{field}"), reason),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn nuisance_config(&self, seed: u64) -> NuisanceConfig {
        let mut nc = NuisanceConfig {
            propensity: self.propensity.clone(),
            hazard_s: self.hazard_s.clone(),
            hazard_g: self.hazard_g.clone(),
            clip_eps: self.clip_eps,
        };
        let base = seed.wrapping_mul(1_000_003);
        nc.propensity.seed = base.wrapping_add(11);
        nc.hazard_s.seed = base.wrapping_add(23);
        nc.hazard_g.seed = base.wrapping_add(37);
        nc
    }

    /// Second-stage network seed; depends on the run seed and horizon only,
    /// so learners that coincide produce identical fits.
    pub fn second_stage_config(&self, seed: u64, horizon: usize) -> ApproxConfig {
        let mut c = self.second_stage.clone();
        c.seed = seed.wrapping_mul(7_919).wrapping_add(horizon as u64).wrapping_add(101);
        c
    }
}

fn extract_prefix(kv: &mut BTreeMap<String, String>, prefix: &str) -> Vec<(String, String)> {
    let keys: Vec<String> = kv.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
    keys.into_iter()
        .map(|k| {
            let v = kv.remove(&k).unwrap();
            (k[prefix.len()..].to_string(), v)
        })
        .collect()
}

fn apply_net_key(c: &mut ApproxConfig, prefix: &str, key: &str, v: &str) -> Result<()> {
    let field = format!("{prefix}.{key}");
    match key {
        "hidden" => c.hidden_layers = parse_list(v, &field)?,
        "epochs" => c.epochs = parse_num(v, &field)?,
        "batch_size" => c.batch_size = parse_num(v, &field)?,
        "learning_rate" => c.learning_rate = parse_num(v, &field)?,
        "dropout" => c.dropout_rate = parse_num(v, &field)?,
        "patience" => c.patience = parse_num(v, &field)?,
        "activation" => {
            c.hidden_activation = match v {
                "logistic" => HiddenActivation::Logistic,
                "tanh" => HiddenActivation::Tanh,
                "relu" => HiddenActivation::Relu,
                _ => return Err(Error::config(field, format!("unknown activation `{v}`"))),
            }
        }
        "optimizer" => {
            c.optimizer = match v {
                "adam" => Optimizer::Adam,
                "sgd" => Optimizer::Sgd,
                _ => return Err(Error::config(field, format!("unknown optimizer `{v}`"))),
            }
        }
        _ => return Err(Error::config(field, "unknown key")),
    }
    Ok(())
}

fn parse_num<T: FromStr>(v: &str, field: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{}`", v.trim())))
}

fn parse_list<T: FromStr>(v: &str, field: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::config(field, format!("cannot parse `{s}`"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let c = ExperimentConfig::parse("scenario = 1\nsettings = low_censoring\nschemes = none, c, plugin\nhorizons = 0,1\nseeds = 3\n").unwrap();
        assert_eq!(c.learners, vec![Learner::Weighted(WeightScheme::None), Learner::Weighted(WeightScheme::C), Learner::PlugIn]);
        assert_eq!(c.horizons, vec![0, 1]);
        assert!(matches!(c.data, DataSource::Synthetic { ref settings, .. } if settings == &vec![Setting::LOW_CENSORING]));
    }

    #[test]
    fn bogus_scheme_names_the_field() {
        let e = ExperimentConfig::parse("schemes = bogus").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "schemes"), "{e}");
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(matches!(ExperimentConfig::parse("colour = red"), Err(Error::Config { field, .. }) if field == "colour"));
        assert!(ExperimentConfig::parse("seeds = 1\nseeds = 2").is_err());
        assert!(matches!(ExperimentConfig::parse("hazard.wings = 2"), Err(Error::Config { field, .. }) if field == "hazard.wings"));
    }

    #[test]
    fn empty_lists_are_rejected() {
        assert!(matches!(ExperimentConfig::parse("seeds = "), Err(Error::Config { field, .. }) if field == "seeds"));
        assert!(matches!(ExperimentConfig::parse("horizons = 9"), Err(Error::Config { field, .. }) if field == "horizons"));
    }

    #[test]
    fn specific_hazard_keys_override_shared_ones() {
        let c = ExperimentConfig::parse("hazard.epochs = 3\nhazard_g.epochs = 7\nsecond_stage.hidden = 8, 8\n").unwrap();
        assert_eq!((c.hazard_s.epochs, c.hazard_g.epochs), (3, 7));
        assert_eq!(c.second_stage.hidden_layers, vec![8, 8]);
    }

    #[test]
    fn nested_validation_errors_carry_the_prefix() {
        let e = ExperimentConfig::parse("propensity.learning_rate = -1").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "propensity.learning_rate"), "{e}");
    }

    #[test]
    fn second_stage_seed_ignores_the_learner() {
        let c = ExperimentConfig::synthetic(Scenario::One, vec![Setting::FULL]);
        assert_eq!(c.second_stage_config(4, 2).seed, c.second_stage_config(4, 2).seed);
        assert_ne!(c.second_stage_config(4, 2).seed, c.second_stage_config(4, 3).seed);
    }
}
