//! Shared data model: observed rows, datasets on a discrete time grid, and
//! nuisance values evaluated at a single covariate vector.
//!
//! Time is the closed integer grid `0..=t_max`. A row records the observed
//! time `t_tilde = min(T, C)` plus two indicators; a tie (`T == C`) keeps both
//! indicators set.

use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};

/// One observed unit `(x, a, t_tilde, delta_s, delta_g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Vec<f64>,
    pub a: u8,
    pub t_tilde: usize,
    pub delta_s: u8,
    pub delta_g: u8,
}

impl Observation {
    pub fn new(x: Vec<f64>, a: u8, t_tilde: usize, delta_s: u8, delta_g: u8) -> Self {
        Self {
            x,
            a,
            t_tilde,
            delta_s,
            delta_g,
        }
    }

    #[inline]
    pub fn arm(&self) -> usize {
        usize::from(self.a == 1)
    }

    #[inline]
    pub fn event(&self) -> bool {
        self.delta_s == 1
    }

    #[inline]
    pub fn censored(&self) -> bool {
        self.delta_g == 1
    }
}

/// What is wrong with a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NoIndicator,
    TimeExceedsGrid,
    DimensionMismatch,
    TreatmentOutOfRange,
    IndicatorOutOfRange,
    NonFiniteCovariate,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ViolationKind::NoIndicator => "no event indicator set",
            ViolationKind::TimeExceedsGrid => "time exceeds grid",
            ViolationKind::DimensionMismatch => "covariate dimension mismatch",
            ViolationKind::TreatmentOutOfRange => "treatment not in {0,1}",
            ViolationKind::IndicatorOutOfRange => "indicator not in {0,1}",
            ViolationKind::NonFiniteCovariate => "non-finite covariate",
        };
        f.write_str(msg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub row: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {}", self.row, self.kind)
    }
}

/// A collection of observations sharing a covariate dimension and time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Observation>,
    t_max: usize,
    p: usize,
}

impl Dataset {
    /// Builds a dataset and rejects it if any row violates the data model.
    pub fn new(rows: Vec<Observation>, t_max: usize) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.x.len());
        let d = Self { rows, t_max, p };
        let violations = validate_dataset(&d);
        if let Some(first) = violations.first() {
            return Err(Error::InvalidDataset(format!(
                "{} violation(s), first: {first}",
                violations.len()
            )));
        }
        Ok(d)
    }

    /// Builds a dataset without checking row invariants. Use
    /// [`validate_dataset`] before handing the result to a fitter.
    pub fn new_unchecked(rows: Vec<Observation>, t_max: usize, p: usize) -> Self {
        Self { rows, t_max, p }
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// Covariate dimension.
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            t_max: self.t_max,
            p: self.p,
        }
    }

    /// Covariates as an `n x p` matrix.
    pub fn covariates(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.rows.len(), self.p));
        for (i, r) in self.rows.iter().enumerate() {
            for (j, &v) in r.x.iter().enumerate() {
                m[[i, j]] = v;
            }
        }
        m
    }

    pub fn treated_count(&self) -> usize {
        self.rows.iter().filter(|r| r.a == 1).count()
    }
}

/// Lists every invariant violation together with its row index.
pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    for (row, r) in d.rows.iter().enumerate() {
        let mut push = |kind| out.push(Violation { row, kind });
        if r.x.len() != d.p {
            push(ViolationKind::DimensionMismatch);
        }
        if r.x.iter().any(|v| !v.is_finite()) {
            push(ViolationKind::NonFiniteCovariate);
        }
        if r.a > 1 {
            push(ViolationKind::TreatmentOutOfRange);
        }
        if r.delta_s > 1 || r.delta_g > 1 {
            push(ViolationKind::IndicatorOutOfRange);
        }
        if r.delta_s == 0 && r.delta_g == 0 {
            push(ViolationKind::NoIndicator);
        }
        if r.t_tilde > d.t_max {
            push(ViolationKind::TimeExceedsGrid);
        }
    }
    out
}

/// Running product `prod_{i<=k} (1 - hazard_i)` for every `k`.
pub fn survival_from_hazards(hazards: &[f64]) -> Vec<f64> {
    let mut acc = 1.0;
    hazards
        .iter()
        .map(|h| {
            acc *= 1.0 - h;
            acc
        })
        .collect()
}

/// Nuisance components at the previous step that enter a weighting function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildeEta {
    pub pi: f64,
    pub s1_prev: f64,
    pub s0_prev: f64,
    pub g1_prev: f64,
    pub g0_prev: f64,
}

impl TildeEta {
    pub fn new(pi: f64, s1_prev: f64, s0_prev: f64, g1_prev: f64, g0_prev: f64) -> Self {
        Self {
            pi,
            s1_prev,
            s0_prev,
            g1_prev,
            g0_prev,
        }
    }

    pub fn s_prev(&self, arm: usize) -> f64 {
        if arm == 1 {
            self.s1_prev
        } else {
            self.s0_prev
        }
    }

    pub fn g_prev(&self, arm: usize) -> f64 {
        if arm == 1 {
            self.g1_prev
        } else {
            self.g0_prev
        }
    }
}

/// Propensity and both hazard curves (for both arms) at one covariate vector,
/// with survival curves derived from the hazards.
///
/// `pi` is stored already clipped to `[clip_eps, 1 - clip_eps]`. The survival
/// curves `s` and `g` are exact products; the `*_floor` accessors return the
/// values floored at `clip_eps` for use in denominators.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceAtPoint {
    pub pi: f64,
    pub lambda_s: [Vec<f64>; 2],
    pub lambda_g: [Vec<f64>; 2],
    pub s: [Vec<f64>; 2],
    pub g: [Vec<f64>; 2],
    pub clip_eps: f64,
}

impl NuisanceAtPoint {
    /// `lambda_s[a][t]`, `lambda_g[a][t]` for `t` in `0..=t_max`.
    pub fn from_hazards(
        pi_raw: f64,
        lambda_s: [Vec<f64>; 2],
        lambda_g: [Vec<f64>; 2],
        clip_eps: f64,
    ) -> Self {
        debug_assert_eq!(lambda_s[0].len(), lambda_s[1].len());
        debug_assert_eq!(lambda_s[0].len(), lambda_g[0].len());
        let s = [
            survival_from_hazards(&lambda_s[0]),
            survival_from_hazards(&lambda_s[1]),
        ];
        let g = [
            survival_from_hazards(&lambda_g[0]),
            survival_from_hazards(&lambda_g[1]),
        ];
        Self {
            pi: pi_raw.clamp(clip_eps, 1.0 - clip_eps),
            lambda_s,
            lambda_g,
            s,
            g,
            clip_eps,
        }
    }

    pub fn t_max(&self) -> usize {
        self.lambda_s[0].len() - 1
    }

    /// `S_i(x, arm)` with `S_{-1} = 1`.
    #[inline]
    pub fn s_at(&self, arm: usize, i: isize) -> f64 {
        if i < 0 {
            1.0
        } else {
            self.s[arm][i as usize]
        }
    }

    /// `G_i(x, arm)` with `G_{-1} = 1`.
    #[inline]
    pub fn g_at(&self, arm: usize, i: isize) -> f64 {
        if i < 0 {
            1.0
        } else {
            self.g[arm][i as usize]
        }
    }

    #[inline]
    pub fn s_floor(&self, arm: usize, i: isize) -> f64 {
        self.s_at(arm, i).max(self.clip_eps)
    }

    #[inline]
    pub fn g_floor(&self, arm: usize, i: isize) -> f64 {
        self.g_at(arm, i).max(self.clip_eps)
    }

    /// Weighting inputs for horizon `t`, read at index `t - 1`.
    pub fn tilde_eta(&self, t: usize) -> TildeEta {
        let prev = t as isize - 1;
        TildeEta {
            pi: self.pi,
            s1_prev: self.s_floor(1, prev),
            s0_prev: self.s_floor(0, prev),
            g1_prev: self.g_floor(1, prev),
            g0_prev: self.g_floor(0, prev),
        }
    }
}
