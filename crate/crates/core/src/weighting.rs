//! Overlap weighting functions `f(tilde_eta)` and their partial derivatives.
//!
//! Each scheme is a product of up to three factors: treatment overlap
//! `pi (1 - pi)`, censoring overlap `G1 G0` and survival overlap `S1 S0`,
//! all read at the previous time step.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::types::TildeEta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightScheme {
    None,
    T,
    C,
    S,
    TC,
    TS,
    CS,
    TCS,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 8] = [
        WeightScheme::None,
        WeightScheme::T,
        WeightScheme::C,
        WeightScheme::S,
        WeightScheme::TC,
        WeightScheme::TS,
        WeightScheme::CS,
        WeightScheme::TCS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::None => "none",
            WeightScheme::T => "t",
            WeightScheme::C => "c",
            WeightScheme::S => "s",
            WeightScheme::TC => "tc",
            WeightScheme::TS => "ts",
            WeightScheme::CS => "cs",
            WeightScheme::TCS => "tcs",
        }
    }

    pub fn uses_treatment(self) -> bool {
        matches!(self, WeightScheme::T | WeightScheme::TC | WeightScheme::TS | WeightScheme::TCS)
    }

    pub fn uses_censoring(self) -> bool {
        matches!(self, WeightScheme::C | WeightScheme::TC | WeightScheme::CS | WeightScheme::TCS)
    }

    pub fn uses_survival(self) -> bool {
        matches!(self, WeightScheme::S | WeightScheme::TS | WeightScheme::CS | WeightScheme::TCS)
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WeightScheme::ALL
            .into_iter()
            .find(|w| w.name() == s.trim())
            .ok_or_else(|| Error::config("schemes", format!("unknown scheme `{s}`")))
    }
}

/// `f` together with its partials with respect to the five inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPartials {
    pub f_value: f64,
    pub d_pi: f64,
    pub d_s1: f64,
    pub d_s0: f64,
    pub d_g1: f64,
    pub d_g0: f64,
}

impl WeightPartials {
    /// Partial with respect to `S_{t-1}(., arm)`.
    pub fn d_s(&self, arm: usize) -> f64 {
        if arm == 1 {
            self.d_s1
        } else {
            self.d_s0
        }
    }

    /// Partial with respect to `G_{t-1}(., arm)`.
    pub fn d_g(&self, arm: usize) -> f64 {
        if arm == 1 {
            self.d_g1
        } else {
            self.d_g0
        }
    }
}

pub fn weight(scheme: WeightScheme, e: &TildeEta) -> f64 {
    weight_partials(scheme, e).f_value
}

pub fn weight_partials(scheme: WeightScheme, e: &TildeEta) -> WeightPartials {
    // f = T * C * S with absent factors equal to one.
    let (t, dt) = if scheme.uses_treatment() {
        (e.pi * (1.0 - e.pi), 1.0 - 2.0 * e.pi)
    } else {
        (1.0, 0.0)
    };
    let c = if scheme.uses_censoring() { e.g1_prev * e.g0_prev } else { 1.0 };
    let s = if scheme.uses_survival() { e.s1_prev * e.s0_prev } else { 1.0 };

    let (d_g1, d_g0) = if scheme.uses_censoring() {
        (t * s * e.g0_prev, t * s * e.g1_prev)
    } else {
        (0.0, 0.0)
    };
    let (d_s1, d_s0) = if scheme.uses_survival() {
        (t * c * e.s0_prev, t * c * e.s1_prev)
    } else {
        (0.0, 0.0)
    };
    WeightPartials {
        f_value: t * c * s,
        d_pi: dt * c * s,
        d_s1,
        d_s0,
        d_g1,
        d_g0,
    }
}
