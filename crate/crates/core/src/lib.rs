//! Orthogonal learners for heterogeneous treatment effects on discrete-time
//! survival outcomes with censoring.
//!
//! The pipeline: fit nuisances ([`nuisance`]), turn every observation into a
//! weighted pseudo-outcome for a chosen overlap weighting ([`weighting`],
//! [`orthogonal`]) and regress it on covariates ([`second_stage`]).
//! [`synthetic`] provides benchmark data with known effects and
//! [`evaluation`] the metrics and diagnostics.

pub mod approximator;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod nuisance;
pub mod orthogonal;
pub mod second_stage;
pub mod synthetic;
pub mod types;
pub mod weighting;

pub use error::{Error, Result};
pub use types::{Dataset, NuisanceAtPoint, Observation, TildeEta};
pub use weighting::WeightScheme;
