// SPDX-License-Identifier: Apache-2.0

//! Confidence intervals and estimators for binomial, Poisson and random-graph
//! data when an unknown fraction of the observations is adversarial.
//!
//! The main entry points are [`binomial::robust_ci`] and
//! [`poisson::robust_ci_pois`]; both adapt to the actual contamination level
//! while remaining valid for anything up to the configured cap `eps_max`.

pub mod adversary;
pub mod binomial;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod grid;
pub mod interval;
pub mod poisson;
pub mod sample;
pub mod sim;

pub use error::{Error, Result};
pub use interval::{CiWarning, ConfidenceInterval, Method};
pub use sample::SampleSet;
