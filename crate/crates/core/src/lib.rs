//! Energy-aware channel sensing.
//!
//! Models three preamble detectors (a fixed-length LLR test, BMAC-style
//! per-sample thresholding and the two-phase adaptive AdaSense scheme) under
//! a receiver whose noise variance falls with its power consumption. The
//! crate evaluates their error probabilities and expected energy in closed
//! form, solves for minimum-energy configurations under reliability targets,
//! checks the results with a Monte-Carlo oracle and tracks the asymptotic
//! energy scaling.

pub mod asymptotics;
pub mod base;
pub mod cli;
pub mod montecarlo;
mod error;
pub mod schemes;
pub mod solvers;

pub use error::{Error, Result};
