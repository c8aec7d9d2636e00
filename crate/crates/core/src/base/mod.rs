//! Shared numeric foundation: Gaussian tail functions, unit conversions and
//! the receiver noise model.

mod params;
mod qfunc;
mod units;

pub use params::{NoiseProfile, ReliabilityTarget, ScenarioParams};
pub use qfunc::{inverse_q, inverse_q_log, log_q_function, q_function};
pub use units::{dbm_to_watts, thermal_noise_watts, watts_to_dbm, BOLTZMANN};

pub(crate) use qfunc::{inv_q_log_raw, inv_q_raw, log_q_raw, q_raw};
