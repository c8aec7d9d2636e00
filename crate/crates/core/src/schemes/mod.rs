//! Closed-form performance of the three detectors and the per-sample
//! decision rules they run.

mod adasense;
mod bmac;
mod single_phase;

use std::fmt;
use std::str::FromStr;

pub use adasense::{decide_adasense, eval_adasense, AdaSenseConfig};
pub use bmac::{bmac_stopping_time_pmf, decide_bmac, eval_bmac, BmacConfig};
pub use single_phase::{decide_single_phase, eval_single_phase, llr_statistic, SinglePhaseConfig};

use crate::base::{NoiseProfile, ScenarioParams};
use crate::error::{Error, Result};

/// Exact detector performance. Energies are in Watt-samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfReport {
    pub p_fa: f64,
    pub p_miss: f64,
    pub energy: f64,
    /// Probability of entering the confirmation phase (AdaSense only).
    pub p_continue: Option<f64>,
    /// `ln p_fa`, finite even when `p_fa` underflows.
    pub ln_p_fa: f64,
    /// `ln p_miss`, finite even when `p_miss` underflows.
    pub ln_p_miss: f64,
}

impl PerfReport {
    pub(crate) fn from_logs(ln_p_fa: f64, ln_p_miss: f64, energy: f64, p_continue: Option<f64>) -> Self {
        Self {
            p_fa: ln_p_fa.exp().clamp(0.0, 1.0),
            p_miss: ln_p_miss.exp().clamp(0.0, 1.0),
            energy,
            p_continue,
            ln_p_fa,
            ln_p_miss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hypothesis {
    /// No preamble.
    H0,
    /// Preamble present.
    H1,
}

/// What a decision rule concluded and what it cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub decision: Hypothesis,
    pub samples_consumed: usize,
    pub energy: f64,
    pub entered_second_phase: bool,
}

/// A channel that hands out samples on demand. The caller states the noise
/// variance the receiver is configured for when it takes each sample.
pub trait SampleSource {
    fn observe(&mut self, noise_variance: f64) -> Option<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    SinglePhase,
    Bmac,
    AdaSense,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::SinglePhase, Scheme::Bmac, Scheme::AdaSense];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::SinglePhase => "single-phase",
            Scheme::Bmac => "bmac",
            Scheme::AdaSense => "adasense",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single-phase" | "single_phase" | "single" => Ok(Scheme::SinglePhase),
            "bmac" => Ok(Scheme::Bmac),
            "adasense" | "ada" => Ok(Scheme::AdaSense),
            other => Err(Error::Domain(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Full parameterization of one detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeConfig {
    SinglePhase(SinglePhaseConfig),
    Bmac(BmacConfig),
    AdaSense(AdaSenseConfig),
}

impl SchemeConfig {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeConfig::SinglePhase(_) => Scheme::SinglePhase,
            SchemeConfig::Bmac(_) => Scheme::Bmac,
            SchemeConfig::AdaSense(_) => Scheme::AdaSense,
        }
    }

    pub fn evaluate(&self, scenario: &ScenarioParams, profile: &NoiseProfile) -> Result<PerfReport> {
        match self {
            SchemeConfig::SinglePhase(c) => eval_single_phase(c, scenario, profile),
            SchemeConfig::Bmac(c) => eval_bmac(c, scenario, profile),
            SchemeConfig::AdaSense(c) => eval_adasense(c, scenario, profile),
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Tail arguments of an LLR test on `len` samples at noise `sigma_sq` with
/// threshold `eta`: `(false-alarm argument, miss argument)`.
pub(crate) fn llr_tail_arguments(len: usize, received_power: f64, sigma_sq: f64, eta: f64) -> (f64, f64) {
    let deflection = (len as f64 * received_power / sigma_sq).sqrt();
    let shift = eta / deflection;
    (shift + 0.5 * deflection, -shift + 0.5 * deflection)
}

pub(crate) fn check_power(name: &str, p: f64) -> Result<()> {
    crate::error::ensure(p > 0.0 && p.is_finite(), || format!("{name} = {p} W must be positive"))
}

pub(crate) fn check_finite(name: &str, v: f64) -> Result<()> {
    crate::error::ensure(!v.is_nan(), || format!("{name} must not be NaN"))
}
