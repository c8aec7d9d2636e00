use super::{check_finite, check_power, llr_tail_arguments, Hypothesis, Outcome, PerfReport};
use crate::base::{log_q_raw, NoiseProfile, ScenarioParams};
use crate::error::{ensure, Error, Result};

/// Fixed-length LLR test on `n` samples at constant receiver power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhaseConfig {
    pub n: usize,
    pub receiver_power_watts: f64,
    /// Threshold on the LLR statistic.
    pub threshold: f64,
}

impl SinglePhaseConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.n >= 1, || "single-phase: n must be at least 1".into())?;
        check_power("single-phase receiver power", self.receiver_power_watts)?;
        check_finite("single-phase threshold", self.threshold)
    }
}

/// Log-likelihood ratio of i.i.d. samples between `N(sqrt(P), s^2)` and `N(0, s^2)`.
pub fn llr_statistic(samples: &[f64], received_power: f64, noise_variance: f64) -> f64 {
    let sum: f64 = samples.iter().sum();
    received_power.sqrt() / noise_variance * sum - samples.len() as f64 * received_power / (2.0 * noise_variance)
}

pub fn eval_single_phase(
    cfg: &SinglePhaseConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
) -> Result<PerfReport> {
    cfg.validate()?;
    let sigma_sq = profile.noise_variance(cfg.receiver_power_watts)?;
    let (fa_arg, miss_arg) =
        llr_tail_arguments(cfg.n, scenario.received_power_watts(), sigma_sq, cfg.threshold);
    Ok(PerfReport::from_logs(
        log_q_raw(fa_arg),
        log_q_raw(miss_arg),
        cfg.n as f64 * cfg.receiver_power_watts,
        None,
    ))
}

/// Declares H1 iff the LLR of all `n` samples exceeds the threshold.
pub fn decide_single_phase(
    samples: &[f64],
    cfg: &SinglePhaseConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
) -> Result<Outcome> {
    cfg.validate()?;
    if samples.len() != cfg.n {
        return Err(Error::Contract(format!(
            "single-phase test needs exactly {} samples, got {}",
            cfg.n,
            samples.len()
        )));
    }
    let sigma_sq = profile.noise_variance(cfg.receiver_power_watts)?;
    let t = llr_statistic(samples, scenario.received_power_watts(), sigma_sq);
    Ok(Outcome {
        decision: if t > cfg.threshold { Hypothesis::H1 } else { Hypothesis::H0 },
        samples_consumed: cfg.n,
        energy: cfg.n as f64 * cfg.receiver_power_watts,
        entered_second_phase: false,
    })
}
