use super::{
    check_finite, check_power, llr_statistic, llr_tail_arguments, log_add_exp, Hypothesis, Outcome, PerfReport,
    SampleSource,
};
use crate::base::{log_q_raw, q_raw, NoiseProfile, ScenarioParams};
use crate::error::{ensure, Error, Result};

/// Two-phase adaptive sensing: a low-power tentative LLR test on `l1`
/// samples, then, only if it passes, a confirmation test on `l2` fresh
/// samples at a second power level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaSenseConfig {
    pub l1: usize,
    pub l2: usize,
    pub p_r1: f64,
    pub p_r2: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl AdaSenseConfig {
    pub fn validate(&self, scenario: &ScenarioParams) -> Result<()> {
        ensure(self.l1 >= 1 && self.l2 >= 1, || {
            format!("adasense: phase lengths must be at least 1 (got l1 = {}, l2 = {})", self.l1, self.l2)
        })?;
        ensure(self.l1 + self.l2 <= scenario.preamble_len(), || {
            format!(
                "adasense: l1 + l2 = {} exceeds the preamble length {}",
                self.l1 + self.l2,
                scenario.preamble_len()
            )
        })?;
        check_power("adasense p_r1", self.p_r1)?;
        check_power("adasense p_r2", self.p_r2)?;
        check_finite("adasense eta1", self.eta1)?;
        check_finite("adasense eta2", self.eta2)
    }
}

pub fn eval_adasense(
    cfg: &AdaSenseConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
) -> Result<PerfReport> {
    cfg.validate(scenario)?;
    let p = scenario.received_power_watts();
    let p1 = scenario.prior_p1();
    let (fa1, miss1) = llr_tail_arguments(cfg.l1, p, profile.noise_variance(cfg.p_r1)?, cfg.eta1);
    let (fa2, miss2) = llr_tail_arguments(cfg.l2, p, profile.noise_variance(cfg.p_r2)?, cfg.eta2);

    // both phases must pass under H0
    let ln_p_fa = log_q_raw(fa1) + log_q_raw(fa2);
    // miss in phase one, or pass phase one and miss in phase two
    let ln_p_miss = log_add_exp(log_q_raw(miss1), log_q_raw(-miss1) + log_q_raw(miss2));
    let p_continue = (1.0 - p1) * q_raw(fa1) + p1 * q_raw(-miss1);
    let energy = cfg.l1 as f64 * cfg.p_r1 + p_continue * (cfg.l2 as f64 * cfg.p_r2);
    Ok(PerfReport::from_logs(ln_p_fa, ln_p_miss, energy, Some(p_continue)))
}

/// Runs the two-phase rule, pulling phase-one samples at the phase-one noise
/// level and, if needed, phase-two samples at the phase-two level.
pub fn decide_adasense<S: SampleSource + ?Sized>(
    source: &mut S,
    cfg: &AdaSenseConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
) -> Result<Outcome> {
    cfg.validate(scenario)?;
    let p = scenario.received_power_watts();
    let var1 = profile.noise_variance(cfg.p_r1)?;
    let phase_one = draw(source, cfg.l1, var1)?;
    let phase_one_energy = cfg.l1 as f64 * cfg.p_r1;
    if llr_statistic(&phase_one, p, var1) <= cfg.eta1 {
        return Ok(Outcome {
            decision: Hypothesis::H0,
            samples_consumed: cfg.l1,
            energy: phase_one_energy,
            entered_second_phase: false,
        });
    }
    let var2 = profile.noise_variance(cfg.p_r2)?;
    let phase_two = draw(source, cfg.l2, var2)?;
    let decision = if llr_statistic(&phase_two, p, var2) > cfg.eta2 { Hypothesis::H1 } else { Hypothesis::H0 };
    Ok(Outcome {
        decision,
        samples_consumed: cfg.l1 + cfg.l2,
        energy: phase_one_energy + cfg.l2 as f64 * cfg.p_r2,
        entered_second_phase: true,
    })
}

fn draw<S: SampleSource + ?Sized>(source: &mut S, count: usize, variance: f64) -> Result<Vec<f64>> {
    (0..count)
        .map(|i| {
            source.observe(variance).ok_or_else(|| {
                Error::Contract(format!("adasense: sample source exhausted after {i} of {count} samples"))
            })
        })
        .collect()
}
