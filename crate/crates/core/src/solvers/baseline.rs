use std::time::Instant;

use super::{meets_target, Diagnostics, OptimizationResult, MAX_RECEIVER_POWER, MIN_RECEIVER_POWER};
use crate::base::{inv_q_log_raw, NoiseProfile, ReliabilityTarget, ScenarioParams};
use crate::error::Result;
use crate::schemes::{eval_bmac, eval_single_phase, BmacConfig, Scheme, SchemeConfig, SinglePhaseConfig};

const BISECTION_STEPS: usize = 200;
const LOG_POWER_TOL: f64 = 1e-13;

/// Smallest power in the solver bracket for which `feasible_at` holds, or
/// `None` when even the top of the bracket fails. Feasibility must be
/// monotone in the power.
fn bisect_power<F>(mut feasible_at: F) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<bool>,
{
    if feasible_at(MIN_RECEIVER_POWER)? {
        return Ok(Some(MIN_RECEIVER_POWER));
    }
    if !feasible_at(MAX_RECEIVER_POWER)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (MIN_RECEIVER_POWER.ln(), MAX_RECEIVER_POWER.ln());
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= LOG_POWER_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid.exp())? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi.exp()))
}

fn single_phase_at(p_r: f64, scenario: &ScenarioParams, profile: &NoiseProfile, target: &ReliabilityTarget) -> Result<SinglePhaseConfig> {
    let n = scenario.preamble_len();
    let sigma_sq = profile.noise_variance(p_r)?;
    let deflection = (n as f64 * scenario.received_power_watts() / sigma_sq).sqrt();
    // the false-alarm tail argument is eta / d + d / 2
    let t = inv_q_log_raw(target.alpha().ln());
    Ok(SinglePhaseConfig { n, receiver_power_watts: p_r, threshold: deflection * (t - 0.5 * deflection) })
}

/// Fixed-length LLR test at the least receiver power meeting both targets,
/// with the threshold set so the false-alarm constraint binds.
pub fn solve_single_phase(
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    target: &ReliabilityTarget,
) -> Result<OptimizationResult> {
    let started = Instant::now();
    let found = bisect_power(|p_r| {
        let cfg = single_phase_at(p_r, scenario, profile, target)?;
        Ok(meets_target(&eval_single_phase(&cfg, scenario, profile)?, target))
    })?;
    let cfg = single_phase_at(found.unwrap_or(MAX_RECEIVER_POWER), scenario, profile, target)?;
    let report = eval_single_phase(&cfg, scenario, profile)?;
    let diagnostics = Diagnostics {
        starts_tried: 1,
        best_start_index: Some(0),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        ..Diagnostics::for_report(&report, target)
    };
    Ok(OptimizationResult::new(Scheme::SinglePhase, SchemeConfig::SinglePhase(cfg), report, target, diagnostics))
}

fn bmac_at(p_r: f64, scenario: &ScenarioParams, profile: &NoiseProfile, target: &ReliabilityTarget) -> Result<BmacConfig> {
    let n = scenario.preamble_len();
    let sigma = profile.noise_variance(p_r)?.sqrt();
    let per_sample = inv_q_log_raw(target.alpha().ln() / n as f64);
    Ok(BmacConfig { n, receiver_power_watts: p_r, threshold: sigma * per_sample })
}

/// BMAC at the least receiver power meeting both targets. The per-sample
/// threshold makes the false-alarm constraint bind at every probed power.
pub fn solve_bmac(
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    target: &ReliabilityTarget,
) -> Result<OptimizationResult> {
    let started = Instant::now();
    let found = bisect_power(|p_r| {
        let cfg = bmac_at(p_r, scenario, profile, target)?;
        Ok(meets_target(&eval_bmac(&cfg, scenario, profile)?, target))
    })?;
    let cfg = bmac_at(found.unwrap_or(MAX_RECEIVER_POWER), scenario, profile, target)?;
    let report = eval_bmac(&cfg, scenario, profile)?;
    let diagnostics = Diagnostics {
        starts_tried: 1,
        best_start_index: Some(0),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        ..Diagnostics::for_report(&report, target)
    };
    Ok(OptimizationResult::new(Scheme::Bmac, SchemeConfig::Bmac(cfg), report, target, diagnostics))
}
