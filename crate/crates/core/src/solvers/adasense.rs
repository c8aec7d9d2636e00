use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::nelder_mead::{minimize, SimplexOptions};
use super::{meets_target, solve_single_phase, Diagnostics, OptimizationResult, MAX_RECEIVER_POWER, MIN_RECEIVER_POWER};
use crate::base::{inv_q_log_raw, inv_q_raw, NoiseProfile, ReliabilityTarget, ScenarioParams};
use crate::error::{Error, Result};
use crate::schemes::{eval_adasense, AdaSenseConfig, Scheme, SchemeConfig};

/// Multi-start schedule as `(s, r)`: phase one gets the false-alarm budget
/// `alpha^s` and the miss budget `r * beta`.
const STARTS: [(f64, f64); 8] = [
    (0.1, 0.5),
    (0.1, 0.9),
    (0.25, 0.5),
    (0.25, 0.9),
    (0.5, 0.5),
    (0.5, 0.9),
    (0.75, 0.5),
    (0.75, 0.9),
];
/// Starts kept once the time budget is spent.
const DEGRADED_STARTS: [usize; 2] = [2, 4];
const LOGIT_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaSenseOptions {
    /// Soft wall-clock budget. Once spent, the remaining phase-length pairs
    /// are searched from fewer starts and the result is flagged.
    pub time_budget: Duration,
}

impl Default for AdaSenseOptions {
    fn default() -> Self {
        Self { time_budget: Duration::from_secs(60) }
    }
}

/// Minimum-energy AdaSense configuration for the given targets.
///
/// Every phase-length pair `(l1, l2)` with `l1 + l2 <= n` is searched. For
/// a pair, a split of the two error budgets between the phases fixes each
/// phase's deflection, hence its least power and its threshold. The split
/// itself (two numbers in the unit interval, searched in logit coordinates)
/// is optimized by Nelder-Mead from several starts. Both targets are met with
/// equality by construction, so no penalty term is needed. The winner is
/// re-evaluated and compared with the single-phase solution, which is the
/// `l1 = 0` edge of the feasible set.
pub fn optimize_adasense(
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    target: &ReliabilityTarget,
) -> Result<OptimizationResult> {
    optimize_adasense_with(scenario, profile, target, &AdaSenseOptions::default())
}

pub fn optimize_adasense_with(
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    target: &ReliabilityTarget,
    options: &AdaSenseOptions,
) -> Result<OptimizationResult> {
    let n = scenario.preamble_len();
    if n < 2 {
        return Err(Error::Contract(format!("adasense needs a preamble of at least 2 symbols, got {n}")));
    }
    let started = Instant::now();
    let over_budget = AtomicBool::new(false);

    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|l1| (1..=n - l1).map(move |l2| (l1, l2))).collect();
    let problem = SplitProblem::new(scenario, profile, target);
    let searched: Vec<PairBest> = pairs
        .par_iter()
        .map(|&(l1, l2)| {
            let degraded = over_budget.load(Ordering::Relaxed) || started.elapsed() > options.time_budget;
            if degraded {
                over_budget.store(true, Ordering::Relaxed);
            }
            problem.search_pair(l1, l2, degraded)
        })
        .collect();

    let starts_tried = searched.iter().map(|p| p.runs).sum();
    // ordered fold: strict improvement only, so ties keep the earlier pair
    let best = searched.iter().fold(None::<&PairBest>, |acc, cand| match acc {
        Some(a) if a.energy <= cand.energy => Some(a),
        _ if cand.energy.is_finite() => Some(cand),
        _ => acc,
    });

    let single = solve_single_phase(scenario, profile, target)?;
    let base = Diagnostics {
        starts_tried,
        pairs_evaluated: pairs.len(),
        budget_exceeded: over_budget.load(Ordering::Relaxed),
        ..Diagnostics::for_report(&single.report, target)
    };

    let two_phase = match best {
        Some(b) => {
            let cfg = problem.config(b.l1, b.l2, b.x).expect("finite energy implies a valid design");
            let report = eval_adasense(&cfg, scenario, profile)?;
            Some((cfg, report, b.start))
        }
        None => None,
    };

    let result = match two_phase {
        Some((cfg, report, start))
            if meets_target(&report, target) && !(single.feasible && single.report.energy < report.energy) =>
        {
            let diagnostics = Diagnostics { best_start_index: Some(start), ..base };
            OptimizationResult::new(Scheme::AdaSense, SchemeConfig::AdaSense(cfg), report, target, diagnostics)
        }
        _ => OptimizationResult::new(Scheme::AdaSense, single.config, single.report, target, base),
    };
    Ok(OptimizationResult {
        diagnostics: Diagnostics { wall_time_seconds: started.elapsed().as_secs_f64(), ..result.diagnostics },
        ..result
    })
}

#[derive(Debug, Clone, Copy)]
struct PairBest {
    l1: usize,
    l2: usize,
    energy: f64,
    x: [f64; 2],
    start: usize,
    runs: usize,
}

struct SplitProblem<'a> {
    scenario: &'a ScenarioParams,
    profile: &'a NoiseProfile,
    ln_alpha: f64,
    beta: f64,
}

impl<'a> SplitProblem<'a> {
    fn new(scenario: &'a ScenarioParams, profile: &'a NoiseProfile, target: &ReliabilityTarget) -> Self {
        Self { scenario, profile, ln_alpha: target.alpha().ln(), beta: target.beta() }
    }

    fn search_pair(&self, l1: usize, l2: usize, degraded: bool) -> PairBest {
        let starts: Vec<usize> = if degraded { DEGRADED_STARTS.to_vec() } else { (0..STARTS.len()).collect() };
        let mut best = PairBest { l1, l2, energy: f64::INFINITY, x: [0.0, 0.0], start: starts[0], runs: 0 };
        for &start in &starts {
            let (s, r) = STARTS[start];
            let x0 = [logit(s), logit(r)];
            let found = minimize(|x| self.energy(l1, l2, [x[0], x[1]]), &x0, &SimplexOptions::default());
            best.runs += 1;
            if found.value < best.energy {
                best.energy = found.value;
                best.x = [found.x[0], found.x[1]];
                best.start = start;
            }
        }
        best
    }

    fn energy(&self, l1: usize, l2: usize, x: [f64; 2]) -> f64 {
        match self.config(l1, l2, x).and_then(|cfg| eval_adasense(&cfg, self.scenario, self.profile).ok()) {
            Some(report) if report.ln_p_fa <= self.ln_alpha + 1e-9 && report.ln_p_miss <= self.beta.ln() + 1e-9 => {
                report.energy
            }
            _ => f64::INFINITY,
        }
    }

    /// Configuration implied by the error-budget split `x` (logit coordinates).
    fn config(&self, l1: usize, l2: usize, x: [f64; 2]) -> Option<AdaSenseConfig> {
        let s = sigmoid(x[0]);
        let r = sigmoid(x[1]);
        let miss1 = r * self.beta;
        let miss2 = (self.beta - miss1) / (1.0 - miss1);
        let (p_r1, eta1) = self.design_phase(l1, s * self.ln_alpha, miss1)?;
        let (p_r2, eta2) = self.design_phase(l2, (1.0 - s) * self.ln_alpha, miss2)?;
        Some(AdaSenseConfig { l1, l2, p_r1, p_r2, eta1, eta2 })
    }

    /// Least power and matching threshold for an LLR test on `len` samples
    /// with false-alarm probability `exp(ln_fa)` and miss probability `miss`.
    fn design_phase(&self, len: usize, ln_fa: f64, miss: f64) -> Option<(f64, f64)> {
        if !(ln_fa < 0.0) || !(miss > 0.0 && miss < 1.0) {
            return None;
        }
        let t = inv_q_log_raw(ln_fa);
        let needed = t + inv_q_raw(miss);
        let signal = len as f64 * self.scenario.received_power_watts();
        let p_r = if needed > 0.0 {
            self.profile.power_for_variance(signal / (needed * needed))?.max(MIN_RECEIVER_POWER)
        } else {
            MIN_RECEIVER_POWER
        };
        if !(p_r <= MAX_RECEIVER_POWER) {
            return None;
        }
        let deflection = (signal / self.profile.variance_raw(p_r)).sqrt();
        Some((p_r, deflection * (t - 0.5 * deflection)))
    }
}

fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a.clamp(-LOGIT_LIMIT, LOGIT_LIMIT)).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}
