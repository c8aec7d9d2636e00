//! Numerical checks of the large-reliability scaling laws: the linear growth
//! of single-phase energy in `ln(1/alpha)`, the BMAC energy lower bound and
//! the dependence of the AdaSense optimum on message sparsity.

use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::base::{inverse_q_log, NoiseProfile, ReliabilityTarget, ScenarioParams};
use crate::error::{ensure, Error, Result};
use crate::schemes::{eval_single_phase, SinglePhaseConfig};
use crate::solvers::{meets_target, optimize_adasense, solve_bmac, solve_single_phase};

/// Largest preamble the slope check will consider.
const MAX_PREAMBLE: usize = 1 << 40;

/// Slack constants for the asymptotic checks.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Accepted band for the fitted single-phase slope over the reference slope.
    pub slope_ratio_min: f64,
    pub slope_ratio_max: f64,
    pub slope_min_r_squared: f64,
    /// Least exact-to-bound BMAC energy ratio at `bmac_ratio_alpha`.
    pub bmac_min_ratio: f64,
    pub bmac_ratio_alpha: f64,
    /// Relative spread allowed across sparse priors.
    pub sparsity_flat_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope_ratio_min: 1.0,
            slope_ratio_max: 1.5,
            slope_min_r_squared: 0.99,
            bmac_min_ratio: 0.8,
            bmac_ratio_alpha: 1e-8,
            sparsity_flat_rel: 0.01,
        }
    }
}

impl Tolerances {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let tol: Tolerances = toml::from_str(text).map_err(|e| Error::Domain(format!("tolerances: {e}")))?;
        ensure(tol.slope_ratio_min <= tol.slope_ratio_max, || "tolerances: slope band is empty".into())?;
        Ok(tol)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("tolerances: cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

/// Ordinary least squares `y = slope * x + intercept`, returning
/// `(slope, intercept, r_squared)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    ensure(xs.len() == ys.len() && xs.len() >= 2, || "least_squares: need two or more paired points".into())?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("least_squares: all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok((slope, my - slope * mx, r_squared))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    /// Alphas that entered the fit, decreasing.
    pub alphas: Vec<f64>,
    pub energies: Vec<f64>,
    pub preamble_lens: Vec<usize>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub r_squared: f64,
    /// `2k / (P * P_r^(gamma - 1))`.
    pub reference_slope: f64,
    pub slope_ratio: f64,
    /// Alphas that no preamble length could meet, left out of the fit.
    pub excluded: Vec<f64>,
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    ensure(alphas.len() >= 4, || format!("asymptotics: need at least 4 alphas, got {}", alphas.len()))?;
    ensure(alphas.windows(2).all(|w| w[1] < w[0]), || "asymptotics: alphas must be strictly decreasing".into())?;
    ensure(alphas.iter().all(|&a| a >= 1e-30 && a < 1.0), || "asymptotics: alphas must lie in [1e-30, 1)".into())
}

fn single_phase_meets(n: usize, power: f64, p_r: f64, profile: &NoiseProfile, target: &ReliabilityTarget) -> Result<bool> {
    let scenario = ScenarioParams::new(power, 0.5, n)?;
    let d = (n as f64 * power / profile.noise_variance(p_r)?).sqrt();
    let t = inverse_q_log(target.alpha().ln())?;
    let cfg = SinglePhaseConfig { n, receiver_power_watts: p_r, threshold: d * (t - 0.5 * d) };
    Ok(meets_target(&eval_single_phase(&cfg, &scenario, profile)?, target))
}

/// Shortest single-phase preamble meeting `target` at receiver power `p_r`,
/// with the threshold set by the false-alarm constraint.
pub fn min_single_phase_preamble(
    profile: &NoiseProfile,
    power: f64,
    p_r: f64,
    target: &ReliabilityTarget,
) -> Result<Option<usize>> {
    let mut hi = 1usize;
    while !single_phase_meets(hi, power, p_r, profile, target)? {
        if hi >= MAX_PREAMBLE {
            return Ok(None);
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(Some(1));
    }
    // invariant: lo fails, hi passes
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if single_phase_meets(mid, power, p_r, profile, target)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Single-phase energy `n * P_r` at the minimal preamble for each alpha,
/// fitted linearly against `ln(1/alpha)`.
pub fn check_single_phase_slope(
    profile: &NoiseProfile,
    power: f64,
    p_r: f64,
    beta: f64,
    alphas: &[f64],
) -> Result<SlopeFit> {
    check_alphas(alphas)?;
    let lens = alphas
        .par_iter()
        .map(|&a| min_single_phase_preamble(profile, power, p_r, &ReliabilityTarget::new(a, beta)?))
        .collect::<Result<Vec<_>>>()?;
    let mut fit = SlopeFit {
        alphas: Vec::new(),
        energies: Vec::new(),
        preamble_lens: Vec::new(),
        fitted_slope: f64::NAN,
        fitted_intercept: f64::NAN,
        r_squared: f64::NAN,
        reference_slope: 2.0 * profile.k() / (power * p_r.powf(profile.gamma() - 1.0)),
        slope_ratio: f64::NAN,
        excluded: Vec::new(),
    };
    for (&a, n) in alphas.iter().zip(lens) {
        match n {
            Some(n) => {
                fit.alphas.push(a);
                fit.preamble_lens.push(n);
                fit.energies.push(n as f64 * p_r);
            }
            None => fit.excluded.push(a),
        }
    }
    if fit.alphas.len() >= 2 {
        let xs: Vec<f64> = fit.alphas.iter().map(|a| -a.ln()).collect();
        let (slope, intercept, r2) = least_squares(&xs, &fit.energies)?;
        fit.fitted_slope = slope;
        fit.fitted_intercept = intercept;
        fit.r_squared = r2;
        fit.slope_ratio = slope / fit.reference_slope;
    }
    Ok(fit)
}

impl SlopeFit {
    /// Fit quality and slope ratio both inside the tolerance bands.
    pub fn within(&self, tol: &Tolerances) -> bool {
        self.r_squared >= tol.slope_min_r_squared
            && (tol.slope_ratio_min..=tol.slope_ratio_max).contains(&self.slope_ratio)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub alpha: f64,
    pub exact_energy: f64,
    /// `(1 - p1) * (2k ln(1/alpha) / (n P))^(1/gamma)`.
    pub bound: f64,
    pub ratio: f64,
    pub feasible: bool,
}

/// Optimal BMAC energy against its asymptotic lower bound over an alpha sweep.
pub fn check_bmac_lower_bound(
    profile: &NoiseProfile,
    scenario: &ScenarioParams,
    beta: f64,
    alphas: &[f64],
) -> Result<Vec<BoundCheck>> {
    check_alphas(alphas)?;
    let n = scenario.preamble_len() as f64;
    let p = scenario.received_power_watts();
    alphas
        .par_iter()
        .map(|&alpha| {
            let solved = solve_bmac(scenario, profile, &ReliabilityTarget::new(alpha, beta)?)?;
            let bound = (1.0 - scenario.prior_p1())
                * (2.0 * profile.k() * (-alpha.ln()) / (n * p)).powf(1.0 / profile.gamma());
            Ok(BoundCheck {
                alpha,
                exact_energy: solved.report.energy,
                bound,
                ratio: solved.report.energy / bound,
                feasible: solved.feasible,
            })
        })
        .collect()
}

/// Whether the exact-to-bound ratios never decrease along the sweep.
pub fn ratios_non_decreasing(rows: &[BoundCheck]) -> bool {
    rows.windows(2).all(|w| w[1].ratio >= w[0].ratio)
}

/// How the preamble length is chosen in the sparsity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreambleRule {
    Fixed(usize),
    /// `n = ceil(c * ln(1/alpha))`.
    Scaled(f64),
}

impl PreambleRule {
    pub fn length(&self, alpha: f64) -> usize {
        match *self {
            PreambleRule::Fixed(n) => n,
            PreambleRule::Scaled(c) => (c * -alpha.ln()).ceil().max(2.0) as usize,
        }
    }
}

/// Constant `c` such that `ceil(c * ln(1/alpha_max))` is the shortest
/// single-phase preamble meeting `(alpha_max, beta)` at 1 uW of receiver power.
pub fn anchored_preamble_constant(profile: &NoiseProfile, power: f64, beta: f64, alpha_max: f64) -> Result<f64> {
    let target = ReliabilityTarget::new(alpha_max, beta)?;
    let n = min_single_phase_preamble(profile, power, 1e-6, &target)?
        .ok_or_else(|| Error::Numeric("anchored_preamble_constant: no feasible preamble at 1 uW".into()))?;
    Ok(n as f64 / -alpha_max.ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityPoint {
    pub p1: f64,
    pub preamble_len: usize,
    pub optimal_energy: f64,
    pub p_continue: Option<f64>,
    pub feasible: bool,
    pub single_phase_energy: f64,
    pub bmac_energy: f64,
    /// AdaSense energy over single-phase energy.
    pub order_ratio: f64,
}

/// Optimal AdaSense energy for each prior, next to both baselines.
pub fn check_adasense_sparsity(
    profile: &NoiseProfile,
    power: f64,
    beta: f64,
    alpha: f64,
    p1s: &[f64],
    rule: PreambleRule,
) -> Result<Vec<SparsityPoint>> {
    ensure(!p1s.is_empty() && p1s.windows(2).all(|w| w[1] < w[0]), || {
        "asymptotics: priors must be strictly decreasing".into()
    })?;
    let target = ReliabilityTarget::new(alpha, beta)?;
    let n = rule.length(alpha);
    p1s.par_iter()
        .map(|&p1| {
            let scenario = ScenarioParams::new(power, p1, n)?;
            let ada = optimize_adasense(&scenario, profile, &target)?;
            let sp = solve_single_phase(&scenario, profile, &target)?;
            let bmac = solve_bmac(&scenario, profile, &target)?;
            Ok(SparsityPoint {
                p1,
                preamble_len: n,
                optimal_energy: ada.report.energy,
                p_continue: ada.report.p_continue,
                feasible: ada.feasible,
                single_phase_energy: sp.report.energy,
                bmac_energy: bmac.report.energy,
                order_ratio: ada.report.energy / sp.report.energy,
            })
        })
        .collect()
}

/// Whether optimal energy never grows as the prior shrinks, up to `rel_tol`.
pub fn energies_non_increasing(points: &[SparsityPoint], rel_tol: f64) -> bool {
    points.windows(2).all(|w| w[1].optimal_energy <= w[0].optimal_energy * (1.0 + rel_tol))
}

/// Largest relative spread of optimal energy among priors at or below `p1_max`.
pub fn sparse_energy_spread(points: &[SparsityPoint], p1_max: f64) -> f64 {
    let e: Vec<f64> = points.iter().filter(|p| p.p1 <= p1_max).map(|p| p.optimal_energy).collect();
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    if e.is_empty() {
        0.0
    } else {
        hi / lo - 1.0
    }
}
