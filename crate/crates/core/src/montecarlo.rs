//! Monte-Carlo oracle: draws channel observations, runs the actual decision
//! rules and estimates error rates, energy and continuation probability.
//!
//! Every trial owns a ChaCha stream selected by `(hypothesis, trial index)`
//! under the root seed. Trials are processed in fixed-size chunks whose
//! partial sums are merged in chunk order, so estimates do not depend on the
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::base::{NoiseProfile, ScenarioParams};
use crate::error::{ensure, Error, Result};
use crate::schemes::{
    bmac_stopping_time_pmf, decide_adasense, decide_bmac, decide_single_phase, BmacConfig, Hypothesis, Outcome,
    SampleSource, SchemeConfig,
};

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub trials_per_hypothesis: u64,
    pub seed: u64,
    /// Pair each trial with one that sees the negated noise. Changes the
    /// variance of the estimates, not what they estimate.
    pub antithetic: bool,
}

impl McSettings {
    pub fn new(trials_per_hypothesis: u64, seed: u64) -> Result<Self> {
        ensure(trials_per_hypothesis >= 1, || "monte carlo: at least one trial per hypothesis is required".into())?;
        Ok(Self { trials_per_hypothesis, seed, antithetic: false })
    }

    pub fn with_antithetic(self, antithetic: bool) -> Self {
        Self { antithetic, ..self }
    }
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Whether `truth` lies within `k` standard errors.
    pub fn covers(&self, truth: f64, k: f64) -> bool {
        (self.value - truth).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_fa: Estimate,
    pub p_miss: Estimate,
    pub energy_h0: Estimate,
    pub energy_h1: Estimate,
    /// Prior-weighted energy `p1 * E[.|H1] + (1 - p1) * E[.|H0]`.
    pub energy: Estimate,
    /// Continuation probabilities, AdaSense only.
    pub p_continue_h0: Option<Estimate>,
    pub p_continue_h1: Option<Estimate>,
    pub p_continue: Option<Estimate>,
    pub trials: u64,
    pub seed: u64,
    /// Some error rate came out as exactly 0 or 1, so its standard error is 0.
    pub degenerate: bool,
}

/// I.i.d. observations `M * sqrt(P) + Z` with `Z ~ N(0, sigma_sq)`.
pub fn generate_samples<R: Rng + ?Sized>(
    hypothesis: Hypothesis,
    count: usize,
    sigma_sq: f64,
    received_power: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    ensure(sigma_sq > 0.0 && sigma_sq.is_finite(), || format!("generate_samples: variance {sigma_sq} must be positive"))?;
    ensure(received_power > 0.0 && received_power.is_finite(), || {
        format!("generate_samples: received power {received_power} must be positive")
    })?;
    let mean = signal_mean(hypothesis, received_power);
    let sd = sigma_sq.sqrt();
    Ok((0..count).map(|_| mean + sd * rng.sample::<f64, _>(StandardNormal)).collect())
}

fn signal_mean(hypothesis: Hypothesis, received_power: f64) -> f64 {
    match hypothesis {
        Hypothesis::H0 => 0.0,
        Hypothesis::H1 => received_power.sqrt(),
    }
}

/// Random stream of one trial. H0 and H1 use disjoint halves of the stream space.
pub fn trial_rng(seed: u64, hypothesis: Hypothesis, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bank = match hypothesis {
        Hypothesis::H0 => 0,
        Hypothesis::H1 => 1u64 << 63,
    };
    rng.set_stream(bank | trial);
    rng
}

struct Channel {
    rng: ChaCha8Rng,
    mean: f64,
    noise_sign: f64,
}

impl SampleSource for Channel {
    fn observe(&mut self, noise_variance: f64) -> Option<f64> {
        let z: f64 = self.rng.sample(StandardNormal);
        Some(self.mean + self.noise_sign * noise_variance.sqrt() * z)
    }
}

fn channel(seed: u64, hypothesis: Hypothesis, trial: u64, antithetic: bool, received_power: f64) -> Channel {
    let (stream, noise_sign) = if antithetic { (trial / 2, if trial % 2 == 1 { -1.0 } else { 1.0 }) } else { (trial, 1.0) };
    Channel { rng: trial_rng(seed, hypothesis, stream), mean: signal_mean(hypothesis, received_power), noise_sign }
}

fn run_trial(
    cfg: &SchemeConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    source: &mut Channel,
    buf: &mut Vec<f64>,
) -> Result<Outcome> {
    match cfg {
        SchemeConfig::SinglePhase(c) => {
            let var = profile.noise_variance(c.receiver_power_watts)?;
            buf.clear();
            buf.extend((0..c.n).map(|_| source.observe(var).unwrap_or(f64::NAN)));
            decide_single_phase(buf, c, scenario, profile)
        }
        SchemeConfig::Bmac(c) => {
            let var = profile.noise_variance(c.receiver_power_watts)?;
            decide_bmac(std::iter::from_fn(|| source.observe(var)), c)
        }
        SchemeConfig::AdaSense(c) => decide_adasense(source, c, scenario, profile),
    }
}

/// Running sums over observation units. A unit is one trial, or one
/// antithetic pair averaged.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    trials: u64,
    units: u64,
    h1: u64,
    continued: u64,
    energy: f64,
    unit_h1_sq: f64,
    unit_continued_sq: f64,
    unit_energy_sq: f64,
}

impl Sums {
    fn merge(self, o: Sums) -> Sums {
        Sums {
            trials: self.trials + o.trials,
            units: self.units + o.units,
            h1: self.h1 + o.h1,
            continued: self.continued + o.continued,
            energy: self.energy + o.energy,
            unit_h1_sq: self.unit_h1_sq + o.unit_h1_sq,
            unit_continued_sq: self.unit_continued_sq + o.unit_continued_sq,
            unit_energy_sq: self.unit_energy_sq + o.unit_energy_sq,
        }
    }
}

fn run_bank(
    cfg: &SchemeConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    hypothesis: Hypothesis,
    settings: &McSettings,
) -> Result<Sums> {
    let trials = settings.trials_per_hypothesis;
    let width = if settings.antithetic { 2 } else { 1 };
    let units = trials.div_ceil(width);
    let chunks = units.div_ceil(CHUNK);
    let partial: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sums = Sums::default();
            let mut buf = Vec::new();
            for unit in chunk * CHUNK..((chunk + 1) * CHUNK).min(units) {
                let (mut h1, mut cont, mut energy, mut count) = (0u64, 0u64, 0.0, 0u64);
                for trial in unit * width..((unit + 1) * width).min(trials) {
                    let mut source =
                        channel(settings.seed, hypothesis, trial, settings.antithetic, scenario.received_power_watts());
                    let out = run_trial(cfg, scenario, profile, &mut source, &mut buf)?;
                    h1 += (out.decision == Hypothesis::H1) as u64;
                    cont += out.entered_second_phase as u64;
                    energy += out.energy;
                    count += 1;
                }
                let c = count as f64;
                sums.trials += count;
                sums.units += 1;
                sums.h1 += h1;
                sums.continued += cont;
                sums.energy += energy;
                sums.unit_h1_sq += (h1 as f64 / c).powi(2);
                sums.unit_continued_sq += (cont as f64 / c).powi(2);
                sums.unit_energy_sq += (energy / c).powi(2);
            }
            Ok(sums)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(partial.into_iter().fold(Sums::default(), Sums::merge))
}

/// Mean and standard error from unit sums. Plain runs give the binomial SE
/// for indicator data, since then the unit second moment equals the mean.
fn estimate_from(sum: f64, unit_sq: f64, trials: u64, units: u64) -> Estimate {
    let mean = sum / trials as f64;
    let u = units as f64;
    let var = (unit_sq / u - mean * mean).max(0.0);
    Estimate { value: mean, std_error: (var / u).sqrt() }
}

fn mix(p1: f64, h1: Estimate, h0: Estimate) -> Estimate {
    Estimate {
        value: p1 * h1.value + (1.0 - p1) * h0.value,
        std_error: ((p1 * h1.std_error).powi(2) + ((1.0 - p1) * h0.std_error).powi(2)).sqrt(),
    }
}

/// Runs `trials_per_hypothesis` trials under each hypothesis through the
/// decision rule of `cfg`.
pub fn estimate(
    cfg: &SchemeConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    settings: &McSettings,
) -> Result<McEstimate> {
    ensure(settings.trials_per_hypothesis >= 1, || "monte carlo: at least one trial per hypothesis is required".into())?;
    let h0 = run_bank(cfg, scenario, profile, Hypothesis::H0, settings)?;
    let h1 = run_bank(cfg, scenario, profile, Hypothesis::H1, settings)?;

    let p_fa = estimate_from(h0.h1 as f64, h0.unit_h1_sq, h0.trials, h0.units);
    let detect = estimate_from(h1.h1 as f64, h1.unit_h1_sq, h1.trials, h1.units);
    let p_miss = Estimate { value: 1.0 - detect.value, std_error: detect.std_error };
    let energy_h0 = estimate_from(h0.energy, h0.unit_energy_sq, h0.trials, h0.units);
    let energy_h1 = estimate_from(h1.energy, h1.unit_energy_sq, h1.trials, h1.units);
    let p1 = scenario.prior_p1();

    let (p_continue_h0, p_continue_h1, p_continue) = if matches!(cfg, SchemeConfig::AdaSense(_)) {
        let c0 = estimate_from(h0.continued as f64, h0.unit_continued_sq, h0.trials, h0.units);
        let c1 = estimate_from(h1.continued as f64, h1.unit_continued_sq, h1.trials, h1.units);
        (Some(c0), Some(c1), Some(mix(p1, c1, c0)))
    } else {
        (None, None, None)
    };
    let degenerate = [h0.h1, h1.h1].iter().zip([h0.trials, h1.trials]).any(|(&k, n)| k == 0 || k == n);

    Ok(McEstimate {
        p_fa,
        p_miss,
        energy_h0,
        energy_h1,
        energy: mix(p1, energy_h1, energy_h0),
        p_continue_h0,
        p_continue_h1,
        p_continue,
        trials: settings.trials_per_hypothesis,
        seed: settings.seed,
        degenerate,
    })
}

/// Counts of BMAC stopping times: entry `i` holds the trials that stopped
/// after `i + 1` samples.
pub fn bmac_stopping_time_histogram(
    cfg: &BmacConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    hypothesis: Hypothesis,
    settings: &McSettings,
) -> Result<Vec<u64>> {
    cfg.validate()?;
    let var = profile.noise_variance(cfg.receiver_power_watts)?;
    let trials = settings.trials_per_hypothesis;
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut counts = vec![0u64; cfg.n];
            for trial in chunk * CHUNK..((chunk + 1) * CHUNK).min(trials) {
                let mut source = channel(settings.seed, hypothesis, trial, false, scenario.received_power_watts());
                let out = decide_bmac(std::iter::from_fn(|| source.observe(var)), cfg)?;
                counts[out.samples_consumed - 1] += 1;
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(partial.into_iter().fold(vec![0u64; cfg.n], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        acc
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// Bins left after merging those with expected count below 5.
    pub bins: usize,
}

/// Pearson chi-square test of `observed` counts against `probabilities`.
/// Adjacent bins are merged until each expects at least 5 counts.
pub fn chi_square_gof(observed: &[u64], probabilities: &[f64]) -> Result<GoodnessOfFit> {
    if observed.len() != probabilities.len() || observed.is_empty() {
        return Err(Error::Contract("chi_square_gof: observed and probabilities differ in length".into()));
    }
    let total: u64 = observed.iter().sum();
    let mass: f64 = probabilities.iter().sum();
    ensure(total > 0 && (mass - 1.0).abs() < 1e-9, || format!("chi_square_gof: {total} counts, probability mass {mass}"))?;

    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probabilities) {
        obs += o as f64;
        exp += p * total as f64;
        if exp >= 5.0 {
            groups.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => groups.push((obs, exp)),
        }
    }
    let statistic: f64 = groups.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = groups.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numeric(e.to_string()))?;
        dist.sf(statistic)
    };
    Ok(GoodnessOfFit { statistic, degrees_of_freedom: dof, p_value, bins: groups.len() })
}

/// Chi-square test of simulated BMAC stopping times against the exact law.
pub fn bmac_stopping_time_test(
    cfg: &BmacConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    hypothesis: Hypothesis,
    settings: &McSettings,
) -> Result<GoodnessOfFit> {
    let counts = bmac_stopping_time_histogram(cfg, scenario, profile, hypothesis, settings)?;
    let pmf = bmac_stopping_time_pmf(cfg, scenario, profile, hypothesis)?;
    chi_square_gof(&counts, &pmf)
}
