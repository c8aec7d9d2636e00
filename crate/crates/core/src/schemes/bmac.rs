use super::{check_finite, check_power, Hypothesis, Outcome, PerfReport};
use crate::base::{log_q_raw, NoiseProfile, ScenarioParams};
use crate::error::{ensure, Error, Result};

/// Per-sample amplitude thresholding: stop with H0 at the first sample at or
/// below the threshold, declare H1 only if all `n` samples exceed it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmacConfig {
    pub n: usize,
    pub receiver_power_watts: f64,
    /// Threshold on the raw sample amplitude.
    pub threshold: f64,
}

impl BmacConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.n >= 1, || "bmac: n must be at least 1".into())?;
        check_power("bmac receiver power", self.receiver_power_watts)?;
        check_finite("bmac threshold", self.threshold)
    }
}

/// Per-sample pass probabilities in log form:
/// `(ln p, ln(1-p), ln q, ln(1-q))` with `p = P(Y > eta | H0)` and `q = P(Y > eta | H1)`.
fn pass_logs(cfg: &BmacConfig, scenario: &ScenarioParams, sigma: f64) -> (f64, f64, f64, f64) {
    let h0 = cfg.threshold / sigma;
    let h1 = (cfg.threshold - scenario.received_power_watts().sqrt()) / sigma;
    (log_q_raw(h0), log_q_raw(-h0), log_q_raw(h1), log_q_raw(-h1))
}

/// `sum_{i=0}^{n-1} x^i` from `ln x` and `ln(1 - x)`; exactly `n` when `x = 1`.
fn geometric_sum(n: usize, ln_x: f64, ln_one_minus_x: f64) -> f64 {
    let nf = n as f64;
    if ln_one_minus_x == f64::NEG_INFINITY {
        return nf;
    }
    let value = -(nf * ln_x).exp_m1() / ln_one_minus_x.exp();
    if value.is_finite() {
        value.min(nf)
    } else {
        nf
    }
}

pub fn eval_bmac(cfg: &BmacConfig, scenario: &ScenarioParams, profile: &NoiseProfile) -> Result<PerfReport> {
    cfg.validate()?;
    let sigma = profile.noise_variance(cfg.receiver_power_watts)?.sqrt();
    let (ln_p, ln_1mp, ln_q, ln_1mq) = pass_logs(cfg, scenario, sigma);
    let nf = cfg.n as f64;

    let ln_p_fa = nf * ln_p;
    // 1 - q^n; near zero it behaves like n (1 - q)
    let ln_p_miss = {
        let direct = -(nf * ln_q).exp_m1();
        if direct > 1e-200 {
            direct.ln()
        } else {
            nf.ln() + ln_1mq
        }
    };
    let p1 = scenario.prior_p1();
    let energy = cfg.receiver_power_watts
        * (p1 * geometric_sum(cfg.n, ln_q, ln_1mq) + (1.0 - p1) * geometric_sum(cfg.n, ln_p, ln_1mp));
    Ok(PerfReport::from_logs(ln_p_fa, ln_p_miss, energy, None))
}

/// Distribution of the number of samples BMAC observes under `hypothesis`:
/// entry `i` holds `P(N = i + 1)`.
pub fn bmac_stopping_time_pmf(
    cfg: &BmacConfig,
    scenario: &ScenarioParams,
    profile: &NoiseProfile,
    hypothesis: Hypothesis,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let sigma = profile.noise_variance(cfg.receiver_power_watts)?.sqrt();
    let (ln_p, ln_1mp, ln_q, ln_1mq) = pass_logs(cfg, scenario, sigma);
    let (ln_pass, ln_stop) = match hypothesis {
        Hypothesis::H0 => (ln_p, ln_1mp),
        Hypothesis::H1 => (ln_q, ln_1mq),
    };
    Ok((1..=cfg.n)
        .map(|i| {
            let survive = (i - 1) as f64 * ln_pass;
            if i < cfg.n {
                (survive + ln_stop).exp()
            } else {
                survive.exp()
            }
        })
        .collect())
}

/// Runs the BMAC rule over lazily supplied samples.
pub fn decide_bmac<I>(samples: I, cfg: &BmacConfig) -> Result<Outcome>
where
    I: IntoIterator<Item = f64>,
{
    cfg.validate()?;
    let mut consumed = 0;
    let mut iter = samples.into_iter();
    while consumed < cfg.n {
        let y = iter.next().ok_or_else(|| {
            Error::Contract(format!("bmac: sample source exhausted after {consumed} of {} samples", cfg.n))
        })?;
        consumed += 1;
        if y <= cfg.threshold {
            return Ok(outcome(Hypothesis::H0, consumed, cfg));
        }
    }
    Ok(outcome(Hypothesis::H1, consumed, cfg))
}

fn outcome(decision: Hypothesis, consumed: usize, cfg: &BmacConfig) -> Outcome {
    Outcome {
        decision,
        samples_consumed: consumed,
        energy: consumed as f64 * cfg.receiver_power_watts,
        entered_second_phase: false,
    }
}
