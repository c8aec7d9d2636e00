//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::base::{dbm_to_watts, thermal_noise_watts, NoiseProfile, ReliabilityTarget, ScenarioParams};
use crate::schemes::{AdaSenseConfig, BmacConfig, Scheme, SchemeConfig, SinglePhaseConfig};

use super::CliError;

/// Scalar or list in the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schemes: Option<Vec<String>>,
    pub scenario: Option<ScenarioBlock>,
    pub profile: Option<ProfileBlock>,
    pub targets: Option<TargetsBlock>,
    pub scheme: Option<SchemeBlock>,
    pub mc: Option<McBlock>,
    pub output: Option<OutputBlock>,
    pub asymptote: Option<AsymptoteBlock>,
    /// Directory the config was read from; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub n: OneOrMany<usize>,
    pub p_dbm: Option<OneOrMany<f64>>,
    pub p_watts: Option<OneOrMany<f64>>,
    pub p1: OneOrMany<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileBlock {
    /// `"wake-up-receiver"` fills in `k` and `gamma`.
    pub preset: Option<String>,
    pub k: Option<f64>,
    pub gamma: Option<f64>,
    pub sigma_t_sq: Option<f64>,
    pub temperature_k: Option<f64>,
    pub bandwidth_hz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsBlock {
    pub alpha: OneOrMany<f64>,
    pub beta: Option<OneOrMany<f64>>,
    pub beta_sweep: Option<BetaSweep>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaSweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for BetaSweep {
    fn default() -> Self {
        Self { start: 1e-10, stop: 1e-2, points: 25 }
    }
}

impl BetaSweep {
    pub fn values(&self) -> Vec<f64> {
        log_space(self.start, self.stop, self.points)
    }
}

/// `points` values spaced evenly in log scale from `start` to `stop`.
pub fn log_space(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.log10(), stop.log10());
            (0..points)
                .map(|i| match i {
                    0 => start,
                    i if i == points - 1 => stop,
                    i => 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeBlock {
    pub kind: String,
    pub receiver_power_watts: Option<f64>,
    pub threshold: Option<f64>,
    pub l1: Option<usize>,
    pub l2: Option<usize>,
    pub p_r1: Option<f64>,
    pub p_r2: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McBlock {
    pub trials: u64,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McBlock {
    fn default() -> Self {
        Self { trials: 100_000, seed: 42, antithetic: false }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub directory: PathBuf,
    pub formats: Vec<String>,
    pub symbol_duration_seconds: f64,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { directory: PathBuf::from("."), formats: vec!["csv".into()], symbol_duration_seconds: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoteBlock {
    /// Received power of all three checks.
    pub p_dbm: f64,
    /// Fixed receiver power of the single-phase slope check.
    pub receiver_power_watts: f64,
    pub beta: f64,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_points: usize,
    pub bmac_n: usize,
    pub bmac_p1: f64,
    pub sparsity_alpha: f64,
    pub sparsity_beta: f64,
    pub sparsity_p1: Vec<f64>,
    /// Fixed preamble for the sparsity check.
    pub sparsity_n: Option<usize>,
    /// `n = ceil(c ln(1/alpha))`; anchored automatically when neither is set.
    pub sparsity_c: Option<f64>,
    pub tolerances: Option<PathBuf>,
}

impl Default for AsymptoteBlock {
    fn default() -> Self {
        Self {
            p_dbm: -60.0,
            receiver_power_watts: 1e-6,
            beta: 1e-3,
            alpha_start: 1e-4,
            alpha_stop: 1e-20,
            alpha_points: 17,
            bmac_n: 30,
            bmac_p1: 1e-10,
            sparsity_alpha: 1e-3,
            sparsity_beta: 1e-6,
            sparsity_p1: vec![1e-2, 1e-4, 1e-6, 1e-10],
            sparsity_n: Some(50),
            sparsity_c: None,
            tolerances: None,
        }
    }
}

fn missing(block: &str) -> CliError {
    CliError::Config(format!("missing [{block}] block"))
}

fn field(block: &str, name: &str) -> CliError {
    CliError::Config(format!("[{block}] needs field '{name}'"))
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_str(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn profile(&self) -> Result<NoiseProfile, CliError> {
        let p = self.profile.as_ref().ok_or_else(|| missing("profile"))?;
        let (k, gamma) = match p.preset.as_deref() {
            Some("wake-up-receiver") => {
                let w = NoiseProfile::wake_up_receiver();
                (p.k.unwrap_or(w.k()), p.gamma.unwrap_or(w.gamma()))
            }
            Some(other) => return Err(CliError::Config(format!("[profile] unknown preset '{other}'"))),
            None => (p.k.ok_or_else(|| field("profile", "k"))?, p.gamma.ok_or_else(|| field("profile", "gamma"))?),
        };
        let sigma_t_sq = match (p.sigma_t_sq, p.temperature_k, p.bandwidth_hz) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(CliError::Config(
                    "[profile] give either sigma_t_sq or temperature_k and bandwidth_hz, not both".into(),
                ))
            }
            (Some(s), None, None) => s,
            (None, Some(t), Some(b)) => thermal_noise_watts(t, b)?,
            (None, None, None) => 0.0,
            _ => return Err(CliError::Config("[profile] temperature_k and bandwidth_hz go together".into())),
        };
        Ok(NoiseProfile::new(k, gamma, sigma_t_sq)?)
    }

    /// Received powers in Watts, with the dBm value each was given as.
    pub fn powers(&self) -> Result<Vec<f64>, CliError> {
        let s = self.scenario.as_ref().ok_or_else(|| missing("scenario"))?;
        match (&s.p_dbm, &s.p_watts) {
            (Some(d), None) => d.to_vec().into_iter().map(|v| dbm_to_watts(v).map_err(Into::into)).collect(),
            (None, Some(w)) => Ok(w.to_vec()),
            _ => Err(CliError::Config("[scenario] needs exactly one of p_dbm or p_watts".into())),
        }
    }

    /// Scenario grid, lexicographic in (n, P, p1).
    pub fn scenarios(&self) -> Result<Vec<ScenarioParams>, CliError> {
        let s = self.scenario.as_ref().ok_or_else(|| missing("scenario"))?;
        let powers = self.powers()?;
        let mut out = Vec::new();
        for n in s.n.to_vec() {
            for &p in &powers {
                for p1 in s.p1.to_vec() {
                    out.push(ScenarioParams::new(p, p1, n)?);
                }
            }
        }
        Ok(out)
    }

    pub fn single_scenario(&self) -> Result<ScenarioParams, CliError> {
        let all = self.scenarios()?;
        match all.as_slice() {
            [one] => Ok(*one),
            _ => Err(CliError::Config(format!("[scenario] must describe one scenario here, got {}", all.len()))),
        }
    }

    /// Alphas and betas of the target grid.
    pub fn target_axes(&self) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let t = self.targets.as_ref().ok_or_else(|| missing("targets"))?;
        let betas = match (&t.beta, &t.beta_sweep) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("[targets] give either beta or beta_sweep, not both".into()))
            }
            (Some(b), None) => b.to_vec(),
            (None, Some(sweep)) => {
                if sweep.points == 0 {
                    return Err(CliError::Config("[targets.beta_sweep] points must be at least 1".into()));
                }
                sweep.values()
            }
            (None, None) => BetaSweep::default().values(),
        };
        Ok((t.alpha.to_vec(), betas))
    }

    /// Target grid, lexicographic in (alpha, beta).
    pub fn targets(&self) -> Result<Vec<ReliabilityTarget>, CliError> {
        let (alphas, betas) = self.target_axes()?;
        let mut out = Vec::new();
        for &a in &alphas {
            for &b in &betas {
                out.push(ReliabilityTarget::new(a, b)?);
            }
        }
        Ok(out)
    }

    pub fn schemes(&self) -> Result<Vec<Scheme>, CliError> {
        match &self.schemes {
            None => Ok(Scheme::ALL.to_vec()),
            Some(list) => list.iter().map(|s| s.parse::<Scheme>().map_err(|e| CliError::Config(e.to_string()))).collect(),
        }
    }

    pub fn scheme_config(&self, scenario: &ScenarioParams) -> Result<SchemeConfig, CliError> {
        let b = self.scheme.as_ref().ok_or_else(|| missing("scheme"))?;
        let kind = b.kind.parse::<Scheme>().map_err(|e| CliError::Config(format!("[scheme] {e}")))?;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| field("scheme", name));
        let need_len = |v: Option<usize>, name: &str| v.ok_or_else(|| field("scheme", name));
        Ok(match kind {
            Scheme::SinglePhase => SchemeConfig::SinglePhase(SinglePhaseConfig {
                n: scenario.preamble_len(),
                receiver_power_watts: need(b.receiver_power_watts, "receiver_power_watts")?,
                threshold: need(b.threshold, "threshold")?,
            }),
            Scheme::Bmac => SchemeConfig::Bmac(BmacConfig {
                n: scenario.preamble_len(),
                receiver_power_watts: need(b.receiver_power_watts, "receiver_power_watts")?,
                threshold: need(b.threshold, "threshold")?,
            }),
            Scheme::AdaSense => SchemeConfig::AdaSense(AdaSenseConfig {
                l1: need_len(b.l1, "l1")?,
                l2: need_len(b.l2, "l2")?,
                p_r1: need(b.p_r1, "p_r1")?,
                p_r2: need(b.p_r2, "p_r2")?,
                eta1: need(b.eta1, "eta1")?,
                eta2: need(b.eta2, "eta2")?,
            }),
        })
    }

    pub fn mc(&self) -> Result<McBlock, CliError> {
        let mc = self.mc.unwrap_or_default();
        if mc.trials == 0 {
            return Err(CliError::Config("[mc] trials must be at least 1".into()));
        }
        Ok(mc)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}
