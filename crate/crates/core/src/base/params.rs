use crate::error::{ensure, Error, Result};

/// Receiver noise law `sigma^2(P_r) = k * P_r^(-gamma) + sigma_t^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProfile {
    k: f64,
    gamma: f64,
    sigma_t_sq: f64,
}

impl NoiseProfile {
    pub fn new(k: f64, gamma: f64, sigma_t_sq: f64) -> Result<Self> {
        ensure(k > 0.0 && k.is_finite(), || format!("noise profile: k = {k} must be positive"))?;
        ensure(gamma >= 1.0 && gamma.is_finite(), || {
            format!("noise profile: gamma = {gamma} must be at least 1")
        })?;
        ensure(sigma_t_sq >= 0.0 && sigma_t_sq.is_finite(), || {
            format!("noise profile: sigma_t_sq = {sigma_t_sq} must be non-negative")
        })?;
        Ok(Self { k, gamma, sigma_t_sq })
    }

    /// Low-power wake-up receiver profile: -55 dBm of receiver noise at 1 uW,
    /// 20 dB less per decade of consumed power, thermal floor ignored.
    pub fn wake_up_receiver() -> Self {
        Self { k: 10f64.powf(-20.5), gamma: 2.0, sigma_t_sq: 0.0 }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma_t_sq(&self) -> f64 {
        self.sigma_t_sq
    }

    pub fn with_thermal_floor(self, sigma_t_sq: f64) -> Result<Self> {
        Self::new(self.k, self.gamma, sigma_t_sq)
    }

    /// Total noise variance observed when the receiver consumes `receiver_power_watts`.
    pub fn noise_variance(&self, receiver_power_watts: f64) -> Result<f64> {
        if !(receiver_power_watts > 0.0) || !receiver_power_watts.is_finite() {
            return Err(Error::Domain(format!(
                "noise_variance: receiver power {receiver_power_watts} W must be positive"
            )));
        }
        Ok(self.variance_raw(receiver_power_watts))
    }

    pub(crate) fn variance_raw(&self, p_r: f64) -> f64 {
        self.k * p_r.powf(-self.gamma) + self.sigma_t_sq
    }

    /// Receiver power needed to bring the total noise variance down to
    /// `sigma_sq`, or `None` when the thermal floor makes that impossible.
    pub fn power_for_variance(&self, sigma_sq: f64) -> Option<f64> {
        let receiver_part = sigma_sq - self.sigma_t_sq;
        if receiver_part > 0.0 && receiver_part.is_finite() {
            Some((self.k / receiver_part).powf(1.0 / self.gamma))
        } else {
            None
        }
    }
}

/// Channel and deployment context of one sensing window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    received_power_watts: f64,
    prior_p1: f64,
    preamble_len: usize,
}

impl ScenarioParams {
    pub fn new(received_power_watts: f64, prior_p1: f64, preamble_len: usize) -> Result<Self> {
        ensure(received_power_watts > 0.0 && received_power_watts.is_finite(), || {
            format!("scenario: received power {received_power_watts} W must be positive")
        })?;
        ensure(prior_p1 > 0.0 && prior_p1 < 1.0, || {
            format!("scenario: prior p1 = {prior_p1} must lie in (0, 1)")
        })?;
        ensure(preamble_len >= 1, || "scenario: preamble length must be at least 1".into())?;
        Ok(Self { received_power_watts, prior_p1, preamble_len })
    }

    pub fn received_power_watts(&self) -> f64 {
        self.received_power_watts
    }

    pub fn prior_p1(&self) -> f64 {
        self.prior_p1
    }

    pub fn preamble_len(&self) -> usize {
        self.preamble_len
    }

    pub fn with_prior(self, prior_p1: f64) -> Result<Self> {
        Self::new(self.received_power_watts, prior_p1, self.preamble_len)
    }

    pub fn with_preamble_len(self, preamble_len: usize) -> Result<Self> {
        Self::new(self.received_power_watts, self.prior_p1, preamble_len)
    }
}

/// Upper bounds on false-alarm and miss probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityTarget {
    alpha: f64,
    beta: f64,
}

impl ReliabilityTarget {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        ensure(alpha > 0.0 && alpha < 1.0, || format!("target: alpha = {alpha} must lie in (0, 1)"))?;
        ensure(beta > 0.0 && beta < 1.0, || format!("target: beta = {beta} must lie in (0, 1)"))?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::watts_to_dbm;

    #[test]
    fn wake_up_receiver_reference_points() {
        let profile = NoiseProfile::wake_up_receiver();
        let at_1uw = profile.noise_variance(1e-6).unwrap();
        assert!((at_1uw - 10f64.powf(-8.5)).abs() / at_1uw < 1e-12);
        assert!((watts_to_dbm(at_1uw).unwrap() + 55.0).abs() < 1e-9);
        let at_10uw = profile.noise_variance(1e-5).unwrap();
        assert!((watts_to_dbm(at_10uw).unwrap() + 75.0).abs() < 1e-9);
    }

    #[test]
    fn unit_profile_is_identity() {
        let profile = NoiseProfile::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(profile.noise_variance(1.0).unwrap(), 1.0);
        assert_eq!(profile.noise_variance(4.0).unwrap(), 0.25);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(NoiseProfile::new(0.0, 2.0, 0.0).is_err());
        assert!(NoiseProfile::new(1.0, 0.5, 0.0).is_err());
        assert!(NoiseProfile::new(1.0, 2.0, -1e-20).is_err());
        let p = NoiseProfile::wake_up_receiver();
        assert!(p.noise_variance(0.0).is_err());
        assert!(p.noise_variance(-1e-6).is_err());
    }

    #[test]
    fn power_for_variance_inverts_profile() {
        let p = NoiseProfile::new(3e-21, 2.0, 1e-15).unwrap();
        let s = p.noise_variance(2.5e-6).unwrap();
        let back = p.power_for_variance(s).unwrap();
        assert!((back - 2.5e-6).abs() / 2.5e-6 < 1e-10);
        assert!(p.power_for_variance(1e-15).is_none());
    }

    #[test]
    fn rejects_bad_scenarios_and_targets() {
        assert!(ScenarioParams::new(0.0, 0.5, 10).is_err());
        assert!(ScenarioParams::new(1e-9, 0.0, 10).is_err());
        assert!(ScenarioParams::new(1e-9, 1.0, 10).is_err());
        assert!(ScenarioParams::new(1e-9, 0.5, 0).is_err());
        assert!(ReliabilityTarget::new(0.0, 0.1).is_err());
        assert!(ReliabilityTarget::new(0.1, 1.0).is_err());
        assert!(ReliabilityTarget::new(1e-3, 1e-6).is_ok());
    }
}
