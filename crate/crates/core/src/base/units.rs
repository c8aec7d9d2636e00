use crate::error::{Error, Result};

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub fn dbm_to_watts(p_dbm: f64) -> Result<f64> {
    if !p_dbm.is_finite() {
        return Err(Error::Domain(format!("dbm_to_watts: {p_dbm} dBm is not finite")));
    }
    Ok(1e-3 * 10f64.powf(p_dbm / 10.0))
}

pub fn watts_to_dbm(p_w: f64) -> Result<f64> {
    if !(p_w > 0.0) || !p_w.is_finite() {
        return Err(Error::Domain(format!("watts_to_dbm: power {p_w} W must be positive")));
    }
    Ok(10.0 * (p_w * 1e3).log10())
}

/// Thermal noise power `k_b * T * B` in Watts.
pub fn thermal_noise_watts(temperature_kelvin: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(temperature_kelvin > 0.0 && bandwidth_hz > 0.0)
        || !temperature_kelvin.is_finite()
        || !bandwidth_hz.is_finite()
    {
        return Err(Error::Domain(format!(
            "thermal_noise_watts: T = {temperature_kelvin} K and B = {bandwidth_hz} Hz must be positive"
        )));
    }
    Ok(BOLTZMANN * temperature_kelvin * bandwidth_hz)
}
