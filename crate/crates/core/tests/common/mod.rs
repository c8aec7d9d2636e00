#![allow(dead_code)]

pub mod oracle;

use adasense::base::{inverse_q, NoiseProfile, ScenarioParams};
use adasense::schemes::{AdaSenseConfig, BmacConfig, SchemeConfig, SinglePhaseConfig};

/// -80 dBm received power, wake-up receiver noise.
pub fn moderate_scenario(n: usize, p1: f64) -> (ScenarioParams, NoiseProfile) {
    (ScenarioParams::new(1e-11, p1, n).unwrap(), NoiseProfile::wake_up_receiver())
}

fn deflection(len: usize, sc: &ScenarioParams, prof: &NoiseProfile, p_r: f64) -> f64 {
    (len as f64 * sc.received_power_watts() / prof.noise_variance(p_r).unwrap()).sqrt()
}

/// LLR threshold giving false-alarm probability `fa`.
pub fn threshold_for(fa: f64, d: f64) -> f64 {
    d * (inverse_q(fa).unwrap() - d / 2.0)
}

/// Single-phase test with p_fa of about 0.05 and p_miss of about 0.14.
pub fn moderate_single_phase() -> (SchemeConfig, ScenarioParams, NoiseProfile) {
    let (sc, prof) = moderate_scenario(12, 0.3);
    let p_r = 1.4e-5;
    let d = deflection(12, &sc, &prof, p_r);
    let cfg = SinglePhaseConfig { n: 12, receiver_power_watts: p_r, threshold: threshold_for(0.05, d) };
    (SchemeConfig::SinglePhase(cfg), sc, prof)
}

pub fn moderate_bmac() -> (SchemeConfig, ScenarioParams, NoiseProfile) {
    let (sc, prof) = moderate_scenario(4, 0.3);
    let p_r = 4e-5;
    let sigma = prof.noise_variance(p_r).unwrap().sqrt();
    (SchemeConfig::Bmac(BmacConfig { n: 4, receiver_power_watts: p_r, threshold: 0.4 * sigma }), sc, prof)
}

pub fn moderate_adasense() -> (SchemeConfig, ScenarioParams, NoiseProfile) {
    let (sc, prof) = moderate_scenario(6, 0.1);
    let (p_r1, p_r2) = (2e-5, 4e-5);
    let d1 = deflection(2, &sc, &prof, p_r1);
    let d2 = deflection(3, &sc, &prof, p_r2);
    let cfg = AdaSenseConfig { l1: 2, l2: 3, p_r1, p_r2, eta1: threshold_for(0.2, d1), eta2: threshold_for(0.05, d2) };
    (SchemeConfig::AdaSense(cfg), sc, prof)
}
