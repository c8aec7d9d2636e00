//! Gaussian upper-tail probability `Q(x) = P(Z > x)` and its inverse.
//!
//! For `x <= 8` the tail comes from `erfc`; beyond that the value is built in
//! the log domain from a continued fraction for the Mills ratio, so that
//! `ln Q(x)` stays finite far past the point where `Q(x)` itself underflows.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const TAIL_SWITCH: f64 = 8.0;
const MILLS_TERMS: u32 = 64;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Gaussian upper-tail probability.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("q_function: argument {x} is not finite")));
    }
    Ok(q_raw(x))
}

/// Natural log of [`q_function`], computed without intermediate underflow.
pub fn log_q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("log_q_function: argument {x} is not finite")));
    }
    Ok(log_q_raw(x))
}

/// Returns `x` such that `Q(x) = p`.
pub fn inverse_q(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("inverse_q: probability {p} outside (0, 1)")));
    }
    Ok(inv_q_raw(p))
}

/// Returns `x` such that `ln Q(x) = ln_p`. Reaches probabilities that are not
/// representable as `f64`.
pub fn inverse_q_log(ln_p: f64) -> Result<f64> {
    if !(ln_p < 0.0) || !ln_p.is_finite() {
        return Err(Error::Domain(format!("inverse_q_log: log-probability {ln_p} outside (-inf, 0)")));
    }
    Ok(inv_q_log_raw(ln_p))
}

/// Unchecked `Q`. Infinite arguments map to 0 or 1; NaN propagates.
pub(crate) fn q_raw(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        log_q_tail(x).exp()
    } else {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// Unchecked `ln Q`.
pub(crate) fn log_q_raw(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        log_q_tail(x)
    } else if x >= 0.0 {
        (0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln()
    } else {
        // Q(x) = 1 - Q(-x) with Q(-x) < 1/2
        (-q_raw(-x)).ln_1p()
    }
}

fn log_q_tail(x: f64) -> f64 {
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    // Q(x) / phi(x) = 1 / (x + 1/(x + 2/(x + 3/(x + ...))))
    let mut t = x;
    for k in (1..=MILLS_TERMS).rev() {
        t = x + f64::from(k) / t;
    }
    -0.5 * x * x - HALF_LN_2PI - t.ln()
}

fn ln_phi(x: f64) -> f64 {
    -0.5 * x * x - HALF_LN_2PI
}

pub(crate) fn inv_q_raw(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if p >= 1e-300 {
        newton_log(p.ln(), -acklam_quantile(p))
    } else {
        inv_q_log_raw(p.ln())
    }
}

pub(crate) fn inv_q_log_raw(ln_p: f64) -> f64 {
    if ln_p > -690.0 {
        let p = ln_p.exp();
        if p == 0.5 {
            return 0.0;
        }
        return newton_log(ln_p, -acklam_quantile(p));
    }
    // Leading-order tail inversion: x^2 ~ -2 ln p - ln(-4 pi ln p)
    let u = -2.0 * ln_p;
    let x0 = (u - (2.0 * PI * u).ln()).sqrt();
    newton_log(ln_p, x0)
}

/// Newton iteration on `ln Q(x) - ln_p`, which is concave in `x`.
fn newton_log(ln_p: f64, x0: f64) -> f64 {
    let mut x = x0;
    for _ in 0..100 {
        let lq = log_q_raw(x);
        let step = (lq - ln_p) * (lq - ln_phi(x)).exp();
        if !step.is_finite() {
            break;
        }
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Rational approximation of the standard normal quantile (relative error
/// about 1.2e-9), used only to seed the Newton refinement.
fn acklam_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
