//! Tail-probability oracles independent of the library code.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn integrate_density(a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let panels = ((b - a) / 0.125).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    // sum the far panels first so the small tail contributions are not absorbed
    (0..panels)
        .rev()
        .map(|j| {
            let lo = a + j as f64 * h;
            let mid = lo + 0.5 * h;
            rule.iter()
                .map(|&(x, w)| {
                    let u = mid + 0.5 * h * x;
                    w * (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum::<f64>()
        / (2.0 * PI).sqrt()
}

pub fn quadrature_q(x: f64, rule: &[(f64, f64)]) -> f64 {
    if x >= 0.0 {
        integrate_density(x, x + 16.0, rule)
    } else {
        0.5 + integrate_density(x, 0.0, rule)
    }
}

/// phi(x)/x * sum_k (-1)^k (2k-1)!! / x^(2k), truncated at the smallest term.
pub fn asymptotic_log_q(x: f64) -> f64 {
    let x2 = x * x;
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 1..200 {
        let next = -term * (2 * k - 1) as f64 / x2;
        if next.abs() >= term.abs() || next.abs() < 1e-18 {
            break;
        }
        term = next;
        sum += term;
    }
    -0.5 * x2 - 0.5 * (2.0 * PI).ln() - x.ln() + sum.ln()
}
