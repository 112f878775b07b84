//! Oracles shared by the integration tests. Nothing here calls into the library.

#![allow(dead_code)]

use std::f64::consts::PI;

/// `(Ai(x), Ai'(x))` for `x ≥ 8` from the large-argument asymptotic series,
/// truncated at the smallest term.
pub fn airy_asymptotic(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (mut u, mut sum_u, mut sum_v) = (1.0f64, 1.0f64, 1.0f64);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = u / zeta.powi(k);
        if term > last {
            break;
        }
        last = term;
        sum_u += sign * term;
        sum_v += sign * v / zeta.powi(k);
    }
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    (pre * x.powf(-0.25) * sum_u, -pre * x.powf(0.25) * sum_v)
}

/// Result of shooting for the decaying solution of `v'' = v(v² + x)`.
#[derive(Debug, Clone, Copy)]
pub struct Shooting {
    pub gamma: f64,
    pub v0: f64,
    pub vx0: f64,
}

const X_START: f64 = 8.0;
const X_END: f64 = -12.0;
const STEP: f64 = 1e-3;

fn rhs(x: f64, v: f64) -> f64 {
    v * (v * v + x)
}

/// RK4 from `X_START` leftwards; records `(v, v')` at `x = 0`. `Err(true)` means blow-up
/// (γ too large), `Err(false)` a sign change (γ too small).
fn shoot(gamma: f64) -> Result<(f64, f64, f64), bool> {
    let (ai, aip) = airy_asymptotic(X_START);
    let (mut x, mut v, mut w) = (X_START, gamma * ai, gamma * aip);
    let steps = ((X_START - X_END) / STEP).round() as usize;
    let zero_at = (X_START / STEP).round() as usize;
    let h = -STEP;
    let mut at_zero = (0.0, 0.0);
    for k in 0..steps {
        if k == zero_at {
            at_zero = (v, w);
        }
        let (k1v, k1w) = (w, rhs(x, v));
        let (k2v, k2w) = (w + 0.5 * h * k1w, rhs(x + 0.5 * h, v + 0.5 * h * k1v));
        let (k3v, k3w) = (w + 0.5 * h * k2w, rhs(x + 0.5 * h, v + 0.5 * h * k2v));
        let (k4v, k4w) = (w + h * k3w, rhs(x + h, v + h * k3v));
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        x = X_START + (k + 1) as f64 * h;
        if !v.is_finite() || v > 2.0 * (1.0 + x.abs().sqrt()) {
            return Err(true);
        }
        if v < 0.0 {
            return Err(false);
        }
    }
    let large = v > x.abs().sqrt();
    if large {
        Err(true)
    } else {
        Ok((at_zero.0, at_zero.1, v))
    }
}

/// Bisects the connection coefficient on `[1.3, 1.5]`.
pub fn shooting_oracle() -> Shooting {
    let (mut lo, mut hi) = (1.3, 1.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match shoot(mid) {
            Err(true) => hi = mid,
            _ => lo = mid,
        }
    }
    let gamma = 0.5 * (lo + hi);
    let (v0, vx0) = first_values(gamma);
    Shooting { gamma, v0, vx0 }
}

/// `(v(0), v'(0))` of the trajectory started with coefficient `gamma`.
fn first_values(gamma: f64) -> (f64, f64) {
    let (ai, aip) = airy_asymptotic(X_START);
    let (mut x, mut v, mut w) = (X_START, gamma * ai, gamma * aip);
    let h = -STEP;
    let steps = (X_START / STEP).round() as usize;
    for k in 0..steps {
        let (k1v, k1w) = (w, rhs(x, v));
        let (k2v, k2w) = (w + 0.5 * h * k1w, rhs(x + 0.5 * h, v + 0.5 * h * k1v));
        let (k3v, k3w) = (w + 0.5 * h * k2w, rhs(x + 0.5 * h, v + 0.5 * h * k2v));
        let (k4v, k4w) = (w + h * k3w, rhs(x + h, v + h * k3v));
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        x = X_START + (k + 1) as f64 * h;
    }
    (v, w)
}

/// Harmonic Thomas–Fermi constants for `W = r²` (isotropic): `λ₀ = √(2/π)`, `R = λ₀^{1/2}`.
pub fn harmonic_lambda0(aniso: f64) -> f64 {
    (2.0 * aniso / PI).sqrt()
}

/// `c₋₂ = λ₀/2 − ¼∫(A⁺)²` in closed form for `W = r²`: `λ₀/3`.
pub fn harmonic_c_minus2() -> f64 {
    harmonic_lambda0(1.0) / 3.0
}

/// `c_log = (1/12)∮β³ dθ = (1/12)·2πR·2R`.
pub fn harmonic_c_log() -> f64 {
    PI * harmonic_lambda0(1.0) / 3.0
}

/// Ordinary least squares; returns `(slope, intercept, r²)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, sxy * sxy / (sxx * syy))
}

/// `max/min` of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}
