//! Airy functions `Ai`, `Bi` and their derivatives for real arguments.
//!
//! For `|x| < SWITCH` the functions are propagated by Taylor series of
//! Airy's equation `y'' = x y` in short steps: `Bi` and the oscillatory
//! region forward from the origin, `Ai` on the positive axis backward from
//! `SWITCH` (the recessive direction for `Ai` is forward, so the backward
//! march is stable). Beyond `SWITCH` the classical asymptotic expansions are
//! summed up to their smallest term.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// `Ai(0)`.
pub const AI0: f64 = 0.355_028_053_887_817_2;
/// `Ai'(0)`.
pub const AIP0: f64 = -0.258_819_403_792_806_8;
/// `Bi(0)`.
pub const BI0: f64 = 0.614_926_627_446_000_7;
/// `Bi'(0)`.
pub const BIP0: f64 = 0.448_288_357_353_826_4;

const SWITCH: f64 = 12.0;
const MAX_ABS_X: f64 = 200.0;
const TAYLOR_STEP: f64 = 0.5;
const UNDERFLOW: f64 = 1e-300;

/// Airy function values at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryValues {
    pub x: f64,
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
    /// `ai` or `ai_prime` fell below `1e-300` and was replaced by 0.
    pub underflow: bool,
    /// `bi` or `bi_prime` exceeds the floating-point range.
    pub overflow: bool,
}

impl AiryValues {
    /// `ai·bi' − ai'·bi`, which equals `1/π` exactly.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Evaluates `Ai, Ai', Bi, Bi'` at `x`.
pub fn airy(x: f64) -> Result<AiryValues> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("airy: non-finite argument {x}")));
    }
    if x.abs() > MAX_ABS_X {
        return Err(Error::Domain(format!(
            "airy: |x| = {} exceeds {MAX_ABS_X}",
            x.abs()
        )));
    }
    let mut out = AiryValues {
        x,
        ai: 0.0,
        ai_prime: 0.0,
        bi: 0.0,
        bi_prime: 0.0,
        underflow: false,
        overflow: false,
    };
    if x >= SWITCH {
        let (ai, aip, bi, bip, under, over) = asymptotic_positive(x);
        out.ai = ai;
        out.ai_prime = aip;
        out.bi = bi;
        out.bi_prime = bip;
        out.underflow = under;
        out.overflow = over;
    } else if x <= -SWITCH {
        let (ai, aip, bi, bip) = asymptotic_negative(-x);
        out.ai = ai;
        out.ai_prime = aip;
        out.bi = bi;
        out.bi_prime = bip;
    } else if x >= 0.0 {
        let (ai_s, aip_s, _, _, _, _) = asymptotic_positive(SWITCH);
        let (ai, aip) = propagate(SWITCH, ai_s, aip_s, x);
        let (bi, bip) = propagate(0.0, BI0, BIP0, x);
        out.ai = ai;
        out.ai_prime = aip;
        out.bi = bi;
        out.bi_prime = bip;
    } else {
        let (ai, aip) = propagate(0.0, AI0, AIP0, x);
        let (bi, bip) = propagate(0.0, BI0, BIP0, x);
        out.ai = ai;
        out.ai_prime = aip;
        out.bi = bi;
        out.bi_prime = bip;
    }
    if out.ai.abs() < UNDERFLOW && x > 0.0 {
        out.ai = 0.0;
        out.underflow = true;
    }
    if out.ai_prime.abs() < UNDERFLOW && x > 0.0 {
        out.ai_prime = 0.0;
        out.underflow = true;
    }
    Ok(out)
}

/// `Ai(x)` alone.
pub fn ai(x: f64) -> Result<f64> {
    airy(x).map(|a| a.ai)
}

/// `ln Ai(x)` for `x ≥ 0`, finite even where `Ai` itself underflows.
pub fn ln_ai(x: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!(
            "ln_ai: argument {x} must be finite and ≥ 0"
        )));
    }
    if x < SWITCH {
        return airy(x).map(|a| a.ai.ln());
    }
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (su, _) = asymptotic_sums(zeta, -1.0);
    Ok(-zeta - (2.0 * PI.sqrt() * x.powf(0.25)).ln() + su.ln())
}

/// Dominant-balance leading term `½π^{-1/2}x^{-1/4}e^{-2x^{3/2}/3}`.
pub fn ai_leading(x: f64) -> f64 {
    0.5 / PI.sqrt() * x.powf(-0.25) * (-2.0 / 3.0 * x.powf(1.5)).exp()
}

/// One Taylor step of `y'' = x y` from `x0` by `h`.
fn taylor_step(x0: f64, y: f64, dy: f64, h: f64) -> (f64, f64) {
    // a_{k+2} (k+2)(k+1) = x0 a_k + a_{k-1}
    let mut a_km1 = y; // a_{k-1}
    let mut a_k = dy; // a_k
    let a2 = 0.5 * x0 * y;
    let mut sum_y = y + dy * h + a2 * h * h;
    let mut sum_dy = dy + 2.0 * a2 * h;
    let mut a_kp1 = a2; // a_{k+1}
    let mut hp = h * h; // h^{k+1}
    let mut small = 0;
    for k in 1..400usize {
        let next = (x0 * a_k + a_km1) / (((k + 2) * (k + 1)) as f64);
        a_km1 = a_k;
        a_k = a_kp1;
        a_kp1 = next;
        let dterm = ((k + 2) as f64) * next * hp;
        hp *= h;
        let term = next * hp;
        sum_y += term;
        sum_dy += dterm;
        let scale = sum_y.abs() + sum_dy.abs() * h.abs() + f64::MIN_POSITIVE;
        // three consecutive negligible terms: the recurrence can produce isolated zeros
        if term.abs() + dterm.abs() * h.abs() < 1e-18 * scale {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    (sum_y, sum_dy)
}

fn propagate(x0: f64, y0: f64, dy0: f64, x1: f64) -> (f64, f64) {
    let span = x1 - x0;
    let steps = (span.abs() / TAYLOR_STEP).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let (mut y, mut dy) = (y0, dy0);
    for i in 0..steps {
        let xi = x0 + i as f64 * h;
        let (ny, ndy) = taylor_step(xi, y, dy, h);
        y = ny;
        dy = ndy;
    }
    (y, dy)
}

/// Asymptotic sums `Σ s^k u_k ζ^{-k}` and `Σ s^k v_k ζ^{-k}`, truncated at the smallest term.
fn asymptotic_sums(zeta: f64, sign: f64) -> (f64, f64) {
    let (mut su, mut sv) = (1.0, 1.0);
    let mut u = 1.0;
    let mut zp = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60usize {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zp *= sign / zeta;
        let tu = u * zp;
        if tu.abs() > last {
            break;
        }
        last = tu.abs();
        su += tu;
        sv += v * zp;
        if tu.abs() < 1e-18 {
            break;
        }
    }
    (su, sv)
}

/// Even/odd split sums for the oscillatory expansions.
fn oscillatory_sums(zeta: f64) -> (f64, f64, f64, f64) {
    let (mut ue, mut uo, mut ve, mut vo) = (1.0, 0.0, 1.0, 0.0);
    let mut u = 1.0;
    let mut zp = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60usize {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zp /= zeta;
        let tu = u * zp;
        if tu.abs() > last {
            break;
        }
        last = tu.abs();
        // (-1)^{floor(k/2)}
        let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            ue += s * tu;
            ve += s * v * zp;
        } else {
            uo += s * tu;
            vo += s * v * zp;
        }
        if tu.abs() < 1e-18 {
            break;
        }
    }
    (ue, uo, ve, vo)
}

fn asymptotic_positive(x: f64) -> (f64, f64, f64, f64, bool, bool) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let q = x.powf(0.25);
    let sp = PI.sqrt();
    let (su_m, sv_m) = asymptotic_sums(zeta, -1.0);
    let (su_p, sv_p) = asymptotic_sums(zeta, 1.0);
    let em = (-zeta).exp();
    let ep = zeta.exp();
    let ai = em / (2.0 * sp * q) * su_m;
    let aip = -q * em / (2.0 * sp) * sv_m;
    let bi = ep / (sp * q) * su_p;
    let bip = q * ep / sp * sv_p;
    let overflow = !bi.is_finite() || !bip.is_finite();
    let (bi, bip) = if overflow {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (bi, bip)
    };
    (ai, aip, bi, bip, false, overflow)
}

fn asymptotic_negative(ax: f64) -> (f64, f64, f64, f64) {
    let zeta = 2.0 / 3.0 * ax.powf(1.5);
    let q = ax.powf(0.25);
    let sp = PI.sqrt();
    let (ue, uo, ve, vo) = oscillatory_sums(zeta);
    let ph = zeta - PI / 4.0;
    let (s, c) = ph.sin_cos();
    let ai = (c * ue + s * uo) / (sp * q);
    let aip = q / sp * (s * ve - c * vo);
    let bi = (-s * ue + c * uo) / (sp * q);
    let bip = q / sp * (c * ve + s * vo);
    (ai, aip, bi, bip)
}
