//! Matched approximate solution `u_ap` and closed-form asymptotic predictions.
//!
//! Fermi coordinates: `t` is the signed distance to the Thomas–Fermi boundary
//! (negative inside), `θ` the arclength of the foot point. The stretched normal
//! variable is `x = βt/ε^{2/3}`, so the inner profile reads `ε^{1/3}βV(x)`.

use crate::contour::Point;
use crate::error::{Error, Result};
use crate::numerics::{integrate, smoothstep};
use crate::painleve::{Orientation, ProfileSolution};
use crate::trap::{Boundary, TfData};
use serde::Serialize;
use std::f64::consts::PI;

/// Cutoff widths: `delta` in physical `t` units, `l` in stretched `x` units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerParams {
    pub delta: f64,
    pub l: f64,
}

impl LayerParams {
    pub const DEFAULT_L: f64 = 1.0;

    /// `δ = max(min(δ₀, R/10)/2, 2Lε^{2/3}/β_min)`, `L = 1`, with `R` the equivalent radius `ℓ/2π`.
    pub fn default_for(tf: &TfData, epsilon: f64) -> Self {
        let l = Self::DEFAULT_L;
        let radius = tf.radius().unwrap_or(tf.ell0 / (2.0 * PI));
        let geometric = 0.5 * reach(tf).min(0.1 * radius);
        Self {
            delta: geometric.max(min_delta(tf, epsilon, l)),
            l,
        }
    }
}

/// Smallest `δ` keeping the glue band `{−2L ≤ x ≤ −L}` inside the plateau `{t ≥ −δ}`.
pub fn min_delta(tf: &TfData, epsilon: f64, l: f64) -> f64 {
    let beta_min = tf.beta.iter().cloned().fold(f64::INFINITY, f64::min);
    2.0 * l * epsilon.powf(2.0 / 3.0) / beta_min
}

/// `δ₀`: half the smallest curvature radius.
pub fn reach(tf: &TfData) -> f64 {
    let kmax = tf.curvature.iter().fold(0.0f64, |a, k| a.max(k.abs()));
    if kmax > 0.0 {
        0.5 / kmax
    } else {
        f64::INFINITY
    }
}

/// Fermi coordinates of a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fermi {
    pub t: f64,
    pub theta: f64,
    pub beta: f64,
}

/// Pieces of `u_ap` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Parts {
    pub fermi: Fermi,
    /// `x = βt/ε^{2/3}`.
    pub x: f64,
    pub a: f64,
    pub u_in: f64,
    /// Modified outer profile where the glue weight is positive.
    pub u_out: Option<f64>,
    pub u: f64,
}

/// `u_ap` for one ε. Immutable; evaluation is thread-safe.
#[derive(Debug, Clone)]
pub struct ApproxSolution<'a> {
    pub epsilon: f64,
    pub tf: &'a TfData,
    pub hm: &'a ProfileSolution,
    pub params: LayerParams,
    /// Half-width of the square computational box.
    pub box_half: f64,
    e13: f64,
    e23: f64,
}

fn check_profile(hm: &ProfileSolution) -> Result<()> {
    if hm.p != 2.0 || hm.orientation != Orientation::FullLine {
        return Err(Error::Parameter(
            "layer profile must be the p = 2 full-line solution".into(),
        ));
    }
    Ok(())
}

/// Assembles `u_ap`, rejecting cutoff widths that violate the layer constraints.
pub fn build_u_ap<'a>(
    tf: &'a TfData,
    hm: &'a ProfileSolution,
    epsilon: f64,
    params: LayerParams,
) -> Result<ApproxSolution<'a>> {
    check_profile(hm)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("ε = {epsilon} outside (0, 1)")));
    }
    let LayerParams { delta, l } = params;
    if !(delta > 0.0 && l > 0.0) {
        return Err(Error::Parameter(format!(
            "δ = {delta}, L = {l} must be positive"
        )));
    }
    let e23 = epsilon.powf(2.0 / 3.0);
    let need = min_delta(tf, epsilon, l);
    if delta < need * (1.0 - 1e-12) {
        return Err(Error::Parameter(format!(
            "δ = {delta} is below 2Lε^(2/3)/β_min = {need}"
        )));
    }
    if delta > reach(tf) {
        return Err(Error::Parameter(format!(
            "2δ = {} exceeds the curvature radius {}",
            2.0 * delta,
            2.0 * reach(tf)
        )));
    }
    let extent = tf.trap.extent(tf.lambda)?;
    // room for the exterior cutoff band {t ≤ 20δ} plus a margin
    let box_half = extent + (0.5 * extent).max(25.0 * delta);
    let approx = ApproxSolution {
        epsilon,
        tf,
        hm,
        params,
        box_half,
        e13: epsilon.cbrt(),
        e23,
    };
    approx.check_radicand()?;
    Ok(approx)
}

impl<'a> ApproxSolution<'a> {
    /// Boundary samples used to scan normal sections.
    fn section_angles(&self) -> Vec<f64> {
        match self.tf.boundary {
            Boundary::Circle { .. } => vec![0.0],
            Boundary::Polyline => self.tf.theta.clone(),
        }
    }

    fn check_radicand(&self) -> Result<()> {
        let delta = self.params.delta;
        for theta in self.section_angles() {
            for k in 0..=400 {
                let t = -2.0 * delta * k as f64 / 400.0;
                let y = self.fermi_inverse(t, theta);
                let p = self.parts(y);
                if p.x <= -self.params.l && self.radicand(&p) < 0.0 {
                    return Err(Error::Parameter(format!(
                        "outer radicand negative at t = {t:.3e}, θ = {theta:.3}; increase L"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(t, θ, β)` of `y`.
    pub fn fermi(&self, y: Point) -> Fermi {
        match self.tf.boundary {
            Boundary::Circle { radius } => {
                let phi = y[1].atan2(y[0]).rem_euclid(2.0 * PI);
                Fermi {
                    t: y[0].hypot(y[1]) - radius,
                    theta: radius * phi,
                    beta: self.tf.beta[0],
                }
            }
            Boundary::Polyline => self.project(y),
        }
    }

    /// Point at signed distance `t` along the normal through the foot at arclength `θ`.
    pub fn fermi_inverse(&self, t: f64, theta: f64) -> Point {
        match self.tf.boundary {
            Boundary::Circle { radius } => {
                let phi = theta / radius;
                [(radius + t) * phi.cos(), (radius + t) * phi.sin()]
            }
            Boundary::Polyline => {
                let (k, frac) = self.segment_at(theta);
                let (p, q) = self.segment(k);
                let n = segment_normal(p, q);
                [
                    p[0] + frac * (q[0] - p[0]) + t * n[0],
                    p[1] + frac * (q[1] - p[1]) + t * n[1],
                ]
            }
        }
    }

    fn segment(&self, k: usize) -> (Point, Point) {
        let pts = &self.tf.points;
        (pts[k], pts[(k + 1) % pts.len()])
    }

    fn segment_theta(&self, k: usize) -> (f64, f64) {
        let th = &self.tf.theta;
        let next = if k + 1 < th.len() {
            th[k + 1]
        } else {
            self.tf.ell0 + th[0]
        };
        (th[k], next)
    }

    fn segment_at(&self, theta: f64) -> (usize, f64) {
        let th = &self.tf.theta;
        let theta = (theta - th[0]).rem_euclid(self.tf.ell0) + th[0];
        let k = th.partition_point(|&s| s <= theta).saturating_sub(1);
        let (a, b) = self.segment_theta(k);
        (k, (theta - a) / (b - a))
    }

    fn project(&self, y: Point) -> Fermi {
        let m = self.tf.points.len();
        let mut best = (f64::INFINITY, 0usize, 0.0f64);
        for k in 0..m {
            let (p, q) = self.segment(k);
            let d = [q[0] - p[0], q[1] - p[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let s = (((y[0] - p[0]) * d[0] + (y[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0);
            let f = [p[0] + s * d[0], p[1] + s * d[1]];
            let dist2 = (y[0] - f[0]).powi(2) + (y[1] - f[1]).powi(2);
            if dist2 < best.0 {
                best = (dist2, k, s);
            }
        }
        let (dist2, k, s) = best;
        let (p, q) = self.segment(k);
        let n = segment_normal(p, q);
        let f = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
        let side = (y[0] - f[0]) * n[0] + (y[1] - f[1]) * n[1];
        let (a, b) = self.segment_theta(k);
        let beta = self.tf.beta[k] + s * (self.tf.beta[(k + 1) % m] - self.tf.beta[k]);
        Fermi {
            t: dist2.sqrt().copysign(side),
            theta: a + s * (b - a),
            beta,
        }
    }

    /// `λ − W` with the multiplier stored in the Thomas–Fermi data.
    pub fn a_eps(&self, y: Point) -> f64 {
        self.tf.a(y)
    }

    /// Inner approximation `ε^{1/3}βV(βt/ε^{2/3})`.
    pub fn inner(&self, t: f64, beta: f64) -> f64 {
        self.e13 * beta * self.hm.value(beta * t / self.e23)
    }

    fn radicand(&self, p: &Parts) -> f64 {
        let delta = self.params.delta;
        let chi = smoothstep((p.fermi.t + 2.0 * delta) / delta);
        let v = self.hm.value(p.x);
        p.a + self.e23 * p.fermi.beta.powi(2) * chi * (p.x + v * v)
    }

    /// All pieces of the three-part definition at `y`.
    pub fn parts(&self, y: Point) -> Parts {
        let delta = self.params.delta;
        let l = self.params.l;
        let fermi = self.fermi(y);
        let a = self.a_eps(y);
        let x = fermi.beta * fermi.t / self.e23;
        let mut parts = Parts {
            fermi,
            x,
            a,
            u_in: 0.0,
            u_out: None,
            u: 0.0,
        };
        if fermi.t <= -2.0 * delta {
            parts.u = a.max(0.0).sqrt();
            parts.u_out = Some(parts.u);
            return parts;
        }
        parts.u_in = self.inner(fermi.t, fermi.beta);
        let rho = smoothstep((-l - x) / l);
        let far = smoothstep((20.0 * delta - fermi.t) / (10.0 * delta));
        parts.u = (1.0 - rho) * far * parts.u_in;
        if rho > 0.0 {
            let out = self.radicand(&parts).max(0.0).sqrt();
            parts.u_out = Some(out);
            parts.u += rho * out;
        }
        parts
    }

    /// `u_ap(y)`.
    pub fn value(&self, y: Point) -> f64 {
        self.parts(y).u
    }

    /// Physical residual `Δu_ap − ε^{−2}u_ap(u_ap² − a_ε)` by fourth-order differences.
    pub fn residual(&self, y: Point) -> Result<f64> {
        let beta_max = self.tf.beta.iter().cloned().fold(0.0, f64::max);
        let h = 0.05 * self.e23 / beta_max;
        if y[0].abs() + 2.0 * h > self.box_half || y[1].abs() + 2.0 * h > self.box_half {
            return Err(Error::Domain(format!(
                "stencil at ({}, {}) leaves the box",
                y[0], y[1]
            )));
        }
        let u0 = self.value(y);
        let second = |dir: Point| {
            let f = |k: f64| self.value([y[0] + k * h * dir[0], y[1] + k * h * dir[1]]);
            (-f(2.0) + 16.0 * f(1.0) - 30.0 * u0 + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * h * h)
        };
        let lap = second([1.0, 0.0]) + second([0.0, 1.0]);
        let e2 = self.epsilon * self.epsilon;
        Ok(lap - u0 * (u0 * u0 - self.a_eps(y)) / e2)
    }

    /// Residual in stretched units: `ε^{4/3}` times the physical residual.
    pub fn scaled_residual(&self, y: Point) -> Result<f64> {
        Ok(self.e23 * self.e23 * self.residual(y)?)
    }

    /// Rows `t, θ, u_ap, inner, √(a⁺)` along the normal at `theta`.
    pub fn normal_section(&self, theta: f64, ts: &[f64]) -> Vec<[f64; 5]> {
        ts.iter()
            .map(|&t| {
                let p = self.parts(self.fermi_inverse(t, theta));
                [
                    t,
                    theta,
                    p.u,
                    self.inner(t, p.fermi.beta),
                    p.a.max(0.0).sqrt(),
                ]
            })
            .collect()
    }

    /// Sup-weighted glue, outer-closeness and linearization diagnostics over the layer band.
    pub fn band_diagnostics(&self, samples: usize) -> BandDiagnostics {
        let LayerParams { delta, l } = self.params;
        let mut d = BandDiagnostics {
            glue: 0.0,
            outer: 0.0,
            linearization_min: f64::INFINITY,
        };
        for theta in self.section_angles() {
            for k in 0..=samples {
                let t = -2.0 * delta * k as f64 / samples as f64;
                let p = self.parts(self.fermi_inverse(t, theta));
                let s = (t / self.e23).abs();
                let bt = p.fermi.beta * t;
                if bt >= -delta {
                    let lin = (3.0 * p.u * p.u - p.a) / self.e23;
                    d.linearization_min = d.linearization_min.min(lin);
                }
                let Some(out) = p.u_out.filter(|_| p.x <= -l && p.fermi.t > -2.0 * delta) else {
                    continue;
                };
                if bt >= -delta {
                    d.glue = d
                        .glue
                        .max((out - p.u_in).abs() / (self.epsilon * s.powf(1.5)));
                }
                if bt >= -2.0 * delta {
                    d.outer = d
                        .outer
                        .max((out - p.a.max(0.0).sqrt()).abs() * s.powf(2.5) / self.e13);
                }
            }
        }
        d
    }
}

fn segment_normal(p: Point, q: Point) -> Point {
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let len = dx.hypot(dy);
    [dy / len, -dx / len]
}

/// Weighted layer-band sups of [`ApproxSolution::band_diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandDiagnostics {
    /// `sup |ũ_out − u_in|/(ε|s|^{3/2})` on `{−δ ≤ βt, x ≤ −L}`.
    pub glue: f64,
    /// `sup |ũ_out − √a|·|s|^{5/2}/ε^{1/3}` on `{−2δ ≤ βt, x ≤ −L}`.
    pub outer: f64,
    /// `min (3u_ap² − a)/ε^{2/3}` on `{−δ ≤ βt ≤ 0}`.
    pub linearization_min: f64,
}

/// Closed-form predictions for one ε.
#[derive(Debug, Clone, Serialize)]
pub struct PredictionBundle<'a> {
    #[serde(skip)]
    pub tf: &'a TfData,
    #[serde(skip)]
    pub hm: &'a ProfileSolution,
    pub epsilon: f64,
    pub lambda0: f64,
    /// `λ₀/2 − ¼∫(A⁺)²`.
    pub c_minus2: f64,
    /// `(1/12)∫β³ dθ`.
    pub c_log: f64,
    pub v0: f64,
    /// `∫_0^∞ V²`.
    pub v2_positive: f64,
    /// `f_ε(R) ≈ ε^{2/3}Rβ^{−1}V(0)^{−2}∫_0^∞V²` (radial traps).
    pub f_boundary: Option<f64>,
}

/// Asymptotic predictions from `tf` (built with `λ₀`) and the Hastings–McLeod profile.
pub fn predict<'a>(
    tf: &'a TfData,
    hm: &'a ProfileSolution,
    epsilon: f64,
) -> Result<PredictionBundle<'a>> {
    check_profile(hm)?;
    let lambda0 = tf.lambda;
    let a2 = tf.trap.integrate_positive_part(lambda0, |a| a * a)?;
    let v0 = hm.value(0.0);
    let v2_positive = hm.positive_mass()?;
    let f_boundary = tf
        .radius()
        .zip(tf.beta_radial())
        .map(|(r, beta)| epsilon.powf(2.0 / 3.0) * r / beta * v2_positive / (v0 * v0));
    Ok(PredictionBundle {
        tf,
        hm,
        epsilon,
        lambda0,
        c_minus2: 0.5 * lambda0 - 0.25 * a2,
        c_log: tf.beta_cubed_integral() / 12.0,
        v0,
        v2_positive,
        f_boundary,
    })
}

impl PredictionBundle<'_> {
    /// Inner prediction `ε^{1/3}βV(βt/ε^{2/3})`.
    pub fn inner(&self, t: f64, beta: f64) -> f64 {
        let e23 = self.epsilon.powf(2.0 / 3.0);
        self.epsilon.cbrt() * beta * self.hm.value(beta * t / e23)
    }

    /// `f₀(r) = A(r)^{−1}∫_r^R sA(s) ds` inside the disc, zero outside (radial traps).
    pub fn f0(&self, r: f64) -> Option<f64> {
        let radius = self.tf.radius()?;
        if r >= radius {
            return Some(0.0);
        }
        let a = |s: f64| self.lambda0 - self.tf.trap.w_radial(s);
        let num = integrate(|s| s * a(s), r, radius, 16, 8);
        Some(num / a(r))
    }
}
