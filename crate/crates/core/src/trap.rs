//! Trapping potentials and their Thomas–Fermi data.

use crate::contour::{zero_contours, Point};
use crate::error::{Error, Result};
use crate::numerics::{bisect, integrate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Polar integration: Gauss–Legendre panels in `r`, periodic trapezoid in `φ`.
const RADIAL_PANELS: usize = 64;
const GAUSS_ORDER: usize = 8;
const ANGLES: usize = 512;
const CONTOUR_GRID: usize = 1024;

/// A trapping potential `W ≥ 0` on the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawTrap")]
pub enum Trap {
    /// `W = s²(y₁² + Λ²y₂²)` with anisotropy `Λ ∈ (0, 1]` and length scale factor `s`.
    Harmonic { aniso: f64, scale: f64 },
    /// `W = r² + a e^{−b r²}`.
    GaussianBump { a: f64, b: f64 },
    /// Radial samples `W(r_k)`, cubic Hermite in between, `∝ r²` beyond the last sample.
    RadialTable { r: Vec<f64>, w: Vec<f64> },
}

/// Unvalidated mirror of [`Trap`] used for deserialisation.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawTrap {
    Harmonic { aniso: f64, scale: f64 },
    GaussianBump { a: f64, b: f64 },
    RadialTable { r: Vec<f64>, w: Vec<f64> },
}

impl TryFrom<RawTrap> for Trap {
    type Error = Error;

    fn try_from(raw: RawTrap) -> Result<Self> {
        match raw {
            RawTrap::Harmonic { aniso, scale } => Trap::harmonic_scaled(aniso, scale),
            RawTrap::GaussianBump { a, b } => Trap::gaussian_bump(a, b),
            RawTrap::RadialTable { r, w } => Trap::radial_table(r, w),
        }
    }
}

impl Trap {
    pub fn harmonic(aniso: f64) -> Result<Self> {
        Self::harmonic_scaled(aniso, 1.0)
    }

    pub fn harmonic_scaled(aniso: f64, scale: f64) -> Result<Self> {
        if !(aniso > 0.0 && aniso <= 1.0) {
            return Err(Error::Domain(format!(
                "anisotropy {aniso} must lie in (0, 1]"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("scale {scale} must be positive")));
        }
        Ok(Trap::Harmonic { aniso, scale })
    }

    pub fn gaussian_bump(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!(
                "bump parameters a = {a}, b = {b} must satisfy a ≥ 0, b > 0"
            )));
        }
        Ok(Trap::GaussianBump { a, b })
    }

    pub fn radial_table(r: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if r.len() != w.len() || r.len() < 4 {
            return Err(Error::Domain(
                "radial table needs ≥ 4 matching samples".into(),
            ));
        }
        if r[0] != 0.0 || r.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Domain(
                "radial table must start at r = 0 and increase".into(),
            ));
        }
        if w.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain(
                "radial table values must be finite and ≥ 0".into(),
            ));
        }
        let n = r.len();
        if w[n - 1] <= w[n - 2] {
            return Err(Error::Domain(
                "radial table must increase at its outer end".into(),
            ));
        }
        Ok(Trap::RadialTable { r, w })
    }

    pub fn is_radial(&self) -> bool {
        match self {
            Trap::Harmonic { aniso, .. } => *aniso == 1.0,
            _ => true,
        }
    }

    pub fn w(&self, y: Point) -> f64 {
        match self {
            Trap::Harmonic { aniso, scale } => {
                scale * scale * (y[0] * y[0] + aniso * aniso * y[1] * y[1])
            }
            _ => self.w_radial(y[0].hypot(y[1])),
        }
    }

    pub fn grad(&self, y: Point) -> Point {
        match self {
            Trap::Harmonic { aniso, scale } => {
                let s2 = scale * scale;
                [2.0 * s2 * y[0], 2.0 * s2 * aniso * aniso * y[1]]
            }
            _ => {
                let r = y[0].hypot(y[1]);
                if r == 0.0 {
                    return [0.0, 0.0];
                }
                let d = self.dw_radial(r) / r;
                [d * y[0], d * y[1]]
            }
        }
    }

    /// `W` along the ray at angle `phi`.
    pub fn w_polar(&self, r: f64, phi: f64) -> f64 {
        self.w([r * phi.cos(), r * phi.sin()])
    }

    /// Radial profile; for the anisotropic harmonic trap this is the `y₁` axis.
    pub fn w_radial(&self, r: f64) -> f64 {
        match self {
            Trap::Harmonic { .. } => self.w([r, 0.0]),
            Trap::GaussianBump { a, b } => r * r + a * (-b * r * r).exp(),
            Trap::RadialTable { r: rs, w } => table_eval(rs, w, r).0,
        }
    }

    pub fn dw_radial(&self, r: f64) -> f64 {
        match self {
            Trap::Harmonic { scale, .. } => 2.0 * scale * scale * r,
            Trap::GaussianBump { a, b } => 2.0 * r - 2.0 * a * b * r * (-b * r * r).exp(),
            Trap::RadialTable { r: rs, w } => table_eval(rs, w, r).1,
        }
    }

    /// Infimum of `W`, taken over a fine radial scan for non-harmonic traps.
    pub fn inf_w(&self) -> f64 {
        match self {
            Trap::Harmonic { .. } => 0.0,
            _ => {
                let r_far = self.radial_scan_extent();
                (0..=4000)
                    .map(|k| self.w_radial(r_far * k as f64 / 4000.0))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    fn radial_scan_extent(&self) -> f64 {
        match self {
            Trap::RadialTable { r, .. } => 2.0 * r[r.len() - 1],
            Trap::GaussianBump { a, .. } => 4.0 + a.sqrt(),
            Trap::Harmonic { .. } => 4.0,
        }
    }

    /// Radii in `(0, r_far)` where `W(r) = lambda` along the ray at `phi`.
    fn crossings(&self, lambda: f64, phi: f64, r_far: f64) -> Result<Vec<f64>> {
        let m = 4000;
        let g = |r: f64| self.w_polar(r, phi) - lambda;
        let mut roots = Vec::new();
        let mut prev = g(0.0);
        for k in 1..=m {
            let r1 = r_far * k as f64 / m as f64;
            let cur = g(r1);
            if (prev > 0.0) != (cur > 0.0) {
                let r0 = r_far * (k - 1) as f64 / m as f64;
                roots.push(bisect(g, r0, r1, 1e-15 * r_far)?);
            }
            prev = cur;
        }
        Ok(roots)
    }

    /// Outer extent of `{W < lambda}` along the ray at `phi`.
    fn ray_extent(&self, lambda: f64, phi: f64) -> Result<f64> {
        let mut r_far = 1.0;
        while self.w_polar(r_far, phi) <= lambda {
            r_far *= 2.0;
            if r_far > 1e6 {
                return Err(Error::Domain("potential does not confine".into()));
            }
        }
        let roots = self.crossings(lambda, phi, r_far)?;
        Ok(roots.last().copied().unwrap_or(0.0))
    }

    /// Mass `m(λ) = ∫(λ − W)⁺ dy`.
    pub fn mass(&self, lambda: f64) -> Result<f64> {
        self.integrate_positive_part(lambda, |a| a)
    }

    /// `∫ g((λ − W)⁺) dy` over `{W < λ}`; `g(0)` should vanish.
    pub fn integrate_positive_part<G: Fn(f64) -> f64 + Sync>(
        &self,
        lambda: f64,
        g: G,
    ) -> Result<f64> {
        if self.is_radial() {
            let rho = self.ray_extent(lambda, 0.0)?;
            if rho == 0.0 {
                return Ok(0.0);
            }
            let f = |r: f64| r * g((lambda - self.w_radial(r)).max(0.0));
            Ok(2.0 * PI * integrate(f, 0.0, rho, RADIAL_PANELS, GAUSS_ORDER))
        } else {
            let rays = (0..ANGLES)
                .into_par_iter()
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / ANGLES as f64;
                    let rho = self.ray_extent(lambda, phi)?;
                    let f = |r: f64| r * g((lambda - self.w_polar(r, phi)).max(0.0));
                    Ok(integrate(f, 0.0, rho, 4, GAUSS_ORDER))
                })
                .collect::<Result<Vec<f64>>>()?;
            // ordered sum keeps the result independent of the thread count
            Ok(rays.iter().sum::<f64>() * 2.0 * PI / ANGLES as f64)
        }
    }

    /// Length scale of the trap used to size boxes and grids.
    pub fn extent(&self, lambda: f64) -> Result<f64> {
        let mut best: f64 = 0.0;
        for k in 0..64 {
            best = best.max(self.ray_extent(lambda, 2.0 * PI * k as f64 / 64.0)?);
        }
        Ok(best)
    }
}

/// Cubic Hermite interpolation with centred slopes; `∝ r²` extrapolation.
fn table_eval(rs: &[f64], w: &[f64], r: f64) -> (f64, f64) {
    let n = rs.len();
    let slope = |k: usize| -> f64 {
        if k == 0 {
            0.0
        } else if k == n - 1 {
            2.0 * w[k] / rs[k]
        } else {
            (w[k + 1] - w[k - 1]) / (rs[k + 1] - rs[k - 1])
        }
    };
    if r >= rs[n - 1] {
        let c = w[n - 1] / (rs[n - 1] * rs[n - 1]);
        return (c * r * r, 2.0 * c * r);
    }
    let k = rs.partition_point(|&x| x <= r).saturating_sub(1).min(n - 2);
    let h = rs[k + 1] - rs[k];
    let t = (r - rs[k]) / h;
    let (m0, m1) = (slope(k) * h, slope(k + 1) * h);
    let (t2, t3) = (t * t, t * t * t);
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * w[k]
        + (t3 - 2.0 * t2 + t) * m0
        + (-2.0 * t3 + 3.0 * t2) * w[k + 1]
        + (t3 - t2) * m1;
    let d = ((6.0 * t2 - 6.0 * t) * w[k]
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (-6.0 * t2 + 6.0 * t) * w[k + 1]
        + (3.0 * t2 - 2.0 * t) * m1)
        / h;
    (v, d)
}

/// Thomas–Fermi chemical potential: the `λ` with `∫(λ − W)⁺ = 1`.
pub fn compute_lambda0(trap: &Trap, tol: f64) -> Result<f64> {
    if !(tol >= 1e-12) {
        return Err(Error::Domain(format!("tolerance {tol} below 1e-12")));
    }
    let lo = trap.inf_w();
    let mut hi = lo + 1.0;
    while trap.mass(hi)? < 1.0 {
        hi = lo + 2.0 * (hi - lo);
        if hi - lo > 1e6 {
            return Err(Error::Domain(
                "could not bracket the chemical potential".into(),
            ));
        }
    }
    // Newton on m(λ) = 1 with m'(λ) = |{W < λ}|, kept inside the bracket
    let (mut a, mut b) = (lo, hi);
    let mut lambda = 0.5 * (a + b);
    for _ in 0..200 {
        let m = trap.mass(lambda)?;
        if (m - 1.0).abs() <= 0.1 * tol {
            return Ok(lambda);
        }
        if m < 1.0 {
            a = lambda;
        } else {
            b = lambda;
        }
        if b - a < 1e-16 * b.abs() {
            break;
        }
        let area = trap.integrate_positive_part(lambda, |v| if v > 0.0 { 1.0 } else { 0.0 })?;
        let step = lambda - (m - 1.0) / area;
        lambda = if area > 0.0 && step > a && step < b {
            step
        } else {
            0.5 * (a + b)
        };
    }
    Ok(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    Circle { radius: f64 },
    Polyline,
}

/// Thomas–Fermi domain `{W < λ}`, its boundary and the layer scale `β`.
#[derive(Debug, Clone, Serialize)]
pub struct TfData {
    pub lambda: f64,
    pub trap: Trap,
    pub boundary: Boundary,
    /// Perimeter `ℓ`.
    pub ell0: f64,
    /// Arclength parameter of each boundary sample.
    pub theta: Vec<f64>,
    pub points: Vec<Point>,
    /// Outward unit normals.
    pub normals: Vec<Point>,
    /// `β = (∂W/∂n)^{1/3}`.
    pub beta: Vec<f64>,
    pub curvature: Vec<f64>,
}

impl TfData {
    /// `(λ − W)⁺`.
    pub fn a_plus(&self, y: Point) -> f64 {
        (self.lambda - self.trap.w(y)).max(0.0)
    }

    /// `λ − W` without the positive part.
    pub fn a(&self, y: Point) -> f64 {
        self.lambda - self.trap.w(y)
    }

    /// `√((λ − W)⁺)`.
    pub fn tf_density(&self, y: Point) -> f64 {
        self.a_plus(y).sqrt()
    }

    pub fn radius(&self) -> Option<f64> {
        match self.boundary {
            Boundary::Circle { radius } => Some(radius),
            Boundary::Polyline => None,
        }
    }

    /// `β` for a radial trap.
    pub fn beta_radial(&self) -> Option<f64> {
        self.radius().map(|_| self.beta[0])
    }

    /// `∫ β³ dθ` over the boundary (periodic trapezoid on the arclength samples).
    pub fn beta_cubed_integral(&self) -> f64 {
        let n = self.beta.len() as f64;
        self.beta.iter().map(|b| b.powi(3)).sum::<f64>() * self.ell0 / n
    }

    /// Rows `θ, y₁, y₂, β, k`.
    pub fn rows(&self) -> Vec<[f64; 5]> {
        (0..self.theta.len())
            .map(|k| {
                [
                    self.theta[k],
                    self.points[k][0],
                    self.points[k][1],
                    self.beta[k],
                    self.curvature[k],
                ]
            })
            .collect()
    }
}

/// Boundary geometry of `{W < lambda}` with `n_theta` arclength samples.
pub fn boundary_and_beta(trap: &Trap, lambda: f64, n_theta: usize) -> Result<TfData> {
    if !(lambda > trap.inf_w()) {
        return Err(Error::Domain(format!("λ = {lambda} does not exceed inf W")));
    }
    if n_theta < 8 {
        return Err(Error::Domain("n_theta must be ≥ 8".into()));
    }
    if trap.w([0.0, 0.0]) >= lambda {
        return Err(Error::Topology(
            "origin lies outside {W < λ}: annular or empty domain".into(),
        ));
    }
    if trap.is_radial() {
        radial_boundary(trap, lambda, n_theta)
    } else {
        contour_boundary(trap, lambda, n_theta)
    }
}

fn radial_boundary(trap: &Trap, lambda: f64, n_theta: usize) -> Result<TfData> {
    let mut r_far = 1.0;
    while trap.w_radial(r_far) <= lambda {
        r_far *= 2.0;
    }
    let roots = trap.crossings(lambda, 0.0, r_far)?;
    if roots.len() != 1 {
        return Err(Error::Topology(format!(
            "{} boundary components",
            roots.len()
        )));
    }
    let radius = roots[0];
    let slope = trap.dw_radial(radius);
    if !(slope > 0.0) {
        return Err(Error::Degenerate(format!(
            "∂W/∂n = {slope} at R = {radius}"
        )));
    }
    let ell0 = 2.0 * PI * radius;
    let theta: Vec<f64> = (0..n_theta)
        .map(|k| ell0 * k as f64 / n_theta as f64)
        .collect();
    let normals: Vec<Point> = theta
        .iter()
        .map(|t| [(t / radius).cos(), (t / radius).sin()])
        .collect();
    Ok(TfData {
        lambda,
        trap: trap.clone(),
        boundary: Boundary::Circle { radius },
        ell0,
        points: normals
            .iter()
            .map(|n| [radius * n[0], radius * n[1]])
            .collect(),
        normals,
        theta,
        beta: vec![slope.cbrt(); n_theta],
        curvature: vec![1.0 / radius; n_theta],
    })
}

/// Newton projection onto `{W = lambda}` along `∇W`.
fn project(trap: &Trap, lambda: f64, mut y: Point) -> Point {
    for _ in 0..20 {
        let g = trap.grad(y);
        let g2 = g[0] * g[0] + g[1] * g[1];
        let d = (trap.w(y) - lambda) / g2;
        y = [y[0] - d * g[0], y[1] - d * g[1]];
        if d.abs() * g2.sqrt() < 1e-15 {
            break;
        }
    }
    y
}

fn contour_boundary(trap: &Trap, lambda: f64, n_theta: usize) -> Result<TfData> {
    let half = 1.5 * trap.extent(lambda)?;
    let comps = zero_contours(|y| trap.w(y) - lambda, -half, half, CONTOUR_GRID);
    if comps.len() != 1 {
        return Err(Error::Topology(format!(
            "{} contour components",
            comps.len()
        )));
    }
    let c = &comps[0];
    if !c.closed || c.winding_number([0.0, 0.0]).abs() != 1 {
        return Err(Error::Topology(
            "level set is not a simple closed curve around the origin".into(),
        ));
    }
    let mut fine: Vec<Point> = c.points.iter().map(|&p| project(trap, lambda, p)).collect();
    if c.signed_area() < 0.0 {
        fine.reverse();
    }
    // start at the positive y₁ axis for a reproducible origin of θ
    let start = (0..fine.len())
        .filter(|&k| fine[k][0] > 0.0)
        .min_by(|&a, &b| fine[a][1].abs().total_cmp(&fine[b][1].abs()))
        .unwrap_or(0);
    fine.rotate_left(start);
    let m = fine.len();
    let mut cum = vec![0.0; m + 1];
    for k in 0..m {
        let (a, b) = (fine[k], fine[(k + 1) % m]);
        cum[k + 1] = cum[k] + (b[0] - a[0]).hypot(b[1] - a[1]);
    }
    let ell0 = cum[m];
    let theta: Vec<f64> = (0..n_theta)
        .map(|k| ell0 * k as f64 / n_theta as f64)
        .collect();
    let mut points = Vec::with_capacity(n_theta);
    for &s in &theta {
        let k = cum
            .partition_point(|&c| c <= s)
            .saturating_sub(1)
            .min(m - 1);
        let t = (s - cum[k]) / (cum[k + 1] - cum[k]);
        let (a, b) = (fine[k], fine[(k + 1) % m]);
        points.push(project(
            trap,
            lambda,
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
        ));
    }
    let mut normals = Vec::with_capacity(n_theta);
    let mut beta = Vec::with_capacity(n_theta);
    for p in &points {
        let g = trap.grad(*p);
        let gn = g[0].hypot(g[1]);
        if !(gn > 0.0) {
            return Err(Error::Degenerate(format!(
                "∇W vanishes on the boundary at {p:?}"
            )));
        }
        normals.push([g[0] / gn, g[1] / gn]);
        beta.push(gn.cbrt());
    }
    let curvature = (0..n_theta)
        .map(|k| local_curvature(&points, &normals, k))
        .collect();
    Ok(TfData {
        lambda,
        trap: trap.clone(),
        boundary: Boundary::Polyline,
        ell0,
        theta,
        points,
        normals,
        beta,
        curvature,
    })
}

/// Curvature from a least-squares quadratic through five neighbours in the local frame.
fn local_curvature(points: &[Point], normals: &[Point], k: usize) -> f64 {
    let n = points.len();
    let p0 = points[k];
    let nrm = normals[k];
    let tan = [-nrm[1], nrm[0]];
    let mut s = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for off in -2i64..=2 {
        let q = points[((k as i64 + off).rem_euclid(n as i64)) as usize];
        let d = [q[0] - p0[0], q[1] - p0[1]];
        let u = d[0] * tan[0] + d[1] * tan[1];
        let w = -(d[0] * nrm[0] + d[1] * nrm[1]);
        let basis = [1.0, u, u * u];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * w;
        }
    }
    let c = solve3(s, rhs);
    2.0 * c[2] / (1.0 + c[1] * c[1]).powf(1.5)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_closed_forms() {
        for aniso in [1.0, 0.8] {
            let trap = Trap::harmonic(aniso).unwrap();
            let l = compute_lambda0(&trap, 1e-12).unwrap();
            assert!((l - (2.0 * aniso / PI).sqrt()).abs() < 1e-8, "{aniso}: {l}");
        }
    }

    #[test]
    fn flat_bump_is_harmonic() {
        let a = compute_lambda0(&Trap::gaussian_bump(0.0, 3.0).unwrap(), 1e-12).unwrap();
        assert!((a - (2.0 / PI).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn big_bump_is_annular() {
        let trap = Trap::gaussian_bump(5.0, 1.0).unwrap();
        let l = compute_lambda0(&trap, 1e-10).unwrap();
        assert!(matches!(
            boundary_and_beta(&trap, l, 64),
            Err(Error::Topology(_))
        ));
    }

    #[test]
    fn table_reproduces_quadratic() {
        let r: Vec<f64> = (0..50).map(|k| k as f64 * 0.05).collect();
        let w: Vec<f64> = r.iter().map(|x| x * x).collect();
        let t = Trap::radial_table(r, w).unwrap();
        let l = compute_lambda0(&t, 1e-12).unwrap();
        assert!((l - (2.0 / PI).sqrt()).abs() < 1e-5);
        assert!((t.w_radial(3.0) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn mass_increases() {
        let t = Trap::gaussian_bump(0.5, 2.0).unwrap();
        let ms: Vec<f64> = (1..20)
            .map(|k| t.mass(0.6 + 0.05 * k as f64).unwrap())
            .collect();
        assert!(ms.windows(2).all(|w| w[1] > w[0]));
    }
}
