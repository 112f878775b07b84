use super::{Geometry, GroundState};
use crate::error::{Error, Result};
use crate::numerics::Tridiagonal;
use crate::painleve::{hastings_mcleod, ProfileSolution};
use crate::trap::{boundary_and_beta, compute_lambda0, Trap};
use std::f64::consts::PI;

const NEWTON_MAX: usize = 60;
const RESIDUAL_TOL: f64 = 1e-10;
const RESIDUAL_ACCEPT: f64 = 1e-9;
const MAX_RESTARTS: usize = 3;

/// Discretisation choices for [`solve_radial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// Number of grid nodes including `r = 0` and `r_max`.
    pub n: usize,
    /// Outer radius; `None` picks one from the trap and `ε`.
    pub r_max: Option<f64>,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            n: 20_000,
            r_max: None,
        }
    }
}

/// Graded grid on `[0, r_max]` with half the nodes concentrated around `R` on the scale `ε^{2/3}`.
pub fn radial_grid(radius: f64, epsilon: f64, r_max: f64, n: usize) -> Vec<f64> {
    let width = 6.0 * epsilon.powf(2.0 / 3.0);
    let kappa = r_max / (width * PI.sqrt());
    let density = |r: f64| 1.0 + kappa * (-((r - radius) / width).powi(2)).exp();
    let fine = 40 * n;
    let dr = r_max / fine as f64;
    let mut cum = vec![0.0; fine + 1];
    for k in 0..fine {
        let (a, b) = (k as f64 * dr, (k + 1) as f64 * dr);
        cum[k + 1] = cum[k] + dr * (density(a) + 4.0 * density(0.5 * (a + b)) + density(b)) / 6.0;
    }
    let total = cum[fine];
    let mut r = Vec::with_capacity(n);
    let mut k = 0;
    for j in 0..n {
        let target = total * j as f64 / (n - 1) as f64;
        while k + 1 < fine && cum[k + 1] < target {
            k += 1;
        }
        let t = ((target - cum[k]) / (cum[k + 1] - cum[k])).clamp(0.0, 1.0);
        r.push((k as f64 + t) * dr);
    }
    r[0] = 0.0;
    r[n - 1] = r_max;
    r
}

/// Default outer radius: `W − λ₀ ≥ 1` and at least fourteen layer widths past `R`.
fn default_r_max(trap: &Trap, lambda0: f64, radius: f64, beta: f64, epsilon: f64) -> f64 {
    let mut r = radius;
    while trap.w_radial(r) - lambda0 < 1.0 {
        r += 0.01 * radius;
    }
    r.max(radius + 14.0 * epsilon.powf(2.0 / 3.0) / beta)
}

struct RadialSystem<'a> {
    r: &'a [f64],
    w: Vec<f64>,
    c: Vec<f64>,
    pot: Vec<f64>,
    e2: f64,
}

impl<'a> RadialSystem<'a> {
    fn new(trap: &Trap, r: &'a [f64], epsilon: f64) -> Self {
        let m = r.len() - 1;
        let half = |i: usize| 0.5 * (r[i] + r[i + 1]);
        let w = (0..m)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { half(i - 1) };
                PI * (half(i).powi(2) - lo * lo)
            })
            .collect();
        let c = (0..m)
            .map(|i| 2.0 * PI * half(i) / (r[i + 1] - r[i]))
            .collect();
        let pot = r[..m].iter().map(|&x| trap.w_radial(x)).collect();
        Self {
            r,
            w,
            c,
            pot,
            e2: epsilon * epsilon,
        }
    }

    fn unknowns(&self) -> usize {
        self.r.len() - 1
    }

    /// Weighted residual `F_i` and the mass.
    fn residual(&self, eta: &[f64], lambda: f64) -> (Vec<f64>, f64) {
        let m = self.unknowns();
        let f = (0..m)
            .map(|i| {
                let left = if i == 0 {
                    0.0
                } else {
                    self.c[i - 1] * (eta[i] - eta[i - 1])
                };
                let next = if i + 1 < m { eta[i + 1] } else { 0.0 };
                let right = self.c[i] * (eta[i] - next);
                -self.e2 * (left + right)
                    + self.w[i] * (lambda - self.pot[i] - eta[i] * eta[i]) * eta[i]
            })
            .collect();
        let mass = eta.iter().zip(&self.w).map(|(e, w)| w * e * e).sum();
        (f, mass)
    }

    fn pointwise(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.w)
            .map(|(a, w)| (a / w).abs())
            .fold(0.0, f64::max)
    }

    /// Rounding floor of the pointwise residual: `ε²(c₋ + c₊)|η|u/w` with a safety factor.
    fn rounding_floor(&self, eta: &[f64]) -> f64 {
        (0..eta.len())
            .map(|i| {
                let cl = if i == 0 { 0.0 } else { self.c[i - 1] };
                64.0 * f64::EPSILON * self.e2 * (cl + self.c[i]) * eta[i].abs() / self.w[i]
            })
            .fold(0.0, f64::max)
    }

    fn merit(&self, f: &[f64], mass: f64) -> f64 {
        f.iter()
            .zip(&self.w)
            .map(|(a, w)| (a / w).powi(2))
            .sum::<f64>()
            + (mass - 1.0).powi(2) * 1e4
    }

    /// Bordered Newton on `(η, λ)`; `max_step` caps the damping factor.
    fn newton(
        &self,
        mut eta: Vec<f64>,
        mut lambda: f64,
        max_step: f64,
    ) -> Result<(Vec<f64>, f64, usize, f64)> {
        let m = self.unknowns();
        let (mut f, mut mass) = self.residual(&eta, lambda);
        let mut merit = self.merit(&f, mass);
        for it in 0..NEWTON_MAX {
            let res = self.pointwise(&f);
            if res <= RESIDUAL_TOL && (mass - 1.0).abs() <= 1e-12 {
                return Ok((eta, lambda, it, res));
            }
            let mut t = Tridiagonal::zeros(m);
            for i in 0..m {
                let cl = if i == 0 { 0.0 } else { self.c[i - 1] };
                t.diag[i] = -self.e2 * (cl + self.c[i])
                    + self.w[i] * (lambda - self.pot[i] - 3.0 * eta[i] * eta[i]);
                t.lower[i] = self.e2 * cl;
                t.upper[i] = if i + 1 < m { self.e2 * self.c[i] } else { 0.0 };
            }
            let neg: Vec<f64> = f.iter().map(|v| -v).collect();
            let b: Vec<f64> = (0..m).map(|i| self.w[i] * eta[i]).collect();
            let x1 = t.solve(&neg)?;
            let x2 = t.solve(&b)?;
            let g = mass - 1.0;
            let mx1: f64 = (0..m).map(|i| 2.0 * b[i] * x1[i]).sum();
            let mx2: f64 = (0..m).map(|i| 2.0 * b[i] * x2[i]).sum();
            let dl = (mx1 + g) / mx2;
            let deta: Vec<f64> = x1.iter().zip(&x2).map(|(a, c)| a - dl * c).collect();
            let mut alpha = max_step;
            let mut accepted = false;
            for _ in 0..50 {
                let mut trial: Vec<f64> =
                    eta.iter().zip(&deta).map(|(e, d)| e + alpha * d).collect();
                if trial.iter().all(|v| *v > 0.0) {
                    // keep the constraint exact; the rescaling is second order near convergence
                    let tm: f64 = trial.iter().zip(&self.w).map(|(e, w)| w * e * e).sum();
                    let s = 1.0 / tm.sqrt();
                    trial.iter_mut().for_each(|v| *v *= s);
                    let tl = lambda + alpha * dl;
                    let (tf, tm) = self.residual(&trial, tl);
                    let tmerit = self.merit(&tf, tm);
                    if tmerit.is_finite() && tmerit < merit {
                        eta = trial;
                        lambda = tl;
                        f = tf;
                        mass = tm;
                        merit = tmerit;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            let tiny =
                deta.iter().fold(0.0f64, |m, d| m.max(d.abs())) <= 1e-13 && dl.abs() <= 1e-13;
            let floor = RESIDUAL_ACCEPT.max(self.rounding_floor(&eta));
            if accepted && tiny && self.pointwise(&f) <= floor {
                return Ok((eta, lambda, it + 1, self.pointwise(&f)));
            }
            if !accepted {
                let res = self.pointwise(&f);
                if res <= floor && (mass - 1.0).abs() <= 1e-12 {
                    return Ok((eta, lambda, it, res));
                }
                return Err(Error::solver(
                    "radial Newton stalled (positivity or merit)",
                    res,
                ));
            }
        }
        let res = self.pointwise(&f);
        if res <= RESIDUAL_ACCEPT && (mass - 1.0).abs() <= 1e-12 {
            return Ok((eta, lambda, NEWTON_MAX, res));
        }
        Err(Error::solver("radial Newton did not converge", res))
    }
}

/// Inner/outer composite start: `√A⁺ + ε^{1/3}β(V(x) − √((−x)⁺))`, `x = β(r − R)/ε^{2/3}`.
fn composite_guess(
    trap: &Trap,
    lambda0: f64,
    radius: f64,
    beta: f64,
    epsilon: f64,
    hm: &ProfileSolution,
    r: f64,
) -> f64 {
    let e13 = epsilon.cbrt();
    let x = beta * (r - radius) / (e13 * e13);
    let outer = (lambda0 - trap.w_radial(r)).max(0.0).sqrt();
    let v = hm.value(x).max(0.0);
    let sq = (-x).max(0.0).sqrt();
    (outer + e13 * beta * (v - sq)).max(1e-300)
}

/// Radial ground state of `ε²(η'' + η'/r) + (λ − W)η − η³ = 0`, `∫η² = 1`.
pub fn solve_radial(trap: &Trap, epsilon: f64, opts: RadialOptions) -> Result<GroundState> {
    solve_radial_from(trap, epsilon, opts, None)
}

fn solve_radial_from(
    trap: &Trap,
    epsilon: f64,
    opts: RadialOptions,
    warm: Option<&GroundState>,
) -> Result<GroundState> {
    if !trap.is_radial() {
        return Err(Error::Domain("radial solver needs a radial trap".into()));
    }
    if !(1e-3..=0.5).contains(&epsilon) {
        return Err(Error::Domain(format!("ε = {epsilon} outside [1e-3, 0.5]")));
    }
    if opts.n < 2000 {
        return Err(Error::Domain(format!("n = {} below 2000", opts.n)));
    }
    let lambda0 = compute_lambda0(trap, 1e-12)?;
    let tf = boundary_and_beta(trap, lambda0, 16)?;
    let radius = tf.radius().expect("radial trap has a circular boundary");
    let beta = tf.beta[0];
    let r_max = match opts.r_max {
        Some(r) if r >= 1.5 * radius => r,
        Some(r) => {
            return Err(Error::Domain(format!(
                "r_max = {r} below 1.5·R = {}",
                1.5 * radius
            )))
        }
        None => default_r_max(trap, lambda0, radius, beta, epsilon).max(1.5 * radius),
    };
    let r = radial_grid(radius, epsilon, r_max, opts.n);
    let band = r
        .iter()
        .filter(|&&x| (x - radius).abs() <= 5.0 * epsilon.powf(2.0 / 3.0))
        .count();
    if band < 200 {
        return Err(Error::Grid(format!(
            "only {band} nodes within 5ε^(2/3) of R"
        )));
    }
    let sys = RadialSystem::new(trap, &r, epsilon);
    let hm = hastings_mcleod();
    let composite: Vec<f64> = r[..r.len() - 1]
        .iter()
        .map(|&x| composite_guess(trap, lambda0, radius, beta, epsilon, hm, x))
        .collect();
    let mut starts: Vec<(Vec<f64>, f64)> = Vec::new();
    if let Some(prev) = warm {
        let eta: Vec<f64> = r[..r.len() - 1]
            .iter()
            .map(|&x| prev.eta_at_radius(x).unwrap_or(0.0).max(1e-300))
            .collect();
        starts.push((eta, prev.lambda_eps));
    }
    starts.push((composite, lambda0));
    let mut last_err = None;
    for (eta0, l0) in starts {
        // normalise the start so the mass row begins satisfied
        let mass: f64 = eta0.iter().zip(&sys.w).map(|(e, w)| w * e * e).sum();
        let eta0: Vec<f64> = eta0.iter().map(|e| e / mass.sqrt()).collect();
        let mut step = 1.0;
        for _ in 0..=MAX_RESTARTS {
            match sys.newton(eta0.clone(), l0, step) {
                Ok((eta, lambda, iters, res)) => {
                    let mass = eta.iter().zip(&sys.w).map(|(e, w)| w * e * e).sum();
                    return Ok(GroundState {
                        epsilon,
                        trap: trap.clone(),
                        geometry: Geometry::Radial {
                            r: r.clone(),
                            weights: sys.w.clone(),
                        },
                        eta,
                        lambda_eps: lambda,
                        mass,
                        iterations: iters,
                        residual: res,
                    });
                }
                Err(e) => {
                    last_err = Some(e);
                    step *= 0.5;
                }
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::solver("radial solve failed", f64::NAN)))
}

/// Solves along a decreasing `ε` ladder, warm-starting each solve from the previous one.
pub fn solve_radial_ladder(
    trap: &Trap,
    eps: &[f64],
    opts: RadialOptions,
) -> Result<Vec<GroundState>> {
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("ε ladder must be strictly decreasing".into()));
    }
    let mut out: Vec<GroundState> = Vec::with_capacity(eps.len());
    for &e in eps {
        let s = solve_radial_from(trap, e, opts, out.last())?;
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_graded_and_monotone() {
        let r = radial_grid(0.9, 0.02, 1.4, 4000);
        assert_eq!(r.len(), 4000);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        let near = r
            .iter()
            .filter(|&&x| (x - 0.9).abs() < 5.0 * 0.02f64.powf(2.0 / 3.0))
            .count();
        assert!(near >= 200);
    }

    #[test]
    fn unit_mass_and_positive() {
        let trap = Trap::harmonic(1.0).unwrap();
        let s = solve_radial(
            &trap,
            0.1,
            RadialOptions {
                n: 4000,
                r_max: None,
            },
        )
        .unwrap();
        assert!((s.mass - 1.0).abs() < 1e-9);
        assert!(s.eta.iter().all(|v| *v > 0.0));
        assert!(s.residual <= 1e-9);
    }
}
