//! Painlevé-II type profiles `v'' = v(|v|^p + σx)`.
//!
//! * Full line (`σ = +1`): `v ~ (−x)^{1/p}` as `x → −∞`, `v → 0` as `x → +∞`
//!   (Hastings–McLeod profile for `p = 2`).
//! * Half line (`σ = −1`, mirrored orientation): `u'' = u(|u|^p − x)` on
//!   `[0, x_max]` with `u(0) = 0` or `u'(0) = 0` and `u ~ x^{1/p}` at infinity.
//!
//! The boundary value problems are discretised by the fourth-order Numerov
//! scheme on a uniform grid and solved by damped Newton with a tridiagonal
//! Jacobian.

use crate::error::{Error, Result};
use crate::numerics::{SymTridiagonal, Tridiagonal};
use crate::specfun::{airy, ln_ai};
use serde::Serialize;
use std::sync::OnceLock;

const NEWTON_MAX: usize = 100;
const NEWTON_TOL: f64 = 5e-11;
const RESIDUAL_ACCEPT: f64 = 1e-9;
const CLOSURE_DEFECT_MAX: f64 = 1e-6;

/// Exponent of the nonlinearity, validated `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Power(f64);

impl Power {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(Power(p))
        } else {
            Err(Error::Domain(format!("power p = {p} must exceed 1")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// First two coefficients `a, b` of `v = ξ^{1/p}(1 + aξ^{-3} + bξ^{-6} + …)`
    /// for the algebraic branch of `v'' = v(|v|^p − ξ)` in the variable `ξ`.
    pub fn algebraic_coefficients(self) -> (f64, f64) {
        let p = self.0;
        let m = 1.0 / p;
        let n = m - 3.0;
        let a = m * (m - 1.0) / p;
        let b = (a * n * (n - 1.0) - 0.5 * p * (p + 1.0) * a * a) / p;
        (a, b)
    }

    /// Two-term algebraic closure value and its derivative with respect to `ξ`.
    pub fn algebraic_branch(self, xi: f64) -> (f64, f64) {
        let (a, _) = self.algebraic_coefficients();
        let m = 1.0 / self.0;
        let v = xi.powf(m) + a * xi.powf(m - 3.0);
        let dv = m * xi.powf(m - 1.0) + a * (m - 3.0) * xi.powf(m - 4.0);
        (v, dv)
    }

    /// Size of the first neglected term of the algebraic closure.
    pub fn closure_defect(self, xi: f64) -> f64 {
        let (_, b) = self.algebraic_coefficients();
        (b * xi.powf(1.0 / self.0 - 6.0)).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// Algebraic growth at `−∞`, Airy decay at `+∞`.
    FullLine,
    /// `u(0) = 0` on the half line, algebraic growth at `+∞`.
    HalfLineDirichlet,
    /// `u'(0) = 0` on the half line, algebraic growth at `+∞`.
    HalfLineNeumann,
}

impl Orientation {
    fn sigma(self) -> f64 {
        match self {
            Orientation::FullLine => 1.0,
            _ => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Closure {
    AlgebraicCorrected,
    AiryLogDerivative,
    DirichletZero,
    NeumannZero,
}

/// A converged profile on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSolution {
    pub p: f64,
    pub orientation: Orientation,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub vx: Vec<f64>,
    pub left_closure: Closure,
    pub right_closure: Closure,
    pub residual_sup: f64,
    pub newton_iters: usize,
    /// Grid spacing.
    pub h: f64,
    /// Estimated size of the neglected algebraic-closure term.
    pub closure_defect: f64,
}

/// Boundary rows of the discrete system.
#[derive(Debug, Clone, Copy)]
enum Bc {
    Value(f64),
    /// `v_N = ratio · v_{N−1}` with `ratio = Ai(x_N)/Ai(x_{N−1})`.
    AiryRatio(f64),
    /// Fourth-order Taylor closure of `u'(0) = 0`.
    NeumannTaylor,
}

/// Specification of one profile problem.
#[derive(Debug, Clone)]
pub struct ProfileProblem {
    pub p: Power,
    pub orientation: Orientation,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl ProfileProblem {
    pub fn full_line(p: f64, x_left: f64, x_right: f64, n: usize) -> Result<Self> {
        let p = Power::new(p)?;
        if !(x_left <= -15.0 && x_right >= 8.0 && n >= 1000) {
            return Err(Error::Domain(format!(
                "full-line profile needs x_left ≤ −15, x_right ≥ 8, n ≥ 1000 (got {x_left}, {x_right}, {n})"
            )));
        }
        Ok(Self {
            p,
            orientation: Orientation::FullLine,
            x_min: x_left,
            x_max: x_right,
            n,
        })
    }

    pub fn half_line_dirichlet(p: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::half_line(p, x_max, n, Orientation::HalfLineDirichlet)
    }

    pub fn half_line_neumann(p: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::half_line(p, x_max, n, Orientation::HalfLineNeumann)
    }

    fn half_line(p: f64, x_max: f64, n: usize, orientation: Orientation) -> Result<Self> {
        let p = Power::new(p)?;
        if !(x_max >= 20.0 && n >= 1000) {
            return Err(Error::Domain(format!(
                "half-line profile needs x_max ≥ 20, n ≥ 1000 (got {x_max}, {n})"
            )));
        }
        Ok(Self {
            p,
            orientation,
            x_min: 0.0,
            x_max,
            n,
        })
    }

    /// Uniform grid with `x = 0` on a node.
    fn grid(&self) -> (Vec<f64>, f64) {
        let intervals = self.n - 1;
        let mut h = (self.x_max - self.x_min) / intervals as f64;
        if self.x_min < 0.0 {
            let n_left = (-self.x_min / h).round().max(1.0);
            h = -self.x_min / n_left;
        }
        let x = (0..=intervals).map(|i| self.x_min + i as f64 * h).collect();
        (x, h)
    }

    /// Default starting profile.
    pub fn default_guess(&self, x: f64) -> f64 {
        let m = 1.0 / self.p.get();
        match self.orientation {
            Orientation::FullLine => {
                if x <= -1.0 {
                    (-x).powf(m)
                } else if x >= 1.0 {
                    0.0
                } else {
                    // Hermite cubic from (−1, 1, −m) to (1, 0, 0)
                    let t = 0.5 * (x + 1.0);
                    let m0 = -2.0 * m;
                    (2.0 * t.powi(3) - 3.0 * t * t + 1.0) + (t.powi(3) - 2.0 * t * t + t) * m0
                }
            }
            Orientation::HalfLineDirichlet => x.max(0.0).powf(m) * (1.0 - (-2.0 * x).exp()),
            Orientation::HalfLineNeumann => (x * x + 1.0).powf(0.5 * m),
        }
    }

    pub fn solve(&self) -> Result<ProfileSolution> {
        let guess = |x: f64| self.default_guess(x);
        self.solve_with_guess(guess)
    }

    pub fn solve_with_guess(&self, guess: impl Fn(f64) -> f64) -> Result<ProfileSolution> {
        let p = self.p;
        let (x, h) = self.grid();
        let last = x.len() - 1;
        let sigma = self.orientation.sigma();
        let (left, right, left_closure, right_closure, defect) = match self.orientation {
            Orientation::FullLine => {
                let xi = -x[0];
                let (a, b) = (ln_ai(x[last])?, ln_ai(x[last - 1])?);
                (
                    Bc::Value(p.algebraic_branch(xi).0),
                    Bc::AiryRatio((a - b).exp()),
                    Closure::AlgebraicCorrected,
                    Closure::AiryLogDerivative,
                    p.closure_defect(xi),
                )
            }
            Orientation::HalfLineDirichlet | Orientation::HalfLineNeumann => {
                let xi = x[last];
                let (l, lc) = if self.orientation == Orientation::HalfLineDirichlet {
                    (Bc::Value(0.0), Closure::DirichletZero)
                } else {
                    (Bc::NeumannTaylor, Closure::NeumannZero)
                };
                (
                    l,
                    Bc::Value(p.algebraic_branch(xi).0),
                    lc,
                    Closure::AlgebraicCorrected,
                    p.closure_defect(xi),
                )
            }
        };
        if defect > CLOSURE_DEFECT_MAX {
            return Err(Error::Truncation(format!(
                "algebraic closure defect {defect:.3e} exceeds {CLOSURE_DEFECT_MAX:.0e}; extend the grid"
            )));
        }
        let sys = NumerovSystem {
            x: &x,
            h,
            p: p.get(),
            sigma,
            left,
            right,
        };
        let v0: Vec<f64> = x.iter().map(|&xi| guess(xi)).collect();
        let (v, residual_sup, newton_iters) = sys.newton(v0)?;
        let vx = sys.derivatives(&v, self.orientation);
        Ok(ProfileSolution {
            p: p.get(),
            orientation: self.orientation,
            x,
            v,
            vx,
            left_closure,
            right_closure,
            residual_sup,
            newton_iters,
            h,
            closure_defect: defect,
        })
    }
}

/// Full-line profile with algebraic left and Airy right closures.
pub fn solve_full_line(p: f64, x_left: f64, x_right: f64, n: usize) -> Result<ProfileSolution> {
    ProfileProblem::full_line(p, x_left, x_right, n)?.solve()
}

/// The `p = 2` full-line profile on `[−30, 15]` with 4000 nodes, computed once.
pub fn hastings_mcleod() -> &'static ProfileSolution {
    static CELL: OnceLock<ProfileSolution> = OnceLock::new();
    CELL.get_or_init(|| {
        solve_full_line(2.0, -30.0, 15.0, 4000).expect("reference profile must converge")
    })
}

/// Half-line profile with `u(0) = 0`.
pub fn solve_half_line_dirichlet(p: f64, x_max: f64, n: usize) -> Result<ProfileSolution> {
    ProfileProblem::half_line_dirichlet(p, x_max, n)?.solve()
}

/// Half-line profile with `u'(0) = 0`.
pub fn solve_half_line_neumann(p: f64, x_max: f64, n: usize) -> Result<ProfileSolution> {
    ProfileProblem::half_line_neumann(p, x_max, n)?.solve()
}

struct NumerovSystem<'a> {
    x: &'a [f64],
    h: f64,
    p: f64,
    sigma: f64,
    left: Bc,
    right: Bc,
}

impl NumerovSystem<'_> {
    fn f(&self, v: f64, x: f64) -> f64 {
        v * v.abs().powf(self.p) + self.sigma * x * v
    }

    fn fv(&self, v: f64, x: f64) -> f64 {
        (self.p + 1.0) * v.abs().powf(self.p) + self.sigma * x
    }

    fn fvv(&self, v: f64) -> f64 {
        (self.p + 1.0) * self.p * v.abs().powf(self.p - 1.0) * v.signum()
    }

    /// Residual vector and the scaled sup norm (`v_xx` units in the interior).
    fn residual(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let n = v.len();
        let h2 = self.h * self.h;
        let f: Vec<f64> = v
            .iter()
            .zip(self.x)
            .map(|(&vi, &xi)| self.f(vi, xi))
            .collect();
        let mut r = vec![0.0; n];
        let mut sup = 0.0f64;
        for i in 1..n - 1 {
            r[i] =
                v[i + 1] - 2.0 * v[i] + v[i - 1] - h2 / 12.0 * (f[i + 1] + 10.0 * f[i] + f[i - 1]);
            sup = sup.max(r[i].abs() / h2);
        }
        r[0] = match self.left {
            Bc::Value(a) => v[0] - a,
            Bc::NeumannTaylor => {
                let h = self.h;
                let fv0 = self.fv(v[0], self.x[0]);
                v[1] - v[0]
                    - 0.5 * h2 * f[0]
                    - self.sigma * h * h2 / 6.0 * v[0]
                    - h2 * h2 / 24.0 * fv0 * f[0]
            }
            Bc::AiryRatio(_) => unreachable!("Airy closure is right-only"),
        };
        r[n - 1] = match self.right {
            Bc::Value(b) => v[n - 1] - b,
            Bc::AiryRatio(q) => v[n - 1] - q * v[n - 2],
            Bc::NeumannTaylor => unreachable!("Neumann closure is left-only"),
        };
        (r, sup)
    }

    fn jacobian(&self, v: &[f64]) -> Tridiagonal {
        let n = v.len();
        let h2 = self.h * self.h;
        let mut j = Tridiagonal::zeros(n);
        let fv: Vec<f64> = v
            .iter()
            .zip(self.x)
            .map(|(&vi, &xi)| self.fv(vi, xi))
            .collect();
        for i in 1..n - 1 {
            j.lower[i] = 1.0 - h2 / 12.0 * fv[i - 1];
            j.diag[i] = -2.0 - 10.0 * h2 / 12.0 * fv[i];
            j.upper[i] = 1.0 - h2 / 12.0 * fv[i + 1];
        }
        match self.left {
            Bc::Value(_) => j.diag[0] = 1.0,
            Bc::NeumannTaylor => {
                let f0 = self.f(v[0], self.x[0]);
                let h = self.h;
                j.upper[0] = 1.0;
                j.diag[0] = -1.0
                    - 0.5 * h2 * fv[0]
                    - self.sigma * h * h2 / 6.0
                    - h2 * h2 / 24.0 * (self.fvv(v[0]) * f0 + fv[0] * fv[0]);
            }
            Bc::AiryRatio(_) => unreachable!(),
        }
        match self.right {
            Bc::Value(_) => j.diag[n - 1] = 1.0,
            Bc::AiryRatio(q) => {
                j.diag[n - 1] = 1.0;
                j.lower[n - 1] = -q;
            }
            Bc::NeumannTaylor => unreachable!(),
        }
        j
    }

    fn newton(&self, mut v: Vec<f64>) -> Result<(Vec<f64>, f64, usize)> {
        let norm2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (mut r, mut sup) = self.residual(&v);
        let mut rn = norm2(&r);
        let vmax = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for it in 0..NEWTON_MAX {
            let bc_ok = r[0].abs() < 1e-13 * vmax && r[r.len() - 1].abs() < 1e-13 * vmax;
            if sup <= NEWTON_TOL && bc_ok {
                return Ok((v, sup, it));
            }
            let j = self.jacobian(&v);
            let neg: Vec<f64> = r.iter().map(|x| -x).collect();
            let dv = j.solve(&neg)?;
            let step_max = dv.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + alpha * b).collect();
                let (tr, tsup) = self.residual(&trial);
                let tn = norm2(&tr);
                if tn.is_finite() && (tn < rn || step_max * alpha < 1e-14 * vmax) {
                    v = trial;
                    r = tr;
                    sup = tsup;
                    rn = tn;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || step_max < 1e-14 * vmax {
                if sup <= RESIDUAL_ACCEPT {
                    return Ok((v, sup, it + 1));
                }
                return Err(Error::solver("profile Newton stalled", sup));
            }
        }
        if sup <= RESIDUAL_ACCEPT {
            return Ok((v, sup, NEWTON_MAX));
        }
        Err(Error::solver("profile Newton did not converge", sup))
    }

    /// Fourth-order nodal derivatives.
    fn derivatives(&self, v: &[f64], orientation: Orientation) -> Vec<f64> {
        let n = v.len();
        let h = self.h;
        let f: Vec<f64> = v
            .iter()
            .zip(self.x)
            .map(|(&vi, &xi)| self.f(vi, xi))
            .collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h) - h / 12.0 * (f[i + 1] - f[i - 1]);
        }
        // v(x1) − v(x0) = h v'(x0) + ∫(x1 − s) f(s) ds with cubic interpolation of f
        d[0] =
            (v[1] - v[0]) / h - h * (97.0 * f[0] + 114.0 * f[1] - 39.0 * f[2] + 8.0 * f[3]) / 360.0;
        let m = n - 1;
        d[m] = (v[m] - v[m - 1]) / h
            + h * (97.0 * f[m] + 114.0 * f[m - 1] - 39.0 * f[m - 2] + 8.0 * f[m - 3]) / 360.0;
        if orientation == Orientation::HalfLineNeumann {
            d[0] = 0.0;
        }
        d
    }
}

impl ProfileSolution {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn sigma(&self) -> f64 {
        self.orientation.sigma()
    }

    /// Right-hand side `v(|v|^p + σx)`, i.e. `v_xx`.
    pub fn rhs(&self, v: f64, x: f64) -> f64 {
        v * v.abs().powf(self.p) + self.sigma() * x * v
    }

    /// Index of the node at `x`, if `x` lies on the grid.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let k = ((x - self.x[0]) / self.h).round();
        if k < 0.0 || k as usize >= self.len() {
            return None;
        }
        let k = k as usize;
        ((self.x[k] - x).abs() <= 1e-9 * self.h).then_some(k)
    }

    /// `(v, v_x)` at an arbitrary point: quintic Hermite on the grid, closed-form tails outside.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.len();
        let (x0, xn) = (self.x[0], self.x[n - 1]);
        let p = Power(self.p);
        if x < x0 {
            return match self.orientation {
                Orientation::FullLine => {
                    let (v, dv) = p.algebraic_branch(-x);
                    (v, -dv)
                }
                _ => (self.v[0], self.vx[0]),
            };
        }
        if x > xn {
            return match self.orientation {
                Orientation::FullLine => {
                    let vn = self.v[n - 1];
                    match (ln_ai(x), ln_ai(xn), airy(x)) {
                        (Ok(a), Ok(b), Ok(ax)) => {
                            let ratio = (a - b).exp();
                            let dlog = if ax.ai > 0.0 {
                                ax.ai_prime / ax.ai
                            } else {
                                -x.sqrt()
                            };
                            (vn * ratio, vn * ratio * dlog)
                        }
                        _ => (0.0, 0.0),
                    }
                }
                _ => p.algebraic_branch(x),
            };
        }
        let i = (((x - x0) / self.h).floor() as usize).min(n - 2);
        let h = self.h;
        let t = (x - self.x[i]) / h;
        let (y0, d0, s0) = (self.v[i], self.vx[i], self.rhs(self.v[i], self.x[i]));
        let (y1, d1, s1) = (
            self.v[i + 1],
            self.vx[i + 1],
            self.rhs(self.v[i + 1], self.x[i + 1]),
        );
        let (t2, t3, t4, t5) = (t * t, t.powi(3), t.powi(4), t.powi(5));
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
        let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let g3 = -g0;
        let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let g5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        let v = y0 * h0 + h * d0 * h1 + h * h * s0 * h2 + y1 * h3 + h * d1 * h4 + h * h * s1 * h5;
        let dv = (y0 * g0 + y1 * g3) / h + d0 * g1 + d1 * g4 + h * (s0 * g2 + s1 * g5);
        (v, dv)
    }

    /// `v` at an arbitrary point.
    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    fn require_full_line(&self, what: &str) -> Result<()> {
        if self.orientation != Orientation::FullLine {
            return Err(Error::Domain(format!("{what} needs a full-line profile")));
        }
        Ok(())
    }

    /// Tail-corrected `∫_{−∞}^0 (v² + x) dx + ∫_0^∞ v² dx` for the `p = 2` profile.
    pub fn identity_defect(&self) -> Result<f64> {
        self.require_full_line("identity defect")?;
        if self.p != 2.0 {
            return Err(Error::Domain("identity defect is defined for p = 2".into()));
        }
        let iz = self
            .node_index(0.0)
            .ok_or_else(|| Error::Grid("x = 0 is not a grid node".into()))?;
        let n = self.len();
        let h = self.h;
        let g: Vec<f64> = self
            .x
            .iter()
            .zip(&self.v)
            .map(|(&x, &v)| v * v + if x < 0.0 { x } else { 0.0 })
            .collect();
        let dg = |i: usize, left_side: bool| {
            2.0 * self.v[i] * self.vx[i] + if left_side { 1.0 } else { 0.0 }
        };
        let trap = |a: usize, b: usize| h * (g[a..=b].iter().sum::<f64>() - 0.5 * (g[a] + g[b]));
        let left = trap(0, iz) - h * h / 12.0 * (dg(iz, true) - dg(0, true));
        let right = trap(iz, n - 1) - h * h / 12.0 * (dg(n - 1, false) - dg(iz, false));
        let xi = -self.x[0];
        let left_tail = -0.25 / xi - 9.0 / 32.0 * xi.powi(-4);
        Ok(left + left_tail + right + self.right_tail_mass()?)
    }

    /// `∫_{x_N}^∞ v²` from the Airy tail `v = c·Ai`.
    fn right_tail_mass(&self) -> Result<f64> {
        let n = self.len();
        let xr = self.x[n - 1];
        let a = airy(xr)?;
        Ok(if a.ai > 0.0 {
            let c = self.v[n - 1] / a.ai;
            c * c * (a.ai_prime * a.ai_prime - xr * a.ai * a.ai)
        } else {
            0.0
        })
    }

    /// `∫_0^∞ v² dx` for a full-line profile (Euler–Maclaurin corrected, Airy tail added).
    pub fn positive_mass(&self) -> Result<f64> {
        self.require_full_line("positive mass")?;
        let iz = self
            .node_index(0.0)
            .ok_or_else(|| Error::Grid("x = 0 is not a grid node".into()))?;
        let n = self.len();
        let h = self.h;
        let g: Vec<f64> = self.v.iter().map(|v| v * v).collect();
        let dg = |i: usize| 2.0 * self.v[i] * self.vx[i];
        let body = h * (g[iz..].iter().sum::<f64>() - 0.5 * (g[iz] + g[n - 1]))
            - h * h / 12.0 * (dg(n - 1) - dg(iz));
        Ok(body + self.right_tail_mass()?)
    }

    /// `∫_{−X}^{0} v_x² dx − ¼ ln X`, with `X` snapped to the nearest node.
    pub fn vx_log_constant(&self, x_cut: f64) -> Result<f64> {
        let k = ((-x_cut - self.x[0]) / self.h).round();
        if k < 0.0 || x_cut <= 0.0 {
            return Err(Error::Truncation(format!(
                "X = {x_cut} lies beyond the grid"
            )));
        }
        let a = k as usize;
        let upper = self
            .x
            .iter()
            .rposition(|&x| x <= 1e-12 * self.h)
            .unwrap_or(0);
        if upper < a + 3 {
            return Err(Error::Truncation("integration window too short".into()));
        }
        let h = self.h;
        let g: Vec<f64> = self.vx.iter().map(|d| d * d).collect();
        let trap = h * (g[a..=upper].iter().sum::<f64>() - 0.5 * (g[a] + g[upper]));
        let ga = (-3.0 * g[a] + 4.0 * g[a + 1] - g[a + 2]) / (2.0 * h);
        let gb = (3.0 * g[upper] - 4.0 * g[upper - 1] + g[upper - 2]) / (2.0 * h);
        let integral = trap - h * h / 12.0 * (gb - ga);
        let x_snapped = -self.x[a];
        Ok(integral - 0.25 * x_snapped.ln())
    }

    /// Plateau of `v/Ai` over `[4, min(8, x_right)]`.
    pub fn connection_ratio(&self) -> Result<ConnectionRatio> {
        self.require_full_line("connection ratio")?;
        let hi = 8.0f64.min(self.x[self.len() - 1]);
        let mut samples = Vec::new();
        for (&x, &v) in self.x.iter().zip(&self.v) {
            if (4.0..=hi).contains(&x) {
                let a = airy(x)?.ai;
                if a > 1e-250 {
                    samples.push((x, v / a));
                }
            }
        }
        if samples.is_empty() {
            return Err(Error::Grid("no nodes in the connection window".into()));
        }
        let mean = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
        let (lo, hi) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| {
                (l.min(s.1), h.max(s.1))
            });
        let flatness = (hi - lo) / mean.abs();
        Ok(ConnectionRatio {
            value: mean,
            flatness,
            flagged: flatness > 1e-2,
            samples,
        })
    }

    /// `v/Ai` at one point.
    pub fn ratio_at(&self, x: f64) -> Result<f64> {
        Ok(self.value(x) / airy(x)?.ai)
    }

    /// Principal spectrum of `−φ'' + ((p+1)|v|^p + σx)φ` with Dirichlet ends.
    pub fn linearization(&self) -> Result<LinearizationSpectrum> {
        let (q, interior) = self.potential_on(&self.x);
        let potential_min = q.iter().cloned().fold(f64::INFINITY, f64::min);
        let argmin = q
            .iter()
            .position(|&v| v == potential_min)
            .map(|i| self.x[i])
            .unwrap_or(f64::NAN);
        let m = dirichlet_operator(&q[1..q.len() - 1], self.h);
        let mu1 = m.eigenvalue(0)?;
        let mut psi = m.eigenvector(mu1)?;
        let peak = psi
            .iter()
            .fold(0.0f64, |a, &b| if b.abs() > a.abs() { b } else { a });
        psi.iter_mut().for_each(|v| *v /= peak);
        let mut psi1 = vec![0.0];
        psi1.extend(psi);
        psi1.push(0.0);
        let mu_nearest_zero = m.eigenvalue_nearest_zero()?;
        let mu1_wide = self.widened_mu1(1.5)?;
        Ok(LinearizationSpectrum {
            potential_min,
            potential_argmin: argmin,
            mu1,
            mu1_wide,
            mu_nearest_zero,
            tails_increasing: interior,
            psi1,
        })
    }

    /// Potential on a grid plus a monotone-growth check over the outer tenths.
    fn potential_on(&self, xs: &[f64]) -> (Vec<f64>, bool) {
        let s = self.sigma();
        let q: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let v = self.value(x);
                (self.p + 1.0) * v.abs().powf(self.p) + s * x
            })
            .collect();
        let tenth = (q.len() / 10).max(2);
        let n = q.len();
        let right_ok = q[n - tenth..].windows(2).all(|w| w[1] >= w[0]);
        let left_ok = match self.orientation {
            Orientation::FullLine => q[..tenth].windows(2).all(|w| w[0] >= w[1]),
            _ => true,
        };
        (q, left_ok && right_ok)
    }

    /// Principal eigenvalue on a domain `factor` times wider, using closed-form tails.
    fn widened_mu1(&self, factor: f64) -> Result<f64> {
        let n = self.len();
        let (a, b) = (self.x[0], self.x[n - 1]);
        let extra = 0.5 * (factor - 1.0) * (b - a);
        let (lo, hi) = match self.orientation {
            Orientation::FullLine => (a - extra, b + extra),
            _ => (a, b + 2.0 * extra),
        };
        let m = ((hi - lo) / self.h).round() as usize;
        let xs: Vec<f64> = (0..=m).map(|i| lo + i as f64 * self.h).collect();
        let (q, _) = self.potential_on(&xs);
        dirichlet_operator(&q[1..q.len() - 1], self.h).eigenvalue(0)
    }
}

fn dirichlet_operator(q: &[f64], h: f64) -> SymTridiagonal {
    let ih2 = 1.0 / (h * h);
    SymTridiagonal {
        d: q.iter().map(|v| 2.0 * ih2 + v).collect(),
        e: vec![-ih2; q.len().saturating_sub(1)],
    }
}

/// Result of [`ProfileSolution::connection_ratio`].
#[derive(Debug, Clone, Serialize)]
pub struct ConnectionRatio {
    pub value: f64,
    /// `(max − min)/mean` over the window.
    pub flatness: f64,
    pub flagged: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Principal part of the linearised operator's spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct LinearizationSpectrum {
    pub potential_min: f64,
    pub potential_argmin: f64,
    pub mu1: f64,
    /// Same eigenvalue on a 1.5× wider domain.
    pub mu1_wide: f64,
    pub mu_nearest_zero: f64,
    /// Potential grows monotonically over the outer tenth at each unbounded end.
    pub tails_increasing: bool,
    /// Eigenfunction scaled to unit sup norm and positive peak.
    pub psi1: Vec<f64>,
}
