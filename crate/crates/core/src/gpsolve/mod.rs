//! Unit-mass ground states of `G_ε(u) = ∫ ½|∇u|² + u⁴/(4ε²) + W u²/(2ε²)`.
//!
//! Two solvers share the [`GroundState`] type: a radial finite-volume Newton
//! method with the multiplier as an extra unknown, and a semi-implicit
//! normalised gradient flow on a uniform 2-D grid.

mod flow2d;
mod radial;

pub use flow2d::{solve_2d, Flow2dOptions};
pub use radial::{radial_grid, solve_radial, solve_radial_ladder, RadialOptions};

use crate::trap::{TfData, Trap};
use serde::Serialize;

/// Discretisation carrying the quadrature used for every integral.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// Nodes `r_0 = 0 < … < r_N = r_max` (η vanishes at `r_N`) with control-volume areas.
    Radial { r: Vec<f64>, weights: Vec<f64> },
    /// Interior nodes `−L + (i+1)h`, `h = 2L/(n+1)`, row-major with `y₁` fastest.
    Grid2d { half: f64, n: usize, h: f64 },
}

/// Energy `G_ε` and its split into `G¹_ε` plus a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    pub total: f64,
    pub g1: f64,
    pub constant: f64,
    /// `λ/(2ε²) − ∫η⁴/(4ε²)`.
    pub tested: f64,
}

/// A converged discrete minimiser.
#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    pub epsilon: f64,
    pub trap: Trap,
    pub geometry: Geometry,
    pub eta: Vec<f64>,
    pub lambda_eps: f64,
    pub mass: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl GroundState {
    /// Quadrature weight of each node.
    pub fn weights(&self) -> Vec<f64> {
        match &self.geometry {
            Geometry::Radial { weights, .. } => weights.clone(),
            Geometry::Grid2d { h, n, .. } => vec![h * h; n * n],
        }
    }

    /// Node coordinates in the plane (radial nodes sit on the positive `y₁` axis).
    pub fn points(&self) -> Vec<[f64; 2]> {
        match &self.geometry {
            Geometry::Radial { r, .. } => r[..self.eta.len()].iter().map(|&x| [x, 0.0]).collect(),
            Geometry::Grid2d { half, n, h } => (0..n * n)
                .map(|k| {
                    [
                        -half + ((k % n) + 1) as f64 * h,
                        -half + ((k / n) + 1) as f64 * h,
                    ]
                })
                .collect(),
        }
    }

    pub fn radial_nodes(&self) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Radial { r, .. } => Some(&r[..self.eta.len()]),
            _ => None,
        }
    }

    /// Discrete Dirichlet integral `∫|∇η|²`.
    pub fn dirichlet(&self) -> f64 {
        match &self.geometry {
            Geometry::Radial { r, .. } => {
                let n = self.eta.len();
                (0..n)
                    .map(|i| {
                        let next = if i + 1 < n { self.eta[i + 1] } else { 0.0 };
                        let rm = 0.5 * (r[i] + r[i + 1]);
                        2.0 * std::f64::consts::PI * rm / (r[i + 1] - r[i])
                            * (next - self.eta[i]).powi(2)
                    })
                    .sum()
            }
            Geometry::Grid2d { n, .. } => {
                let n = *n;
                let at = |i: isize, j: isize| -> f64 {
                    if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                        0.0
                    } else {
                        self.eta[j as usize * n + i as usize]
                    }
                };
                let mut s = 0.0;
                for j in -1..n as isize {
                    for i in -1..n as isize {
                        if j >= 0 {
                            s += (at(i + 1, j) - at(i, j)).powi(2);
                        }
                        if i >= 0 {
                            s += (at(i, j + 1) - at(i, j)).powi(2);
                        }
                    }
                }
                s
            }
        }
    }

    /// `∫ g(y, η) dy` with the state's quadrature.
    pub fn integrate<F: Fn([f64; 2], f64) -> f64>(&self, g: F) -> f64 {
        self.points()
            .iter()
            .zip(&self.eta)
            .zip(self.weights())
            .map(|((p, e), w)| w * g(*p, *e))
            .sum()
    }

    /// Energy by direct quadrature, the split form and the tested identity.
    pub fn energy(&self, tf: &TfData) -> Energy {
        let e2 = self.epsilon * self.epsilon;
        let trap = &self.trap;
        let d = self.dirichlet();
        let pot = self.integrate(|y, e| e.powi(4) / (4.0 * e2) + trap.w(y) * e * e / (2.0 * e2));
        let total = 0.5 * d + pot;
        let lambda0 = tf.lambda;
        let split = self.integrate(|y, e| {
            let a = lambda0 - trap.w(y);
            let (ap, am) = (a.max(0.0), (-a).max(0.0));
            (e * e - ap).powi(2) / (4.0 * e2) + am * e * e / (2.0 * e2)
        });
        let g1 = 0.5 * d + split;
        let ap2 = self.integrate(|y, _| (lambda0 - trap.w(y)).max(0.0).powi(2));
        // unit mass enters through λ₀∫η²/2
        let constant = (lambda0 * self.mass - 0.5 * ap2) / (2.0 * e2);
        let q = self.integrate(|_, e| e.powi(4));
        let tested = self.lambda_eps / (2.0 * e2) - q / (4.0 * e2);
        Energy {
            total,
            g1,
            constant,
            tested,
        }
    }

    /// Largest admissible value `max √((λ_ε − W)⁺)`.
    pub fn max_principle_bound(&self) -> f64 {
        (self.lambda_eps - self.trap.inf_w()).max(0.0).sqrt()
    }

    /// `η` at radius `r` by linear interpolation (radial states only).
    pub fn eta_at_radius(&self, r: f64) -> Option<f64> {
        let nodes = self.radial_nodes()?;
        let n = nodes.len();
        if r >= nodes[n - 1] {
            let Geometry::Radial { r: full, .. } = &self.geometry else {
                return None;
            };
            let rmax = full[n];
            if r >= rmax {
                return Some(0.0);
            }
            let t = (r - nodes[n - 1]) / (rmax - nodes[n - 1]);
            return Some(self.eta[n - 1] * (1.0 - t));
        }
        let k = nodes
            .partition_point(|&x| x <= r)
            .saturating_sub(1)
            .min(n - 2);
        let t = (r - nodes[k]) / (nodes[k + 1] - nodes[k]);
        Some(self.eta[k] * (1.0 - t) + self.eta[k + 1] * t)
    }

    /// Nodal radial derivative (three-point, non-uniform), with `η'(0) = 0`.
    pub fn eta_r(&self) -> Option<Vec<f64>> {
        let Geometry::Radial { r, .. } = &self.geometry else {
            return None;
        };
        let n = self.eta.len();
        let e = |i: usize| if i < n { self.eta[i] } else { 0.0 };
        let mut d = vec![0.0; n];
        for i in 1..n {
            let (h0, h1) = (r[i] - r[i - 1], r[i + 1] - r[i]);
            d[i] = (-h1 / (h0 * (h0 + h1))) * e(i - 1)
                + ((h1 - h0) / (h0 * h1)) * e(i)
                + (h0 / (h1 * (h0 + h1))) * e(i + 1);
        }
        Some(d)
    }

    /// `ξ(r) = ∫_r^∞ s η² ds` and `f = ξ/η²` (`None` where `η² ≤ 1e-30`).
    pub fn xi_f(&self) -> Option<XiF> {
        let Geometry::Radial { r, weights } = &self.geometry else {
            return None;
        };
        let n = self.eta.len();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut xi = vec![0.0; n + 1];
        let mut tail = 0.0;
        for i in (0..n).rev() {
            // right half of the control volume of node i
            let rp = 0.5 * (r[i] + r[i + 1]);
            let right = std::f64::consts::PI * (rp * rp - r[i] * r[i]) * self.eta[i].powi(2);
            xi[i] = (tail + right) / two_pi;
            tail += weights[i] * self.eta[i].powi(2);
        }
        let f = (0..=n)
            .map(|i| {
                let e2 = if i < n { self.eta[i].powi(2) } else { 0.0 };
                (e2 > 1e-30).then(|| xi[i] / e2)
            })
            .collect();
        Some(XiF {
            r: r.clone(),
            xi,
            f,
        })
    }
}

/// Samples of `ξ_ε` and `f_ε` on the radial nodes (including `r_max`).
#[derive(Debug, Clone, Serialize)]
pub struct XiF {
    pub r: Vec<f64>,
    pub xi: Vec<f64>,
    pub f: Vec<Option<f64>>,
}
