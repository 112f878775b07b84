use super::{Geometry, GroundState};
use crate::error::{Error, Result};
use crate::trap::{compute_lambda0, Trap};
use rayon::prelude::*;

/// Discretisation and stopping choices for [`solve_2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow2dOptions {
    /// Interior nodes per axis.
    pub n: usize,
    /// Half-width of the square box; `None` uses 1.5 times the Thomas–Fermi extent.
    pub box_half: Option<f64>,
    pub max_steps: usize,
    pub energy_tol: f64,
    pub residual_tol: f64,
}

impl Default for Flow2dOptions {
    fn default() -> Self {
        Self {
            n: 256,
            box_half: None,
            max_steps: 20_000,
            energy_tol: 1e-12,
            residual_tol: 1e-6,
        }
    }
}

struct Grid {
    n: usize,
    h: f64,
    w: Vec<f64>,
    e2: f64,
}

impl Grid {
    /// `(−Δ_h x)_k` with homogeneous Dirichlet data outside the box.
    fn neg_laplacian(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let ih2 = 1.0 / (self.h * self.h);
        out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for i in 0..n {
                let k = j * n + i;
                let mut s = 4.0 * x[k];
                if i > 0 {
                    s -= x[k - 1];
                }
                if i + 1 < n {
                    s -= x[k + 1];
                }
                if j > 0 {
                    s -= x[k - n];
                }
                if j + 1 < n {
                    s -= x[k + n];
                }
                row[i] = s * ih2;
            }
        });
    }

    fn dirichlet(&self, x: &[f64]) -> f64 {
        let mut lap = vec![0.0; x.len()];
        self.neg_laplacian(x, &mut lap);
        self.h * self.h * dot(x, &lap)
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let h2 = self.h * self.h;
        let pot = chunked_sum(x.len(), |k| {
            x[k].powi(4) / 4.0 + self.w[k] * x[k] * x[k] / 2.0
        });
        0.5 * self.dirichlet(x) + h2 * pot / self.e2
    }

    fn normalise(&self, x: &mut [f64]) -> f64 {
        let m = self.h * self.h * dot(x, x);
        let s = 1.0 / m.sqrt();
        x.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `λ = ε²∫|∇η|² + ∫Wη² + ∫η⁴` and the ε²-scaled Lagrange residual in the discrete L² norm.
    fn lagrange(&self, x: &[f64]) -> (f64, f64) {
        let h2 = self.h * self.h;
        let mut lap = vec![0.0; x.len()];
        self.neg_laplacian(x, &mut lap);
        let lambda = self.e2 * h2 * dot(x, &lap)
            + h2 * x
                .iter()
                .zip(&self.w)
                .map(|(e, w)| w * e * e + e.powi(4))
                .sum::<f64>();
        let res = chunked_sum(x.len(), |k| {
            let r = self.e2 * lap[k] + (self.w[k] + x[k] * x[k] - lambda) * x[k];
            r * r
        });
        (lambda, (h2 * res).sqrt())
    }

    /// Conjugate gradients for `(σ + ε²(−Δ_h) + W + η_n²) y = b`.
    fn cg(&self, sigma: f64, eta_n: &[f64], b: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        let diag: Vec<f64> = eta_n
            .iter()
            .zip(&self.w)
            .map(|(e, w)| sigma + w + e * e)
            .collect();
        let apply = |x: &[f64], out: &mut [f64]| {
            self.neg_laplacian(x, out);
            out.par_iter_mut()
                .zip(x.par_iter())
                .zip(diag.par_iter())
                .for_each(|((o, xi), d)| *o = self.e2 * *o + d * xi);
        };
        let mut x = x0.to_vec();
        let mut ax = vec![0.0; x.len()];
        apply(&x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        // Jacobi preconditioner
        let ih2 = 4.0 * self.e2 / (self.h * self.h);
        let pinv: Vec<f64> = diag.iter().map(|d| 1.0 / (d + ih2)).collect();
        let mut z: Vec<f64> = r.iter().zip(&pinv).map(|(a, p)| a * p).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let bnorm = dot(b, b).sqrt();
        let mut ap = vec![0.0; x.len()];
        for _ in 0..5000 {
            if dot(&r, &r).sqrt() <= 1e-14 * bnorm {
                return Ok(x);
            }
            apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            x.par_iter_mut()
                .zip(p.par_iter())
                .for_each(|(xi, pi)| *xi += alpha * pi);
            r.par_iter_mut()
                .zip(ap.par_iter())
                .for_each(|(ri, api)| *ri -= alpha * api);
            z.par_iter_mut()
                .zip(r.par_iter().zip(pinv.par_iter()))
                .for_each(|(zi, (ri, pi))| *zi = ri * pi);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut()
                .zip(z.par_iter())
                .for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        Err(Error::solver(
            "conjugate gradients did not converge",
            dot(&r, &r).sqrt() / bnorm,
        ))
    }
}

/// Sum over `0..n` with a fixed reduction order, independent of the thread count.
fn chunked_sum<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f).sum())
        .collect();
    partial.iter().sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    chunked_sum(a.len(), |k| a[k] * b[k])
}

/// Normalised gradient flow for the unit-mass minimiser on a square box.
pub fn solve_2d(trap: &Trap, epsilon: f64, opts: Flow2dOptions) -> Result<GroundState> {
    if !(5e-3..=0.5).contains(&epsilon) {
        return Err(Error::Domain(format!("ε = {epsilon} outside [5e-3, 0.5]")));
    }
    if opts.n < 256 {
        return Err(Error::Domain(format!("n = {} below 256", opts.n)));
    }
    let lambda0 = compute_lambda0(trap, 1e-12)?;
    let extent = trap.extent(lambda0)?;
    let half = match opts.box_half {
        Some(b) if b >= 1.5 * extent => b,
        Some(b) => {
            return Err(Error::Domain(format!(
                "box half-width {b} below 1.5 × extent {extent}"
            )))
        }
        None => 1.5 * extent,
    };
    let n = opts.n;
    let h = 2.0 * half / (n + 1) as f64;
    let coord = |i: usize| -half + (i + 1) as f64 * h;
    let w: Vec<f64> = (0..n * n)
        .map(|k| trap.w([coord(k % n), coord(k / n)]))
        .collect();
    let e2 = epsilon * epsilon;
    let grid = Grid { n, h, w, e2 };

    // smooth positive start approximating √A⁺
    let c = epsilon.powf(4.0 / 3.0);
    let mut eta: Vec<f64> = grid
        .w
        .iter()
        .map(|wk| {
            let a = lambda0 - wk;
            (0.5 * (a + (a * a + 4.0 * c).sqrt())).sqrt()
        })
        .collect();
    grid.normalise(&mut eta);
    let mut energy = grid.energy(&eta);
    let mut dt = 0.5 * e2;
    let mut steps = 0;
    let mut accepted = 0usize;
    loop {
        if steps >= opts.max_steps {
            let (_, res) = grid.lagrange(&eta);
            return Err(Error::solver("gradient flow hit the step limit", res));
        }
        steps += 1;
        let sigma = e2 / dt;
        let b: Vec<f64> = eta.iter().map(|e| sigma * e).collect();
        let mut next = grid.cg(sigma, &eta, &b, &eta)?;
        grid.normalise(&mut next);
        let e_new = grid.energy(&next);
        if e_new > energy * (1.0 + 1e-15) {
            dt *= 0.5;
            if dt < 1e-10 {
                return Err(Error::Stagnation(format!(
                    "time step collapsed below 1e-10 after {steps} steps"
                )));
            }
            continue;
        }
        let rel = (energy - e_new).abs() / e_new.abs();
        eta = next;
        energy = e_new;
        accepted += 1;
        if rel <= opts.energy_tol {
            let (lambda, res) = grid.lagrange(&eta);
            if res <= opts.residual_tol {
                let mass = h * h * dot(&eta, &eta);
                return Ok(GroundState {
                    epsilon,
                    trap: trap.clone(),
                    geometry: Geometry::Grid2d { half, n, h },
                    eta,
                    lambda_eps: lambda,
                    mass,
                    iterations: accepted,
                    residual: res,
                });
            }
        }
    }
}
