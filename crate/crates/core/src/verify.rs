//! Verification harness: banded comparisons of ground states with the layer
//! predictions, rate fits over ε ladders, and the assembled report.

use crate::error::{Error, Result};
use crate::gpsolve::{
    solve_2d, solve_radial_ladder, Energy, Flow2dOptions, Geometry, GroundState, RadialOptions,
};
use crate::layers::{
    build_u_ap, predict, ApproxSolution, BandDiagnostics, LayerParams, PredictionBundle,
};
use crate::numerics::linear_fit;
use crate::painleve::{hastings_mcleod, ProfileSolution};
use crate::specfun::ai;
use crate::trap::{boundary_and_beta, compute_lambda0, TfData, Trap};
use rayon::prelude::*;
use serde::Serialize;

/// Threshold for "bounded across ε": largest over smallest ladder value.
pub const BOUNDED_RATIO: f64 = 3.0;
/// Maximal pair distance in the Hölder seminorm.
pub const HOLDER_RADIUS: f64 = 0.2;
/// Exterior window `[R + 3ε^{2/3}, R + 10ε^{2/3}]`, in units of `ε^{2/3}`.
pub const EXTERIOR_WINDOW: (f64, f64) = (3.0, 10.0);
/// Band constant `D` of the monotonicity band `t ≤ Dε^{2/3}`.
pub const MONOTONE_D: f64 = 3.0;

/// Least-squares fit `error ≈ C|ln ε|^k ε^q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub samples: Vec<(f64, f64)>,
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub log_power: Option<f64>,
}

/// Fits `ln(error/|ln ε|^k)` against `ln ε`.
pub fn rate_fit(samples: &[(f64, f64)], log_power: Option<f64>) -> Result<RateFit> {
    if samples.len() < 3 {
        return Err(Error::Domain(format!(
            "rate fit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(Error::Domain("ε must be strictly decreasing".into()));
    }
    if let Some(&(e, err)) = samples
        .iter()
        .find(|(e, err)| !(*err > 0.0) || !(*e > 0.0 && *e < 1.0))
    {
        return Err(Error::Domain(format!(
            "invalid sample (ε = {e}, error = {err})"
        )));
    }
    let k = log_power.unwrap_or(0.0);
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples
        .iter()
        .map(|&(e, err)| err.ln() - k * (-e.ln()).ln())
        .collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(RateFit {
        samples: samples.to_vec(),
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared: r2,
        log_power,
    })
}

/// Sup-norm errors of a ground state against the layer predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerLayerErrors {
    /// Band half-width `d = δ/2`.
    pub d: f64,
    /// `sup_{−d ≤ t ≤ 0} |η − inner|/(ε + |t|^{3/2})`.
    pub inner: f64,
    /// `sup_{0 ≤ t ≤ d} |η − inner|/ε`.
    pub outer: f64,
    /// `sup_{t ≤ −Dε^{2/3}} |η − √a|·|t|^{5/2}/ε²`.
    pub intermediate: f64,
    /// `sup |η − √a|/ε²` over `{a ≥ a_max/2}`.
    pub interior: f64,
    /// `sup η/(ε^{1/3}βAi(x))` on the exterior window.
    pub exterior_ratio: f64,
    /// `sup η/(ε^{1/3}(β + 0.2)Ai(x))` on the exterior window.
    pub exterior_envelope: f64,
    /// Slope of `ln η` against `ln Ai(x)` on the exterior window.
    pub exterior_decay: f64,
}

fn nodes(state: &GroundState) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
    state.points().into_iter().zip(state.eta.iter().copied())
}

/// Banded sup errors of `state` against `approx` (matched ε).
pub fn corner_layer_error(
    state: &GroundState,
    approx: &ApproxSolution,
) -> Result<CornerLayerErrors> {
    let eps = state.epsilon;
    if (eps - approx.epsilon).abs() > 1e-14 * eps {
        return Err(Error::Parameter(format!(
            "ε mismatch: state {eps}, approximation {}",
            approx.epsilon
        )));
    }
    let e23 = eps.powf(2.0 / 3.0);
    let d = 0.5 * approx.params.delta;
    let a_max = approx.tf.lambda - approx.tf.trap.inf_w();
    let (lo, hi) = (EXTERIOR_WINDOW.0 * e23, EXTERIOR_WINDOW.1 * e23);
    let mut out = CornerLayerErrors {
        d,
        inner: 0.0,
        outer: 0.0,
        intermediate: 0.0,
        interior: 0.0,
        exterior_ratio: 0.0,
        exterior_envelope: 0.0,
        exterior_decay: f64::NAN,
    };
    let mut counts = [0usize; 4];
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (y, eta) in nodes(state) {
        let f = approx.fermi(y);
        let a = approx.a_eps(y);
        let t = f.t;
        if (-d..=0.0).contains(&t) {
            counts[0] += 1;
            out.inner = out
                .inner
                .max((eta - approx.inner(t, f.beta)).abs() / (eps + t.abs().powf(1.5)));
        }
        if (0.0..=d).contains(&t) {
            counts[1] += 1;
            out.outer = out.outer.max((eta - approx.inner(t, f.beta)).abs() / eps);
        }
        if t <= -MONOTONE_D * e23 {
            counts[2] += 1;
            out.intermediate = out
                .intermediate
                .max((eta - a.max(0.0).sqrt()).abs() * t.abs().powf(2.5) / (eps * eps));
        }
        if a >= 0.5 * a_max {
            counts[3] += 1;
            out.interior = out.interior.max((eta - a.sqrt()).abs() / (eps * eps));
        }
        if (lo..=hi).contains(&t) && eta > 0.0 {
            let x = f.beta * t / e23;
            let ax = ai(x)?;
            let scale = eps.cbrt() * ax;
            out.exterior_ratio = out.exterior_ratio.max(eta / (scale * f.beta));
            out.exterior_envelope = out.exterior_envelope.max(eta / (scale * (f.beta + 0.2)));
            lx.push(ax.ln());
            ly.push(eta.ln());
        }
    }
    let names = [
        "inner band",
        "exterior band",
        "intermediate band",
        "deep interior",
    ];
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Grid(format!("{} contains no nodes", names[k])));
    }
    if lx.len() >= 2 {
        out.exterior_decay = linear_fit(&lx, &ly).0;
    }
    Ok(out)
}

/// Outcome of the weighted monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monotonicity {
    /// `max η_r·(|t| + ε^{2/3})^{1/2}` over `−δ/2 ≤ t ≤ Dε^{2/3}`.
    pub max_weighted: f64,
    /// `−max_weighted`.
    pub c: f64,
    /// `η_r` at the origin.
    pub eta_r_origin: f64,
}

/// Weighted radial-derivative check on a radial state.
pub fn monotonicity_check(state: &GroundState, approx: &ApproxSolution) -> Result<Monotonicity> {
    let r = state
        .radial_nodes()
        .ok_or_else(|| Error::Domain("monotonicity check needs a radial state".into()))?;
    let radius = approx
        .tf
        .radius()
        .ok_or_else(|| Error::Domain("monotonicity check needs a circular boundary".into()))?;
    let deriv = state.eta_r().expect("radial state");
    let e23 = state.epsilon.powf(2.0 / 3.0);
    let d = 0.5 * approx.params.delta;
    let max_weighted = r
        .iter()
        .zip(&deriv)
        .filter_map(|(&ri, &di)| {
            let t = ri - radius;
            (t >= -d && t <= MONOTONE_D * e23).then(|| di * (t.abs() + e23).sqrt())
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if max_weighted == f64::NEG_INFINITY {
        return Err(Error::Grid("monotonicity band contains no nodes".into()));
    }
    Ok(Monotonicity {
        max_weighted,
        c: -max_weighted,
        eta_r_origin: deriv[0],
    })
}

/// Hölder seminorm and sup gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderGradient {
    pub alpha: f64,
    pub seminorm: f64,
    pub sup_gradient: f64,
}

/// `max |η(x) − η(y)|/|x − y|^α` over node pairs closer than [`HOLDER_RADIUS`], and `sup|∇η|`.
///
/// Radial states use radial pairs only: for a radial function the collinear pair
/// realises the planar supremum.
pub fn holder_and_gradient(state: &GroundState, alpha: f64) -> Result<HolderGradient> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("α = {alpha} outside (0, 1]")));
    }
    match &state.geometry {
        Geometry::Radial { r, .. } => {
            let mut eta = state.eta.clone();
            eta.push(0.0);
            let seminorm = radial_holder(r, &eta, alpha);
            let sup_gradient = eta
                .windows(2)
                .zip(r.windows(2))
                .map(|(e, x)| ((e[1] - e[0]) / (x[1] - x[0])).abs())
                .fold(0.0, f64::max);
            Ok(HolderGradient {
                alpha,
                seminorm,
                sup_gradient,
            })
        }
        Geometry::Grid2d { n, h, .. } => {
            let (n, h) = (*n as isize, *h);
            let reach = (HOLDER_RADIUS / h).floor() as isize;
            let offsets: Vec<(isize, isize, f64)> = (0..=reach)
                .flat_map(|dj| (-reach..=reach).map(move |di| (di, dj)))
                .filter(|&(di, dj)| dj > 0 || di > 0)
                .filter_map(|(di, dj)| {
                    let dist = h * ((di * di + dj * dj) as f64).sqrt();
                    (dist <= HOLDER_RADIUS).then(|| (di, dj, dist.powf(alpha)))
                })
                .collect();
            let eta = &state.eta;
            let at = |i: isize, j: isize| {
                if i < 0 || j < 0 || i >= n || j >= n {
                    0.0
                } else {
                    eta[(j * n + i) as usize]
                }
            };
            let seminorm = (0..n)
                .into_par_iter()
                .map(|j| {
                    let mut best = 0.0f64;
                    for i in 0..n {
                        let e0 = at(i, j);
                        for &(di, dj, w) in &offsets {
                            best = best.max((at(i + di, j + dj) - e0).abs() / w);
                        }
                    }
                    best
                })
                .reduce(|| 0.0, f64::max);
            let sup_gradient = (-1..n)
                .flat_map(|j| (-1..n).map(move |i| (i, j)))
                .map(|(i, j)| ((at(i + 1, j) - at(i, j)).hypot(at(i, j + 1) - at(i, j))) / h)
                .fold(0.0, f64::max);
            Ok(HolderGradient {
                alpha,
                seminorm,
                sup_gradient,
            })
        }
    }
}

/// Exact radial seminorm with block pruning: a block pair is skipped when
/// its oscillation over the smallest separation cannot beat the running maximum.
fn radial_holder(r: &[f64], eta: &[f64], alpha: f64) -> f64 {
    const B: usize = 32;
    let n = eta.len();
    let pair = |i: usize, j: usize| (eta[j] - eta[i]).abs() / (r[j] - r[i]).powf(alpha);
    // lower bound from a strided pass
    let mut best = 0.0f64;
    for i in (0..n).step_by(B) {
        for j in (i + 1..n)
            .take_while(|&j| r[j] - r[i] <= HOLDER_RADIUS)
            .step_by(B)
        {
            best = best.max(pair(i, j));
        }
    }
    let blocks: Vec<(usize, usize, f64, f64)> = (0..n)
        .step_by(B)
        .map(|a| {
            let b = (a + B).min(n);
            let (lo, hi) = eta[a..b]
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                    (l.min(v), h.max(v))
                });
            (a, b, lo, hi)
        })
        .collect();
    blocks
        .par_iter()
        .enumerate()
        .map(|(bi, &(a, b, lo_i, hi_i))| {
            let mut best = best;
            for &(c, d, lo_j, hi_j) in &blocks[bi..] {
                let gap = r[c] - r[b - 1];
                if gap > HOLDER_RADIUS {
                    break;
                }
                if gap > 0.0 && (hi_j - lo_i).max(hi_i - lo_j) / gap.powf(alpha) <= best {
                    continue;
                }
                for i in a..b {
                    for j in c.max(i + 1)..d {
                        if r[j] - r[i] > HOLDER_RADIUS {
                            break;
                        }
                        best = best.max(pair(i, j));
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Minima of `3η² + W − λ_ε` in and outside the layer band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizationBound {
    /// `min_{|t| ≤ δ} (3η² + W − λ_ε)/ε^{2/3}`.
    pub band: f64,
    /// Same minimum divided by `β²` at the minimiser.
    pub band_stretched: f64,
    /// `min_{|t| > δ} (3η² + W − λ_ε)/(1 + |y|²)`.
    pub complement: f64,
}

pub fn linearization_bound(
    state: &GroundState,
    approx: &ApproxSolution,
) -> Result<LinearizationBound> {
    let e23 = state.epsilon.powf(2.0 / 3.0);
    let delta = approx.params.delta;
    let trap = &state.trap;
    let (mut band, mut beta_at, mut complement) = (f64::INFINITY, 1.0, f64::INFINITY);
    for (y, eta) in nodes(state) {
        let q = 3.0 * eta * eta + trap.w(y) - state.lambda_eps;
        let f = approx.fermi(y);
        if f.t.abs() <= delta {
            if q / e23 < band {
                band = q / e23;
                beta_at = f.beta;
            }
        } else {
            complement = complement.min(q / (1.0 + y[0] * y[0] + y[1] * y[1]));
        }
    }
    if !band.is_finite() || !complement.is_finite() {
        return Err(Error::Grid(
            "linearization band or complement contains no nodes".into(),
        ));
    }
    Ok(LinearizationBound {
        band,
        band_stretched: band / (beta_at * beta_at),
        complement,
    })
}

/// Auxiliary-function diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FDiagnostics {
    /// `‖f_ε − f₀‖∞` over nodes where `η² > 1e-30`.
    pub sup: f64,
    /// `sup·ε^{−1/2}`.
    pub weighted: f64,
    /// `f_ε(R)/ε^{2/3}`.
    pub boundary_scaled: f64,
    /// `Rβ^{−1}V(0)^{−2}∫_0^∞V²`.
    pub boundary_predicted: f64,
    pub boundary_rel_err: f64,
    pub f0_origin: f64,
}

pub fn f_compare(state: &GroundState, bundle: &PredictionBundle) -> Result<FDiagnostics> {
    let xf = state
        .xi_f()
        .ok_or_else(|| Error::Domain("f comparison needs a radial state".into()))?;
    let radius = bundle
        .tf
        .radius()
        .ok_or_else(|| Error::Domain("f comparison needs a circular boundary".into()))?;
    let mut sup = 0.0f64;
    for (&r, f) in xf.r.iter().zip(&xf.f) {
        if let (Some(fe), Some(f0)) = (f, bundle.f0(r)) {
            sup = sup.max((fe - f0).abs());
        }
    }
    let k = xf.r.partition_point(|&r| r <= radius).saturating_sub(1);
    let (Some(fa), Some(fb)) = (xf.f[k], xf.f[k + 1]) else {
        return Err(Error::Grid("f undefined next to R".into()));
    };
    let s = (radius - xf.r[k]) / (xf.r[k + 1] - xf.r[k]);
    let e23 = state.epsilon.powf(2.0 / 3.0);
    let boundary_scaled = (fa + s * (fb - fa)) / e23;
    let boundary_predicted = bundle.f_boundary.expect("radial bundle") / e23;
    Ok(FDiagnostics {
        sup,
        weighted: sup / state.epsilon.sqrt(),
        boundary_scaled,
        boundary_predicted,
        boundary_rel_err: (boundary_scaled / boundary_predicted - 1.0).abs(),
        f0_origin: bundle.f0(0.0).expect("radial bundle"),
    })
}

/// Weighted residual sups of `u_ap` in the layer band and the deep interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualBounds {
    /// `sup |R̃|/(ε(|s| + 1)^{−1/2})` over `−δ ≤ βt ≤ 0` along one normal.
    pub band: f64,
    /// `sup |R̃|/ε^{4/3}` over `{a ≥ a_max/2}`.
    pub interior: f64,
}

/// Scaled-residual sups along the normal at `θ = θ₀` and on a 41² interior lattice.
pub fn residual_bounds(approx: &ApproxSolution) -> Result<ResidualBounds> {
    let eps = approx.epsilon;
    let e23 = eps.powf(2.0 / 3.0);
    let theta = approx.tf.theta[0] + 0.1 * approx.tf.ell0;
    let beta = approx.fermi(approx.fermi_inverse(0.0, theta)).beta;
    let mut band = 0.0f64;
    for k in 0..=400 {
        let t = -approx.params.delta / beta * k as f64 / 400.0;
        let y = approx.fermi_inverse(t, theta);
        let w = eps * ((t / e23).abs() + 1.0).powf(-0.5);
        band = band.max(approx.scaled_residual(y)?.abs() / w);
    }
    let a_max = approx.tf.lambda - approx.tf.trap.inf_w();
    let extent = approx.tf.trap.extent(approx.tf.lambda)?;
    let mut interior = 0.0f64;
    for j in 0..=40 {
        for i in 0..=40 {
            let y = [
                extent * (i as f64 / 20.0 - 1.0),
                extent * (j as f64 / 20.0 - 1.0),
            ];
            if approx.a_eps(y) >= 0.5 * a_max && approx.fermi(y).t <= -2.0 * approx.params.delta {
                interior = interior.max(approx.scaled_residual(y)?.abs() / e23.powi(2));
            }
        }
    }
    Ok(ResidualBounds { band, interior })
}

/// Everything measured at one ε.
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonRecord {
    pub epsilon: f64,
    pub lambda_eps: f64,
    pub lambda_gap: f64,
    pub energy: Energy,
    /// `G_ε − c₋₂ε^{−2}`.
    pub remainder: f64,
    pub params: LayerParams,
    pub corner: CornerLayerErrors,
    pub holder_half: HolderGradient,
    pub holder_06: HolderGradient,
    pub linearization: LinearizationBound,
    pub residual: ResidualBounds,
    pub band: BandDiagnostics,
    pub monotonicity: Option<Monotonicity>,
    pub f: Option<FDiagnostics>,
}

/// Analyses one converged state against `tf0` (built with `λ₀`).
pub fn analyse_state(
    state: &GroundState,
    tf0: &TfData,
    hm: &ProfileSolution,
    n_theta: usize,
) -> Result<EpsilonRecord> {
    let eps = state.epsilon;
    let tf_eps = boundary_and_beta(&state.trap, state.lambda_eps, n_theta)?;
    let params = LayerParams::default_for(&tf_eps, eps);
    let approx = build_u_ap(&tf_eps, hm, eps, params)?;
    let bundle = predict(tf0, hm, eps)?;
    let energy = state.energy(tf0);
    let radial = state.radial_nodes().is_some() && tf_eps.radius().is_some();
    Ok(EpsilonRecord {
        epsilon: eps,
        lambda_eps: state.lambda_eps,
        lambda_gap: state.lambda_eps - tf0.lambda,
        remainder: energy.total - bundle.c_minus2 / (eps * eps),
        energy,
        params,
        corner: corner_layer_error(state, &approx)?,
        holder_half: holder_and_gradient(state, 0.5)?,
        holder_06: holder_and_gradient(state, 0.6)?,
        linearization: linearization_bound(state, &approx)?,
        residual: residual_bounds(&approx)?,
        band: approx.band_diagnostics(400),
        monotonicity: if radial {
            Some(monotonicity_check(state, &approx)?)
        } else {
            None
        },
        f: if radial {
            Some(f_compare(state, &bundle)?)
        } else {
            None
        },
    })
}

/// Direction of a threshold comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    Below,
    Above,
}

impl Comparison {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Below => value < threshold,
            Comparison::Above => value > threshold,
        }
    }
}

/// One named pass/fail entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
    pub note: String,
}

impl Check {
    pub fn new(
        name: &str,
        anchor: &str,
        value: f64,
        comparison: Comparison,
        threshold: f64,
        note: &str,
    ) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value,
            comparison,
            threshold,
            pass: comparison.holds(value, threshold),
            note: note.into(),
        }
    }
}

/// Anchor of the multiplier-rate check.
pub const LAMBDA_ANCHOR: &str = "λ_ε − λ₀ = O(|ln ε|ε²)";

/// Run environment recorded alongside the checks.
#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub trap: Trap,
    pub eps: Vec<f64>,
    pub solver: String,
    pub grid_n: usize,
    pub lambda0: f64,
    pub c_minus2: f64,
    pub c_log: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub environment: Environment,
    pub records: Vec<EpsilonRecord>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("report serialisation: {e}")))
    }

    /// Flat CSV `name,anchor,value,comparison,threshold,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,anchor,value,comparison,threshold,pass\n");
        for c in &self.checks {
            let cmp = serde_json::to_value(c.comparison)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            s.push_str(&format!(
                "{},\"{}\",{:.16e},{},{:.16e},{}\n",
                c.name, c.anchor, c.value, cmp, c.threshold, c.pass
            ));
        }
        s
    }
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    hi / lo
}

/// Ladder-level checks from per-ε records (ordered by decreasing ε).
pub fn assemble_checks(records: &[EpsilonRecord], c_log: f64, profile_min: f64) -> Vec<Check> {
    use Comparison::*;
    let mut checks = Vec::new();
    let gap: Vec<(f64, f64)> = records.iter().map(|r| (r.epsilon, r.lambda_gap)).collect();
    match rate_fit(&gap, Some(1.0)) {
        Ok(fit) => {
            checks.push(Check::new(
                "lambda_rate",
                LAMBDA_ANCHOR,
                fit.exponent,
                AtLeast,
                1.8,
                "exponent of (λ_ε − λ₀)/|ln ε| against ε",
            ));
            checks.push(Check::new(
                "lambda_rate_r2",
                LAMBDA_ANCHOR,
                fit.r_squared,
                AtLeast,
                0.98,
                "r² of the same fit",
            ));
        }
        Err(e) => checks.push(Check::new(
            "lambda_rate",
            LAMBDA_ANCHOR,
            f64::NAN,
            AtLeast,
            1.8,
            &e.to_string(),
        )),
    }
    if records.len() >= 2 {
        let xs: Vec<f64> = records.iter().map(|r| -r.epsilon.ln()).collect();
        let ys: Vec<f64> = records.iter().map(|r| r.remainder).collect();
        let slope = linear_fit(&xs, &ys).0;
        checks.push(Check::new(
            "energy_log_slope",
            "G_ε − c₋₂ε^{−2} ∼ c_log|ln ε|",
            (slope / c_log - 1.0).abs(),
            AtMost,
            0.10,
            &format!("relative deviation of the fitted slope {slope:.6} from c_log = {c_log:.6}"),
        ));
        let bounded = |name: &str, anchor: &str, f: &dyn Fn(&EpsilonRecord) -> f64, limit: f64| {
            Check::new(
                name,
                anchor,
                spread(records.iter().map(f)),
                AtMost,
                limit,
                "max/min over the ladder",
            )
        };
        checks.push(bounded(
            "inner_band",
            "η_ε − ε^{1/3}βV(βt/ε^{2/3}) = O(ε + |t|^{3/2})",
            &|r| r.corner.inner,
            BOUNDED_RATIO,
        ));
        checks.push(bounded(
            "exterior_band",
            "η_ε − ε^{1/3}βV(βt/ε^{2/3}) = O(ε)",
            &|r| r.corner.outer,
            BOUNDED_RATIO,
        ));
        checks.push(bounded(
            "intermediate_band",
            "η_ε − √a_ε = O(ε²|t|^{−5/2})",
            &|r| r.corner.intermediate,
            BOUNDED_RATIO,
        ));
        checks.push(bounded(
            "interior",
            "η_ε − √a_ε = O(ε²)",
            &|r| r.corner.interior,
            BOUNDED_RATIO,
        ));
        let envelope = records
            .iter()
            .map(|r| r.corner.exterior_envelope)
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "exterior_envelope",
            "η_ε ≤ ε^{1/3}(β + o(1))Ai(βt/ε^{2/3})",
            envelope,
            AtMost,
            1.0,
            "sup η/(ε^{1/3}(β + 0.2)Ai) on the exterior window",
        ));
        let decay = records
            .windows(2)
            .map(|w| {
                (w[1].corner.exterior_decay - 1.0).abs() / (w[0].corner.exterior_decay - 1.0).abs()
            })
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "exterior_decay",
            "η_ε ∝ Ai(βt/ε^{2/3}) for t > 0",
            decay,
            Below,
            1.0,
            "largest successive ratio of |slope of ln η on ln Ai − 1|; below 1 means the slope approaches 1",
        ));
        checks.push(bounded(
            "holder_half",
            "‖η_ε‖_{C^{1/2}} ≤ C",
            &|r| r.holder_half.seminorm,
            1.5,
        ));
        let growth = records
            .windows(2)
            .map(|w| w[1].holder_06.seminorm / w[0].holder_06.seminorm)
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "holder_06_increasing",
            "η_ε unbounded in C^{0.6}",
            growth,
            Above,
            1.0,
            "smallest successive seminorm ratio",
        ));
        checks.push(bounded(
            "gradient",
            "‖∇η_ε‖_∞ ≤ Cε^{−1/3}",
            &|r| r.holder_half.sup_gradient * r.epsilon.cbrt(),
            2.0,
        ));
        let band_min = records
            .iter()
            .map(|r| r.linearization.band)
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "linearization_band_positive",
            "3η_ε² + W − λ_ε ≥ cε^{2/3}",
            band_min,
            Above,
            0.0,
            "min over ladder",
        ));
        checks.push(bounded(
            "linearization_band_stable",
            "3η_ε² + W − λ_ε ≥ cε^{2/3}",
            &|r| r.linearization.band,
            2.0,
        ));
        let comp = records
            .iter()
            .map(|r| r.linearization.complement)
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "linearization_complement",
            "3η_ε² + W − λ_ε ≥ c + c|y|^p",
            comp,
            Above,
            0.0,
            "min over ladder",
        ));
        let last = &records[records.len() - 1];
        checks.push(Check::new(
            "linearization_profile",
            "3η_ε² + W − λ_ε ≈ ε^{2/3}β²(3V² + x)",
            (last.linearization.band_stretched / profile_min - 1.0).abs(),
            AtMost,
            0.2,
            &format!("relative deviation from min(3V² + x) = {profile_min:.6} at the smallest ε"),
        ));
        checks.push(bounded(
            "residual_band",
            "R(u_ap) = O(ε(|s| + 1)^{−1/2})",
            &|r| r.residual.band,
            BOUNDED_RATIO,
        ));
        checks.push(bounded(
            "residual_interior",
            "R(u_ap) = O(ε^{4/3})",
            &|r| r.residual.interior,
            BOUNDED_RATIO,
        ));
        checks.push(bounded(
            "glue",
            "|ũ_out − u_in| ≤ Cε|s|^{3/2}",
            &|r| r.band.glue,
            BOUNDED_RATIO,
        ));
        checks.push(bounded(
            "outer_closeness",
            "|ũ_out − √a_ε| ≤ Cε^{1/3}|s|^{−5/2}",
            &|r| r.band.outer,
            BOUNDED_RATIO,
        ));
        if records.iter().all(|r| r.monotonicity.is_some()) {
            let worst = records
                .iter()
                .map(|r| r.monotonicity.unwrap().max_weighted)
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::new(
                "monotone",
                "(η_ε)_t ≤ −c(|t| + ε^{2/3})^{−1/2}",
                worst,
                Below,
                0.0,
                "largest weighted derivative",
            ));
            checks.push(bounded(
                "monotone_constant",
                "(η_ε)_t ≤ −c(|t| + ε^{2/3})^{−1/2}",
                &|r| r.monotonicity.unwrap().c,
                2.0,
            ));
        }
        if records.iter().all(|r| r.f.is_some()) {
            checks.push(bounded(
                "f_sup",
                "‖f_ε − f₀‖_∞ ≤ Cε^{1/2}",
                &|r| r.f.unwrap().weighted,
                2.0,
            ));
            checks.push(Check::new(
                "f_boundary",
                "f_ε(R) ≈ ε^{2/3}Rβ^{−1}V(0)^{−2}∫_0^∞V²",
                last.f.unwrap().boundary_rel_err,
                AtMost,
                0.15,
                "relative error at the smallest ε",
            ));
        }
    }
    checks
}

/// Discretisation choices for [`run_verification`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub radial: RadialOptions,
    pub flow: Flow2dOptions,
    pub n_theta: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            radial: RadialOptions::default(),
            flow: Flow2dOptions::default(),
            n_theta: 256,
        }
    }
}

/// Solves the ladder (radial solver for radial traps, gradient flow otherwise).
pub fn solve_ladder(trap: &Trap, eps: &[f64], opts: &VerifyOptions) -> Result<Vec<GroundState>> {
    if trap.is_radial() {
        solve_radial_ladder(trap, eps, opts.radial)
    } else {
        eps.iter().map(|&e| solve_2d(trap, e, opts.flow)).collect()
    }
}

/// Report from already converged states.
pub fn report_from_states(
    trap: &Trap,
    states: &[GroundState],
    n_theta: usize,
) -> Result<VerificationReport> {
    let lambda0 = compute_lambda0(trap, 1e-12)?;
    let tf0 = boundary_and_beta(trap, lambda0, n_theta)?;
    let hm = hastings_mcleod();
    let records = states
        .par_iter()
        .map(|s| analyse_state(s, &tf0, hm, n_theta))
        .collect::<Result<Vec<_>>>()?;
    let bundle = predict(&tf0, hm, states.first().map_or(0.01, |s| s.epsilon))?;
    let profile_min = hm.linearization()?.potential_min;
    let checks = assemble_checks(&records, bundle.c_log, profile_min);
    let (solver, grid_n) = match states.first().map(|s| &s.geometry) {
        Some(Geometry::Grid2d { n, .. }) => ("flow2d", *n),
        Some(Geometry::Radial { r, .. }) => ("radial", r.len() - 1),
        None => ("none", 0),
    };
    Ok(VerificationReport {
        environment: Environment {
            trap: trap.clone(),
            eps: states.iter().map(|s| s.epsilon).collect(),
            solver: solver.into(),
            grid_n,
            lambda0,
            c_minus2: bundle.c_minus2,
            c_log: bundle.c_log,
        },
        records,
        checks,
    })
}

/// Solves the ladder and assembles the report.
pub fn run_verification(
    trap: &Trap,
    eps: &[f64],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let states = solve_ladder(trap, eps, opts)?;
    report_from_states(trap, &states, opts.n_theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s: Vec<(f64, f64)> = [0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|&e| (e, 3.0 * e * e))
            .collect();
        let fit = rate_fit(&s, None).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-10);
    }

    #[test]
    fn scale_invariance() {
        let s: Vec<(f64, f64)> = [0.1, 0.05, 0.02]
            .iter()
            .map(|&e: &f64| (e, e.powf(1.7) * (1.0 + e)))
            .collect();
        let t: Vec<(f64, f64)> = s.iter().map(|&(e, v)| (e, 7.5 * v)).collect();
        let (a, b) = (
            rate_fit(&s, Some(1.0)).unwrap(),
            rate_fit(&t, Some(1.0)).unwrap(),
        );
        assert!((a.exponent - b.exponent).abs() < 1e-12);
        assert!((b.prefactor / a.prefactor - 7.5).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(rate_fit(&[(0.1, 1.0), (0.05, 0.5)], None).is_err());
        assert!(rate_fit(&[(0.1, 1.0), (0.05, 0.0), (0.01, 0.1)], None).is_err());
        assert!(rate_fit(&[(0.05, 1.0), (0.1, 0.5), (0.01, 0.1)], None).is_err());
    }
}
