mod common;

use std::f64::consts::PI;
use tf_corner::gpsolve::{solve_2d, solve_radial, Flow2dOptions, GroundState, RadialOptions};
use tf_corner::trap::{boundary_and_beta, compute_lambda0, TfData, Trap};

fn harmonic() -> (Trap, TfData) {
    let trap = Trap::harmonic(1.0).unwrap();
    let l = compute_lambda0(&trap, 1e-12).unwrap();
    let tf = boundary_and_beta(&trap, l, 64).unwrap();
    (trap, tf)
}

fn radial(eps: f64) -> GroundState {
    solve_radial(&harmonic().0, eps, RadialOptions::default()).unwrap()
}

#[test]
fn radial_state_is_normalised_positive_and_bounded() {
    for eps in [0.1, 0.05, 0.02] {
        let s = radial(eps);
        assert!((s.mass - 1.0).abs() <= 1e-9);
        assert!((s.integrate(|_, e| e * e) - 1.0).abs() <= 1e-9);
        assert!(s.eta.iter().all(|&e| e > 0.0));
        assert!(s.residual <= 1e-9);
        let sup = s.eta.iter().cloned().fold(0.0, f64::max);
        assert!(sup <= s.max_principle_bound() + 1e-6);
    }
}

#[test]
fn lagrange_multiplier_exceeds_lambda0_and_decreases() {
    let (_, tf) = harmonic();
    let lambdas: Vec<f64> = [0.1, 0.05, 0.02, 0.01]
        .iter()
        .map(|&e| radial(e).lambda_eps)
        .collect();
    assert!(lambdas.iter().all(|&l| l > tf.lambda));
    assert!(lambdas.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn energy_identities() {
    let (_, tf) = harmonic();
    for eps in [0.05, 0.02] {
        let s = radial(eps);
        let e = s.energy(&tf);
        assert!((e.total - (e.g1 + e.constant)).abs() <= 1e-9 * e.total.abs());
        assert!(
            (e.total - e.tested).abs() <= 1e-6 * e.total.abs(),
            "{} vs {}",
            e.total,
            e.tested
        );
    }
    let ratios: Vec<f64> = [0.05, 0.02, 0.01]
        .iter()
        .map(|&eps| radial(eps).energy(&tf).g1 / -f64::ln(eps))
        .collect();
    assert!(common::spread(&ratios) <= 2.0, "g1/|ln ε| = {ratios:?}");
}

#[test]
fn grid_refinement_moves_lambda_little() {
    let trap = harmonic().0;
    let a = solve_radial(
        &trap,
        0.05,
        RadialOptions {
            n: 20_000,
            r_max: None,
        },
    )
    .unwrap();
    let b = solve_radial(
        &trap,
        0.05,
        RadialOptions {
            n: 40_000,
            r_max: None,
        },
    )
    .unwrap();
    assert!((a.lambda_eps - b.lambda_eps).abs() <= 1e-7);
}

#[test]
fn converges_uniformly_to_tf_density() {
    let (_, tf) = harmonic();
    let sups: Vec<f64> = [0.1, 0.05, 0.02]
        .iter()
        .map(|&eps| {
            let s = radial(eps);
            let r = s.radial_nodes().unwrap().to_vec();
            r.iter()
                .zip(&s.eta)
                .map(|(&ri, &e)| (e - tf.tf_density([ri, 0.0])).abs())
                .fold(0.0, f64::max)
                / eps.cbrt()
        })
        .collect();
    assert!(common::spread(&sups) <= 2.0, "sup/ε^(1/3) = {sups:?}");
}

#[test]
fn exterior_decay_rate_is_positive() {
    let (_, tf) = harmonic();
    let radius = tf.radius().unwrap();
    for eps in [0.05, 0.02] {
        let s = radial(eps);
        let e23 = f64::powf(eps, 2.0 / 3.0);
        let (xs, ys): (Vec<f64>, Vec<f64>) = s
            .radial_nodes()
            .unwrap()
            .iter()
            .zip(&s.eta)
            .filter(|(&r, _)| r >= radius + 3.0 * e23 && r <= radius + 10.0 * e23)
            .map(|(&r, &e)| ((r - radius) / e23, e.ln()))
            .unzip();
        let (slope, _, _) = common::least_squares(&xs, &ys);
        assert!(slope < 0.0, "ε = {eps}: slope {slope}");
    }
}

#[test]
fn auxiliary_function_values() {
    let (_, tf) = harmonic();
    let radius = tf.radius().unwrap();
    let mut scaled = Vec::new();
    for eps in [0.05, 0.02, 0.01] {
        let s = radial(eps);
        let xf = s.xi_f().unwrap();
        assert!((xf.xi[0] - 1.0 / (2.0 * PI)).abs() <= 1e-8);
        assert_eq!(*xf.xi.last().unwrap(), 0.0);
        assert!(xf.xi.windows(2).all(|w| w[1] <= w[0]));
        let e23 = f64::powf(eps, 2.0 / 3.0);
        let worst =
            xf.r.iter()
                .zip(&xf.f)
                .filter(|(&r, _)| r >= radius + 5.0 * e23)
                .filter_map(|(_, f)| *f)
                .fold(0.0, f64::max);
        scaled.push(worst / e23);
    }
    assert!(common::spread(&scaled) <= 3.0, "f/ε^(2/3) = {scaled:?}");
}

#[test]
fn flow_state_is_symmetric_and_bounded() {
    let trap = Trap::harmonic(0.8).unwrap();
    let s = solve_2d(&trap, 0.1, Flow2dOptions::default()).unwrap();
    assert!((s.mass - 1.0).abs() <= 1e-9);
    assert!(s.eta.iter().all(|&e| e >= 0.0));
    let n = (s.eta.len() as f64).sqrt() as usize;
    let at = |i: usize, j: usize| s.eta[j * n + i];
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            asym = asym
                .max((at(i, j) - at(n - 1 - i, j)).abs())
                .max((at(i, j) - at(i, n - 1 - j)).abs());
        }
    }
    assert!(asym <= 1e-8, "asymmetry {asym}");
    let bound = s.max_principle_bound();
    assert!(s.eta.iter().all(|&e| e <= bound + 1e-6));
}
