mod common;

use common::{harmonic_c_log, harmonic_c_minus2};
use tf_corner::layers::{build_u_ap, min_delta, predict, reach, LayerParams};
use tf_corner::painleve::{hastings_mcleod, solve_full_line};
use tf_corner::trap::{boundary_and_beta, compute_lambda0, TfData, Trap};
use tf_corner::Error;

fn tf_for(aniso: f64, n_theta: usize) -> TfData {
    let trap = Trap::harmonic(aniso).unwrap();
    let l = compute_lambda0(&trap, 1e-12).unwrap();
    boundary_and_beta(&trap, l, n_theta).unwrap()
}

#[test]
fn value_on_the_boundary_is_the_inner_profile() {
    let tf = tf_for(1.0, 64);
    let hm = hastings_mcleod();
    for eps in [0.05, 0.01] {
        let u = build_u_ap(&tf, hm, eps, LayerParams::default_for(&tf, eps)).unwrap();
        let radius = tf.lambda.sqrt();
        let beta = (2.0 * radius).cbrt();
        let expected = f64::cbrt(eps) * beta * hm.value(0.0);
        assert!((u.value([radius, 0.0]) - expected).abs() <= 1e-10);
    }
}

#[test]
fn plateaus_inside_and_outside() {
    let tf = tf_for(1.0, 64);
    let hm = hastings_mcleod();
    let eps = 0.001;
    let params = LayerParams::default_for(&tf, eps);
    let u = build_u_ap(&tf, hm, eps, params).unwrap();
    let radius = tf.radius().unwrap();
    let deep = [radius - 10.0 * params.delta, 0.0];
    assert_eq!(u.value(deep), tf.a(deep).sqrt());
    assert_eq!(u.value([0.0, 0.0]), tf.lambda.sqrt());
    let far = [radius + 22.0 * params.delta, 0.0];
    assert_eq!(u.value(far), 0.0);
    assert_eq!(u.residual(far).unwrap(), 0.0);
}

#[test]
fn fermi_coordinates_round_trip() {
    let hm = hastings_mcleod();
    for (aniso, n_theta) in [(1.0, 64), (0.8, 512)] {
        let tf = tf_for(aniso, n_theta);
        let eps = 0.02;
        let u = build_u_ap(&tf, hm, eps, LayerParams::default_for(&tf, eps)).unwrap();
        let d = u.params.delta;
        for k in 0..16 {
            let theta = tf.ell0 * (k as f64 + 0.3) / 16.0;
            for t in [-d, -0.3 * d, 0.0, 0.4 * d] {
                let f = u.fermi(u.fermi_inverse(t, theta));
                assert!((f.t - t).abs() <= 1e-6, "Λ = {aniso}: t {t} → {}", f.t);
                let dtheta = (f.theta - theta).rem_euclid(tf.ell0);
                assert!(
                    dtheta.min(tf.ell0 - dtheta) <= 1e-4,
                    "Λ = {aniso}: θ {theta} → {}",
                    f.theta
                );
            }
        }
    }
}

#[test]
fn energy_coefficients_match_closed_forms() {
    let tf = tf_for(1.0, 64);
    let b = predict(&tf, hastings_mcleod(), 0.01).unwrap();
    assert!(
        (b.c_minus2 - harmonic_c_minus2()).abs() <= 1e-8,
        "c₋₂ = {}",
        b.c_minus2
    );
    assert!(
        (b.c_log - harmonic_c_log()).abs() <= 1e-8,
        "c_log = {}",
        b.c_log
    );
}

#[test]
fn auxiliary_limit_matches_closed_form() {
    // for W = r²: f₀(r) = (λ₀ − r²)/4
    let tf = tf_for(1.0, 64);
    let b = predict(&tf, hastings_mcleod(), 0.01).unwrap();
    let radius = tf.radius().unwrap();
    for k in 0..20 {
        let r = radius * k as f64 / 20.0;
        assert!((b.f0(r).unwrap() - (tf.lambda - r * r) / 4.0).abs() <= 1e-12);
    }
    assert_eq!(b.f0(radius + 0.1), Some(0.0));

    let beta = (2.0 * radius).cbrt();
    let v0 = hastings_mcleod().value(0.0);
    let expected = f64::powf(0.01, 2.0 / 3.0) * radius / beta * b.v2_positive / (v0 * v0);
    assert!((b.f_boundary.unwrap() - expected).abs() <= 1e-14);
}

#[test]
fn positive_mass_matches_direct_quadrature() {
    let hm = hastings_mcleod();
    let wide = solve_full_line(2.0, -30.0, 20.0, 6000).unwrap();
    // plain trapezoid on the wider grid; the tail beyond 20 is below 1e-25
    let direct: f64 = wide
        .x
        .windows(2)
        .zip(wide.v.windows(2))
        .filter(|(x, _)| x[0] >= 0.0)
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] * v[0] + v[1] * v[1]))
        .sum();
    assert!((hm.positive_mass().unwrap() - direct).abs() <= 1e-5);
}

#[test]
fn cutoff_constraints_are_enforced() {
    let tf = tf_for(1.0, 64);
    let hm = hastings_mcleod();
    let eps = 0.02;
    let need = min_delta(&tf, eps, 1.0);
    let small = LayerParams {
        delta: 0.5 * need,
        l: 1.0,
    };
    assert!(matches!(
        build_u_ap(&tf, hm, eps, small),
        Err(Error::Parameter(_))
    ));
    let wide = LayerParams {
        delta: 2.0 * reach(&tf),
        l: 1.0,
    };
    assert!(matches!(
        build_u_ap(&tf, hm, eps, wide),
        Err(Error::Parameter(_))
    ));
    assert!(matches!(
        build_u_ap(&tf, hm, 1.5, LayerParams::default_for(&tf, eps)),
        Err(Error::Domain(_))
    ));

    let cubic = solve_full_line(3.0, -30.0, 15.0, 4000).unwrap();
    assert!(matches!(
        build_u_ap(&tf, &cubic, eps, LayerParams::default_for(&tf, eps)),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn interior_residual_scales_like_eps_four_thirds() {
    let tf = tf_for(1.0, 64);
    let hm = hastings_mcleod();
    let scaled: Vec<f64> = [0.05, 0.02, 0.01]
        .iter()
        .map(|&eps| {
            let u = build_u_ap(&tf, hm, eps, LayerParams::default_for(&tf, eps)).unwrap();
            let y = [0.3 * tf.radius().unwrap(), 0.1];
            u.scaled_residual(y).unwrap().abs() / f64::powf(eps, 4.0 / 3.0)
        })
        .collect();
    assert!(scaled.iter().all(|s| s.is_finite() && *s > 0.0));
    assert!(common::spread(&scaled) <= 3.0, "{scaled:?}");
}

#[test]
fn normal_section_columns() {
    let tf = tf_for(1.0, 64);
    let eps = 0.02;
    let u = build_u_ap(
        &tf,
        hastings_mcleod(),
        eps,
        LayerParams::default_for(&tf, eps),
    )
    .unwrap();
    let ts: Vec<f64> = (0..=40).map(|k| -0.1 + 0.005 * k as f64).collect();
    let rows = u.normal_section(0.0, &ts);
    assert_eq!(rows.len(), ts.len());
    for (row, &t) in rows.iter().zip(&ts) {
        assert_eq!(row[0], t);
        assert!(row[2] >= 0.0);
    }
    let glue = u.band_diagnostics(200);
    assert!(glue.glue.is_finite() && glue.outer.is_finite());
    assert!(glue.linearization_min > 0.0);
}
