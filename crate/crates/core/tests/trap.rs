mod common;

use common::harmonic_lambda0;
use std::f64::consts::PI;
use tf_corner::trap::{boundary_and_beta, compute_lambda0, Boundary, Trap};

#[test]
fn harmonic_lambda_matches_closed_form() {
    for aniso in [1.0, 0.8, 0.5] {
        let l = compute_lambda0(&Trap::harmonic(aniso).unwrap(), 1e-12).unwrap();
        assert!(
            (l - harmonic_lambda0(aniso)).abs() <= 1e-8,
            "Λ = {aniso}: {l}"
        );
    }
}

#[test]
fn length_scaling_is_consistent() {
    for s in [0.5, 2.0] {
        let trap = Trap::harmonic_scaled(1.0, s).unwrap();
        let l = compute_lambda0(&trap, 1e-12).unwrap();
        assert!((l - s * harmonic_lambda0(1.0)).abs() <= 1e-8);
        let tf = boundary_and_beta(&trap, l, 64).unwrap();
        assert!((tf.radius().unwrap() - l.sqrt() / s).abs() <= 1e-8);
    }
}

#[test]
fn flat_bump_and_quadratic_table_agree_with_harmonic() {
    let exact = harmonic_lambda0(1.0);
    let bump = compute_lambda0(&Trap::gaussian_bump(0.0, 2.0).unwrap(), 1e-12).unwrap();
    assert!((bump - exact).abs() <= 1e-8);
    let r: Vec<f64> = (0..80).map(|k| k as f64 * 0.04).collect();
    let w: Vec<f64> = r.iter().map(|x| x * x).collect();
    let table = compute_lambda0(&Trap::radial_table(r, w).unwrap(), 1e-12).unwrap();
    assert!((table - exact).abs() <= 1e-6);
}

#[test]
fn radial_boundary_data() {
    let trap = Trap::harmonic(1.0).unwrap();
    let l = compute_lambda0(&trap, 1e-12).unwrap();
    let tf = boundary_and_beta(&trap, l, 128).unwrap();
    let radius = l.sqrt();
    assert!(matches!(tf.boundary, Boundary::Circle { .. }));
    assert!((tf.radius().unwrap() - radius).abs() <= 1e-10);
    assert!((tf.beta_radial().unwrap().powi(3) - 2.0 * radius).abs() <= 1e-10);
    assert!(tf
        .curvature
        .iter()
        .all(|k| (k - 1.0 / radius).abs() <= 1e-10));
    assert!((tf.ell0 - 2.0 * PI * radius).abs() <= 1e-10);
    assert!((tf.tf_density([0.0, 0.0]) - l.sqrt()).abs() <= 1e-12);
    assert!((tf.tf_density([0.0, 0.0]) - (2.0 / PI).powf(0.25)).abs() <= 1e-8);
    assert_eq!(tf.tf_density([radius + 0.1, 0.0]), 0.0);

    let coarse = boundary_and_beta(&trap, l, 16).unwrap();
    assert!((coarse.beta_radial().unwrap() - tf.beta_radial().unwrap()).abs() <= 1e-8);
    assert!((coarse.radius().unwrap() - tf.radius().unwrap()).abs() <= 1e-8);
}

#[test]
fn anisotropic_boundary_is_the_ellipse() {
    let aniso: f64 = 0.8;
    let trap = Trap::harmonic(aniso).unwrap();
    let l = compute_lambda0(&trap, 1e-12).unwrap();
    let tf = boundary_and_beta(&trap, l, 256).unwrap();
    for (p, b) in tf.points.iter().zip(&tf.beta) {
        let on_curve = p[0] * p[0] + aniso * aniso * p[1] * p[1];
        assert!(
            (on_curve - l).abs() <= 1e-6,
            "off the level set: {on_curve}"
        );
        let exact = 2.0 * (p[0] * p[0] + aniso.powi(4) * p[1] * p[1]).sqrt();
        assert!(
            (b.powi(3) / exact - 1.0).abs() <= 1e-3,
            "β³ = {}, exact {exact}",
            b.powi(3)
        );
    }
    // Ramanujan's perimeter formula for semi-axes a, b
    let (a, b) = (l.sqrt(), l.sqrt() / aniso);
    let h = ((a - b) / (a + b)).powi(2);
    let perimeter = PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
    assert!((tf.ell0 / perimeter - 1.0).abs() <= 1e-4);
}

#[test]
fn tf_density_has_unit_mass_and_mass_grows() {
    let trap = Trap::gaussian_bump(0.5, 2.0).unwrap();
    let l = compute_lambda0(&trap, 1e-12).unwrap();
    assert!((trap.mass(l).unwrap() - 1.0).abs() <= 1e-6);
    let ms: Vec<f64> = (0..10)
        .map(|k| trap.mass(l * (0.8 + 0.05 * k as f64)).unwrap())
        .collect();
    assert!(ms.windows(2).all(|w| w[1] > w[0]));

    let harmonic = Trap::harmonic(1.0).unwrap();
    let lh = compute_lambda0(&harmonic, 1e-12).unwrap();
    let tf = boundary_and_beta(&harmonic, lh, 64).unwrap();
    // midpoint rule on a polar grid
    let (nr, radius) = (4000, tf.radius().unwrap());
    let dr = radius / nr as f64;
    let mass: f64 = (0..nr)
        .map(|i| {
            let r = (i as f64 + 0.5) * dr;
            2.0 * PI * r * dr * tf.tf_density([r, 0.0]).powi(2)
        })
        .sum();
    assert!((mass - 1.0).abs() <= 1e-6);
}

#[test]
fn invalid_traps_are_rejected() {
    assert!(Trap::harmonic(0.0).is_err());
    assert!(Trap::harmonic(1.5).is_err());
    assert!(Trap::gaussian_bump(-1.0, 1.0).is_err());
    assert!(Trap::radial_table(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
}

#[test]
fn trap_round_trips_through_json() {
    let trap = Trap::gaussian_bump(0.5, 2.0).unwrap();
    let text = serde_json::to_string(&trap).unwrap();
    let back: Trap = serde_json::from_str(&text).unwrap();
    assert_eq!(trap, back);
    assert!(
        serde_json::from_str::<Trap>(r#"{"kind":"harmonic","aniso":2.0,"scale":1.0}"#).is_err()
    );
}
