mod common;

use common::shooting_oracle;
use tf_corner::painleve::{
    hastings_mcleod, solve_full_line, solve_half_line_dirichlet, solve_half_line_neumann,
    ProfileProblem,
};
use tf_corner::Error;

#[test]
fn collocation_matches_shooting_oracle() {
    let oracle = shooting_oracle();
    let hm = hastings_mcleod();
    let (v0, vx0) = hm.eval(0.0);
    assert!(
        (v0 - oracle.v0).abs() <= 1e-7,
        "V(0) = {v0}, oracle {}",
        oracle.v0
    );
    assert!(
        (vx0 - oracle.vx0).abs() <= 1e-6,
        "V'(0) = {vx0}, oracle {}",
        oracle.vx0
    );
    // the decaying solution carries γ = √2 in front of Ai
    assert!(
        (oracle.gamma - 2f64.sqrt()).abs() < 1e-6,
        "γ = {}",
        oracle.gamma
    );
}

#[test]
fn integral_identity_holds_and_detects_perturbation() {
    let hm = hastings_mcleod();
    assert!(hm.identity_defect().unwrap().abs() <= 1e-6);
    let wide = solve_full_line(2.0, -60.0, 20.0, 8000).unwrap();
    assert!((wide.identity_defect().unwrap() - hm.identity_defect().unwrap()).abs() <= 1e-6);

    let mut bent = hm.clone();
    for ((x, v), d) in bent.x.iter().zip(bent.v.iter_mut()).zip(bent.vx.iter_mut()) {
        *v += 0.01 * (-x * x).exp();
        *d += -0.02 * x * (-x * x).exp();
    }
    assert!(bent.identity_defect().unwrap().abs() >= 1e-3);
}

#[test]
fn left_tail_coefficient_and_slope() {
    let hm = hastings_mcleod();
    let x: f64 = 20.0;
    let alpha = (hm.value(-x) - x.sqrt()) * x.powf(2.5);
    assert!((alpha / -0.125 - 1.0).abs() <= 0.05, "α = {alpha}");
    let (_, vx) = hm.eval(-x);
    assert!((vx + 0.5 / x.sqrt()).abs() <= 1e-4);

    // −C|x|^{−5/2} < V − √(−x) < 0 on x ≤ −5 with a stable C
    let c =
        hm.x.iter()
            .zip(&hm.v)
            .filter(|(&x, _)| x <= -5.0)
            .map(|(&x, &v)| {
                let gap = v - (-x).sqrt();
                assert!(gap < 0.0, "V above √(−x) at {x}");
                -gap * (-x).powf(2.5)
            })
            .fold(0.0, f64::max);
    assert!(c < 0.2, "C = {c}");
}

#[test]
fn profile_is_decreasing_and_decays() {
    let hm = hastings_mcleod();
    let n = hm.len();
    assert!(hm.vx[1..n - 1].iter().all(|&d| d < 0.0));
    assert!(hm.v.iter().all(|&v| v > 0.0));
    assert!(hm.eval(5.0).1.abs() <= 1e-3);
}

#[test]
fn derivative_energy_constant_converges() {
    let hm = hastings_mcleod();
    let (a, b) = (
        hm.vx_log_constant(10.0).unwrap(),
        hm.vx_log_constant(20.0).unwrap(),
    );
    assert!((a - b).abs() <= 2e-2, "{a} vs {b}");
    assert!(matches!(
        hm.vx_log_constant(100.0),
        Err(Error::Truncation(_))
    ));
}

#[test]
fn connection_ratio_plateau() {
    let hm = hastings_mcleod();
    let (r4, r6) = (hm.ratio_at(4.0).unwrap(), hm.ratio_at(6.0).unwrap());
    assert!((r4 - r6).abs() <= 1e-3, "{r4} vs {r6}");
    let c = hm.connection_ratio().unwrap();
    assert!(!c.flagged);
    assert!((c.value - 2f64.sqrt()).abs() < 1e-3);
}

#[test]
fn linearization_is_positive_and_grid_stable() {
    let hm = hastings_mcleod();
    let lin = hm.linearization().unwrap();
    assert!(lin.potential_min > 0.0);
    assert!(lin.mu1 > 0.0);
    assert!(lin.tails_increasing);
    assert!((lin.mu1 - lin.mu1_wide).abs() < 1e-4);
    let fine = solve_full_line(2.0, -30.0, 15.0, 8000)
        .unwrap()
        .linearization()
        .unwrap();
    assert!((fine.mu1 - lin.mu1).abs() <= 1e-4);
    let sign = lin.psi1[lin.psi1.len() / 2].signum();
    assert!(lin.psi1[1..lin.psi1.len() - 1]
        .iter()
        .all(|&p| p * sign >= 0.0));
}

#[test]
fn grid_doubling_moves_v0_very_little() {
    let coarse = hastings_mcleod().value(0.0);
    let fine = solve_full_line(2.0, -30.0, 15.0, 8000).unwrap().value(0.0);
    assert!((coarse - fine).abs() <= 1e-8);
}

#[test]
fn half_line_dirichlet_profile() {
    let u = solve_half_line_dirichlet(2.0, 30.0, 3000).unwrap();
    assert_eq!(u.v[0], 0.0);
    assert!(u.vx[0] > 0.0);
    let x: f64 = 15.0;
    assert!((u.value(x) - x.sqrt()).abs() * x.powf(2.5) <= 1.0);
    let lin = u.linearization().unwrap();
    assert!(lin.mu1 > 0.0);
    assert!(lin.mu_nearest_zero.abs() >= 1e-3);

    // zero-extended mirrored half-line profile lies below the full-line profile
    let hm = hastings_mcleod();
    for k in 0..=200 {
        let x = -20.0 * k as f64 / 200.0;
        assert!(
            u.value(-x) <= hm.value(x) + 1e-9,
            "lower solution fails at {x}"
        );
    }
}

#[test]
fn half_line_neumann_profile_and_guess_invariance() {
    let u = solve_half_line_neumann(2.0, 30.0, 3000).unwrap();
    assert!(u.vx[0].abs() < 1e-8);
    assert!((u.value(15.0) - 15f64.sqrt()).abs() <= 1e-2);
    let problem = ProfileProblem::half_line_neumann(2.0, 30.0, 3000).unwrap();
    let bumped = problem
        .solve_with_guess(|x| 1.1 * problem.default_guess(x))
        .unwrap();
    let sup =
        u.v.iter()
            .zip(&bumped.v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    assert!(sup <= 1e-8, "sup = {sup}");
}

#[test]
fn cubic_power_profile_converges() {
    let u = solve_full_line(3.0, -30.0, 15.0, 4000).unwrap();
    assert!(u.residual_sup < 1e-8);
    let x: f64 = 20.0;
    assert!((u.value(-x) / x.powf(1.0 / 3.0) - 1.0).abs() < 1e-2);
    assert!(matches!(u.identity_defect(), Err(Error::Domain(_))));
}

#[test]
fn short_domains_are_rejected() {
    assert!(matches!(
        solve_full_line(2.0, -10.0, 15.0, 4000),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        solve_full_line(0.5, -30.0, 15.0, 4000),
        Err(Error::Domain(_))
    ));
}
