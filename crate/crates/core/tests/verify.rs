use tf_corner::gpsolve::{solve_radial, Geometry, RadialOptions};
use tf_corner::io::{read_state, write_state};
use tf_corner::trap::Trap;
use tf_corner::verify::{
    holder_and_gradient, rate_fit, report_from_states, run_verification, solve_ladder,
    VerifyOptions, HOLDER_RADIUS, LAMBDA_ANCHOR,
};
use tf_corner::Error;

#[test]
fn radial_holder_equals_brute_force() {
    let trap = Trap::harmonic(1.0).unwrap();
    let s = solve_radial(
        &trap,
        0.05,
        RadialOptions {
            n: 3000,
            r_max: None,
        },
    )
    .unwrap();
    let Geometry::Radial { r, .. } = &s.geometry else {
        unreachable!()
    };
    let mut eta = s.eta.clone();
    eta.push(0.0);
    for alpha in [0.5, 0.6] {
        let mut brute = 0.0f64;
        for i in 0..eta.len() {
            for j in i + 1..eta.len() {
                if r[j] - r[i] > HOLDER_RADIUS {
                    break;
                }
                brute = brute.max((eta[j] - eta[i]).abs() / (r[j] - r[i]).powf(alpha));
            }
        }
        let fast = holder_and_gradient(&s, alpha).unwrap().seminorm;
        assert_eq!(fast, brute, "α = {alpha}");
    }
    assert!(matches!(
        holder_and_gradient(&s, 1.5),
        Err(Error::Domain(_))
    ));
}

#[test]
fn rate_fit_recovers_log_corrected_power() {
    let samples: Vec<(f64, f64)> = [0.05, 0.03, 0.02, 0.01]
        .iter()
        .map(|&e: &f64| (e, 0.7 * -e.ln() * e * e))
        .collect();
    let fit = rate_fit(&samples, Some(1.0)).unwrap();
    assert!((fit.exponent - 2.0).abs() < 1e-12);
    assert!((fit.prefactor - 0.7).abs() < 1e-10);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert!(rate_fit(&samples[..2], None).is_err());
    let unsorted = [samples[1], samples[0], samples[2]];
    assert!(rate_fit(&unsorted, None).is_err());
}

#[test]
fn report_passes_and_regenerates_from_persisted_states() {
    let trap = Trap::harmonic(1.0).unwrap();
    let eps = [0.05, 0.03, 0.02, 0.01];
    let opts = VerifyOptions::default();
    let report = run_verification(&trap, &eps, &opts).unwrap();
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    assert!(failed.is_empty(), "failed checks: {failed:?}");
    let lambda = report.check("lambda_rate").unwrap();
    assert_eq!(lambda.anchor, LAMBDA_ANCHOR);
    assert!(report.to_json().unwrap().contains(LAMBDA_ANCHOR));
    assert!(report.to_csv().lines().count() == report.checks.len() + 1);

    let monotone = report
        .records
        .iter()
        .map(|r| r.monotonicity.unwrap())
        .collect::<Vec<_>>();
    assert!(monotone
        .iter()
        .all(|m| m.max_weighted < 0.0 && m.eta_r_origin == 0.0));

    let dir = tempfile::tempdir().unwrap();
    let states = solve_ladder(&trap, &eps, &opts).unwrap();
    for (k, s) in states.iter().enumerate() {
        write_state(dir.path(), &format!("s{k}"), s).unwrap();
    }
    let restored: Vec<_> = (0..eps.len())
        .map(|k| read_state(dir.path(), &format!("s{k}")).unwrap())
        .collect();
    for (a, b) in states.iter().zip(&restored) {
        assert_eq!(a.eta, b.eta);
        assert_eq!(a.lambda_eps, b.lambda_eps);
    }
    let again = report_from_states(&trap, &restored, opts.n_theta).unwrap();
    assert_eq!(again.to_json().unwrap(), report.to_json().unwrap());
}
