use proptest::prelude::*;
use tf_corner::io::Table;
use tf_corner::verify::rate_fit;

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::array::uniform3(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO), 1..20)) {
        let table = Table::with_rows(&["a", "b", "c"], rows.iter());
        let back = Table::parse(&table.to_csv()).unwrap();
        for (x, y) in table.rows.iter().flatten().zip(back.rows.iter().flatten()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn rate_fit_is_scale_invariant(q in 0.5f64..3.0, c in 1e-3f64..1e3, k in 0.0f64..2.0, jitter in prop::array::uniform4(-0.1f64..0.1)) {
        let eps: [f64; 4] = [0.1, 0.05, 0.02, 0.01];
        let samples: Vec<(f64, f64)> = eps.iter().zip(jitter).map(|(&e, j)| (e, e.powf(q) * (1.0 + j))).collect();
        let scaled: Vec<(f64, f64)> = samples.iter().map(|&(e, v)| (e, c * v)).collect();
        let (a, b) = (rate_fit(&samples, Some(k)).unwrap(), rate_fit(&scaled, Some(k)).unwrap());
        prop_assert!((a.exponent - b.exponent).abs() <= 1e-9);
        prop_assert!((b.prefactor / a.prefactor / c - 1.0).abs() <= 1e-9);
        prop_assert!((a.r_squared - b.r_squared).abs() <= 1e-9);
    }
}
