use model_compiler::{rho_checked, rho_wrapping};
use proptest::prelude::*;

#[test]
fn rho_known_values() {
    assert_eq!(rho_wrapping(0.1, 24), 1_677_721);
    assert_eq!(rho_wrapping(0.3, 24), 5_033_165);
    assert_eq!(rho_wrapping(400.1, 24), 6_712_564_224);
    assert_eq!(rho_wrapping(200.1, 24), 3_357_121_024);
    for s in 0..64 {
        assert_eq!(rho_wrapping(0.0, s), 0);
        assert_eq!(rho_wrapping(-0.0, s), 0);
    }
}

#[test]
fn rho_floors_negatives() {
    assert_eq!(rho_wrapping(-1.5, 0), -2);
    assert_eq!(rho_wrapping(-1.5, 12), -6144);
    assert_eq!(rho_wrapping(-0.1, 24), -1_677_722);
}

#[test]
fn rho_checked_reports_overflow() {
    assert_eq!(rho_checked(400.1, 24).unwrap(), 6_712_564_224);
    assert!(rho_checked(400.1, 60).is_err());
    assert!(rho_checked(1e30, 10).is_err());
    assert!(rho_checked(-1e30, 10).is_err());
    // Wrapping variant still returns something reduced mod 2^64.
    let _ = rho_wrapping(400.1, 60);
    let _ = rho_wrapping(3.4e38, 63);
    let _ = rho_wrapping(-3.4e38, 63);
}

#[test]
fn rho_matches_f64_floor_oracle_on_moderate_range() {
    // For values where f64 floor(r * 2^s) is exact, the integer decomposition
    // must agree with it.
    let mut x = -100.0f32;
    while x < 100.0 {
        for s in [0u32, 4, 12, 24] {
            let oracle = (x as f64 * (2f64).powi(s as i32)).floor();
            assert_eq!(rho_wrapping(x, s) as f64, oracle, "x={x} s={s}");
        }
        x += 0.317;
    }
}

proptest! {
    #[test]
    fn prop_representation_error_below_ulp(r in -1.0e6f32..1.0e6, s in 0u32..40) {
        prop_assume!((r as f64 * (2f64).powi(s as i32)).abs() < (2f64).powi(62));
        let q = rho_checked(r, s).unwrap();
        let err = (r as f64 - q as f64 / (2f64).powi(s as i32)).abs();
        prop_assert!(err < (2f64).powi(-(s as i32)), "r={r} s={s} q={q} err={err}");
    }

    #[test]
    fn prop_checked_and_wrapping_agree_in_range(r in -1.0e4f32..1.0e4, s in 0u32..32) {
        if let Ok(q) = rho_checked(r, s) {
            prop_assert_eq!(q, rho_wrapping(r, s));
        }
    }

    #[test]
    fn prop_rho_monotone(a in -1.0e4f32..1.0e4, b in -1.0e4f32..1.0e4, s in 0u32..30) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(rho_checked(lo, s).unwrap() <= rho_checked(hi, s).unwrap());
    }
}
