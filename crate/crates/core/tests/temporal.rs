use caputo_series::green::GreenSpec;
use caputo_series::spectral::{build_quadrature, compute_basis};
use caputo_series::temporal::{
    caputo_of_mode, caputo_profile, delta_n, solve_mode, solve_mode_with_delta, uniqueness_report,
    y_eval, ModeSolution, ModeStatus, TemporalConfig,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn reference() -> TemporalConfig {
    TemporalConfig::new(0.5, 1.5, 1.0, 1.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn delta_matches_high_precision_series() {
    // three Mittag-Leffler series summed with 100+ digit arithmetic
    let cases = [
        (reference(), 1.0, -0.70652803706417579426),
        (reference(), 10.0, -0.29303390074027828526),
        (reference(), 30.0, -0.56300128892438253437),
        (TemporalConfig::new(0.7, 1.3, 0.8, 1.2).unwrap(), 5.0, -0.92366190127306217016),
    ];
    for (cfg, lambda, want) in cases {
        let d = delta_n(lambda, &cfg).unwrap();
        assert!(rel(d, want) < 1e-10, "lambda={lambda}: {d} vs {want}");
    }
}

#[test]
fn delta_limits() {
    let cfg = reference();
    assert!(delta_n(1e-12, &cfg).unwrap().abs() < 1e-10);
    let limit = -1.0 / PI.sqrt();
    assert!((cfg.delta_limit() - limit).abs() < 1e-15);
    assert!((delta_n(1e6, &cfg).unwrap() - limit).abs() < 1e-5);
    // the limit scales like a^(1-beta)
    let cfg2 = TemporalConfig::new(0.5, 1.5, 4.0, 1.0).unwrap();
    assert!((cfg2.delta_limit() - limit / 2.0).abs() < 1e-15);
    assert!(delta_n(-1.0, &cfg).is_err());
}

#[test]
fn regular_and_resonant_modes() {
    let cfg = reference();
    let s = solve_mode(PI * PI, 0.0, &cfg, cfg.resonance_tolerance()).unwrap();
    assert_eq!(s.status, ModeStatus::Regular);
    assert_eq!((s.c1, s.c2, s.c3), (0.0, 0.0, 0.0));
    let d = delta_n(7.0, &cfg).unwrap();
    let s = solve_mode(7.0, 0.4, &cfg, 1e-10).unwrap();
    assert_eq!(s.c1, 0.4 / d);
    assert_eq!(s.c2, s.c1);
    assert_eq!(s.c3, 7.0 * 0.4 / d);
    // an infinite tolerance marks every mode resonant
    let s = solve_mode(7.0, 0.4, &cfg, f64::INFINITY).unwrap();
    assert_eq!(s.status, ModeStatus::ResonantUnsolvable);
    let s = solve_mode(7.0, 0.0, &cfg, f64::INFINITY).unwrap();
    assert_eq!(s.status, ModeStatus::ResonantSolvable);
    assert!(solve_mode(7.0, 0.0, &cfg, f64::NAN).is_err());
}

#[test]
fn profile_values() {
    let cfg = reference();
    let sol = solve_mode_with_delta(PI * PI, 1.0, 1.0, 1e-10);
    assert_eq!(sol.c1, 1.0);
    let v = y_eval(&sol, &cfg, 1.0).unwrap();
    assert!(rel(v, 0.056875338719078237) < 1e-12);
    assert_eq!(y_eval(&sol, &cfg, 0.0).unwrap(), sol.c1);
    assert!((y_eval(&sol, &cfg, -1e-300).unwrap() - sol.c2).abs() < 1e-12);
}

#[test]
fn nonlocal_closure_per_mode() {
    let cfg = TemporalConfig::new(0.3, 1.7, 0.6, 1.4).unwrap();
    for n in 1..=30 {
        let lambda = (n as f64 * PI).powi(2);
        let phi = 1.0 / (n * n) as f64;
        let s = solve_mode(lambda, phi, &cfg, cfg.resonance_tolerance()).unwrap();
        let gap = y_eval(&s, &cfg, cfg.b).unwrap() - y_eval(&s, &cfg, -cfg.a).unwrap() - phi;
        assert!(gap.abs() <= 1e-9, "n={n}: {gap}");
    }
}

#[test]
fn flux_coefficient_relation() {
    let cfg = reference();
    for lambda in [1.0, 50.0, 3000.0] {
        let s = solve_mode(lambda, 0.2, &cfg, 1e-10).unwrap();
        assert!((s.c3 - lambda * s.c1).abs() <= 1e-12 * s.c3.abs());
        assert_eq!(s.c1, s.c2);
    }
}

#[test]
fn mode_equation_residual() {
    for cfg in [reference(), TemporalConfig::new(0.8, 1.2, 0.5, 2.0).unwrap()] {
        for lambda in [PI * PI, 4.0 * PI * PI, 400.0] {
            let s = solve_mode(lambda, 1.0, &cfg, 1e-10).unwrap();
            for &y in &[0.05, 0.3, 0.9 * cfg.b, -0.05 * cfg.a, -0.5 * cfg.a, -cfg.a] {
                let d = caputo_of_mode(&s, &cfg, y, 4096).unwrap();
                let yv = y_eval(&s, &cfg, y).unwrap();
                let r = (d + lambda * yv).abs() / (1.0 + lambda * yv.abs());
                assert!(r <= 1e-3, "lambda={lambda} y={y}: D={d} -lambda Y={}", -lambda * yv);
            }
        }
    }
}

#[test]
fn caputo_profile_matches_single_points() {
    let cfg = reference();
    let s = solve_mode(40.0, 1.0, &cfg, 1e-10).unwrap();
    let ys = [0.2, 0.5, 1.0];
    let batch = caputo_profile(&s, &cfg, &ys, 2048).unwrap();
    for (y, d) in ys.iter().zip(&batch) {
        let v = y_eval(&s, &cfg, *y).unwrap();
        assert!((d + 40.0 * v).abs() <= 1e-3 * (1.0 + 40.0 * v.abs()));
    }
    assert!(caputo_profile(&s, &cfg, &[0.2, -0.2], 2048).is_err());
    assert!(caputo_of_mode(&s, &cfg, 0.0, 2048).is_err());
    assert!(caputo_of_mode(&s, &cfg, 0.5, 16).is_err());
}

#[test]
fn caputo_of_constant_vanishes() {
    let cfg = reference();
    let s = ModeSolution {
        lambda: 0.0,
        phi_n: 0.0,
        delta_n: 1.0,
        c1: 1.0,
        c2: 1.0,
        c3: 0.0,
        status: ModeStatus::Regular,
    };
    assert_eq!(caputo_of_mode(&s, &cfg, 0.7, 256).unwrap(), 0.0);
    assert_eq!(caputo_of_mode(&s, &cfg, -0.7, 256).unwrap(), 0.0);
}

#[test]
fn uniqueness_report_reference() {
    let cfg = reference();
    let spec = GreenSpec::new(1, 0.0).unwrap();
    let basis = compute_basis(&spec, &build_quadrature(128).unwrap(), 20).unwrap();
    let r = uniqueness_report(&basis, &cfg, cfg.resonance_tolerance()).unwrap();
    assert_eq!(r.entries.len(), 20);
    assert!(r.unique);
    assert!((r.separation - 0.9 / PI.sqrt()).abs() < 1e-15);
    let from = r.separated_from.expect("tail separated from zero");
    assert!(r.entries[from - 1..].iter().all(|e| e.delta_n.abs() >= r.separation));
    assert!(r.tail_monotone);
    // trend over n = 10..20
    let errs: Vec<f64> = r.entries[9..].iter().map(|e| (e.delta_n - r.limit).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    // 1 < beta < 2 and eta = 2 >= 3 beta / 2: no zeros
    assert_eq!(r.largest_zero_h, None);

    let empty = compute_basis(&spec, &build_quadrature(16).unwrap(), 0).unwrap();
    let r = uniqueness_report(&empty, &cfg, 1e-10).unwrap();
    assert!(r.entries.is_empty() && r.unique);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closure_holds(alpha in 0.1f64..0.95, beta in 1.05f64..1.95, a in 0.2f64..3.0, b in 0.2f64..3.0,
                     lambda in 0.5f64..5e3, phi in -1.0f64..1.0) {
        let cfg = TemporalConfig::new(alpha, beta, a, b).unwrap();
        let s = solve_mode(lambda, phi, &cfg, cfg.resonance_tolerance()).unwrap();
        prop_assume!(s.status == ModeStatus::Regular);
        let gap = y_eval(&s, &cfg, b).unwrap() - y_eval(&s, &cfg, -a).unwrap() - phi;
        prop_assert!(gap.abs() <= 1e-9 * (1.0 + s.c1.abs()), "gap {}", gap);
    }
}
