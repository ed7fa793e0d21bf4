use caputo_series::mittag_leffler::{
    asymptotic_expansion, envelope_constant, ml_eval, ml_eval_bounded, ml_largest_real_zero,
    mittag_leffler, MlQuery,
};
use caputo_series::Error;
use proptest::prelude::*;

/// (mu, eta, z, E_{mu,eta}(z)) computed with 50-digit arithmetic from the
/// defining power series.
const REFERENCE: &[(f64, f64, f64, f64)] = &[
    (1.0, 1.0, -1.0, 0.36787944117144232),
    (0.5, 1.0, -1.0, 0.427583576155807),
    (0.5, 1.0, -9.869604401089358, 0.056875338719078237),
    (1.5, 1.0, -1.0, 0.39662936531808808),
    (1.5, 2.0, -1.0, 0.73748224790189471),
    (0.5, 1.0, -10.0, 0.056140992743822586),
    (0.5, 1.0, -40.0, 0.014100335983377814),
    (1.5, 1.0, -40.0, -0.0099309654786934346),
    (1.5, 2.0, -40.0, 0.014029829672879105),
    (1.9, 2.0, -30.0, -0.038115192843148376),
    (0.3, 1.0, -5.0, 0.13708086902027064),
    (1.2, 2.0, -100.0, 0.0086166719281482268),
    (0.8, 0.8, -50.0, 7.3315313829055338e-5),
    (1.5, 1.5, -20.0, 0.0061985012468613419),
    (1.5, 0.5, -20.0, 0.039853399472427008),
    (0.7, 1.7, -10.0, 0.096382673445769084),
    (0.7, 2.5, -12.0, 0.08244492383176686),
    (1.5, 0.5, -3.0, -0.61399931746875532),
    (0.9, 1.0, -20.0, 0.0057495078161091126),
    (1.1, 1.0, -20.0, -0.0053076272063481055),
    (0.5, 1.0, 3.0, 16205.988853999587),
    (1.5, 2.0, 5.0, 4.1355228243967262),
    (1.8, 1.3, -45.0, 0.023906740174504178),
    (0.25, 1.0, -2.5, 0.25256463488894419),
    (0.3, 1.0, -100.0, 0.0076588562222866415),
    (0.5, 1.0, -1e4, 5.6418958072680841e-5),
    (0.3, 1.0, -1e6, 7.7038273304247193e-7),
    (0.8, 1.0, -1e5, 2.1782758919446711e-6),
];

#[test]
fn matches_reference_table() {
    let mut worst: f64 = 0.0;
    for &(mu, eta, z, want) in REFERENCE {
        let got = mittag_leffler(mu, eta, z).unwrap();
        let rel = ((got - want) / want).abs();
        worst = worst.max(rel);
        assert!(rel < 1e-10, "E_{{{mu},{eta}}}({z}) = {got:e}, want {want:e} (rel {rel:e})");
    }
    eprintln!("worst relative error {worst:e}");
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

#[test]
fn closed_forms() {
    // E_{1,1} = exp, E_{2,1}(-x^2) = cos x, E_{2,2}(-x^2) = sin x / x
    let mut z = -25.0;
    while z <= 25.0 {
        let e = mittag_leffler(1.0, 1.0, z).unwrap();
        assert!(rel_close(e, z.exp(), 1e-12), "exp({z}): {e}");
        z += 0.37;
    }
    let mut x: f64 = 0.05;
    while x * x <= 25.0 {
        let c = mittag_leffler(2.0, 1.0, -x * x).unwrap();
        let s = mittag_leffler(2.0, 2.0, -x * x).unwrap();
        // stay away from the zeros of cos and sin, where relative error is meaningless
        if x.cos().abs() > 1e-3 {
            assert!(rel_close(c, x.cos(), 1e-10), "cos({x}): {c} vs {}", x.cos());
        }
        if x.sin().abs() > 1e-3 {
            assert!(rel_close(s, x.sin() / x, 1e-10), "sinc({x}): {s}");
        }
        x += 0.0731;
    }
    // E_{1/2,1}(-x) = exp(x^2) erfc(x); at x = 1: 0.42758357615580700
    let e = mittag_leffler(0.5, 1.0, -1.0).unwrap();
    assert!(rel_close(e, 0.427_583_576_155_807, 1e-13));
}

#[test]
fn leading_asymptotics_for_mu_below_one() {
    // |E_{a,1}(-t) - 1/(t Gamma(1-a))| <= C / t^2 with C fitted on [1e4, 1e6]
    // and not growing when t doubles
    for &alpha in &[0.3, 0.5, 0.8] {
        let mut fitted: Vec<f64> = Vec::new();
        let mut t = 1e4;
        while t <= 1e6 {
            let e = mittag_leffler(alpha, 1.0, -t).unwrap();
            let leading = asymptotic_expansion(alpha, 1.0, t, 1);
            fitted.push(t * t * (e - leading).abs());
            t *= 2.0;
        }
        let c = fitted[0];
        assert!(c < 10.0, "alpha={alpha}: C = {c}");
        for w in fitted.windows(2) {
            assert!(w[1] <= 1.01 * w[0] + 1e-9, "alpha={alpha}: {fitted:?}");
        }
        for &t in &[1e4, 1e5, 1e6] {
            let e = mittag_leffler(alpha, 1.0, -t).unwrap();
            let scaled = e * t * caputo_series::special::gamma(1.0 - alpha);
            assert!((scaled - 1.0).abs() <= 10.0 / t);
        }
    }
}

#[test]
fn bounded_evaluation() {
    let m = envelope_constant();
    assert!(m >= 1.0 && m.is_finite(), "M = {m}");
    let q = MlQuery::new(0.5, 1.0, -3.0).unwrap();
    assert_eq!(ml_eval_bounded(&q).unwrap(), ml_eval(&q).unwrap());
    assert!(matches!(
        ml_eval_bounded(&MlQuery::new(0.5, 1.0, 3.0).unwrap()),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        ml_eval_bounded(&MlQuery::new(0.05, 1.0, -1.0).unwrap()),
        Err(Error::Domain(_))
    ));
}

#[test]
fn zero_scan_beta_two_matches_cosine() {
    // E_{2,1}(-t) = cos(sqrt t): zeros at ((2j+1) pi/2)^2
    let cert = ml_largest_real_zero(2.0, 1.0, Some(150.0)).unwrap();
    let want = (3.5 * std::f64::consts::PI).powi(2);
    assert!((cert.largest_zero_h.unwrap() - want).abs() < 1e-8);
    assert_eq!(cert.zero_count_scanned, 4);
    // E_{2,2}(-t) = sin(sqrt t)/sqrt t: zeros at (j pi)^2, the last one below 50 is 4 pi^2
    let cert = ml_largest_real_zero(2.0, 2.0, Some(50.0)).unwrap();
    let want = (2.0 * std::f64::consts::PI).powi(2);
    assert!((cert.largest_zero_h.unwrap() - want).abs() < 1e-8);
    assert_eq!(cert.zero_count_scanned, 2);
    assert!(ml_largest_real_zero(2.0, 1.0, None).is_err());
    assert!(ml_largest_real_zero(0.9, 1.0, None).is_err());
}

#[test]
fn zero_scan_default_bound_reaches_past_last_zero() {
    let cert = ml_largest_real_zero(1.5, 1.0, None).unwrap();
    let h = cert.largest_zero_h.expect("E_{1.5,1} has real zeros");
    let (lo, hi) = cert.bracket.unwrap();
    assert!(hi - lo <= 1e-10 && lo <= h && h <= hi);
    // past h the sign is that of the tail 1/(t Gamma(-1/2)) < 0
    let mut t = h + 0.5;
    while t < cert.scan_bound {
        assert!(mittag_leffler(1.5, 1.0, -t).unwrap() < 0.0, "t={t}");
        t *= 1.1;
    }
    assert!(cert.scan_bound > 2.0 * h);
}

#[test]
fn no_zeros_when_eta_large() {
    // 1 < beta < 2 and eta >= 3 beta / 2: no real zeros
    for &(beta, eta) in &[(1.2, 2.0), (1.5, 2.25), (1.3, 2.5)] {
        let cert = ml_largest_real_zero(beta, eta, None).unwrap();
        assert_eq!(cert.largest_zero_h, None, "beta={beta} eta={eta}");
        assert_eq!(cert.zero_count_scanned, 0);
        assert_eq!(cert.bracket, None);
    }
}

#[test]
fn zero_bracket_changes_sign() {
    let cert = ml_largest_real_zero(1.9, 2.0, None).unwrap();
    let (lo, hi) = cert.bracket.unwrap();
    let f_lo = mittag_leffler(1.9, 2.0, -lo).unwrap();
    let f_hi = mittag_leffler(1.9, 2.0, -hi).unwrap();
    assert!(f_lo * f_hi <= 0.0, "{f_lo} {f_hi}");
    assert!(cert.zero_count_scanned > 1);
    assert!(ml_largest_real_zero(1.5, 2.0, Some(-1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// E_{mu,eta}(z) = 1/Gamma(eta) + z E_{mu,eta+mu}(z)
    #[test]
    fn shift_recurrence(mu in 0.2f64..1.95, eta in 0.5f64..2.0, t in 0.0f64..200.0) {
        let lhs = mittag_leffler(mu, eta, -t).unwrap();
        let rhs = caputo_series::special::recip_gamma(eta) - t * mittag_leffler(mu, eta + mu, -t).unwrap();
        let scale = 1.0 + lhs.abs() + t * mittag_leffler(mu, eta + mu, -t).unwrap().abs();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale, "mu={} eta={} t={}: {} vs {}", mu, eta, t, lhs, rhs);
    }

    #[test]
    fn envelope_holds_on_box(mu in 0.1f64..1.9, eta in 0.5f64..2.5, s in -2.0f64..6.0) {
        let q = MlQuery::new(mu, eta, -(10f64.powf(s))).unwrap();
        prop_assert!(ml_eval_bounded(&q).is_ok());
    }
}
