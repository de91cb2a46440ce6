use orlicz_gn::triple::{fitted_exponent, ratio_spread, FIT_SEED};
use orlicz_gn::{NFunction, YoungTriple};

const SAMPLES: usize = 100_000;

#[test]
fn diagonal_triples_hold() {
    for m in [
        NFunction::power(2.0).unwrap(),
        NFunction::power(3.0).unwrap(),
        NFunction::powerlog(2.0, 1.0).unwrap(),
    ] {
        let t = YoungTriple::diagonal(&m).unwrap();
        let r = t.validate_y(SAMPLES, FIT_SEED + 1);
        assert_eq!(r.violations, 0, "{m}: {r:?}");
    }
}

#[test]
fn classical_power_triple() {
    // M = λ^4, q = 4: F = λ^2/2 gives r = 4
    let m = NFunction::power(4.0).unwrap();
    let f = NFunction::power_over_p(2.0).unwrap();
    let t = YoungTriple::mf(&m, &f, None).unwrap();
    let r = t.validate_y(SAMPLES, FIT_SEED + 2);
    assert_eq!(r.violations, 0, "{r:?}");
    assert!(r.max_relative_violation <= 1e-9);
}

#[test]
fn power_exponent_bookkeeping() {
    for (p, q) in [(2.0, 3.0), (3.0, 4.0), (4.0, 3.0), (4.0, 6.0)] {
        let s = 2.0 * q / p;
        let m = NFunction::power(p).unwrap();
        let f = NFunction::power_over_p(s).unwrap();
        let t = YoungTriple::mf(&m, &f, None).unwrap();
        let qh = fitted_exponent(&t.p, 1e4, 1e12);
        let rh = fitted_exponent(&t.q, 1e4, 1e12);
        assert!(
            (2.0 / p - 1.0 / qh - 1.0 / rh).abs() <= 1e-3,
            "p={p} q={q}: {qh} {rh}"
        );
        let v = t.validate_y(SAMPLES, FIT_SEED + 3);
        assert_eq!(v.violations, 0, "p={p} q={q}: {v:?}");
    }
}

#[test]
fn logarithmic_triple() {
    // M = λ² ln(2+λ), q = 4, s = 4, F = λ^4 ln(2+λ)^{1/2}:
    // P ≍ λ^4 ln(2+λ)^2, Q ≍ λ^{4/3} ln(2+λ)^{2/3}
    let m = NFunction::powerlog(2.0, 1.0).unwrap();
    let f = NFunction::powerlog(4.0, 0.5).unwrap();
    let t = YoungTriple::mf(&m, &f, None).unwrap();
    let v = t.validate_y(SAMPLES, FIT_SEED + 4);
    assert_eq!(v.violations, 0, "{v:?}");
    let (q, r) = (4.0, 4.0 / 3.0);
    let (beta, gamma) = (2.0, 2.0 / 3.0);
    let (p, alpha) = (2.0f64, 1.0f64);
    assert!((2.0 * alpha / p - beta / q - gamma / r).abs() < 1e-12);
    let sp = ratio_spread(&t.p, q, beta, 1e4, 1e14);
    let sq = ratio_spread(&t.q, r, gamma, 1e4, 1e14);
    assert!(sp <= 1.5 && sq <= 1.5, "{sp} {sq}");
    // without the log factor the spread is far larger
    assert!(ratio_spread(&t.p, q, 0.0, 1e4, 1e14) > 3.0);
}

#[test]
fn corrupted_triple_is_caught() {
    let m = NFunction::power(4.0).unwrap();
    let q = NFunction::scaled_power(4.0, 0.01).unwrap();
    let t = YoungTriple::explicit(&m, &m, &q);
    let v = t.validate_y(SAMPLES, FIT_SEED + 5);
    assert!(v.violations > 0 && v.max_relative_violation > 0.0);
}
