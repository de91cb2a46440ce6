use orlicz_gn::campaign::{run_gn, GnCampaign, GnCampaignReport};
use orlicz_gn::corpus::compact_corpus;
use orlicz_gn::gn::{
    build_ledger, calibrate_alpha_n, default_theta_grid, diagonal_terms, gn_modular_check,
    gn_norm_check, theta_minimize, ConstantLedger, Mode,
};
use orlicz_gn::hardy::{fit_hardy_constants, HardyFitOptions};
use orlicz_gn::nfunc::simonenko_indices;
use orlicz_gn::{NFunction, QuadratureSettings, TestFunction, WeightedMeasure, YoungTriple};

fn s() -> QuadratureSettings {
    QuadratureSettings::default()
}

fn gaussian() -> WeightedMeasure {
    WeightedMeasure::power_exponential(0.0, 2.0).unwrap()
}

fn check(r: &GnCampaignReport) {
    let bad: Vec<_> = r
        .modular
        .iter()
        .filter(|x| !x.satisfied)
        .map(|x| &x.function)
        .collect();
    assert!(bad.is_empty(), "{}: modular violations {bad:?}", r.measure);
    let bad: Vec<_> = r
        .norms
        .iter()
        .filter(|x| !x.satisfied)
        .map(|x| &x.function)
        .collect();
    assert!(bad.is_empty(), "{}: norm violations {bad:?}", r.measure);
    assert!(
        r.corruption_detected(),
        "{}: B/100 went unnoticed",
        r.measure
    );
    assert!(r.alpha.alpha <= 10.0);
    assert_eq!(r.ledger, r.ledger.recompute());
}

#[test]
fn diagonal_powers_over_gaussian() {
    for p in [2.0, 4.0] {
        let m = NFunction::power(p).unwrap();
        for mode in [Mode::H, Mode::H1] {
            let t = YoungTriple::diagonal(&m).unwrap();
            let r = run_gn(&GnCampaign::new(t, gaussian(), mode)).unwrap();
            check(&r);
            assert!(r.norms_skipped.is_none());
        }
    }
}

#[test]
fn power_triples_over_power_weights() {
    let m = NFunction::power(4.0).unwrap();
    let f = NFunction::power_over_p(2.0).unwrap();
    let t = YoungTriple::mf(&m, &f, None).unwrap();
    // q = 4, so alpha < 3
    for alpha in [0.5, 1.0, 2.0] {
        let r = run_gn(&GnCampaign::new(
            t.clone(),
            WeightedMeasure::power(alpha).unwrap(),
            Mode::H,
        ))
        .unwrap();
        check(&r);
    }
    let m3 = NFunction::power(3.0).unwrap();
    let f3 = NFunction::power_over_p(2.0).unwrap();
    let t3 = YoungTriple::mf(&m3, &f3, None).unwrap();
    let r = run_gn(&GnCampaign::new(
        t3,
        WeightedMeasure::power(1.0).unwrap(),
        Mode::H,
    ))
    .unwrap();
    check(&r);
}

#[test]
fn powerlog_diagonal_with_remainder() {
    let m = NFunction::powerlog(2.0, 1.0).unwrap();
    let t = YoungTriple::diagonal(&m).unwrap();
    let r = run_gn(&GnCampaign::new(t, gaussian(), Mode::H1)).unwrap();
    check(&r);
}

#[test]
fn distance_weight_campaign() {
    let m = NFunction::power(2.0).unwrap();
    let t = YoungTriple::diagonal(&m).unwrap();
    let mu = WeightedMeasure::distance(0.5, 0.0, 1.0).unwrap();
    let r = run_gn(&GnCampaign::new(t, mu, Mode::H)).unwrap();
    check(&r);
    assert!(r.notes.iter().any(|n| n.contains("a < q-1")));
}

#[test]
fn hermite_example_with_fitted_remainder() {
    let m = NFunction::power(2.0).unwrap();
    let t = YoungTriple::diagonal(&m).unwrap();
    let mu = gaussian();
    let u = TestFunction::hermite_decay(2).unwrap();
    let mut corpus = compact_corpus(mu.domain());
    corpus.push(u.clone());
    let thetas: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
    let o = HardyFitOptions {
        remainder: Some(m.clone()),
        derivative_scales: thetas.clone(),
        ..Default::default()
    };
    let fit = fit_hardy_constants(&t.p, &mu, &corpus, &o).unwrap();
    let alpha = calibrate_alpha_n(&corpus, &m, &mu, &s()).unwrap();
    let ledger = build_ledger(&fit, alpha.alpha, &simonenko_indices(&m).unwrap()).unwrap();
    assert_eq!(ledger.mode, Mode::H1);
    let r = gn_modular_check(&u, &t, &mu, &ledger, &thetas, &s()).unwrap();
    assert!(r.satisfied, "{r:?}");
    assert!(r.rows.iter().filter(|x| !x.minimizer).count() == 10);
}

#[test]
fn lebesgue_dilation_ratio_is_constant() {
    let m = NFunction::power(2.0).unwrap();
    let t = YoungTriple::diagonal(&m).unwrap();
    let mu = WeightedMeasure::lebesgue(f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let ledger = ConstantLedger::mode_h(1.0, 1.0, 1.0);
    let base = TestFunction::bump(-1.0, 1.0).unwrap();
    let ratios: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&c| {
            let r = gn_norm_check(&base.dilate(c, 0.0).unwrap(), &t, &mu, &ledger, &s()).unwrap();
            assert!(r.satisfied);
            r.lhs * r.lhs / (r.n2 * r.n0)
        })
        .collect();
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() < 0.01, "{ratios:?}");
    }
}

#[test]
fn diagonal_form_matches_remainder_form() {
    for m in [
        NFunction::power(2.0).unwrap(),
        NFunction::powerlog(2.0, 1.0).unwrap(),
    ] {
        let idx = simonenko_indices(&m).unwrap();
        let mu = gaussian();
        let t = YoungTriple::diagonal(&m).unwrap();
        let r = run_gn(&GnCampaign::new(t.clone(), mu.clone(), Mode::H1)).unwrap();
        for u in compact_corpus(mu.domain()).iter().take(8) {
            let rep = gn_modular_check(u, &t, &mu, &r.ledger, &default_theta_grid(), &s()).unwrap();
            for row in rep.rows.iter().filter(|x| !x.minimizer) {
                let d = diagonal_terms(u, &m, &mu, &r.ledger, &idx, row.theta, &s()).unwrap();
                assert!((d.q_term - row.rhs_q).abs() <= 1e-9 * row.rhs_q.max(1e-300));
                assert!(d.q_term <= d.c2_term * (1.0 + 1e-9));
                // C₁ = L, C₂ = c̄(B)
                assert!(row.lhs <= (r.ledger.l * row.rhs_p + d.c2_term) * (1.0 + 1e-9));
            }
        }
    }
}

#[test]
fn theta_branches() {
    let r = theta_minimize(4.0, 1.0, true);
    assert_eq!((r.theta, r.value), (0.5, 4.0));
    let r = theta_minimize(1.0, 4.0, true);
    assert_eq!((r.theta, r.value), (1.0, 5.0));
}

#[test]
fn missing_fit() {
    let fit = orlicz_gn::hardy::HardyFit {
        k: 0.0,
        k1: 0.0,
        k2: 0.0,
        a_dilation: 1.0,
        with_remainder: false,
        worst_function: String::new(),
        members: 0,
        rows: vec![],
    };
    let idx = orlicz_gn::SimonenkoIndices::exact(2.0, 2.0);
    assert!(matches!(
        build_ledger(&fit, 1.0, &idx),
        Err(orlicz_gn::Error::MissingFit(_))
    ));
}
