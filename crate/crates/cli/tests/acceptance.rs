//! Acceptance criteria 1–11, one printed line each.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orlicz_gn::campaign::{muckenhoupt_sweep, run_gn, GnCampaign, GnCampaignReport};
use orlicz_gn::corpus::default_corpus;
use orlicz_gn::gn::{gn_norm_check, theta_minimize, ConstantLedger, Mode};
use orlicz_gn::grid::LogGrid;
use orlicz_gn::hardy::{
    classical_bound, classical_hardy_ratio, largest_log_safe_radius, muckenhoupt_check,
    near_extremal, powerexp_asymptotics,
};
use orlicz_gn::nfunc::{conjugate_numeric, delta2_constant, simonenko_indices};
use orlicz_gn::norms::{luxemburg_norm, modular_scaled, Channel, FnProfile};
use orlicz_gn::triple::FIT_SEED;
use orlicz_gn::{NFunction, QuadratureSettings, TestFunction, WeightedMeasure, YoungTriple};

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn s() -> QuadratureSettings {
    QuadratureSettings::default()
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn c1_conjugation() -> Check {
    let grid = LogGrid::default();
    let (mut worst, mut worst_bi) = (0.0f64, 0.0f64);
    for p in [1.5, 2.0, 3.0, 4.0] {
        let m = NFunction::power_over_p(p).unwrap();
        let q = p / (p - 1.0);
        let once = conjugate_numeric(&m, &grid).unwrap();
        let twice = conjugate_numeric(&once, &grid).unwrap();
        for x in log_points(1e-2, 1e2, 401) {
            let exact = x.powf(q) / q;
            worst = worst.max((once.value(x) - exact).abs() / exact);
            worst_bi = worst_bi.max((twice.value(x) - m.value(x)).abs() / m.value(x));
        }
    }
    ensure!(worst <= 1e-6, "conjugate error {worst:e}");
    ensure!(worst_bi <= 1e-5, "biconjugation error {worst_bi:e}");
    Ok(format!(
        "max rel error {worst:.1e}, biconjugation {worst_bi:.1e}"
    ))
}

fn c2_indices() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    for p in [1.5, 2.0, 3.0, 4.0] {
        let m = NFunction::power(p).unwrap();
        let idx = simonenko_indices(&m).unwrap();
        ensure!(
            (idx.lower - p).abs() <= 1e-8 && (idx.upper - p).abs() <= 1e-8,
            "indices of power({p}): {} {}",
            idx.lower,
            idx.upper
        );
        let d2 = delta2_constant(&m).constant;
        ensure!(
            (d2 - 2f64.powf(p)).abs() <= 1e-8,
            "delta2 of power({p}): {d2}"
        );
        for _ in 0..2500 {
            let a = rng.gen_range(1e-3f64.ln()..1e3f64.ln()).exp();
            let x = rng.gen_range(1e-6f64.ln()..1e6f64.ln()).exp();
            if m.value(a * x) > idx.scale_bound(a) * m.value(x) * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    ensure!(violations == 0, "{violations} scale bound violations");
    Ok("indices and delta2 exact, 10000 scale samples clean".into())
}

fn c3_young() -> Check {
    let pow = |p| NFunction::power(p).unwrap();
    let half = |p| NFunction::power_over_p(p).unwrap();
    let triples = [
        YoungTriple::mf(&pow(2.0), &half(2.0), None).unwrap(),
        YoungTriple::diagonal(&pow(2.0)).unwrap(),
        YoungTriple::mf(&pow(4.0), &half(2.0), None).unwrap(),
        YoungTriple::mf(&pow(3.0), &half(8.0 / 3.0), None).unwrap(),
        YoungTriple::mf(
            &NFunction::powerlog(2.0, 1.0).unwrap(),
            &NFunction::powerlog(4.0, 0.5).unwrap(),
            None,
        )
        .unwrap(),
    ];
    for (i, t) in triples.iter().enumerate() {
        let v = t.validate_y(100_000, FIT_SEED + i as u64);
        ensure!(v.violations == 0, "{} / {}: {v:?}", t.m, t.p);
    }
    let m = pow(4.0);
    let bad = YoungTriple::explicit(&m, &m, &NFunction::scaled_power(4.0, 0.01).unwrap());
    let v = bad.validate_y(100_000, FIT_SEED);
    ensure!(v.violations > 0, "corrupted triple passed");
    Ok(format!(
        "{} triples clean at 1e5 samples, corrupted triple flagged ({} violations)",
        triples.len(),
        v.violations
    ))
}

fn c4_luxemburg() -> Check {
    let mu = WeightedMeasure::power_exponential(0.0, 1.0).unwrap();
    let sq = NFunction::power(2.0).unwrap();
    let f = FnProfile::new(|x| x, (0.0, f64::INFINITY));
    let n = luxemburg_norm(&f, &sq, &mu, &s()).unwrap();
    ensure!((n - 2f64.sqrt()).abs() <= 1e-8, "norm of x: {n}");
    let fns = [
        sq.clone(),
        NFunction::power(3.0).unwrap(),
        NFunction::power(4.0).unwrap(),
        NFunction::powerlog(2.0, 1.0).unwrap(),
    ];
    let measures = [
        WeightedMeasure::power_exponential(0.0, 2.0).unwrap(),
        WeightedMeasure::power(1.0).unwrap(),
        WeightedMeasure::lebesgue(f64::NEG_INFINITY, f64::INFINITY).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut count = 0;
    for mu in &measures {
        for u in default_corpus(mu.domain()) {
            for m in &fns {
                let ch = Channel::value(&u);
                let k = luxemburg_norm(&ch, m, mu, &s()).unwrap();
                let v = modular_scaled(&ch, m, mu, k, &s()).unwrap().value;
                worst = worst.max((v - 1.0).abs());
                count += 1;
            }
        }
    }
    ensure!(worst <= 5e-6, "normalised modular off by {worst:e}");
    Ok(format!(
        "|x| = sqrt2 within {:.1e}; {count} normalised modulars within {worst:.1e}",
        (n - 2f64.sqrt()).abs()
    ))
}

fn c5_muckenhoupt() -> Check {
    let rows = muckenhoupt_sweep(
        &[0.0, 0.3, 0.9, 1.0, 1.5],
        &[0.5, 1.0, 2.0],
        &[1.5, 2.0, 3.0],
        &s(),
    )
    .unwrap();
    ensure!(rows.len() == 45, "grid has {} cells", rows.len());
    if let Some(r) = rows.iter().find(|r| !r.agrees()) {
        return Err(format!(
            "alpha={} beta={} p={}: {}",
            r.alpha, r.beta, r.p, r.report.reason
        ));
    }
    let r = muckenhoupt_check(&WeightedMeasure::power(0.0).unwrap(), 2.0, &s()).unwrap();
    ensure!(
        (r.sup_value - 1.0).abs() <= 1e-4,
        "power weight sup {}",
        r.sup_value
    );
    Ok(format!(
        "45/45 verdicts agree; power-weight sup {:.6}",
        r.sup_value
    ))
}

fn c6_asymptotics() -> Check {
    let mut out = vec![];
    for (a, b, p) in [(0.0, 1.0, 2.0), (0.0, 2.0, 2.0), (0.5, 2.0, 3.0)] {
        let r = largest_log_safe_radius(b, p);
        let x = powerexp_asymptotics(a, b, p, r, &s()).unwrap();
        let ea = (x.a_ratio / x.a_limit - 1.0).abs();
        let eb = (x.b_ratio / x.b_limit - 1.0).abs();
        ensure!(ea <= 0.1 && eb <= 0.1, "({a},{b},{p}) at r={r}: {x:?}");
        out.push(format!("{:.3}/{:.3}", ea, eb));
    }
    Ok(format!("relative gaps {}", out.join(", ")))
}

fn c7_classical_hardy() -> Check {
    let mut worst = 0.0f64;
    let mut min_fraction = f64::INFINITY;
    for p in [2.0, 3.0] {
        for alpha in [0.0, 1.0, 2.5] {
            if (alpha - p + 1.0f64).abs() < 1e-12 {
                continue;
            }
            let mu = WeightedMeasure::power(alpha).unwrap();
            let bound = classical_bound(p, alpha);
            for u in default_corpus(mu.domain()).iter().filter(|u| !u.is_zero()) {
                let r = classical_hardy_ratio(u, p, &mu, &s()).unwrap();
                ensure!(
                    r.ratio <= bound * (1.0 + 1e-6),
                    "p={p} alpha={alpha} {}: {}",
                    u.id(),
                    r.ratio
                );
                worst = worst.max(r.ratio / bound);
            }
            let e = near_extremal(p, alpha, 0.05).unwrap();
            let r = classical_hardy_ratio(&e, p, &mu, &s()).unwrap();
            ensure!(r.ratio <= bound * (1.0 + 1e-6), "near-extremal above bound");
            ensure!(
                r.ratio >= 0.8 * bound,
                "p={p} alpha={alpha}: near-extremal reaches {}",
                r.ratio / bound
            );
            min_fraction = min_fraction.min(r.ratio / bound);
        }
    }
    Ok(format!(
        "corpus max {worst:.3} of bound; near-extremal min {min_fraction:.3} (alpha = p-1 excluded)"
    ))
}

fn gn_campaigns() -> Vec<GnCampaignReport> {
    let pow = |p| NFunction::power(p).unwrap();
    let half = NFunction::power_over_p(2.0).unwrap();
    let gauss = WeightedMeasure::power_exponential(0.0, 2.0).unwrap();
    let mut c = vec![];
    for p in [2.0, 4.0] {
        for mode in [Mode::H, Mode::H1] {
            c.push(GnCampaign::new(
                YoungTriple::diagonal(&pow(p)).unwrap(),
                gauss.clone(),
                mode,
            ));
        }
    }
    let t4 = YoungTriple::mf(&pow(4.0), &half, None).unwrap();
    for alpha in [0.5, 1.0, 2.0] {
        c.push(GnCampaign::new(
            t4.clone(),
            WeightedMeasure::power(alpha).unwrap(),
            Mode::H,
        ));
    }
    let t3 = YoungTriple::mf(&pow(3.0), &half, None).unwrap();
    c.push(GnCampaign::new(
        t3,
        WeightedMeasure::power(1.0).unwrap(),
        Mode::H,
    ));
    c.iter().map(|c| run_gn(c).unwrap()).collect()
}

fn c8_gn_modular(reports: &[GnCampaignReport]) -> Check {
    let mut rows = 0;
    for r in reports {
        ensure!(
            r.ledger == r.ledger.recompute(),
            "{}: ledger not exact",
            r.measure
        );
        for m in &r.modular {
            ensure!(
                m.satisfied,
                "{} {} {}: worst ratio {} at theta {}",
                r.measure,
                r.triple.m,
                m.function,
                m.worst_ratio,
                m.worst_theta
            );
            rows += m.rows.len();
        }
        ensure!(
            r.corruption_detected(),
            "{} {}: B/100 not detected",
            r.measure,
            r.triple.m
        );
    }
    Ok(format!(
        "{} campaigns, {rows} rows satisfied, B/100 detected in each",
        reports.len()
    ))
}

fn c9_gn_norm(reports: &[GnCampaignReport]) -> Check {
    let mut rows = 0;
    for r in reports {
        ensure!(r.norms_skipped.is_none(), "{}: norms skipped", r.measure);
        for n in &r.norms {
            ensure!(n.satisfied, "{} {}: {n:?}", r.measure, n.function);
            rows += 1;
        }
    }
    let sq = NFunction::power(2.0).unwrap();
    let t = YoungTriple::diagonal(&sq).unwrap();
    let mu = WeightedMeasure::lebesgue(f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let ledger = ConstantLedger::mode_h(1.0, 1.0, 1.0);
    let base = TestFunction::bump(-1.0, 1.0).unwrap();
    let mut ratios = vec![];
    for c in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let r = gn_norm_check(&base.dilate(c, 0.0).unwrap(), &t, &mu, &ledger, &s()).unwrap();
        ratios.push(r.lhs * r.lhs / (r.n2 * r.n0));
    }
    let spread = ratios
        .iter()
        .map(|r| (r / ratios[0] - 1.0).abs())
        .fold(0.0, f64::max);
    ensure!(spread <= 0.01, "dilation ratios {ratios:?}");
    Ok(format!(
        "{rows} norm rows satisfied; dilation spread {spread:.1e}"
    ))
}

fn c10_theta() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let b = rng.gen_range(-8.0f64..8.0).exp();
        let c = rng.gen_range(-8.0f64..8.0).exp();
        let u = theta_minimize(b, c, false);
        let exact = 2.0 * (b * c).sqrt();
        worst = worst.max((u.value - exact).abs() / exact);
        let r = theta_minimize(b, c, true);
        ensure!(
            r.value <= 2.0 * ((b * c).sqrt() + c) * (1.0 + 1e-12) && r.theta <= 1.0,
            "restricted ({b}, {c}): {r:?}"
        );
    }
    ensure!(worst <= 1e-12, "unrestricted error {worst:e}");
    Ok(format!("1000 pairs, unrestricted error {worst:.1e}"))
}

fn run_cli(dir: &Path, config: &Path, jobs: &str) -> std::process::ExitStatus {
    Command::new(env!("CARGO_BIN_EXE_orlicz-gn"))
        .args(["gn", "--seed", "7", "--jobs", jobs, "--config"])
        .arg(config)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
        .status
}

fn report_bodies(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let body = if p.extension().is_some_and(|e| e == "csv") {
                let (first, rest) = text.split_once('\n').unwrap();
                assert!(first.starts_with("# generated_at="));
                rest.to_string()
            } else {
                text
            };
            (p.file_name().unwrap().to_string_lossy().into_owned(), body)
        })
        .collect()
}

fn c11_determinism() -> Check {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("gn.toml");
    std::fs::write(
        &cfg,
        "measure = \"gaussian\"\nnfunction = \"power(4)\"\ntriple = \"diagonal\"\nmode = \"h1\"\n",
    )
    .unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ensure!(run_cli(&a, &cfg, "1").success(), "first run failed");
    ensure!(run_cli(&b, &cfg, "4").success(), "second run failed");
    let (ra, rb) = (report_bodies(&a), report_bodies(&b));
    ensure!(ra.len() == 4, "expected 4 report files, got {}", ra.len());
    for ((na, ba), (nb, bb)) in ra.iter().zip(&rb) {
        ensure!(na == nb && ba == bb, "{na} differs between runs");
    }
    Ok(format!(
        "{} report files byte-identical across runs (1 and 4 jobs)",
        ra.len()
    ))
}

fn line(n: usize, name: &str, f: impl FnOnce() -> Check) -> bool {
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let (tag, detail, ok) = match r {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    // bypass output capture so the lines show up in normal test runs
    let _ = writeln!(
        std::io::stderr().lock(),
        "criterion {n:>2} {tag} {name}: {detail}"
    );
    ok
}

#[test]
fn acceptance() {
    let mut ok = vec![
        line(1, "conjugation", c1_conjugation),
        line(2, "indices", c2_indices),
        line(3, "young condition", c3_young),
        line(4, "luxemburg norm", c4_luxemburg),
        line(5, "muckenhoupt classifier", c5_muckenhoupt),
        line(6, "asymptotics", c6_asymptotics),
        line(7, "classical hardy", c7_classical_hardy),
    ];
    let reports = catch_unwind(gn_campaigns).ok();
    ok.push(line(8, "gn modular", || match &reports {
        Some(r) => c8_gn_modular(r),
        None => Err("campaign run failed".into()),
    }));
    ok.push(line(9, "gn norm", || match &reports {
        Some(r) => c9_gn_norm(r),
        None => Err("campaign run failed".into()),
    }));
    ok.push(line(10, "theta minimisation", c10_theta));
    ok.push(line(11, "determinism", c11_determinism));
    let failed: Vec<usize> = ok
        .iter()
        .enumerate()
        .filter(|(_, &b)| !b)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
