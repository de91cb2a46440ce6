//! The subcommands. Each returns an [`Outcome`]; nothing here touches the disk.

use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::json;

use orlicz_gn::campaign::{self, GnCampaign};
use orlicz_gn::corpus::{compact_corpus, default_corpus};
use orlicz_gn::gn::Mode;
use orlicz_gn::grid::LogGrid;
use orlicz_gn::hardy::{self, HardyFitOptions, PairKind};
use orlicz_gn::nfunc::{conjugate_at, delta2_constant, simonenko_indices, young_gap};
use orlicz_gn::{MeasureFamily, NFunction, QuadratureSettings, TestFunction, WeightedMeasure};

use crate::config::{CampaignConfig, CorpusSelector};
use crate::report::{num, Outcome, Table};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Tabulate the complementary function M*.
    Conjugate,
    /// Simonenko indices and the Δ₂ constant.
    Indices,
    /// Build a Young triple and sample condition (Y).
    Triple,
    /// Muckenhoupt criterion for the measure.
    Muckenhoupt,
    /// Hardy ratios (power weights) or a fitted Hardy constant.
    Hardy,
    /// Full interpolation pipeline.
    Gn,
    /// Muckenhoupt verdicts over a grid of x^α e^{-x^β} weights.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Conjugate => "conjugate",
            Command::Indices => "indices",
            Command::Triple => "triple",
            Command::Muckenhoupt => "muckenhoupt",
            Command::Hardy => "hardy",
            Command::Gn => "gn",
            Command::Sweep => "sweep",
        }
    }
}

pub fn run(cmd: Command, c: &CampaignConfig) -> Result<Outcome> {
    match cmd {
        Command::Conjugate => conjugate(c),
        Command::Indices => indices(c),
        Command::Triple => triple(c),
        Command::Muckenhoupt => muckenhoupt(c),
        Command::Hardy => hardy_cmd(c),
        Command::Gn => gn(c),
        Command::Sweep => sweep(c),
    }
}

fn corpus(c: &CampaignConfig, domain: (f64, f64)) -> Vec<TestFunction> {
    match c.corpus {
        CorpusSelector::Compact => compact_corpus(domain),
        CorpusSelector::Default => default_corpus(domain),
    }
}

fn conjugate(c: &CampaignConfig) -> Result<Outcome> {
    let m = c.nfunction()?;
    let tol = c.tol.unwrap_or(1e-6);
    let exact = m.analytic_conjugate();
    let g = &c.conjugate;
    let ys = LogGrid::new(g.lo, g.hi, g.points).points();
    let rows: Vec<(f64, f64, f64, f64)> = ys
        .par_iter()
        .map(|&y| {
            let (v, x) = conjugate_at(&m, y)?;
            Ok((y, v, x, young_gap(&m, x, y)?))
        })
        .collect::<orlicz_gn::Result<_>>()?;
    let mut t = Table::new(
        "conjugate",
        &[
            "y",
            "m_star",
            "argmax",
            "gap_at_argmax",
            "analytic",
            "rel_error",
        ],
    );
    let mut failures = vec![];
    let mut worst: f64 = 0.0;
    for &(y, v, x, gap) in &rows {
        let (an, err) = match &exact {
            Some(e) => {
                let a = e.value(y);
                let err = if a > 0.0 { (v - a).abs() / a } else { v.abs() };
                (num(a), err)
            }
            None => (String::new(), 0.0),
        };
        worst = worst.max(err);
        if !(v >= 0.0 && v.is_finite()) || err > tol {
            failures.push(format!(
                "conjugate: y={} m_star={} rel_error={}",
                num(y),
                num(v),
                num(err)
            ));
        }
        let err_s = if exact.is_some() {
            num(err)
        } else {
            String::new()
        };
        t.push(vec![num(y), num(v), num(x), num(gap), an, err_s]);
    }
    Ok(Outcome {
        command: "conjugate".into(),
        tables: vec![t],
        summary: json!({
            "nfunction": m.label(),
            "analytic": exact.as_ref().map(|e| e.label().to_string()),
            "points": rows.len(),
            "max_rel_error": exact.as_ref().map(|_| worst),
        }),
        failures,
    })
}

fn indices(c: &CampaignConfig) -> Result<Outcome> {
    let m = c.nfunction()?;
    let idx = simonenko_indices(&m)?;
    let d2 = delta2_constant(&m);
    let bound = 2f64.powf(idx.upper);
    let mut failures = vec![];
    if idx.upper.is_finite() && d2.constant > bound * (1.0 + 1e-6) {
        failures.push(format!(
            "indices: delta2 {} exceeds 2^D = {}",
            num(d2.constant),
            num(bound)
        ));
    }
    let mut t = Table::new(
        "indices",
        &[
            "nfunction",
            "d",
            "D",
            "delta2",
            "two_pow_D",
            "delta2_satisfied",
            "d_exceeds_one",
            "D_unbounded",
        ],
    );
    t.push(vec![
        m.label().into(),
        num(idx.lower),
        num(idx.upper),
        num(d2.constant),
        num(bound),
        d2.satisfied.to_string(),
        idx.lower_exceeds_one.to_string(),
        idx.upper_unbounded.to_string(),
    ]);
    Ok(Outcome {
        command: "indices".into(),
        tables: vec![t],
        summary: json!({ "nfunction": m.label(), "indices": idx, "delta2": d2 }),
        failures,
    })
}

fn triple(c: &CampaignConfig) -> Result<Outcome> {
    let t = c.triple()?;
    let tol = c.tol.unwrap_or(0.0);
    let y = t.validate_y(c.samples, c.seed);
    let mut failures = vec![];
    if y.max_relative_violation > tol {
        let [u, v, w] = y.worst_triple;
        failures.push(format!(
            "triple: {} of {} samples violate (Y); worst relative {} at (u, v, w) = ({}, {}, {})",
            y.violations,
            y.samples,
            num(y.max_relative_violation),
            num(u),
            num(v),
            num(w)
        ));
    }
    let (p_ok, q_ok) = t.nfunction_flags();
    let mut tab = Table::new(
        "triple",
        &[
            "m",
            "p",
            "q",
            "c",
            "samples",
            "violations",
            "max_relative_violation",
            "u",
            "v",
            "w",
            "p_is_nfunction",
            "q_is_nfunction",
        ],
    );
    let [u, v, w] = y.worst_triple;
    tab.push(vec![
        t.m.label().into(),
        t.p.label().into(),
        t.q.label().into(),
        num(t.c),
        y.samples.to_string(),
        y.violations.to_string(),
        num(y.max_relative_violation),
        num(u),
        num(v),
        num(w),
        p_ok.to_string(),
        q_ok.to_string(),
    ]);
    Ok(Outcome {
        command: "triple".into(),
        tables: vec![tab],
        summary: json!({ "triple": t, "validation": y, "p_is_nfunction": p_ok, "q_is_nfunction": q_ok }),
        failures,
    })
}

/// Analytic verdict where one is known.
fn expected_finite(mu: &WeightedMeasure, p: f64) -> Option<bool> {
    match mu.family() {
        MeasureFamily::PowerExponential { alpha, .. } => Some(campaign::powerexp_finite(alpha, p)),
        MeasureFamily::Power { alpha } => Some(alpha < p - 1.0),
        _ => None,
    }
}

fn muckenhoupt(c: &CampaignConfig) -> Result<Outcome> {
    let mu = c.measure()?;
    let s = c.settings()?;
    let r = hardy::muckenhoupt_check(&mu, c.p, &s)?;
    let expected = c.expect_finite.or_else(|| expected_finite(&mu, c.p));
    let verdict = if r.finite { "finite" } else { "infinite" };
    let mut failures = vec![];
    if let Some(e) = expected {
        if e != r.finite {
            failures.push(format!(
                "muckenhoupt: {mu}, p={}: verdict {verdict}, expected {} ({})",
                num(c.p),
                if e { "finite" } else { "infinite" },
                r.reason
            ));
        }
    }
    let mut t = Table::new("muckenhoupt", &["r", "a", "b", "product"]);
    for x in &r.samples {
        t.push(vec![num(x.r), num(x.a), num(x.b), num(x.product)]);
    }
    Ok(Outcome {
        command: "muckenhoupt".into(),
        tables: vec![t],
        summary: json!({
            "measure": mu.to_string(),
            "p": c.p,
            "verdict": verdict,
            "expected": expected.map(|e| if e { "finite" } else { "infinite" }),
            "report": r,
        }),
        failures,
    })
}

fn hardy_cmd(c: &CampaignConfig) -> Result<Outcome> {
    let mu = c.measure()?;
    match mu.family() {
        MeasureFamily::Power { alpha } => classical_hardy(c, &mu, alpha),
        _ => fitted_hardy(c, &mu),
    }
}

fn classical_hardy(c: &CampaignConfig, mu: &WeightedMeasure, alpha: f64) -> Result<Outcome> {
    let s = c.settings()?;
    let slack = c.tol.unwrap_or(1e-6);
    let bound = hardy::classical_bound(c.p, alpha);
    let mut members: Vec<TestFunction> = corpus(c, mu.domain())
        .into_iter()
        .filter(|u| !u.is_zero())
        .collect();
    let probe = hardy::near_extremal(c.p, alpha, 0.05)?;
    members.push(probe.clone());
    let ratios: Vec<hardy::HardyRatio> = members
        .par_iter()
        .map(|u| hardy::classical_hardy_ratio(u, c.p, mu, &s))
        .collect::<orlicz_gn::Result<_>>()?;
    let mut t = Table::new(
        "hardy",
        &[
            "function",
            "lhs",
            "rhs",
            "ratio",
            "bound",
            "fraction_of_bound",
            "ok",
        ],
    );
    let mut failures = vec![];
    let mut worst = ("".to_string(), 0.0f64);
    for (u, r) in members.iter().zip(&ratios) {
        let ok = r.ratio <= bound * (1.0 + slack);
        if !ok {
            failures.push(format!(
                "hardy: {} ratio {} exceeds bound {}",
                u.id(),
                num(r.ratio),
                num(bound)
            ));
        }
        if r.ratio > worst.1 {
            worst = (u.id(), r.ratio);
        }
        t.push(vec![
            u.id(),
            num(r.lhs),
            num(r.rhs),
            num(r.ratio),
            num(bound),
            num(r.ratio / bound),
            ok.to_string(),
        ]);
    }
    let probe_fraction = ratios.last().map(|r| r.ratio / bound);
    Ok(Outcome {
        command: "hardy".into(),
        tables: vec![t],
        summary: json!({
            "measure": mu.to_string(),
            "p": c.p,
            "bound": bound,
            "worst_function": worst.0,
            "worst_ratio": worst.1,
            "near_extremal": probe.id(),
            "near_extremal_fraction": probe_fraction,
        }),
        failures,
    })
}

fn fitted_hardy(c: &CampaignConfig, mu: &WeightedMeasure) -> Result<Outcome> {
    let s = c.settings()?;
    let mode = c.mode()?;
    let m = c.nfunction()?;
    let p_fn = NFunction::power(c.p)?;
    let opts = fit_options(c.theta_grid(), c.a_dilation, mode, &m, s);
    let fit = hardy::fit_hardy_constants(&p_fn, mu, &corpus(c, mu.domain()), &opts)?;
    let mut failures = vec![];
    if !(fit.k.is_finite() && fit.k1.is_finite() && fit.k2.is_finite()) {
        failures.push(format!(
            "hardy: no finite constant, worst member {}",
            fit.worst_function
        ));
    }
    let mut t = Table::new(
        "hardy",
        &["function", "pair", "scale", "lhs", "rhs1", "rhs2"],
    );
    for r in &fit.rows {
        t.push(vec![
            r.function.clone(),
            pair_name(r.pair).into(),
            num(r.scale),
            num(r.lhs),
            num(r.rhs1),
            num(r.rhs2),
        ]);
    }
    Ok(Outcome {
        command: "hardy".into(),
        tables: vec![t],
        summary: json!({
            "measure": mu.to_string(),
            "p_function": p_fn.label(),
            "mode": mode,
            "k": fit.k,
            "k1": fit.k1,
            "k2": fit.k2,
            "worst_function": fit.worst_function,
            "members": fit.members,
        }),
        failures,
    })
}

fn pair_name(p: PairKind) -> &'static str {
    match p {
        PairKind::Function => "function",
        PairKind::Derivative => "derivative",
    }
}

fn fit_options(
    theta: Vec<f64>,
    a: f64,
    mode: Mode,
    m: &NFunction,
    s: QuadratureSettings,
) -> HardyFitOptions {
    HardyFitOptions {
        a_dilation: a,
        remainder: (mode == Mode::H1).then(|| m.clone()),
        derivative_scales: theta
            .into_iter()
            .filter(|&th| mode == Mode::H || th <= 1.0)
            .map(|th| th / a)
            .collect(),
        settings: s,
    }
}

fn gn(c: &CampaignConfig) -> Result<Outcome> {
    let t = c.triple()?;
    let mu = c.measure()?;
    let mut camp = GnCampaign::new(t, mu, c.mode()?);
    camp.corpus = corpus(c, camp.mu.domain());
    camp.theta_grid = c.theta_grid();
    camp.a_dilation = c.a_dilation;
    camp.settings = c.settings()?;
    let r = campaign::run_gn(&camp)?;

    let mut failures = vec![];
    let mut modular = Table::new(
        "gn",
        &[
            "function",
            "theta",
            "lhs",
            "rhs_p",
            "rhs_q",
            "bound",
            "ratio",
            "satisfied",
            "minimizer",
        ],
    );
    for rep in &r.modular {
        for row in &rep.rows {
            if !row.satisfied {
                failures.push(format!(
                    "gn: {} at theta={}: lhs {} > bound {}",
                    rep.function,
                    num(row.theta),
                    num(row.lhs),
                    num(row.bound)
                ));
            }
            modular.push(vec![
                rep.function.clone(),
                num(row.theta),
                num(row.lhs),
                num(row.rhs_p),
                num(row.rhs_q),
                num(row.bound),
                num(row.ratio),
                row.satisfied.to_string(),
                row.minimizer.to_string(),
            ]);
        }
    }
    let mut norms = Table::new(
        "gn_norms",
        &[
            "function",
            "lhs",
            "n2",
            "n0",
            "rhs_product",
            "rhs_linear",
            "satisfied",
        ],
    );
    for row in &r.norms {
        if !row.satisfied {
            failures.push(format!(
                "gn_norms: {}: {} > {} + {}",
                row.function,
                num(row.lhs),
                num(row.rhs_product),
                num(row.rhs_linear)
            ));
        }
        norms.push(vec![
            row.function.clone(),
            num(row.lhs),
            num(row.n2),
            num(row.n0),
            num(row.rhs_product),
            num(row.rhs_linear),
            row.satisfied.to_string(),
        ]);
    }
    if !r.corruption_detected() {
        failures.push(format!(
            "gn: dividing B by {} produced no violation",
            num(camp.corruption)
        ));
    }
    let mut fit = Table::new(
        "gn_hardy",
        &["function", "pair", "scale", "lhs", "rhs1", "rhs2"],
    );
    for row in &r.hardy.rows {
        fit.push(vec![
            row.function.clone(),
            pair_name(row.pair).into(),
            num(row.scale),
            num(row.lhs),
            num(row.rhs1),
            num(row.rhs2),
        ]);
    }
    let summary = json!({
        "mode": r.mode,
        "measure": r.measure,
        "triple": r.triple,
        "indices": r.indices,
        "hardy": { "k": r.hardy.k, "k1": r.hardy.k1, "k2": r.hardy.k2,
                   "worst_function": r.hardy.worst_function, "members": r.hardy.members },
        "alpha_n": r.alpha.alpha,
        "alpha_worst_function": r.alpha.worst_function,
        "ledger": r.ledger,
        "corrupted_ledger": r.corrupted_ledger,
        "corrupted_violations": r.corrupted_violations,
        "modular_ok": r.modular_ok(),
        "norms_ok": r.norms_ok(),
        "norms_skipped": r.norms_skipped,
        "worst": r.modular.iter().map(|m| json!({
            "function": m.function, "ratio": m.worst_ratio, "theta": m.worst_theta,
        })).collect::<Vec<_>>(),
        "notes": r.notes,
    });
    Ok(Outcome {
        command: "gn".into(),
        tables: vec![modular, norms, fit],
        summary,
        failures,
    })
}

fn sweep(c: &CampaignConfig) -> Result<Outcome> {
    let s = c.settings()?;
    let sw = &c.sweep;
    let rows = campaign::muckenhoupt_sweep(&sw.alphas, &sw.betas, &sw.ps, &s)?;
    let fits: Vec<Option<(f64, f64, f64)>> = if sw.hardy_fit {
        rows.par_iter()
            .map(|r| {
                if !r.report.finite {
                    return Ok(None);
                }
                let mu = WeightedMeasure::power_exponential(r.alpha, r.beta)?;
                let p_fn = NFunction::power(r.p)?;
                let members = corpus(c, mu.domain());
                let h = fit_options(c.theta_grid(), c.a_dilation, Mode::H, &p_fn, s);
                let h1 = fit_options(c.theta_grid(), c.a_dilation, Mode::H1, &p_fn, s);
                let k = hardy::fit_hardy_constants(&p_fn, &mu, &members, &h)?.k;
                let f1 = hardy::fit_hardy_constants(&p_fn, &mu, &members, &h1)?;
                Ok(Some((k, f1.k1, f1.k2)))
            })
            .collect::<orlicz_gn::Result<_>>()?
    } else {
        vec![None; rows.len()]
    };
    let mut t = Table::new(
        "sweep",
        &[
            "family", "p", "alpha", "beta", "verdict", "sup", "r_star", "k", "k1", "k2",
            "expected", "agrees",
        ],
    );
    let mut failures = vec![];
    let word = |f: bool| if f { "finite" } else { "infinite" };
    for (r, fit) in rows.iter().zip(&fits) {
        if !r.agrees() {
            failures.push(format!(
                "sweep: alpha={} beta={} p={}: verdict {}, expected {} ({})",
                num(r.alpha),
                num(r.beta),
                num(r.p),
                word(r.report.finite),
                word(r.expected_finite),
                r.report.reason
            ));
        }
        let (k, k1, k2) = match fit {
            Some((a, b, c)) => (num(*a), num(*b), num(*c)),
            None => Default::default(),
        };
        t.push(vec![
            "powerexp".into(),
            num(r.p),
            num(r.alpha),
            num(r.beta),
            word(r.report.finite).into(),
            num(r.report.sup_value),
            num(r.report.sup_location),
            k,
            k1,
            k2,
            word(r.expected_finite).into(),
            r.agrees().to_string(),
        ]);
    }
    let agree = rows.iter().filter(|r| r.agrees()).count();
    Ok(Outcome {
        command: "sweep".into(),
        tables: vec![t],
        summary: json!({ "cells": rows.len(), "agreeing": agree }),
        failures,
    })
}
