//! Hardy-type inequalities on weighted half-lines: the Muckenhoupt
//! criterion, the classical power-weight constant, power-exponential
//! asymptotics and empirical constants for (H) and (H1).

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::TestFunction;
use crate::grid::{golden_min, ls_slope};
use crate::measure::{MeasureFamily, WeightedMeasure};
use crate::nfunc::NFunction;
use crate::norms::{modular, Channel, Order, Profile};
use crate::quad::{self, QuadratureSettings};
use crate::{Error, Result};

/// Left end of the radius grid.
pub const R_MIN: f64 = 1e-6;
const POINTS_PER_DECADE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuckenhouptSample {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    /// `A(r)^{1/p} B(r)^{(p-1)/p}`
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuckenhouptReport {
    pub p: f64,
    /// Grid supremum; `+∞` when the criterion fails.
    pub sup_value: f64,
    pub sup_location: f64,
    pub finite: bool,
    /// Log-log slopes of `A` and `B` over the last decade of the grid.
    pub a_tail_exponent: f64,
    pub b_tail_exponent: f64,
    pub r_max: f64,
    /// Set for weights without an asymptotic tail certificate.
    pub grid_limited: bool,
    pub reason: String,
    pub samples: Vec<MuckenhouptSample>,
}

/// Largest radius at which `e^{r^β}`-type factors stay well inside `f64`.
pub fn largest_log_safe_radius(beta: f64, p: f64) -> f64 {
    (700.0 * (p - 1.0).min(1.0)).powf(1.0 / beta)
}

fn r_max_for(mu: &WeightedMeasure, p: f64) -> (f64, bool) {
    match mu.family() {
        MeasureFamily::PowerExponential { beta, .. } => (
            (600.0 * (p - 1.0).min(1.0)).powf(1.0 / beta).min(1e6),
            false,
        ),
        MeasureFamily::Power { .. } | MeasureFamily::Lebesgue => (1e6, false),
        _ => (1e4, true),
    }
}

fn radius_grid(r_max: f64) -> Vec<f64> {
    let decades = (r_max / R_MIN).log10();
    let n = ((decades * POINTS_PER_DECADE as f64).ceil() as usize).max(2);
    let (a, b) = (R_MIN.ln(), r_max.ln());
    (0..=n)
        .map(|i| {
            if i == n {
                r_max
            } else {
                (a + (b - a) * i as f64 / n as f64).exp()
            }
        })
        .collect()
}

/// Whether `∫_0 e^{φ/(p-1)}` diverges, judged from the growth of `φ` near 0:
/// the integrand behaves like `x^{-s}` with `s` estimated between
/// `1e-200` and `1e-100`.
fn b_diverges_at_zero(mu: &WeightedMeasure, p: f64) -> bool {
    let (x1, x2) = (1e-200f64, 1e-100f64);
    let s = (mu.phi(x1) - mu.phi(x2)) / ((p - 1.0) * (x2 / x1).ln());
    s >= 1.0 - 1e-9
}

/// Decides the Muckenhoupt condition for the Hardy inequality
/// `∫ |u|^p dν ≤ C ∫ |u'|^p dμ` on `(0, ∞)`.
///
/// `ν = |φ'|^p e^{-φ} dx` in general; for power weights the classical
/// normalisation `ν = t^{α-p} dt` is used so that `α = 0` is not degenerate.
pub fn muckenhoupt_check(
    mu: &WeightedMeasure,
    p: f64,
    s: &QuadratureSettings,
) -> Result<MuckenhouptReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::BadParams(format!(
            "Muckenhoupt exponent must exceed 1 (got {p})"
        )));
    }
    if mu.domain() != (0.0, f64::INFINITY) {
        return Err(Error::BadParams(format!(
            "Muckenhoupt check needs the half-line (0, ∞), got {:?}",
            mu.domain()
        )));
    }
    let s = s.relative_only();
    let nu = |x: f64| -> f64 {
        match mu.family() {
            MeasureFamily::Power { alpha } => x.powf(alpha - p),
            _ => {
                let g = mu.phi_prime(x).abs();
                if g == 0.0 {
                    0.0
                } else {
                    (p * g.ln() - mu.phi(x)).exp()
                }
            }
        }
    };
    let bw = |x: f64| (mu.phi(x) / (p - 1.0)).exp();
    let (r_max, grid_limited) = r_max_for(mu, p);
    let rs = radius_grid(r_max);
    let infinite = |reason: String, samples: Vec<MuckenhouptSample>| MuckenhouptReport {
        p,
        sup_value: f64::INFINITY,
        sup_location: f64::NAN,
        finite: false,
        a_tail_exponent: f64::NAN,
        b_tail_exponent: f64::NAN,
        r_max,
        grid_limited,
        reason,
        samples,
    };

    if b_diverges_at_zero(mu, p) {
        return Ok(infinite("B(r) diverges at 0".into(), vec![]));
    }
    let b0 = match quad::integrate(bw, 0.0, rs[0], &mu.breakpoints(), &s) {
        Ok(v) => v.value,
        Err(Error::NonConvergent { .. }) => {
            return Ok(infinite("B(r) diverges at 0 (quadrature)".into(), vec![]))
        }
        Err(e) => return Err(e),
    };
    let a_tail = match quad::integrate(nu, r_max, f64::INFINITY, &[], &s) {
        Ok(v) => v.value,
        Err(Error::NonConvergent { .. }) => {
            return Ok(infinite("A(r) diverges at infinity".into(), vec![]))
        }
        Err(e) => return Err(e),
    };
    let bps = mu.breakpoints();
    let pieces: Vec<(f64, f64)> = rs
        .par_windows(2)
        .map(|w| {
            let a = quad::integrate(nu, w[0], w[1], &bps, &s)?.value;
            let b = quad::integrate(bw, w[0], w[1], &bps, &s)?.value;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;

    let n = rs.len();
    let mut a_cum = vec![0.0; n];
    a_cum[n - 1] = a_tail;
    for i in (0..n - 1).rev() {
        a_cum[i] = a_cum[i + 1] + pieces[i].0;
    }
    let mut b_cum = vec![0.0; n];
    b_cum[0] = b0;
    for i in 1..n {
        b_cum[i] = b_cum[i - 1] + pieces[i - 1].1;
    }
    let samples: Vec<MuckenhouptSample> = (0..n)
        .map(|i| {
            let (a, b) = (a_cum[i], b_cum[i]);
            let product = if a == 0.0 || b == 0.0 {
                0.0
            } else {
                (a.ln() / p + b.ln() * (p - 1.0) / p).exp()
            };
            MuckenhouptSample {
                r: rs[i],
                a,
                b,
                product,
            }
        })
        .collect();
    let (imax, sup) = samples.iter().enumerate().fold((0, 0.0), |acc, (i, sm)| {
        if sm.product > acc.1 {
            (i, sm.product)
        } else {
            acc
        }
    });

    let last_decade: Vec<&MuckenhouptSample> = samples[n - 1 - POINTS_PER_DECADE.min(n - 1)..]
        .iter()
        .collect();
    let tail_slope = |f: &dyn Fn(&MuckenhouptSample) -> f64| {
        let pts: Vec<(f64, f64)> = last_decade
            .iter()
            .filter(|sm| f(sm) > 0.0)
            .map(|sm| (sm.r.ln(), f(sm).ln()))
            .collect();
        if pts.len() < 2 {
            return f64::NAN;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        ls_slope(&xs, &ys)
    };
    let a_tail_exponent = tail_slope(&|sm| sm.a);
    let b_tail_exponent = tail_slope(&|sm| sm.b);

    // Tail certificate: the product must not keep growing over the last two decades.
    let two = (2 * POINTS_PER_DECADE).min(n - 1);
    let tail = &samples[n - 1 - two..];
    let growing = tail.windows(2).all(|w| w[1].product >= w[0].product)
        && tail[two].product > 1.5 * tail[0].product;
    if growing {
        return Ok(MuckenhouptReport {
            sup_location: samples[imax].r,
            a_tail_exponent,
            b_tail_exponent,
            ..infinite(
                "A(r)B(r)^(p-1) grows over the last two decades".into(),
                samples,
            )
        });
    }
    Ok(MuckenhouptReport {
        p,
        sup_value: sup,
        sup_location: samples[imax].r,
        finite: true,
        a_tail_exponent,
        b_tail_exponent,
        r_max,
        grid_limited,
        reason: if grid_limited {
            "grid supremum only (no tail certificate)".into()
        } else {
            "bounded".into()
        },
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRatios {
    pub r: f64,
    /// `A(r) / (r^{(β-1)(p-1)+α} e^{-r^β})`
    pub a_ratio: f64,
    /// `B(r) / (r^{-α/(p-1)-(β-1)} e^{r^β/(p-1)})`
    pub b_ratio: f64,
    pub a_limit: f64,
    pub b_limit: f64,
    /// `e^{-r^β}` would underflow if formed directly.
    pub underflow: bool,
}

/// Ratios of `A(r) = ∫_r^∞ x^{(β-1)p+α} e^{-x^β} dx` and
/// `B(r) = ∫_0^r x^{-α/(p-1)} e^{x^β/(p-1)} dx` to their large-`r`
/// asymptotic forms, evaluated with the exponentials factored out.
pub fn powerexp_asymptotics(
    alpha: f64,
    beta: f64,
    p: f64,
    r: f64,
    s: &QuadratureSettings,
) -> Result<AsymptoticRatios> {
    if !(alpha >= 0.0 && beta > 0.0 && p > 1.0 && r.is_finite()) {
        return Err(Error::BadParams(format!(
            "need alpha >= 0, beta > 0, p > 1 (got {alpha}, {beta}, {p})"
        )));
    }
    if r < 5.0 {
        return Err(Error::BadParams(format!(
            "asymptotic regime needs r >= 5 (got {r})"
        )));
    }
    let s = s.relative_only();
    let rb = r.powf(beta);
    let ln_r = r.ln();

    let a = (beta - 1.0) * p + alpha;
    let a_shift = a + 1.0 - beta;
    let fa = |x: f64| (a * x.ln() - a_shift * ln_r + rb - x.powf(beta)).exp();
    let a_ratio = quad::integrate(fa, r, f64::INFINITY, &[], &s)?.value;

    let c = 1.0 / (p - 1.0);
    let ab = alpha * c;
    let b_shift = -ab - (beta - 1.0);
    let fb = |x: f64| (-ab * x.ln() + c * (x.powf(beta) - rb) - b_shift * ln_r).exp();
    let width = 1.0 / (beta * c * r.powf(beta - 1.0));
    let breaks: Vec<f64> = [1.0, 10.0, 100.0]
        .iter()
        .map(|k| r - k * width)
        .filter(|&x| x > 0.0)
        .collect();
    let b_ratio = quad::integrate(fb, 0.0, r, &breaks, &s)?.value;

    Ok(AsymptoticRatios {
        r,
        a_ratio,
        b_ratio,
        a_limit: 1.0 / beta,
        b_limit: (p - 1.0) / beta,
        underflow: rb > 708.0,
    })
}

/// `(p/|α-p+1|)^p`.
pub fn classical_bound(p: f64, alpha: f64) -> f64 {
    (p / (alpha - p + 1.0).abs()).powf(p)
}

/// `(pα/|α-p+1|)^p`, the constant of (H) for `P = λ^p` and `x^α dx`.
pub fn weighted_bound(p: f64, alpha: f64) -> f64 {
    (p * alpha / (alpha - p + 1.0).abs()).powf(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub bound: f64,
}

/// Integrals of [`classical_hardy_ratio`] run over `t ∈ [e^{-300}, e^{300}]`.
pub const LOG_RANGE: f64 = 300.0;

/// `∫|u|^p t^{α-p} dt / ∫|u'|^p t^α dt` for the power weight `mu = t^α dt`.
pub fn classical_hardy_ratio(
    u: &TestFunction,
    p: f64,
    mu: &WeightedMeasure,
    s: &QuadratureSettings,
) -> Result<HardyRatio> {
    let MeasureFamily::Power { alpha } = mu.family() else {
        return Err(Error::BadParams(
            "classical Hardy ratio needs a power weight".into(),
        ));
    };
    if !(p > 1.0) || (alpha - p + 1.0).abs() < 1e-12 {
        return Err(Error::BadParams(format!(
            "need p > 1 and alpha != p - 1 (got {p}, {alpha})"
        )));
    }
    let (a, b) = u.support();
    let (a, b) = (a.max(0.0), b);
    let s = s.relative_only();
    // In y = ln t power tails become exponential ones.
    let weighted = |v: f64, y: f64, w: f64| {
        if v == 0.0 {
            0.0
        } else {
            (p * v.abs().ln() + w * y).exp()
        }
    };
    let (ya, yb) = (a.ln().max(-LOG_RANGE), b.ln().min(LOG_RANGE));
    let lhs = quad::integrate(
        |y| {
            let t = y.exp();
            weighted(u.u(t), y, alpha - p + 1.0)
        },
        ya,
        yb,
        &[],
        &s,
    )?
    .value;
    let rhs = quad::integrate(
        |y| {
            let t = y.exp();
            weighted(u.u1(t), y, alpha + 1.0)
        },
        ya,
        yb,
        &[],
        &s,
    )?
    .value;
    if rhs == 0.0 {
        if lhs == 0.0 {
            return Ok(HardyRatio {
                lhs,
                rhs,
                ratio: 0.0,
                bound: classical_bound(p, alpha),
            });
        }
        return Err(Error::DivisionByZero {
            function: u.id(),
            lhs,
        });
    }
    Ok(HardyRatio {
        lhs,
        rhs,
        ratio: lhs / rhs,
        bound: classical_bound(p, alpha),
    })
}

/// Near-extremal member `t^σ/cosh(ε ln t)`, `σ = (p-1-α)/p`: pointwise
/// `|u|^p t^{-p} / |u'|^p = |σ - ε tanh(ε ln t)|^{-p}`, which tends to the
/// classical bound as `ε → 0`.
pub fn near_extremal(p: f64, alpha: f64, eps: f64) -> Result<TestFunction> {
    if !(p > 1.0) || (alpha - p + 1.0).abs() < 1e-12 {
        return Err(Error::BadParams(format!(
            "need p > 1 and alpha != p - 1 (got {p}, {alpha})"
        )));
    }
    TestFunction::power_sech((p - 1.0 - alpha) / p, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// `(u, u')`
    Function,
    /// `(s|u'|, s|u''|)`
    Derivative,
}

/// One Hardy test: `∫P(|φ'||f|)dμ` against `∫P(A|f'|)dμ` and `∫M(|f|)dμ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyRow {
    pub function: String,
    pub pair: PairKind,
    pub scale: f64,
    pub lhs: f64,
    pub rhs1: f64,
    pub rhs2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyFit {
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    pub a_dilation: f64,
    pub with_remainder: bool,
    pub worst_function: String,
    pub members: usize,
    pub rows: Vec<HardyRow>,
}

#[derive(Debug, Clone)]
pub struct HardyFitOptions {
    pub a_dilation: f64,
    /// `M` of the (H1) remainder; `None` fits (H).
    pub remainder: Option<NFunction>,
    /// Scales `s` for derivative pairs `(s|u'|, s|u''|)`; empty for plain `(u, u')`.
    pub derivative_scales: Vec<f64>,
    pub settings: QuadratureSettings,
}

impl Default for HardyFitOptions {
    fn default() -> Self {
        Self {
            a_dilation: 1.0,
            remainder: None,
            derivative_scales: vec![],
            settings: QuadratureSettings::default(),
        }
    }
}

fn pair_row(
    u: &TestFunction,
    pair: PairKind,
    scale: f64,
    p_fn: &NFunction,
    mu: &WeightedMeasure,
    o: &HardyFitOptions,
) -> Result<HardyRow> {
    let s = &o.settings;
    let (f, df) = match pair {
        PairKind::Function => (Channel::new(u, Order::Value), Channel::new(u, Order::First)),
        PairKind::Derivative => (
            Channel::new(u, Order::First).scaled(scale),
            Channel::new(u, Order::Second).scaled(scale),
        ),
    };
    let lhs = modular(&f.with_grad_phi(), p_fn, mu, s)?.value;
    let rhs1 = modular(&df.scaled(o.a_dilation), p_fn, mu, s)?.value;
    let rhs2 = match &o.remainder {
        Some(m) => modular(&f, m, mu, s)?.value,
        None => 0.0,
    };
    Ok(HardyRow {
        function: u.id(),
        pair,
        scale,
        lhs,
        rhs1,
        rhs2,
    })
}

/// Whether derivative pairs at different scales are redundant.
fn scale_invariant(p_fn: &NFunction, remainder: Option<&NFunction>) -> bool {
    match (
        p_fn.homogeneous_degree(),
        remainder.map(NFunction::homogeneous_degree),
    ) {
        (Some(_), None) => true,
        (Some(a), Some(Some(b))) => a == b,
        _ => false,
    }
}

/// Empirical constants of (H) (`K`) or (H1) (`K₁`, `K₂`) over `corpus`.
pub fn fit_hardy_constants(
    p_fn: &NFunction,
    mu: &WeightedMeasure,
    corpus: &[TestFunction],
    o: &HardyFitOptions,
) -> Result<HardyFit> {
    if corpus.is_empty() {
        return Err(Error::BadParams("empty corpus".into()));
    }
    if !(o.a_dilation > 0.0) {
        return Err(Error::BadParams(format!(
            "A must be positive (got {})",
            o.a_dilation
        )));
    }
    let scales: Vec<f64> = if o.derivative_scales.is_empty() {
        vec![]
    } else if scale_invariant(p_fn, o.remainder.as_ref()) {
        vec![1.0]
    } else {
        o.derivative_scales.clone()
    };
    let mut jobs: Vec<(&TestFunction, PairKind, f64)> = Vec::new();
    for u in corpus.iter().filter(|u| !u.is_zero()) {
        jobs.push((u, PairKind::Function, 1.0));
        for &sc in &scales {
            jobs.push((u, PairKind::Derivative, sc));
        }
    }
    let rows: Vec<HardyRow> = jobs
        .par_iter()
        .map(|&(u, pk, sc)| pair_row(u, pk, sc, p_fn, mu, o))
        .collect::<Result<_>>()?;
    let rows: Vec<HardyRow> = rows
        .into_iter()
        .filter(|r| !(r.lhs == 0.0 && r.rhs1 == 0.0 && r.rhs2 == 0.0))
        .collect();
    let members = corpus.iter().filter(|u| !u.is_zero()).count();

    for r in &rows {
        let rhs_zero = r.rhs1 == 0.0 && (o.remainder.is_none() || r.rhs2 == 0.0);
        if rhs_zero && r.lhs > 0.0 {
            return Err(Error::DivisionByZero {
                function: r.function.clone(),
                lhs: r.lhs,
            });
        }
    }

    if o.remainder.is_none() {
        let (mut k, mut worst) = (0.0, String::new());
        for r in &rows {
            if r.rhs1 > 0.0 && r.lhs / r.rhs1 > k {
                k = r.lhs / r.rhs1;
                worst = r.function.clone();
            }
        }
        return Ok(HardyFit {
            k,
            k1: k,
            k2: 0.0,
            a_dilation: o.a_dilation,
            with_remainder: false,
            worst_function: worst,
            members,
            rows,
        });
    }

    // min K₁ + K₂ subject to lhs ≤ K₁·rhs1 + K₂·rhs2; K₂(K₁) is convex piecewise linear.
    let k2_of = |k1: f64| {
        rows.iter().fold(0.0f64, |acc, r| {
            let resid = r.lhs - k1 * r.rhs1;
            if resid <= 0.0 {
                acc
            } else if r.rhs2 == 0.0 {
                f64::INFINITY
            } else {
                acc.max(resid / r.rhs2)
            }
        })
    };
    let k1_floor = rows
        .iter()
        .filter(|r| r.rhs2 == 0.0 && r.rhs1 > 0.0)
        .map(|r| r.lhs / r.rhs1)
        .fold(0.0, f64::max);
    let k1_ceil = rows
        .iter()
        .filter(|r| r.rhs1 > 0.0)
        .map(|r| r.lhs / r.rhs1)
        .fold(k1_floor, f64::max);
    let mut candidates = vec![k1_floor, k1_ceil];
    if k1_ceil > k1_floor {
        let (k1, _) = golden_min(|k| k + k2_of(k), k1_floor, k1_ceil, 1e-14);
        candidates.push(k1);
    }
    let (k1, k2) = candidates.into_iter().map(|k1| (k1, k2_of(k1))).fold(
        (f64::NAN, f64::INFINITY),
        |best, c| {
            if c.0 + c.1 < best.0 + best.1 || best.0.is_nan() {
                c
            } else {
                best
            }
        },
    );
    let worst = rows
        .iter()
        .max_by(|a, b| {
            let sa = a.lhs / (k1 * a.rhs1 + k2 * a.rhs2);
            let sb = b.lhs / (k1 * b.rhs1 + k2 * b.rhs2);
            sa.total_cmp(&sb)
        })
        .map(|r| r.function.clone())
        .unwrap_or_default();
    Ok(HardyFit {
        k: k1,
        k1,
        k2,
        a_dilation: o.a_dilation,
        with_remainder: true,
        worst_function: worst,
        members,
        rows,
    })
}

/// `∫P(|φ'||f|)dμ`, `∫P(A|f'|)dμ` for an arbitrary profile pair.
pub fn hardy_terms<F: Profile, G: Profile>(
    f_grad_phi: &F,
    a_df: &G,
    p_fn: &NFunction,
    mu: &WeightedMeasure,
    s: &QuadratureSettings,
) -> Result<(f64, f64)> {
    Ok((
        modular(f_grad_phi, p_fn, mu, s)?.value,
        modular(a_df, p_fn, mu, s)?.value,
    ))
}
