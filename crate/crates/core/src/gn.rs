//! Gagliardo–Nirenberg checks: the constant ledger, modular and norm
//! inequalities over a corpus, θ-minimisation and the calibration of `αₙ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::TestFunction;
use crate::hardy::HardyFit;
use crate::measure::WeightedMeasure;
use crate::nfunc::{NFunction, SimonenkoIndices};
use crate::norms::{luxemburg_norm, modular, Channel};
use crate::quad::QuadratureSettings;
use crate::triple::YoungTriple;
use crate::{Error, Result};

/// Relative slack allowed in `lhs ≤ bound`.
pub const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Hardy inequality without remainder; any `θ > 0`.
    H,
    /// Hardy inequality with an `M`-remainder; `θ ∈ (0, 1]`.
    H1,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::H => "h",
            Mode::H1 => "h1",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h" => Ok(Mode::H),
            "h1" => Ok(Mode::H1),
            other => Err(Error::BadParams(format!(
                "unknown mode {other:?} (expected h or h1)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantLedger {
    pub mode: Mode,
    pub alpha_n: f64,
    pub a_dilation: f64,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    /// `c̄(1/A)`
    pub c_bar: f64,
    pub l: f64,
    pub b: f64,
    pub l_tilde: f64,
    pub l1: f64,
    pub l2: f64,
}

impl ConstantLedger {
    pub fn mode_h(k: f64, a: f64, alpha_n: f64) -> Self {
        Self::fill(Mode::H, k, k, 0.0, 1.0, a, alpha_n)
    }

    pub fn mode_h1(k1: f64, k2: f64, a: f64, alpha_n: f64, idx: &SimonenkoIndices) -> Self {
        Self::fill(Mode::H1, k1, k1, k2, idx.scale_bound(1.0 / a), a, alpha_n)
    }

    fn fill(mode: Mode, k: f64, k1: f64, k2: f64, c_bar: f64, a: f64, alpha_n: f64) -> Self {
        let l = k1 + 1.0;
        let b = match mode {
            Mode::H => 2.0 * (alpha_n + a),
            Mode::H1 => 2.0 * (alpha_n + a + a * c_bar * k2),
        };
        let l_tilde = 2.0 * (l + 2.0) * b.sqrt();
        Self {
            mode,
            alpha_n,
            a_dilation: a,
            k,
            k1,
            k2,
            c_bar,
            l,
            b,
            l_tilde,
            l1: l_tilde,
            l2: 2.0 * (l + 2.0) * b,
        }
    }

    /// The derived constants recomputed from the inputs.
    pub fn recompute(&self) -> Self {
        Self::fill(
            self.mode,
            self.k,
            self.k1,
            self.k2,
            self.c_bar,
            self.a_dilation,
            self.alpha_n,
        )
    }

    /// Same ledger with `B` divided by `factor`; used to check that the
    /// inequalities are sensitive to `B`.
    pub fn with_b_divided(&self, factor: f64) -> Self {
        Self {
            b: self.b / factor,
            ..*self
        }
    }
}

/// Ledger from a Hardy fit; the mode follows the fit.
pub fn build_ledger(
    fit: &HardyFit,
    alpha_n: f64,
    idx: &SimonenkoIndices,
) -> Result<ConstantLedger> {
    if fit.members == 0 || fit.rows.is_empty() {
        return Err(Error::MissingFit("Hardy fit has no members".into()));
    }
    if !(fit.k.is_finite() && fit.k2.is_finite()) {
        return Err(Error::MissingFit(format!(
            "Hardy constants are not finite (K1 = {}, K2 = {})",
            fit.k1, fit.k2
        )));
    }
    if !(alpha_n >= 0.0 && alpha_n.is_finite()) {
        return Err(Error::BadParams(format!(
            "alpha_n must be finite and nonnegative (got {alpha_n})"
        )));
    }
    Ok(if fit.with_remainder {
        ConstantLedger::mode_h1(fit.k1, fit.k2, fit.a_dilation, alpha_n, idx)
    } else {
        ConstantLedger::mode_h(fit.k, fit.a_dilation, alpha_n)
    })
}

/// `{0.05 k : k = 1..20}`.
pub fn default_theta_grid() -> Vec<f64> {
    (1..=20).map(|k| 0.05 * k as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaMin {
    pub theta: f64,
    pub value: f64,
    pub bound_ok: bool,
}

/// Minimises `θb + c/θ` over `θ > 0`, or over `(0, 1]` when `restricted`.
/// A limit `θ → 0` or `θ → ∞` is reported as `0` or `∞`.
pub fn theta_minimize(b: f64, c: f64, restricted: bool) -> ThetaMin {
    let (theta, value) = match (b == 0.0, c == 0.0) {
        (true, true) => (1.0, 0.0),
        (false, true) => (0.0, 0.0),
        (true, false) if restricted => (1.0, c),
        (true, false) => (f64::INFINITY, 0.0),
        (false, false) => {
            let t = (c / b).sqrt();
            if restricted && t >= 1.0 {
                (1.0, b + c)
            } else {
                (t, 2.0 * (b * c).sqrt())
            }
        }
    };
    let cap = 2.0 * ((b * c).sqrt() + c);
    ThetaMin {
        theta,
        value,
        bound_ok: value <= cap * (1.0 + 1e-12),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnRow {
    pub theta: f64,
    pub lhs: f64,
    pub rhs_p: f64,
    pub rhs_q: f64,
    /// `L·rhs_p + rhs_q`
    pub bound: f64,
    pub ratio: f64,
    pub satisfied: bool,
    /// Row at the minimiser of the right-hand side.
    pub minimizer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnReport {
    pub function: String,
    pub rows: Vec<GnRow>,
    pub satisfied: bool,
    pub worst_ratio: f64,
    pub worst_theta: f64,
}

fn satisfied(lhs: f64, bound: f64) -> bool {
    lhs <= bound * (1.0 + SLACK) || lhs == 0.0
}

fn ratio(lhs: f64, bound: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if bound == 0.0 {
        f64::INFINITY
    } else {
        lhs / bound
    }
}

/// `∫M(|u'|) ≤ L∫P(θ|u''|) + ∫Q((B/θ)|u|)` at every `θ` of the grid
/// (only `θ ≤ 1` in mode H1), plus a row at the minimiser of the right-hand
/// side when `P` and `Q` are homogeneous.
pub fn gn_modular_check(
    u: &TestFunction,
    t: &YoungTriple,
    mu: &WeightedMeasure,
    ledger: &ConstantLedger,
    theta_grid: &[f64],
    s: &QuadratureSettings,
) -> Result<GnReport> {
    let thetas: Vec<f64> = theta_grid
        .iter()
        .copied()
        .filter(|&th| th > 0.0 && (ledger.mode == Mode::H || th <= 1.0))
        .collect();
    if thetas.is_empty() {
        return Err(Error::BadParams(
            "theta grid has no admissible points".into(),
        ));
    }
    let lhs = modular(&Channel::first(u), &t.m, mu, s)?.value;
    let row = |theta: f64, minimizer: bool| -> Result<GnRow> {
        let rhs_p = modular(&Channel::second(u).scaled(theta), &t.p, mu, s)?.value;
        let rhs_q = modular(&Channel::value(u).scaled(ledger.b / theta), &t.q, mu, s)?.value;
        let bound = ledger.l * rhs_p + rhs_q;
        Ok(GnRow {
            theta,
            lhs,
            rhs_p,
            rhs_q,
            bound,
            ratio: ratio(lhs, bound),
            satisfied: satisfied(lhs, bound),
            minimizer,
        })
    };
    let mut rows: Vec<GnRow> = thetas
        .iter()
        .map(|&th| row(th, false))
        .collect::<Result<_>>()?;
    if let (Some(a), Some(b)) = (t.p.homogeneous_degree(), t.q.homogeneous_degree()) {
        // RHS(θ) = L·θ^a·R_p(1) + θ^{-b}·R_q(1)
        let r1 = row(1.0, true)?;
        if r1.rhs_p > 0.0 && r1.rhs_q > 0.0 {
            let mut th = (b * r1.rhs_q / (a * ledger.l * r1.rhs_p)).powf(1.0 / (a + b));
            if ledger.mode == Mode::H1 {
                th = th.min(1.0);
            }
            rows.push(row(th, true)?);
        }
    }
    let worst = rows
        .iter()
        .max_by(|x, y| x.ratio.total_cmp(&y.ratio))
        .cloned()
        .expect("rows are nonempty");
    Ok(GnReport {
        function: u.id(),
        satisfied: rows.iter().all(|r| r.satisfied),
        worst_ratio: worst.ratio,
        worst_theta: worst.theta,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub function: String,
    /// `‖u'‖_M`
    pub lhs: f64,
    /// `‖u''‖_P`
    pub n2: f64,
    /// `‖u‖_Q`
    pub n0: f64,
    /// Constant times `√(n2·n0)`.
    pub rhs_product: f64,
    /// `L₂·n0` in mode H1, else 0.
    pub rhs_linear: f64,
    pub satisfied: bool,
}

/// `‖u'‖_M ≤ L̃√(‖u''‖_P‖u‖_Q)` (mode H) or
/// `‖u'‖_M ≤ L₁√(‖u''‖_P‖u‖_Q) + L₂‖u‖_Q` (mode H1).
pub fn gn_norm_check(
    u: &TestFunction,
    t: &YoungTriple,
    mu: &WeightedMeasure,
    ledger: &ConstantLedger,
    s: &QuadratureSettings,
) -> Result<NormRow> {
    let (p_ok, q_ok) = t.nfunction_flags();
    if !(p_ok && q_ok) {
        return Err(Error::NotNFunctions(format!(
            "P is {}an N-function, Q is {}an N-function",
            if p_ok { "" } else { "not " },
            if q_ok { "" } else { "not " }
        )));
    }
    let lhs = luxemburg_norm(&Channel::first(u), &t.m, mu, s)?;
    let n2 = luxemburg_norm(&Channel::second(u), &t.p, mu, s)?;
    let n0 = luxemburg_norm(&Channel::value(u), &t.q, mu, s)?;
    let root = (n2 * n0).sqrt();
    let (rhs_product, rhs_linear) = match ledger.mode {
        Mode::H => (ledger.l_tilde * root, 0.0),
        Mode::H1 => (ledger.l1 * root, ledger.l2 * n0),
    };
    Ok(NormRow {
        function: u.id(),
        lhs,
        n2,
        n0,
        rhs_product,
        rhs_linear,
        satisfied: satisfied(lhs, rhs_product + rhs_linear),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaMember {
    pub function: String,
    pub i: f64,
    pub i1: f64,
    pub i2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCalibration {
    pub alpha: f64,
    pub worst_function: String,
    pub members: Vec<AlphaMember>,
}

/// `I = ∫M(|u'|)`, `I₁ = ∫M(|u'|)/|u'|²·|u''||u|`, `I₂ = ∫M(|u'|)/|u'|·|φ'||u|`,
/// the last two over `{u' ≠ 0}`.
pub fn alpha_integrals(
    u: &TestFunction,
    m: &NFunction,
    mu: &WeightedMeasure,
    s: &QuadratureSettings,
) -> Result<AlphaMember> {
    let (a, b) = u.support();
    let over = |f: &dyn Fn(f64, f64, f64, f64) -> f64| -> Result<f64> {
        Ok(mu
            .integrate_over(
                |x| {
                    let (v, v1, v2) = u.jet(x);
                    let g = v1.abs();
                    if g == 0.0 {
                        0.0
                    } else {
                        f(x, v.abs(), g, v2.abs())
                    }
                },
                a,
                b,
                &[],
                s,
            )?
            .value)
    };
    let i = over(&|_, _, g, _| m.value(g))?;
    let i1 = over(&|_, v, g, v2| {
        if v == 0.0 || v2 == 0.0 {
            0.0
        } else {
            m.value(g) / g / g * v2 * v
        }
    })?;
    let i2 = over(&|x, v, g, _| {
        if v == 0.0 {
            0.0
        } else {
            m.value(g) / g * mu.phi_prime(x).abs() * v
        }
    })?;
    Ok(AlphaMember {
        function: u.id(),
        i,
        i1,
        i2,
    })
}

/// Smallest `α ≥ 0` with `I ≤ α·I₁ + I₂` on every member.
pub fn calibrate_alpha_n(
    corpus: &[TestFunction],
    m: &NFunction,
    mu: &WeightedMeasure,
    s: &QuadratureSettings,
) -> Result<AlphaCalibration> {
    let members: Vec<AlphaMember> = corpus
        .par_iter()
        .map(|u| alpha_integrals(u, m, mu, s))
        .collect::<Result<_>>()?;
    let (mut alpha, mut worst) = (0.0f64, String::new());
    for r in &members {
        if r.i == 0.0 {
            continue;
        }
        if r.i1 == 0.0 {
            if r.i > r.i2 * (1.0 + SLACK) {
                return Err(Error::Degenerate(format!(
                    "{}: I = {:e} but I1 = 0 and I2 = {:e}",
                    r.function, r.i, r.i2
                )));
            }
            continue;
        }
        let a = (r.i - r.i2) / r.i1;
        if a > alpha {
            alpha = a;
            worst = r.function.clone();
        }
    }
    Ok(AlphaCalibration {
        alpha,
        worst_function: worst,
        members,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalTerms {
    pub theta: f64,
    /// `∫M((B/θ)|u|)`
    pub q_term: f64,
    /// `c̄(B)·∫M(|u|/θ)`
    pub c2_term: f64,
    pub c2: f64,
}

/// For `P = Q = M`, compares the remainder `∫Q((B/θ)|u|)` with the form
/// `C₂∫M(|u|/θ)`, `C₂ = c̄(B)`.
pub fn diagonal_terms(
    u: &TestFunction,
    m: &NFunction,
    mu: &WeightedMeasure,
    ledger: &ConstantLedger,
    idx: &SimonenkoIndices,
    theta: f64,
    s: &QuadratureSettings,
) -> Result<DiagonalTerms> {
    let q_term = modular(&Channel::value(u).scaled(ledger.b / theta), m, mu, s)?.value;
    let c2 = idx.scale_bound(ledger.b);
    let base = modular(&Channel::value(u).scaled(1.0 / theta), m, mu, s)?.value;
    Ok(DiagonalTerms {
        theta,
        q_term,
        c2_term: c2 * base,
        c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunc::simonenko_indices;

    #[test]
    fn ledger_examples() {
        let h = ConstantLedger::mode_h(1.0, 1.0, 2.0);
        assert_eq!((h.l, h.b), (2.0, 6.0));
        assert_eq!(h.l_tilde, 8.0 * 6f64.sqrt());
        let idx = SimonenkoIndices::exact(2.0, 2.0);
        let h1 = ConstantLedger::mode_h1(1.0, 0.0, 1.0, 2.0, &idx);
        assert_eq!((h1.l, h1.b, h1.l_tilde), (h.l, h.b, h.l_tilde));
        let h1 = ConstantLedger::mode_h1(2.0, 1.0, 1.0, 2.0, &idx);
        assert_eq!((h1.l, h1.b), (3.0, 8.0));
        assert_eq!(h1.l2, 2.0 * 5.0 * 8.0);
        assert_eq!(h1.recompute(), h1);
    }

    #[test]
    fn theta_examples() {
        let r = theta_minimize(4.0, 1.0, true);
        assert_eq!((r.theta, r.value), (0.5, 4.0));
        let r = theta_minimize(1.0, 4.0, true);
        assert_eq!((r.theta, r.value), (1.0, 5.0));
        assert!(r.bound_ok);
        let r = theta_minimize(1.0, 1.0, false);
        assert_eq!((r.theta, r.value), (1.0, 2.0));
        assert_eq!(theta_minimize(0.0, 0.0, true).value, 0.0);
        assert_eq!(theta_minimize(0.0, 3.0, true).value, 3.0);
    }

    #[test]
    fn single_bump_alpha() {
        let mu = WeightedMeasure::lebesgue(0.0, 1.0).unwrap();
        let m = NFunction::power(2.0).unwrap();
        let u = TestFunction::bump(0.0, 1.0).unwrap();
        let s = QuadratureSettings::default();
        let cal = calibrate_alpha_n(std::slice::from_ref(&u), &m, &mu, &s).unwrap();
        let r = &cal.members[0];
        assert_eq!(r.i2, 0.0);
        assert!((cal.alpha - r.i / r.i1).abs() < 1e-15);
        // I = ∫u'^2 = -∫u u'' ≤ ∫|u||u''| = I₁
        assert!(cal.alpha > 0.0 && cal.alpha <= 1.0 + 1e-9, "{}", cal.alpha);
    }

    #[test]
    fn zero_function_passes_everything() {
        let mu = WeightedMeasure::power_exponential(0.0, 2.0).unwrap();
        let m = NFunction::power(2.0).unwrap();
        let t = YoungTriple::diagonal(&m).unwrap();
        let l = ConstantLedger::mode_h(1.0, 1.0, 1.0);
        let z = TestFunction::zero();
        let s = QuadratureSettings::default();
        let r = gn_modular_check(&z, &t, &mu, &l, &default_theta_grid(), &s).unwrap();
        assert!(r.satisfied && r.rows.iter().all(|r| r.lhs == 0.0 && r.bound == 0.0));
        let n = gn_norm_check(&z, &t, &mu, &l, &s).unwrap();
        assert!(n.satisfied && n.lhs == 0.0 && n.n0 == 0.0 && n.n2 == 0.0);
        let cal = calibrate_alpha_n(&[z], &m, &mu, &s).unwrap();
        assert_eq!(cal.alpha, 0.0);
    }

    #[test]
    fn h1_mode_drops_large_theta() {
        let mu = WeightedMeasure::power_exponential(0.0, 2.0).unwrap();
        let m = NFunction::power(2.0).unwrap();
        let t = YoungTriple::diagonal(&m).unwrap();
        let idx = simonenko_indices(&m).unwrap();
        let l = ConstantLedger::mode_h1(1.0, 1.0, 1.0, 1.0, &idx);
        let u = TestFunction::bump(0.5, 2.0).unwrap();
        let r = gn_modular_check(
            &u,
            &t,
            &mu,
            &l,
            &[0.5, 1.0, 2.0],
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert!(r.rows.iter().all(|r| r.theta <= 1.0));
    }

    #[test]
    fn diagonal_remainder_is_dominated() {
        let mu = WeightedMeasure::power_exponential(0.0, 2.0).unwrap();
        let m = NFunction::powerlog(2.0, 1.0).unwrap();
        let idx = simonenko_indices(&m).unwrap();
        let l = ConstantLedger::mode_h(1.0, 1.0, 1.0);
        let u = TestFunction::bump(0.2, 1.7).unwrap();
        for th in [0.1, 0.5, 1.0] {
            let d =
                diagonal_terms(&u, &m, &mu, &l, &idx, th, &QuadratureSettings::default()).unwrap();
            assert!(d.q_term <= d.c2_term * (1.0 + 1e-9), "{d:?}");
        }
    }
}
