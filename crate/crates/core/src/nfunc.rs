//! N-functions, their complementary functions and growth indices.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::grid::{golden_max, golden_min, LogGrid};
use crate::spec::SpecCall;
use crate::{Error, Result};

/// Values are clamped here; anything at or above it counts as saturated.
pub const OVERFLOW_CAP: f64 = 1e300;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `scale·λ^p`
    Power {
        p: f64,
        scale: f64,
    },
    /// `λ^p ln(2+λ)^α`
    PowerLog {
        p: f64,
        alpha: f64,
    },
    /// `e^λ - λ - 1`
    Exp,
    /// `(1+λ)ln(1+λ) - λ`
    ExpConjugate,
    /// `c·outer(inner(√λ))`
    Composite {
        outer: NFunction,
        inner: NFunction,
        c: f64,
    },
    Tabulated(Arc<Table>),
    Custom {
        value: RealFn,
        derivative: RealFn,
    },
}

struct Inner {
    label: String,
    kind: Kind,
    conj: OnceLock<Option<NFunction>>,
}

/// A Young function with value and derivative evaluators. Cheap to clone.
#[derive(Clone)]
pub struct NFunction(Arc<Inner>);

impl fmt::Debug for NFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NFunction({})", self.0.label)
    }
}

impl fmt::Display for NFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.label)
    }
}

impl Serialize for NFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.label)
    }
}

#[inline]
fn clamp(v: f64) -> f64 {
    if v.is_nan() || v >= OVERFLOW_CAP {
        OVERFLOW_CAP
    } else {
        v
    }
}

fn exp_value(x: f64) -> f64 {
    if x < 1e-2 {
        let x2 = x * x;
        x2 * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x * (1.0 / 720.0)))))
    } else {
        x.exp_m1() - x
    }
}

fn exp_conj_value(y: f64) -> f64 {
    if y < 1e-2 {
        // Σ_{k≥2} (-1)^k y^k / (k(k-1))
        let mut acc = 0.0;
        let mut yk = y * y;
        for k in 2..10 {
            let kf = k as f64;
            let term = yk / (kf * (kf - 1.0));
            acc += if k % 2 == 0 { term } else { -term };
            yk *= y;
        }
        acc
    } else {
        (1.0 + y) * y.ln_1p() - y
    }
}

impl NFunction {
    fn new(label: String, kind: Kind) -> Self {
        Self(Arc::new(Inner {
            label,
            kind,
            conj: OnceLock::new(),
        }))
    }

    /// `λ^p`.
    pub fn power(p: f64) -> Result<Self> {
        Self::scaled_power(p, 1.0)
    }

    /// `scale·λ^p`, `p > 1`.
    pub fn scaled_power(p: f64, scale: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::BadParams(format!(
                "power needs p > 1 and scale > 0 (got {p}, {scale})"
            )));
        }
        let label = if scale == 1.0 {
            format!("power({p})")
        } else {
            format!("power({p},{scale})")
        };
        Ok(Self::new(label, Kind::Power { p, scale }))
    }

    /// `λ^p / p`.
    pub fn power_over_p(p: f64) -> Result<Self> {
        Self::scaled_power(p, 1.0 / p)
    }

    /// `λ^p ln(2+λ)^α`.
    pub fn powerlog(p: f64, alpha: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite() && alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::BadParams(format!(
                "powerlog needs p > 1, alpha >= 0 (got {p}, {alpha})"
            )));
        }
        Ok(Self::new(
            format!("powerlog({p},{alpha})"),
            Kind::PowerLog { p, alpha },
        ))
    }

    /// `e^λ - λ - 1`.
    pub fn exp() -> Self {
        Self::new("exp".into(), Kind::Exp)
    }

    /// `(1+λ)ln(1+λ) - λ`, the complementary function of [`NFunction::exp`].
    pub fn exp_conjugate() -> Self {
        Self::new("expconj".into(), Kind::ExpConjugate)
    }

    /// `c·outer(inner(√λ))`.
    pub fn composite(outer: &NFunction, inner: &NFunction, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::BadParams(format!(
                "composite constant must be positive (got {c})"
            )));
        }
        let label = format!("{c}*{outer}({inner}(sqrt))");
        Ok(Self::new(
            label,
            Kind::Composite {
                outer: outer.clone(),
                inner: inner.clone(),
                c,
            },
        ))
    }

    pub fn custom<F, G>(label: impl Into<String>, value: F, derivative: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            label.into(),
            Kind::Custom {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
            },
        )
    }

    /// `power(p[,scale])`, `powerlog(p,alpha)`, `exp` or `expconj`.
    pub fn from_spec(text: &str) -> Result<Self> {
        let c = SpecCall::parse(text)?;
        match c.name.as_str() {
            "power" => {
                c.check(&["p", "scale"], 2)?;
                Self::scaled_power(c.require("p", 0)?, c.num("scale", 1)?.unwrap_or(1.0))
            }
            "powerlog" => {
                c.check(&["p", "alpha"], 2)?;
                Self::powerlog(c.require("p", 0)?, c.require("alpha", 1)?)
            }
            "exp" => {
                c.check(&[], 0)?;
                Ok(Self::exp())
            }
            "expconj" => {
                c.check(&[], 0)?;
                Ok(Self::exp_conjugate())
            }
            other => Err(c.err(format!("unknown N-function family `{other}`"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    fn raw_value(&self, x: f64) -> f64 {
        match &self.0.kind {
            Kind::Power { p, scale } => scale * x.powf(*p),
            Kind::PowerLog { p, alpha } => x.powf(*p) * (2.0 + x).ln().powf(*alpha),
            Kind::Exp => exp_value(x),
            Kind::ExpConjugate => exp_conj_value(x),
            Kind::Composite { outer, inner, c } => c * outer.value(inner.value(x.sqrt())),
            Kind::Tabulated(t) => t.value(x),
            Kind::Custom { value, .. } => value(x),
        }
    }

    /// Value at `λ ≥ 0`, clamped at [`OVERFLOW_CAP`].
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        clamp(self.raw_value(x))
    }

    /// Whether the value at `x` hit the overflow cap.
    pub fn saturates(&self, x: f64) -> bool {
        x > 0.0 && self.value(x) >= OVERFLOW_CAP
    }

    /// Right derivative at `λ ≥ 0`, clamped at [`OVERFLOW_CAP`].
    pub fn derivative(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let d = match &self.0.kind {
            Kind::Power { p, scale } => scale * p * x.powf(p - 1.0),
            Kind::PowerLog { p, alpha } => {
                let l = (2.0 + x).ln();
                p * x.powf(p - 1.0) * l.powf(*alpha)
                    + alpha * x.powf(*p) * l.powf(alpha - 1.0) / (2.0 + x)
            }
            Kind::Exp => x.exp_m1(),
            Kind::ExpConjugate => x.ln_1p(),
            Kind::Composite { outer, inner, c } => {
                let s = x.sqrt();
                c * outer.derivative(inner.value(s)) * inner.derivative(s) / (2.0 * s)
            }
            Kind::Tabulated(t) => t.derivative(x),
            Kind::Custom { derivative, .. } => derivative(x),
        };
        clamp(d)
    }

    /// Degree `q` when the function is exactly `c·λ^q`.
    pub fn homogeneous_degree(&self) -> Option<f64> {
        match &self.0.kind {
            Kind::Power { p, .. } => Some(*p),
            Kind::Composite { outer, inner, .. } => {
                Some(outer.homogeneous_degree()? * inner.homogeneous_degree()? / 2.0)
            }
            _ => None,
        }
    }

    /// `(p, scale)` for the scaled power family.
    pub fn as_power(&self) -> Option<(f64, f64)> {
        match self.0.kind {
            Kind::Power { p, scale } => Some((p, scale)),
            _ => None,
        }
    }

    /// Closed-form complementary function, when the family has one.
    pub fn analytic_conjugate(&self) -> Option<NFunction> {
        self.0
            .conj
            .get_or_init(|| match self.0.kind {
                Kind::Power { p, scale } => {
                    let q = p / (p - 1.0);
                    let s = (p - 1.0) * scale * (scale * p).powf(-q);
                    let label = if (s - 1.0 / q).abs() <= 1e-15 * s {
                        format!("power({q},{})", 1.0 / q)
                    } else {
                        format!("power({q},{s})")
                    };
                    Some(NFunction::new(label, Kind::Power { p: q, scale: s }))
                }
                Kind::Exp => Some(NFunction::exp_conjugate()),
                Kind::ExpConjugate => Some(NFunction::exp()),
                _ => None,
            })
            .clone()
    }

    /// Structural checks on the default grid.
    pub fn validate(&self) -> Validation {
        validate(self, &LogGrid::default())
    }
}

/// Outcome of [`NFunction::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validation {
    pub zero_at_origin: bool,
    pub nondecreasing: bool,
    pub convex: bool,
    pub limits: bool,
    pub derivative_error: f64,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.zero_at_origin
            && self.nondecreasing
            && self.convex
            && self.limits
            && self.derivative_error <= 1e-5
    }
}

fn validate(m: &NFunction, grid: &LogGrid) -> Validation {
    let xs = grid.points();
    let vs: Vec<f64> = xs.iter().map(|&x| m.value(x)).collect();
    let live = vs.iter().take_while(|&&v| v < OVERFLOW_CAP).count();
    let (xs, vs) = (&xs[..live], &vs[..live]);
    let nondecreasing = vs.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let convex = xs.windows(3).zip(vs.windows(3)).all(|(x, v)| {
        let s1 = (v[1] - v[0]) / (x[1] - x[0]);
        let s2 = (v[2] - v[1]) / (x[2] - x[1]);
        s2 >= s1 - 1e-9 * s1.abs().max(s2.abs()) - 1e-300
    });
    let limits = if live < 2 {
        false
    } else {
        let unit = m.value(1.0);
        let small = vs[0] / xs[0] <= 0.1 * unit;
        let big = if live == xs.len() && live == grid.n {
            xs[live - 1] / vs[live - 1] <= 0.1 / unit
        } else {
            true
        };
        small && big
    };
    let mut derivative_error: f64 = 0.0;
    for k in 0..=60 {
        let x = 10f64.powf(-3.0 + 0.1 * k as f64);
        if m.saturates(2.0 * x) {
            continue;
        }
        let h = 1e-5 * x;
        let fd = (m.value(x + h) - m.value(x - h)) / (2.0 * h);
        let d = m.derivative(x);
        derivative_error = derivative_error.max((fd - d).abs() / d.abs().max(1e-300));
    }
    Validation {
        zero_at_origin: m.value(0.0) == 0.0,
        nondecreasing,
        convex,
        limits,
        derivative_error,
    }
}

/// Log-log cubic Hermite table of a positive increasing function.
struct Table {
    ln_x: Vec<f64>,
    ln_v: Vec<f64>,
    /// `d ln v / d ln x` at the knots.
    slope: Vec<f64>,
}

impl Table {
    fn locate(&self, t: f64) -> usize {
        match self.ln_x.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => i.min(self.ln_x.len() - 2),
            Err(i) => (i - 1).min(self.ln_x.len() - 2),
        }
    }

    /// `(ln v, d ln v / d ln x)` at `ln x = t`.
    fn eval_log(&self, t: f64) -> (f64, f64) {
        let n = self.ln_x.len();
        if t <= self.ln_x[0] {
            return (
                self.ln_v[0] + self.slope[0] * (t - self.ln_x[0]),
                self.slope[0],
            );
        }
        if t >= self.ln_x[n - 1] {
            return (
                self.ln_v[n - 1] + self.slope[n - 1] * (t - self.ln_x[n - 1]),
                self.slope[n - 1],
            );
        }
        let i = self.locate(t);
        let h = self.ln_x[i + 1] - self.ln_x[i];
        let delta = (self.ln_v[i + 1] - self.ln_v[i]) / h;
        let (mut m0, mut m1) = (self.slope[i], self.slope[i + 1]);
        if delta == 0.0 {
            m0 = 0.0;
            m1 = 0.0;
        } else {
            let (a, b) = (m0 / delta, m1 / delta);
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m0 = tau * a * delta;
                m1 = tau * b * delta;
            }
        }
        let s = (t - self.ln_x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * self.ln_v[i] + h10 * h * m0 + h01 * self.ln_v[i + 1] + h11 * h * m1;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        let dv = (d00 * self.ln_v[i] + d01 * self.ln_v[i + 1]) / h + d10 * m0 + d11 * m1;
        (v, dv)
    }

    fn value(&self, x: f64) -> f64 {
        self.eval_log(x.ln()).0.exp()
    }

    fn derivative(&self, x: f64) -> f64 {
        let (lv, s) = self.eval_log(x.ln());
        lv.exp() * s / x
    }
}

/// `M*(y) = sup_x [xy - M(x)]` with its maximiser, by bracketed
/// golden-section search.
pub fn conjugate_at(m: &NFunction, y: f64) -> Result<(f64, f64)> {
    if y <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let g = |x: f64| x * y - m.value(x);
    let mut t = 1.0f64;
    if g(2.0 * t) > g(t) {
        while g(2.0 * t) > g(t) {
            t *= 2.0;
            if t > 1e150 || m.saturates(2.0 * t) {
                return Err(Error::BracketFailure { y });
            }
        }
    } else {
        while g(0.5 * t) >= g(t) {
            t *= 0.5;
            if t < 1e-200 {
                return Err(Error::BracketFailure { y });
            }
        }
    }
    let (x, v) = golden_max(g, 0.5 * t, 2.0 * t, 1e-12);
    Ok((v.max(0.0), x))
}

/// Numeric Legendre conjugate tabulated on `grid`.
pub fn conjugate_numeric(m: &NFunction, grid: &LogGrid) -> Result<NFunction> {
    let ys = grid.points();
    let mut ln_x = Vec::with_capacity(ys.len());
    let mut ln_v = Vec::with_capacity(ys.len());
    let mut slope = Vec::with_capacity(ys.len());
    for &y in &ys {
        let (v, x) = conjugate_at(m, y)?;
        if !(v > 0.0) || v >= OVERFLOW_CAP {
            continue;
        }
        ln_x.push(y.ln());
        ln_v.push(v.ln());
        slope.push((y * x / v).max(1.0));
    }
    if ln_x.len() < 2 {
        return Err(Error::BracketFailure { y: grid.lo });
    }
    let table = Table { ln_x, ln_v, slope };
    Ok(NFunction::new(
        format!("conj({})", m.label()),
        Kind::Tabulated(Arc::new(table)),
    ))
}

/// Complementary function: the closed form when known, else the numeric table.
pub fn conjugate(m: &NFunction, grid: &LogGrid) -> Result<NFunction> {
    match m.analytic_conjugate() {
        Some(c) => Ok(c),
        None => conjugate_numeric(m, grid),
    }
}

/// `M(x) + M*(y) - xy`.
pub fn young_gap(m: &NFunction, x: f64, y: f64) -> Result<f64> {
    let conj = match m.analytic_conjugate() {
        Some(c) => c.value(y),
        None => conjugate_at(m, y)?.0,
    };
    Ok(m.value(x) + conj - x * y)
}

/// Grid estimates of `d_M` and `D_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimonenkoIndices {
    pub lower: f64,
    pub upper: f64,
    pub lower_exceeds_one: bool,
    pub upper_unbounded: bool,
    pub argmin: f64,
    pub argmax: f64,
}

impl SimonenkoIndices {
    /// `c̄(a) = max(a^{d_M}, a^{D_M})`.
    pub fn scale_bound(&self, a: f64) -> f64 {
        a.powf(self.lower).max(a.powf(self.upper))
    }

    pub fn exact(d: f64, big_d: f64) -> Self {
        Self {
            lower: d,
            upper: big_d,
            lower_exceeds_one: d > 1.0,
            upper_unbounded: false,
            argmin: f64::NAN,
            argmax: f64::NAN,
        }
    }
}

pub fn scale_bound(idx: &SimonenkoIndices, a: f64) -> f64 {
    idx.scale_bound(a)
}

fn index_ratio(m: &NFunction, x: f64) -> f64 {
    x * m.derivative(x) / m.value(x)
}

pub fn simonenko_indices(m: &NFunction) -> Result<SimonenkoIndices> {
    simonenko_indices_on(m, &LogGrid::default())
}

pub fn simonenko_indices_on(m: &NFunction, grid: &LogGrid) -> Result<SimonenkoIndices> {
    let xs = grid.points();
    let mut ratios = Vec::with_capacity(xs.len());
    let mut saturated = false;
    for &x in &xs {
        let v = m.value(x);
        if v == 0.0 {
            return Err(Error::DegenerateRatio { lambda: x });
        }
        if v >= OVERFLOW_CAP || m.derivative(x) >= OVERFLOW_CAP {
            saturated = true;
            break;
        }
        ratios.push(index_ratio(m, x));
    }
    if ratios.is_empty() {
        return Err(Error::DegenerateRatio { lambda: xs[0] });
    }
    let n = ratios.len();
    let (mut imin, mut imax) = (0, 0);
    for i in 0..n {
        if ratios[i] < ratios[imin] {
            imin = i;
        }
        if ratios[i] > ratios[imax] {
            imax = i;
        }
    }
    let (mut lower, mut argmin) = (ratios[imin], xs[imin]);
    let (mut upper, mut argmax) = (ratios[imax], xs[imax]);
    let f = |t: f64| index_ratio(m, t.exp());
    if imin > 0 && imin + 1 < n {
        let (t, v) = golden_min(f, xs[imin - 1].ln(), xs[imin + 1].ln(), 1e-13);
        if v < lower {
            lower = v;
            argmin = t.exp();
        }
    }
    if imax > 0 && imax + 1 < n {
        let (t, v) = golden_max(f, xs[imax - 1].ln(), xs[imax + 1].ln(), 1e-13);
        if v > upper {
            upper = v;
            argmax = t.exp();
        }
    }
    let tail_growing = {
        let last = xs[n - 1];
        let earlier = index_ratio(m, last / 10.0);
        ratios[n - 1] > earlier * (1.0 + 1e-6)
    };
    Ok(SimonenkoIndices {
        lower,
        upper,
        lower_exceeds_one: lower > 1.0,
        upper_unbounded: saturated || tail_growing,
        argmin,
        argmax,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Delta2 {
    /// Grid supremum of `M(2λ)/M(λ)`.
    pub constant: f64,
    pub argmax: f64,
    pub satisfied: bool,
}

pub fn delta2_constant(m: &NFunction) -> Delta2 {
    delta2_constant_on(m, &LogGrid::default())
}

pub fn delta2_constant_on(m: &NFunction, grid: &LogGrid) -> Delta2 {
    let xs = grid.points();
    let ratio = |x: f64| m.value(2.0 * x) / m.value(x);
    let mut rs = Vec::with_capacity(xs.len());
    let mut cut = false;
    for &x in &xs {
        if m.saturates(2.0 * x) || m.value(x) == 0.0 {
            cut = true;
            break;
        }
        rs.push(ratio(x));
    }
    if rs.is_empty() {
        return Delta2 {
            constant: f64::INFINITY,
            argmax: xs[0],
            satisfied: false,
        };
    }
    let n = rs.len();
    let imax = (0..n).fold(0, |b, i| if rs[i] > rs[b] { i } else { b });
    let (mut constant, mut argmax) = (rs[imax], xs[imax]);
    if imax > 0 && imax + 1 < n {
        let (t, v) = golden_max(
            |t: f64| ratio(t.exp()),
            xs[imax - 1].ln(),
            xs[imax + 1].ln(),
            1e-13,
        );
        if v > constant {
            constant = v;
            argmax = t.exp();
        }
    }
    let increasing_at_cut = cut && n >= 2 && rs[n - 1] > rs[n - 2];
    let satisfied = constant <= 2f64.powi(64) && !increasing_at_cut;
    Delta2 {
        constant,
        argmax,
        satisfied,
    }
}

/// Condition (M): `M'(λ)/λ` stays bounded as `λ → 0⁺`.
pub fn derivative_ratio_bounded_at_zero(m: &NFunction) -> bool {
    let r = |x: f64| m.derivative(x) / x;
    r(1e-8) <= r(1e-4) * (1.0 + 1e-6)
}

/// Smallest relative step of `M(λ)/λ²` on `grid` (negative when it decreases)
/// and where it happens.
pub fn square_ratio_min_step(m: &NFunction, grid: &LogGrid) -> (f64, f64) {
    let xs = grid.points();
    let q: Vec<f64> = xs
        .iter()
        .take_while(|&&x| !m.saturates(x))
        .map(|&x| m.value(x) / (x * x))
        .collect();
    let mut worst = (f64::INFINITY, f64::NAN);
    for i in 1..q.len() {
        let step = (q[i] - q[i - 1]) / q[i - 1].abs().max(1e-300);
        if step < worst.0 {
            worst = (step, xs[i]);
        }
    }
    worst
}

/// `M(λ)/λ²` nondecreasing on the default grid up to relative slack `1e-9`.
pub fn square_ratio_nondecreasing(m: &NFunction) -> bool {
    square_ratio_min_step(m, &LogGrid::default()).0 >= -1e-9
}
