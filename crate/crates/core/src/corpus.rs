//! Test functions with closed-form first and second derivatives.

use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Shape {
    /// `exp(-1/((x-a)(b-x)))` on `(a, b)`.
    Bump {
        a: f64,
        b: f64,
    },
    /// `(1-t²)^k`, `t` the affine image of `(a, b)` onto `(-1, 1)`.
    PolySpline {
        a: f64,
        b: f64,
        k: u32,
    },
    /// `(x-o)^k e^{-(x-o)}` on `(o, ∞)`.
    HermiteDecay {
        k: u32,
        origin: f64,
    },
    /// `t^γ (1-t)^k` on `(0, 1)`, or `t^γ (1-1/t)^k` on `(1, ∞)` when mirrored.
    PowerCutoff {
        gamma: f64,
        k: u32,
        mirrored: bool,
    },
    /// `t^σ / cosh(ε ln t)` on `(0, ∞)`, behaving like `t^{σ+ε}` at 0 and
    /// `t^{σ-ε}` at infinity.
    PowerSech {
        sigma: f64,
        eps: f64,
    },
    /// Pointwise product of two shapes.
    Product {
        left: Box<Shape>,
        right: Box<Shape>,
    },
    Zero,
}

/// `(u, u', u'')` at a point.
pub type Jet = (f64, f64, f64);

fn bump_jet(a: f64, b: f64, x: f64) -> Jet {
    if !(x > a && x < b) {
        return (0.0, 0.0, 0.0);
    }
    let q = (x - a) * (b - x);
    let inv = 1.0 / q;
    if inv > 740.0 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-inv).exp();
    let dq = a + b - 2.0 * x;
    let r = dq * inv * inv;
    let d2 = g * (r * r - 2.0 * inv * inv - 2.0 * dq * dq * inv * inv * inv);
    (g, g * r, d2)
}

fn spline_jet(a: f64, b: f64, k: u32, x: f64) -> Jet {
    if !(x > a && x < b) {
        return (0.0, 0.0, 0.0);
    }
    let dt = 2.0 / (b - a);
    let t = (2.0 * x - a - b) / (b - a);
    let s = 1.0 - t * t;
    let kf = k as f64;
    let u = s.powi(k as i32);
    let u1 = -2.0 * kf * t * s.powi(k as i32 - 1) * dt;
    let u2 = (4.0 * kf * (kf - 1.0) * t * t * s.powi(k as i32 - 2)
        - 2.0 * kf * s.powi(k as i32 - 1))
        * dt
        * dt;
    (u, u1, u2)
}

fn hermite_jet(k: u32, o: f64, x: f64) -> Jet {
    let y = x - o;
    if !(y > 0.0) {
        return (0.0, 0.0, 0.0);
    }
    let e = (-y).exp();
    if e == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let kf = k as f64;
    let p = |j: i32| if j < 0 { 0.0 } else { y.powi(j) };
    let ki = k as i32;
    let u = p(ki) * e;
    let u1 = (kf * p(ki - 1) - p(ki)) * e;
    let u2 = (kf * (kf - 1.0) * p(ki - 2) - 2.0 * kf * p(ki - 1) + p(ki)) * e;
    (u, u1, u2)
}

fn power_cutoff_jet(g: f64, k: u32, mirrored: bool, t: f64) -> Jet {
    let kf = k as f64;
    let ki = k as i32;
    if !mirrored {
        if !(t > 0.0 && t < 1.0) {
            return (0.0, 0.0, 0.0);
        }
        let w = 1.0 - t;
        let u = t.powf(g) * w.powi(ki);
        let u1 = g * t.powf(g - 1.0) * w.powi(ki) - kf * t.powf(g) * w.powi(ki - 1);
        let u2 = g * (g - 1.0) * t.powf(g - 2.0) * w.powi(ki)
            - 2.0 * g * kf * t.powf(g - 1.0) * w.powi(ki - 1)
            + kf * (kf - 1.0) * t.powf(g) * w.powi(ki - 2);
        (u, u1, u2)
    } else {
        if !(t > 1.0) {
            return (0.0, 0.0, 0.0);
        }
        let w = 1.0 - 1.0 / t;
        let u = t.powf(g) * w.powi(ki);
        let u1 = g * t.powf(g - 1.0) * w.powi(ki) + kf * t.powf(g - 2.0) * w.powi(ki - 1);
        let u2 = g * (g - 1.0) * t.powf(g - 2.0) * w.powi(ki)
            + kf * (2.0 * g - 2.0) * t.powf(g - 3.0) * w.powi(ki - 1)
            + kf * (kf - 1.0) * t.powf(g - 4.0) * w.powi(ki - 2);
        (u, u1, u2)
    }
}

fn power_sech_jet(sigma: f64, eps: f64, t: f64) -> Jet {
    if !(t > 0.0 && t.is_finite()) {
        return (0.0, 0.0, 0.0);
    }
    let y = eps * t.ln();
    // t^σ / cosh(y) = 2 t^σ e^{-|y|} / (1 + e^{-2|y|})
    let e = (-2.0 * y.abs()).exp();
    let u = 2.0 * (sigma * t.ln() - y.abs()).exp() / (1.0 + e);
    if u == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let th = y.tanh();
    let g = sigma - eps * th;
    let u1 = u * g / t;
    let u2 = u / (t * t) * (g * g - g - eps * eps * (1.0 - th * th));
    (u, u1, u2)
}

impl Shape {
    pub fn jet(&self, x: f64) -> Jet {
        match self {
            Shape::Bump { a, b } => bump_jet(*a, *b, x),
            Shape::PolySpline { a, b, k } => spline_jet(*a, *b, *k, x),
            Shape::HermiteDecay { k, origin } => hermite_jet(*k, *origin, x),
            Shape::PowerCutoff { gamma, k, mirrored } => power_cutoff_jet(*gamma, *k, *mirrored, x),
            Shape::PowerSech { sigma, eps } => power_sech_jet(*sigma, *eps, x),
            Shape::Product { left: f, right: g } => {
                let (f0, f1, f2) = f.jet(x);
                if f0 == 0.0 && f1 == 0.0 && f2 == 0.0 {
                    return (0.0, 0.0, 0.0);
                }
                let (g0, g1, g2) = g.jet(x);
                (
                    f0 * g0,
                    f1 * g0 + f0 * g1,
                    f2 * g0 + 2.0 * f1 * g1 + f0 * g2,
                )
            }
            Shape::Zero => (0.0, 0.0, 0.0),
        }
    }

    /// Closed interval outside of which the shape vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Shape::Bump { a, b } | Shape::PolySpline { a, b, .. } => (*a, *b),
            Shape::HermiteDecay { origin, .. } => (*origin, f64::INFINITY),
            Shape::PowerCutoff {
                mirrored: false, ..
            } => (0.0, 1.0),
            Shape::PowerCutoff { mirrored: true, .. } => (1.0, f64::INFINITY),
            Shape::PowerSech { .. } => (0.0, f64::INFINITY),
            Shape::Product { left: f, right: g } => {
                let (a, b) = f.support();
                let (c, d) = g.support();
                (a.max(c), b.min(d))
            }
            Shape::Zero => (0.0, 0.0),
        }
    }

    pub fn compact(&self) -> bool {
        match self {
            Shape::Bump { .. } | Shape::PolySpline { .. } | Shape::Zero => true,
            Shape::HermiteDecay { .. } | Shape::PowerCutoff { .. } | Shape::PowerSech { .. } => {
                false
            }
            Shape::Product { left: f, right: g } => f.compact() || g.compact(),
        }
    }

    /// Infinitely differentiable (as opposed to `C^k` or singular at an end).
    fn smooth(&self) -> bool {
        match self {
            Shape::Bump { .. } | Shape::HermiteDecay { .. } | Shape::Zero => true,
            Shape::PolySpline { .. } | Shape::PowerCutoff { .. } | Shape::PowerSech { .. } => false,
            Shape::Product { left: f, right: g } => f.smooth() && g.smooth(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParams(m));
        match self {
            Shape::Bump { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                bad(format!("bump needs a < b (got {a}, {b})"))
            }
            Shape::PolySpline { a, b, k }
                if !(a.is_finite() && b.is_finite() && a < b && *k >= 3) =>
            {
                bad(format!(
                    "poly_spline needs a < b and k >= 3 (got {a}, {b}, {k})"
                ))
            }
            Shape::HermiteDecay { k, origin } if *k < 1 || !origin.is_finite() => {
                bad(format!("hermite_decay needs k >= 1 (got {k})"))
            }
            Shape::PowerCutoff { gamma, k, mirrored }
                if !(gamma.is_finite() && (*mirrored || *gamma > 0.0)) || *k < 3 =>
            {
                bad(format!(
                    "power_cutoff needs k >= 3 and gamma > 0 on (0, 1) (got {gamma}, {k})"
                ))
            }
            Shape::PowerSech { sigma, eps }
                if !(sigma.is_finite() && *eps > 0.0 && eps.is_finite()) =>
            {
                bad(format!(
                    "power_sech needs finite sigma and eps > 0 (got {sigma}, {eps})"
                ))
            }
            Shape::Product { left: f, right: g } => {
                f.validate()?;
                g.validate()
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Bump { a, b } => write!(f, "bump({a},{b})"),
            Shape::PolySpline { a, b, k } => write!(f, "spline({a},{b},{k})"),
            Shape::HermiteDecay { k, origin } if *origin == 0.0 => write!(f, "hermite({k})"),
            Shape::HermiteDecay { k, origin } => write!(f, "hermite({k},{origin})"),
            Shape::PowerCutoff { gamma, k, mirrored } => {
                write!(
                    f,
                    "powercut({gamma},{k}{})",
                    if *mirrored { ",inv" } else { "" }
                )
            }
            Shape::PowerSech { sigma, eps } => write!(f, "powersech({sigma},{eps})"),
            Shape::Product { left: a, right: b } => write!(f, "{a}*{b}"),
            Shape::Zero => write!(f, "zero"),
        }
    }
}

/// `u(x) = amplitude·g(x₀ + c(x - x₀))` for a base shape `g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    pub shape: Shape,
    pub dilation: f64,
    pub anchor: f64,
    pub amplitude: f64,
}

impl TestFunction {
    pub fn make(shape: Shape) -> Result<Self> {
        shape.validate()?;
        Ok(Self {
            shape,
            dilation: 1.0,
            anchor: 0.0,
            amplitude: 1.0,
        })
    }

    pub fn bump(a: f64, b: f64) -> Result<Self> {
        Self::make(Shape::Bump { a, b })
    }

    pub fn poly_spline(a: f64, b: f64, k: u32) -> Result<Self> {
        Self::make(Shape::PolySpline { a, b, k })
    }

    pub fn hermite_decay(k: u32) -> Result<Self> {
        Self::make(Shape::HermiteDecay { k, origin: 0.0 })
    }

    /// `x^k e^{-x}` multiplied by the wide bump on `(0, width)`.
    pub fn tapered_hermite(k: u32, width: f64) -> Result<Self> {
        Self::make(Shape::Product {
            left: Box::new(Shape::HermiteDecay { k, origin: 0.0 }),
            right: Box::new(Shape::Bump { a: 0.0, b: width }),
        })
    }

    pub fn power_cutoff(gamma: f64, k: u32, mirrored: bool) -> Result<Self> {
        Self::make(Shape::PowerCutoff { gamma, k, mirrored })
    }

    pub fn power_sech(sigma: f64, eps: f64) -> Result<Self> {
        Self::make(Shape::PowerSech { sigma, eps })
    }

    pub fn zero() -> Self {
        Self {
            shape: Shape::Zero,
            dilation: 1.0,
            anchor: 0.0,
            amplitude: 1.0,
        }
    }

    /// `x ↦ u(x₀ + c(x - x₀))`.
    pub fn dilate(&self, c: f64, anchor: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::BadParams(format!(
                "dilation must be positive (got {c})"
            )));
        }
        if self.dilation != 1.0 && self.anchor != anchor {
            return Err(Error::BadParams(
                "dilations about different anchors do not compose".into(),
            ));
        }
        Ok(Self {
            dilation: self.dilation * c,
            anchor,
            ..self.clone()
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            amplitude: self.amplitude * a,
            ..self.clone()
        }
    }

    #[inline]
    pub fn jet(&self, x: f64) -> Jet {
        let c = self.dilation;
        let (u, u1, u2) = self.shape.jet(self.anchor + c * (x - self.anchor));
        let a = self.amplitude;
        (a * u, a * c * u1, a * c * c * u2)
    }

    pub fn u(&self, x: f64) -> f64 {
        self.jet(x).0
    }

    pub fn u1(&self, x: f64) -> f64 {
        self.jet(x).1
    }

    pub fn u2(&self, x: f64) -> f64 {
        self.jet(x).2
    }

    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.shape.support();
        let c = self.dilation;
        (
            self.anchor + (a - self.anchor) / c,
            self.anchor + (b - self.anchor) / c,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.shape == Shape::Zero || self.amplitude == 0.0
    }

    /// Member of `C₀^∞` on its support.
    pub fn strict_compact(&self) -> bool {
        self.shape.compact() && self.shape.smooth()
    }

    pub fn id(&self) -> String {
        let mut s = self.shape.to_string();
        if self.dilation != 1.0 {
            s.push_str(&format!("·dilate{}", self.dilation));
        }
        if self.amplitude != 1.0 {
            s.push_str(&format!("·x{}", self.amplitude));
        }
        s
    }

    /// Whether the function vanishes outside `(lo, hi)`, with zero boundary
    /// values at finite ends.
    pub fn admissible_on(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.support();
        a >= lo && b <= hi
    }

    /// Largest relative mismatch between the analytic derivatives and
    /// central differences at `n` interior points of the support.
    pub fn derivative_audit(&self, n: usize) -> f64 {
        let (a, b) = self.support();
        let (a, b) = (
            a,
            if b.is_finite() {
                b
            } else {
                a + 30.0 / self.dilation
            },
        );
        let xs: Vec<f64> = (0..n)
            .map(|i| a + (b - a) * (0.1 + 0.8 * (i as f64 + 0.5) / n as f64))
            .collect();
        let jets: Vec<Jet> = xs.iter().map(|&x| self.jet(x)).collect();
        let m1 = jets.iter().map(|j| j.1.abs()).fold(0.0, f64::max);
        let m2 = jets.iter().map(|j| j.2.abs()).fold(0.0, f64::max);
        let h = 1e-5 * (b - a);
        let mut worst: f64 = 0.0;
        for (&x, j) in xs.iter().zip(&jets) {
            let fd1 = (self.u(x + h) - self.u(x - h)) / (2.0 * h);
            let fd2 = (self.u1(x + h) - self.u1(x - h)) / (2.0 * h);
            worst = worst.max((fd1 - j.1).abs() / j.1.abs().max(1e-6 * m1).max(1e-300));
            worst = worst.max((fd2 - j.2).abs() / j.2.abs().max(1e-6 * m2).max(1e-300));
        }
        worst
    }
}

/// Base interval used to place shapes inside a domain, and the dilation anchor.
fn frame(lo: f64, hi: f64) -> ((f64, f64), f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => ((lo, hi), lo),
        (true, false) => ((lo, lo + 4.0), lo),
        (false, true) => ((hi - 4.0, hi), hi),
        (false, false) => ((-2.0, 2.0), 0.0),
    }
}

pub const DILATIONS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Deterministic corpus for the domain `(lo, hi)`: translated bumps and
/// splines, and on half-lines `(l, ∞)` also `(x-l)^k e^{-(x-l)}` members,
/// each under the dilations in [`DILATIONS`] that keep it admissible.
pub fn default_corpus(domain: (f64, f64)) -> Vec<TestFunction> {
    let (lo, hi) = domain;
    let ((l, r), anchor) = frame(lo, hi);
    let at = |t: f64| l + (r - l) * t;
    let mut shapes = vec![
        Shape::Bump {
            a: at(0.0),
            b: at(1.0),
        },
        Shape::Bump {
            a: at(0.1),
            b: at(0.9),
        },
        Shape::Bump {
            a: at(0.05),
            b: at(0.4),
        },
        Shape::Bump {
            a: at(0.5),
            b: at(0.95),
        },
        Shape::Bump {
            a: at(0.3),
            b: at(0.7),
        },
        Shape::PolySpline {
            a: at(0.0),
            b: at(1.0),
            k: 3,
        },
        Shape::PolySpline {
            a: at(0.2),
            b: at(0.8),
            k: 4,
        },
    ];
    if lo.is_finite() && hi == f64::INFINITY {
        for k in 1..=3 {
            shapes.push(Shape::HermiteDecay { k, origin: lo });
        }
    }
    let mut out = Vec::new();
    for shape in shapes {
        let base = TestFunction {
            shape,
            dilation: 1.0,
            anchor,
            amplitude: 1.0,
        };
        for c in DILATIONS {
            let f = TestFunction {
                dilation: c,
                ..base.clone()
            };
            if f.admissible_on(lo, hi) {
                out.push(f);
            }
        }
    }
    out
}

/// Members of `C₀^∞`: the default corpus without its non-compact members,
/// plus tapered `x^k e^{-x}` members on half-lines `(0, ∞)`.
pub fn compact_corpus(domain: (f64, f64)) -> Vec<TestFunction> {
    let mut out: Vec<TestFunction> = default_corpus(domain)
        .into_iter()
        .filter(|f| f.shape.compact())
        .collect();
    if domain == (0.0, f64::INFINITY) {
        for k in 2..=3 {
            if let Ok(f) = TestFunction::tapered_hermite(k, 40.0) {
                out.push(f);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_center_value() {
        let f = TestFunction::bump(0.0, 1.0).unwrap();
        assert!((f.u(0.5) - (-4f64).exp()).abs() < 1e-16);
        assert_eq!(f.u1(0.5), 0.0);
        assert_eq!(f.u(1.0), 0.0);
        assert_eq!(f.u(1e-4), 0.0);
    }

    #[test]
    fn hermite_closed_forms() {
        let f = TestFunction::hermite_decay(1).unwrap();
        for x in [0.1f64, 1.0, 3.7] {
            let e = (-x).exp();
            let (u, u1, u2) = f.jet(x);
            assert!((u - x * e).abs() < 1e-15);
            assert!((u1 - (1.0 - x) * e).abs() < 1e-15);
            assert!((u2 - (x - 2.0) * e).abs() < 1e-15);
        }
    }

    #[test]
    fn dilation_chain_rule() {
        let f = TestFunction::bump(0.2, 0.9).unwrap();
        let g = f.dilate(2.0, 0.0).unwrap();
        let x = 0.3;
        let (u, u1, u2) = f.jet(2.0 * x);
        let (v, v1, v2) = g.jet(x);
        assert_eq!(u, v);
        assert_eq!(2.0 * u1, v1);
        assert_eq!(4.0 * u2, v2);
        assert_eq!(g.support(), (0.1, 0.45));
        assert_eq!(g.id(), "bump(0.2,0.9)·dilate2");
    }

    #[test]
    fn bad_params() {
        assert!(TestFunction::bump(1.0, 0.0).is_err());
        assert!(TestFunction::poly_spline(0.0, 1.0, 2).is_err());
        assert!(TestFunction::hermite_decay(0).is_err());
        assert!(TestFunction::power_cutoff(0.5, 1, false).is_err());
        assert!(TestFunction::bump(0.0, 1.0)
            .unwrap()
            .dilate(-1.0, 0.0)
            .is_err());
    }

    #[test]
    fn corpora_sizes_and_admissibility() {
        for dom in [
            (0.0, 1.0),
            (0.0, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
            (-1.0, 3.0),
        ] {
            let c = default_corpus(dom);
            assert!(c.len() >= 12, "{dom:?}: {}", c.len());
            assert!(c.iter().all(|f| f.admissible_on(dom.0, dom.1)));
        }
        let bounded = default_corpus((0.0, 1.0));
        assert!(bounded.iter().all(|f| f.shape.compact()));
        let half = default_corpus((0.0, f64::INFINITY));
        assert!(half
            .iter()
            .any(|f| matches!(f.shape, Shape::HermiteDecay { .. })));
        assert!(compact_corpus((0.0, f64::INFINITY))
            .iter()
            .all(|f| f.shape.compact()));
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = default_corpus((0.0, f64::INFINITY));
        let b = default_corpus((0.0, f64::INFINITY));
        assert_eq!(a, b);
        let ids: Vec<String> = a.iter().map(TestFunction::id).collect();
        let mut dedup = ids.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), ids.len());
    }

    #[test]
    fn derivative_audit_all_members() {
        let mut all = default_corpus((0.0, f64::INFINITY));
        all.extend(default_corpus((0.0, 1.0)));
        all.extend(default_corpus((f64::NEG_INFINITY, f64::INFINITY)));
        all.extend(compact_corpus((0.0, f64::INFINITY)));
        all.push(TestFunction::power_cutoff(0.55, 4, false).unwrap());
        all.push(TestFunction::power_cutoff(0.3, 4, true).unwrap());
        for f in all {
            let e = f.derivative_audit(64);
            assert!(e < 1e-5, "{}: {e}", f.id());
        }
    }

    #[test]
    fn zero_member() {
        let z = TestFunction::zero();
        assert!(z.is_zero());
        assert_eq!(z.jet(0.3), (0.0, 0.0, 0.0));
    }
}
