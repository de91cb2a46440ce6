//! One-dimensional weighted measures `μ(dx) = e^{-φ(x)} dx`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::quad::{self, Integral, QuadratureSettings};
use crate::spec::{fmt_num, SpecCall};
use crate::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MeasureFamily {
    /// `x^α dx` on `(0, ∞)`.
    Power {
        alpha: f64,
    },
    /// `x^α e^{-x^β} dx` on `(0, ∞)`.
    PowerExponential {
        alpha: f64,
        beta: f64,
    },
    /// `δ(x)^a dx` on `(l, r)` with `δ(x) = min(x - l, r - x)`.
    Distance {
        a: f64,
    },
    Lebesgue,
    Custom,
}

#[derive(Clone)]
pub struct WeightedMeasure {
    lo: f64,
    hi: f64,
    phi: RealFn,
    phi_prime: RealFn,
    family: MeasureFamily,
}

impl fmt::Debug for WeightedMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedMeasure")
            .field("domain", &(self.lo, self.hi))
            .field("family", &self.family)
            .finish()
    }
}

impl fmt::Display for WeightedMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = (fmt_num(self.lo), fmt_num(self.hi));
        match self.family {
            MeasureFamily::Power { alpha } => write!(f, "power(alpha={alpha})"),
            MeasureFamily::PowerExponential { alpha, beta } => {
                write!(f, "powerexp(alpha={alpha},beta={beta})")
            }
            MeasureFamily::Distance { a } => write!(f, "distance(a={a},interval={l},{r})"),
            MeasureFamily::Lebesgue => write!(f, "lebesgue(interval={l},{r})"),
            MeasureFamily::Custom => write!(f, "custom(interval={l},{r})"),
        }
    }
}

impl WeightedMeasure {
    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::BadParams(format!("power weight exponent {alpha}")));
        }
        Ok(Self {
            lo: 0.0,
            hi: f64::INFINITY,
            phi: Arc::new(move |x: f64| -alpha * x.ln()),
            phi_prime: Arc::new(move |x: f64| -alpha / x),
            family: MeasureFamily::Power { alpha },
        })
    }

    pub fn power_exponential(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::BadParams(format!(
                "powerexp needs alpha >= 0, beta > 0 (got {alpha}, {beta})"
            )));
        }
        Ok(Self {
            lo: 0.0,
            hi: f64::INFINITY,
            phi: Arc::new(move |x: f64| {
                x.powf(beta) - if alpha == 0.0 { 0.0 } else { alpha * x.ln() }
            }),
            phi_prime: Arc::new(move |x: f64| beta * x.powf(beta - 1.0) - alpha / x),
            family: MeasureFamily::PowerExponential { alpha, beta },
        })
    }

    pub fn distance(a: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && a.is_finite()) {
            return Err(Error::BadParams(format!(
                "distance weight needs a bounded interval (got ({lo}, {hi}), a = {a})"
            )));
        }
        let mid = 0.5 * (lo + hi);
        Ok(Self {
            lo,
            hi,
            phi: Arc::new(move |x: f64| -a * (x - lo).min(hi - x).ln()),
            phi_prime: Arc::new(
                move |x: f64| {
                    if x < mid {
                        -a / (x - lo)
                    } else {
                        a / (hi - x)
                    }
                },
            ),
            family: MeasureFamily::Distance { a },
        })
    }

    pub fn lebesgue(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::BadParams(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self {
            lo,
            hi,
            phi: Arc::new(|_| 0.0),
            phi_prime: Arc::new(|_| 0.0),
            family: MeasureFamily::Lebesgue,
        })
    }

    pub fn custom<F, G>(lo: f64, hi: f64, phi: F, phi_prime: G) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo < hi) {
            return Err(Error::BadParams(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self {
            lo,
            hi,
            phi: Arc::new(phi),
            phi_prime: Arc::new(phi_prime),
            family: MeasureFamily::Custom,
        })
    }

    /// Parses `power(alpha=..)`, `powerexp(alpha=..,beta=..)`,
    /// `distance(a=..,interval=l,r)` or `lebesgue(interval=l,r)`.
    pub fn from_spec(text: &str) -> Result<Self> {
        let c = SpecCall::parse(text)?;
        let interval = |default: (f64, f64)| -> Result<(f64, f64)> {
            match c.nums("interval")? {
                None => Ok(default),
                Some(v) if v.len() == 2 => Ok((v[0], v[1])),
                Some(_) => Err(c.err("`interval` takes two values")),
            }
        };
        match c.name.as_str() {
            "power" => {
                c.check(&["alpha"], 1)?;
                Self::power(c.require("alpha", 0)?)
            }
            "powerexp" | "power_exponential" => {
                c.check(&["alpha", "beta"], 2)?;
                Self::power_exponential(c.require("alpha", 0)?, c.require("beta", 1)?)
            }
            "gaussian" => {
                c.check(&[], 0)?;
                Self::power_exponential(0.0, 2.0)
            }
            "distance" => {
                c.check(&["a", "interval"], 1)?;
                let (l, r) = interval((0.0, 1.0))?;
                Self::distance(c.require("a", 0)?, l, r)
            }
            "lebesgue" => {
                c.check(&["interval"], 0)?;
                let (l, r) = interval((f64::NEG_INFINITY, f64::INFINITY))?;
                Self::lebesgue(l, r)
            }
            other => Err(c.err(format!("unknown measure family `{other}`"))),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn family(&self) -> MeasureFamily {
        self.family
    }

    #[inline]
    pub fn phi(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    #[inline]
    pub fn phi_prime(&self, x: f64) -> f64 {
        (self.phi_prime)(x)
    }

    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        (-(self.phi)(x)).exp()
    }

    /// `(e^{-φ(x)}, |φ'(x)|)` at an interior point.
    pub fn weight_at(&self, x: f64) -> Result<(f64, f64)> {
        if !(x > self.lo && x < self.hi) {
            return Err(Error::OutOfDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok((self.density(x), self.phi_prime(x).abs()))
    }

    /// Points where the density or its derivative is not smooth, or where
    /// `φ'` changes sign.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.family {
            MeasureFamily::Distance { .. } => vec![0.5 * (self.lo + self.hi)],
            MeasureFamily::PowerExponential { alpha, beta } if alpha > 0.0 => {
                vec![(alpha / beta).powf(1.0 / beta)]
            }
            _ => vec![],
        }
    }

    /// `∫ integrand dμ` over the whole domain.
    pub fn integrate<F>(&self, integrand: F, s: &QuadratureSettings) -> Result<Integral>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate_over(integrand, self.lo, self.hi, &[], s)
    }

    /// `∫_lo^hi integrand dμ`, splitting additionally at `extra_breaks`.
    pub fn integrate_over<F>(
        &self,
        integrand: F,
        lo: f64,
        hi: f64,
        extra_breaks: &[f64],
        s: &QuadratureSettings,
    ) -> Result<Integral>
    where
        F: Fn(f64) -> f64,
    {
        let (lo, hi) = (lo.max(self.lo), hi.min(self.hi));
        if !(lo < hi) {
            return Ok(Integral {
                value: 0.0,
                abs_error: 0.0,
                subdivisions: 0,
            });
        }
        let mut breaks = self.breakpoints();
        breaks.extend_from_slice(extra_breaks);
        let g = |x: f64| {
            if !(x > self.lo && x < self.hi) {
                return 0.0;
            }
            let v = integrand(x);
            if v == 0.0 {
                0.0
            } else {
                v * self.density(x)
            }
        };
        quad::integrate(g, lo, hi, &breaks, s)
    }

    /// Largest relative mismatch between `φ'` and a central difference of
    /// `φ` on an interior log/linear grid (breakpoints excluded).
    pub fn derivative_audit(&self) -> f64 {
        let pts = self.interior_points(64);
        let bps = self.breakpoints();
        let mut worst: f64 = 0.0;
        for x in pts {
            let h = 1e-6 * x.abs().max(1e-3);
            if bps.iter().any(|b| (b - x).abs() < 4.0 * h) || !(x - h > self.lo && x + h < self.hi)
            {
                continue;
            }
            let fd = (self.phi(x + h) - self.phi(x - h)) / (2.0 * h);
            let an = self.phi_prime(x);
            let scale = an.abs().max(fd.abs()).max(1e-8);
            worst = worst.max((fd - an).abs() / scale);
        }
        worst
    }

    /// Checks that `e^{-φ}` integrates on a compact subinterval and that `φ'`
    /// agrees with `φ`.
    pub fn validate(&self, s: &QuadratureSettings) -> Result<()> {
        let pts = self.interior_points(8);
        let (a, b) = (pts[1], pts[pts.len() - 2]);
        self.integrate_over(|_| 1.0, a, b, &[], &s.relative_only())?;
        let audit = self.derivative_audit();
        if audit > 1e-5 {
            return Err(Error::BadParams(format!(
                "phi' disagrees with finite differences of phi ({audit:e})"
            )));
        }
        Ok(())
    }

    /// `n` interior sample points: log-spaced on half-lines, uniform on
    /// bounded intervals, symmetric-log on the whole line.
    pub fn interior_points(&self, n: usize) -> Vec<f64> {
        let n = n.max(4);
        let (lo, hi) = (self.lo, self.hi);
        let t = |i: usize| (i as f64 + 0.5) / n as f64;
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (0..n).map(|i| lo + (hi - lo) * t(i)).collect(),
            (true, false) => (0..n).map(|i| lo + 10f64.powf(-4.0 + 7.0 * t(i))).collect(),
            (false, true) => (0..n)
                .rev()
                .map(|i| hi - 10f64.powf(-4.0 + 7.0 * t(i)))
                .collect(),
            (false, false) => (0..n).map(|i| 20.0 * (2.0 * t(i) - 1.0)).collect(),
        }
    }
}
