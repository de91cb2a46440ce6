//! Modulars `∫ M(|f|) dμ` and Luxemburg norms.

use serde::Serialize;

use crate::corpus::TestFunction;
use crate::measure::WeightedMeasure;
use crate::nfunc::NFunction;
use crate::quad::QuadratureSettings;
use crate::{Error, Result};

/// A nonnegative function on the measure's domain.
pub trait Profile: Sync {
    fn eval(&self, x: f64, mu: &WeightedMeasure) -> f64;
    /// Interval outside of which the profile vanishes.
    fn support(&self) -> (f64, f64);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Value,
    First,
    Second,
}

/// `scale·|u^{(order)}(x)|`, optionally multiplied by `|φ'(x)|`.
#[derive(Debug, Clone, Copy)]
pub struct Channel<'a> {
    pub func: &'a TestFunction,
    pub order: Order,
    pub scale: f64,
    pub times_grad_phi: bool,
}

impl<'a> Channel<'a> {
    pub fn new(func: &'a TestFunction, order: Order) -> Self {
        Self {
            func,
            order,
            scale: 1.0,
            times_grad_phi: false,
        }
    }

    pub fn value(func: &'a TestFunction) -> Self {
        Self::new(func, Order::Value)
    }

    pub fn first(func: &'a TestFunction) -> Self {
        Self::new(func, Order::First)
    }

    pub fn second(func: &'a TestFunction) -> Self {
        Self::new(func, Order::Second)
    }

    pub fn scaled(self, s: f64) -> Self {
        Self {
            scale: self.scale * s,
            ..self
        }
    }

    pub fn with_grad_phi(self) -> Self {
        Self {
            times_grad_phi: true,
            ..self
        }
    }
}

impl Profile for Channel<'_> {
    #[inline]
    fn eval(&self, x: f64, mu: &WeightedMeasure) -> f64 {
        let (u, u1, u2) = self.func.jet(x);
        let v = match self.order {
            Order::Value => u,
            Order::First => u1,
            Order::Second => u2,
        }
        .abs();
        if v == 0.0 {
            return 0.0;
        }
        let v = self.scale * v;
        if self.times_grad_phi {
            v * mu.phi_prime(x).abs()
        } else {
            v
        }
    }

    fn support(&self) -> (f64, f64) {
        self.func.support()
    }
}

/// Profile from a closure.
pub struct FnProfile<F> {
    f: F,
    support: (f64, f64),
}

impl<F: Fn(f64) -> f64 + Sync> FnProfile<F> {
    pub fn new(f: F, support: (f64, f64)) -> Self {
        Self { f, support }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Profile for FnProfile<F> {
    fn eval(&self, x: f64, _mu: &WeightedMeasure) -> f64 {
        (self.f)(x).abs()
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModularValue {
    pub value: f64,
    pub quadrature_error: f64,
}

/// `∫ M(|f|/k) dμ`.
pub fn modular_scaled<P: Profile + ?Sized>(
    f: &P,
    m: &NFunction,
    mu: &WeightedMeasure,
    k: f64,
    s: &QuadratureSettings,
) -> Result<ModularValue> {
    let (a, b) = f.support();
    let r = mu.integrate_over(
        |x| {
            let v = f.eval(x, mu);
            if v == 0.0 {
                0.0
            } else {
                m.value(v / k)
            }
        },
        a,
        b,
        &[],
        s,
    )?;
    Ok(ModularValue {
        value: r.value.max(0.0),
        quadrature_error: r.abs_error,
    })
}

/// `∫ M(|f|) dμ`.
pub fn modular<P: Profile + ?Sized>(
    f: &P,
    m: &NFunction,
    mu: &WeightedMeasure,
    s: &QuadratureSettings,
) -> Result<ModularValue> {
    modular_scaled(f, m, mu, 1.0, s)
}

/// Largest `K` tried before giving up.
pub const NORM_CAP: f64 = 1e12;

/// `inf{K > 0 : ∫ M(|f|/K) dμ ≤ 1}` by bisection in `ln K`. The returned
/// value is the upper end of the final bracket, so the modular at it is `≤ 1`.
pub fn luxemburg_norm<P: Profile + ?Sized>(
    f: &P,
    m: &NFunction,
    mu: &WeightedMeasure,
    s: &QuadratureSettings,
) -> Result<f64> {
    // A divergent modular only means K is still too small.
    let at = |k: f64| match modular_scaled(f, m, mu, k, s) {
        Ok(v) => Ok(v.value),
        Err(Error::NonConvergent { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };
    let m0 = at(1.0)?;
    if m0 == 0.0 {
        return Ok(0.0);
    }
    let mut k = if m0.is_finite() {
        m0.clamp(1e-6, NORM_CAP)
    } else {
        1.0
    };
    let (mut lo, mut hi);
    if at(k)? <= 1.0 {
        hi = k;
        loop {
            k *= 0.5;
            if k < 1e-300 {
                return Ok(0.0);
            }
            if at(k)? > 1.0 {
                lo = k;
                break;
            }
            hi = k;
        }
    } else {
        lo = k;
        loop {
            k *= 2.0;
            if k > NORM_CAP {
                return Err(Error::NotInSpace { cap: NORM_CAP });
            }
            if at(k)? <= 1.0 {
                hi = k;
                break;
            }
            lo = k;
        }
    }
    while hi / lo - 1.0 > 1e-10 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if at(mid)? <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expo() -> WeightedMeasure {
        WeightedMeasure::power_exponential(0.0, 1.0).unwrap()
    }

    fn s() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    const HALF_LINE: (f64, f64) = (0.0, f64::INFINITY);

    #[test]
    fn modular_examples() {
        let sq = NFunction::power(2.0).unwrap();
        let zero = FnProfile::new(|_| 0.0, HALF_LINE);
        assert_eq!(modular(&zero, &sq, &expo(), &s()).unwrap().value, 0.0);
        let one = FnProfile::new(|_| 1.0, HALF_LINE);
        assert!((modular(&one, &sq, &expo(), &s()).unwrap().value - 1.0).abs() < 1e-10);
        let id = FnProfile::new(|x| x, HALF_LINE);
        assert!((modular(&id, &sq, &expo(), &s()).unwrap().value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn norm_examples() {
        let sq = NFunction::power(2.0).unwrap();
        let one = FnProfile::new(|_| 1.0, HALF_LINE);
        assert!((luxemburg_norm(&one, &sq, &expo(), &s()).unwrap() - 1.0).abs() < 1e-9);
        let id = FnProfile::new(|x| x, HALF_LINE);
        let n = luxemburg_norm(&id, &sq, &expo(), &s()).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-8, "{n}");
        let id3 = FnProfile::new(|x| 3.0 * x, HALF_LINE);
        let n3 = luxemburg_norm(&id3, &NFunction::exp(), &expo(), &s());
        assert!(n3.is_ok());
        let n1 =
            luxemburg_norm(&id, &NFunction::powerlog(2.0, 1.0).unwrap(), &expo(), &s()).unwrap();
        let n3 =
            luxemburg_norm(&id3, &NFunction::powerlog(2.0, 1.0).unwrap(), &expo(), &s()).unwrap();
        assert!((n3 / n1 - 3.0).abs() < 1e-8);
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let z = TestFunction::zero();
        let n = luxemburg_norm(
            &Channel::value(&z),
            &NFunction::power(2.0).unwrap(),
            &expo(),
            &s(),
        )
        .unwrap();
        assert_eq!(n, 0.0);
    }

    #[test]
    fn not_in_space() {
        // the norm is √2·1e13, above the cap
        let huge = FnProfile::new(|x: f64| 1e13 * x, HALF_LINE);
        let r = luxemburg_norm(&huge, &NFunction::power(2.0).unwrap(), &expo(), &s());
        assert!(matches!(r, Err(Error::NotInSpace { .. })), "{r:?}");
    }

    #[test]
    fn channel_with_grad_phi() {
        let mu = WeightedMeasure::power_exponential(0.0, 2.0).unwrap();
        let f = TestFunction::bump(0.5, 1.5).unwrap();
        let c = Channel::value(&f).with_grad_phi().scaled(3.0);
        assert!((c.eval(1.0, &mu) - 3.0 * 2.0 * f.u(1.0)).abs() < 1e-15);
    }
}
