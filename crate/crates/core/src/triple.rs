//! Young triples `(M, P, Q)` with `M(u)/u²·vw ≤ M(u) + P(v) + Q(w)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::{golden_max, ls_slope, LogGrid};
use crate::nfunc::{self, delta2_constant, square_ratio_min_step, NFunction};
use crate::{Error, Result};

/// Box `[SAMPLE_LO, SAMPLE_HI]³` used for fitting and validating (Y).
pub const SAMPLE_LO: f64 = 1e-4;
pub const SAMPLE_HI: f64 = 1e4;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// `P(λ) = C·M(F(√λ))`, `Q(λ) = C·M(F*(√λ))`.
    Mf {
        f: NFunction,
    },
    /// `P = Q = M`.
    Diagonal,
    Explicit,
}

#[derive(Debug, Clone, Serialize)]
pub struct YoungTriple {
    pub m: NFunction,
    pub p: NFunction,
    pub q: NFunction,
    pub c: f64,
    pub provenance: Provenance,
}

/// Checks the (MF) hypotheses on `M`: Δ₂ and `M(λ)/λ²` nondecreasing.
pub fn check_eligible(m: &NFunction) -> Result<()> {
    let d2 = delta2_constant(m);
    if !d2.satisfied {
        return Err(Error::NotEligible {
            reason: format!("{m} violates the Δ₂ condition"),
        });
    }
    let (step, at) = square_ratio_min_step(m, &LogGrid::default());
    if step < -1e-9 {
        return Err(Error::NotEligible {
            reason: format!("{m}: M(λ)/λ² decreases near λ = {at:e} (relative step {step:e})"),
        });
    }
    Ok(())
}

/// Smallest `C` with `(M(u)vw/u² - M(u)) ≤ C·(P₀(v) + Q₀(w))` over the sample
/// box: the largest sampled ratio, polished by local coordinate search and
/// inflated by `1e-6` relative.
pub fn fit_constant(
    m: &NFunction,
    p0: &NFunction,
    q0: &NFunction,
    samples: usize,
    seed: u64,
) -> f64 {
    let ratio = |t: [f64; 3]| {
        let (u, v, w) = (t[0].exp(), t[1].exp(), t[2].exp());
        let mu = m.value(u);
        let num = mu / (u * u) * v * w - mu;
        let den = p0.value(v) + q0.value(w);
        if num <= 0.0 {
            0.0
        } else if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    };
    let pts = log_samples(samples, seed);
    let mut scored: Vec<(f64, usize)> = pts
        .par_iter()
        .enumerate()
        .map(|(i, t)| (ratio(*t), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let (lo, hi) = (SAMPLE_LO.ln(), SAMPLE_HI.ln());
    let mut best = scored.first().map_or(0.0, |s| s.0);
    for &(_, i) in scored.iter().take(8) {
        let mut t = pts[i];
        let mut cur = ratio(t);
        for _ in 0..6 {
            for k in 0..3 {
                let (a, b) = ((t[k] - 1.0).max(lo), (t[k] + 1.0).min(hi));
                let (x, v) = golden_max(
                    |s| {
                        let mut tt = t;
                        tt[k] = s;
                        ratio(tt)
                    },
                    a,
                    b,
                    1e-12,
                );
                if v > cur {
                    cur = v;
                    t[k] = x;
                }
            }
        }
        best = best.max(cur);
    }
    if best > 0.0 {
        best * (1.0 + 1e-6)
    } else {
        f64::MIN_POSITIVE
    }
}

fn log_samples(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (SAMPLE_LO.ln(), SAMPLE_HI.ln());
    (0..n)
        .map(|_| {
            [
                rng.gen_range(lo..=hi),
                rng.gen_range(lo..=hi),
                rng.gen_range(lo..=hi),
            ]
        })
        .collect()
}

/// Default sample count and seed for fitting `C`.
pub const FIT_SAMPLES: usize = 100_000;
pub const FIT_SEED: u64 = 0x5eed_c0de;

impl YoungTriple {
    /// (MF) triple; `c = None` fits the constant.
    pub fn mf(m: &NFunction, f: &NFunction, c: Option<f64>) -> Result<Self> {
        check_eligible(m)?;
        let v = f.validate();
        if !v.is_valid() {
            return Err(Error::BadParams(format!(
                "{f} is not an N-function ({v:?})"
            )));
        }
        let f_star = nfunc::conjugate(f, &LogGrid::default())?;
        let c = match c {
            Some(c) if c > 0.0 && c.is_finite() => c,
            Some(c) => return Err(Error::BadParams(format!("C must be positive (got {c})"))),
            None => {
                let p0 = NFunction::composite(m, f, 1.0)?;
                let q0 = NFunction::composite(m, &f_star, 1.0)?;
                fit_constant(m, &p0, &q0, FIT_SAMPLES, FIT_SEED)
            }
        };
        Ok(Self {
            m: m.clone(),
            p: NFunction::composite(m, f, c)?,
            q: NFunction::composite(m, &f_star, c)?,
            c,
            provenance: Provenance::Mf { f: f.clone() },
        })
    }

    /// `P = Q = M` with `C = 1`.
    pub fn diagonal(m: &NFunction) -> Result<Self> {
        check_eligible(m)?;
        Ok(Self {
            m: m.clone(),
            p: m.clone(),
            q: m.clone(),
            c: 1.0,
            provenance: Provenance::Diagonal,
        })
    }

    /// User-supplied `P`, `Q`; not checked until [`YoungTriple::validate_y`].
    pub fn explicit(m: &NFunction, p: &NFunction, q: &NFunction) -> Self {
        Self {
            m: m.clone(),
            p: p.clone(),
            q: q.clone(),
            c: 1.0,
            provenance: Provenance::Explicit,
        }
    }

    /// Sampled condition (Y) on `samples` log-uniform points of the box.
    pub fn validate_y(&self, samples: usize, seed: u64) -> YViolation {
        let pts = log_samples(samples, seed);
        let eval = |t: &[f64; 3]| {
            let (u, v, w) = (t[0].exp(), t[1].exp(), t[2].exp());
            let mu = self.m.value(u);
            let lhs = mu / (u * u) * v * w;
            let rhs = mu + self.p.value(v) + self.q.value(w);
            let viol = if lhs > rhs { (lhs - rhs) / rhs } else { 0.0 };
            (viol, [u, v, w])
        };
        let (worst, at) = pts.par_iter().map(eval).reduce(
            || (0.0, [f64::NAN; 3]),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && a.1[0].is_nan()) {
                    b
                } else {
                    a
                }
            },
        );
        let violations = pts.par_iter().filter(|t| eval(t).0 > 0.0).count();
        YViolation {
            max_relative_violation: worst,
            worst_triple: at,
            violations,
            samples,
        }
    }

    /// Whether `P` and `Q` pass the N-function checks.
    pub fn nfunction_flags(&self) -> (bool, bool) {
        (self.p.validate().is_valid(), self.q.validate().is_valid())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YViolation {
    pub max_relative_violation: f64,
    pub worst_triple: [f64; 3],
    pub violations: usize,
    pub samples: usize,
}

/// Log-log slope of `f` over `[lo, hi]`.
pub fn fitted_exponent(f: &NFunction, lo: f64, hi: f64) -> f64 {
    let xs: Vec<f64> = (0..=40)
        .map(|k| lo.ln() + (hi.ln() - lo.ln()) * k as f64 / 40.0)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&t| f.value(t.exp()).ln()).collect();
    ls_slope(&xs, &ys)
}

/// `max/min` of `f(λ) / (λ^a ln(2+λ)^b)` over `[lo, hi]`.
pub fn ratio_spread(f: &NFunction, a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let rs: Vec<f64> = (0..=40)
        .map(|k| {
            let x = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / 40.0).exp();
            f.value(x) / (x.powf(a) * (2.0 + x).ln().powf(b))
        })
        .collect();
    let max = rs.iter().cloned().fold(f64::MIN, f64::max);
    let min = rs.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}
