//! Globally adaptive Gauss–Kronrod (10/21) quadrature.
//!
//! Infinite ends are mapped onto `(0, 1)` with `x = a + t/(1-t)` (mirrored
//! for `-∞`). Panels are bisected worst-first; a panel touching an
//! integrable endpoint singularity is therefore refined geometrically toward
//! that endpoint. The final sum is taken over panels in positional order by
//! pairwise summation so results do not depend on refinement history.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_subdivisions < 1 {
            return Err(Error::BadParams(format!(
                "invalid quadrature settings {self:?}"
            )));
        }
        Ok(())
    }

    /// Same settings with a purely relative target, for integrals whose
    /// magnitude may sit far below `abs_tol`.
    pub fn relative_only(mut self) -> Self {
        self.abs_tol = 0.0;
        self
    }
}

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One application of the 21-point Kronrod rule on `[a, b]`.
/// Returns `(kronrod, error_estimate)`; `None` if the integrand is not finite.
fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Option<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return None;
    }
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    #[allow(clippy::needless_range_loop)]
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (f(center - dx), f(center + dx));
        if !f1.is_finite() || !f2.is_finite() {
            return None;
        }
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (f(center - dx), f(center + dx));
        if !f1.is_finite() || !f2.is_finite() {
            return None;
        }
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = ((res_k - res_g) * half).abs();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    Some((res_k * half, rescale_error(err, res_abs, res_asc)))
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err;
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `x = a + t/(1-t)`, parametrised by `s = 1-t ∈ (0, 1)` so that the
    /// point at infinity sits at `s = 0`, where floating point resolves
    /// deep refinement.
    Upper(f64),
    /// `x = b - t/(1-t)`, same parametrisation.
    Lower(f64),
}

impl Map {
    #[inline]
    fn apply<F: Fn(f64) -> f64>(&self, f: &F, s: f64) -> f64 {
        let x = self.to_x(s);
        if x.is_infinite() && !matches!(self, Map::Identity) {
            return 0.0;
        }
        let v = f(x);
        match *self {
            Map::Identity => v,
            _ if v == 0.0 => 0.0,
            _ => v / (s * s),
        }
    }

    fn to_x(self, s: f64) -> f64 {
        match self {
            Map::Identity => s,
            Map::Upper(a) => {
                if s <= 0.0 {
                    f64::INFINITY
                } else {
                    a + (1.0 - s) / s
                }
            }
            Map::Lower(b) => {
                if s <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    b - (1.0 - s) / s
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    piece: usize,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.piece.cmp(&self.piece))
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// Pairwise (tree) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Integrates `f` over `(a, b)`, `a` and `b` possibly infinite, splitting at
/// the interior `breaks` first.
pub fn integrate<F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    if a.is_nan() || b.is_nan() {
        return Err(Error::BadParams("NaN integration limit".into()));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, breaks, settings)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }

    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && x.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    if a.is_infinite() && b.is_infinite() && cuts.is_empty() {
        cuts.push(0.0);
    }
    let mut nodes = vec![a];
    nodes.extend(cuts);
    nodes.push(b);

    let mut pieces: Vec<Map> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    for w in nodes.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (map, tlo, thi) = if lo.is_infinite() {
            (Map::Lower(hi), 0.0, 1.0)
        } else if hi.is_infinite() {
            (Map::Upper(lo), 0.0, 1.0)
        } else {
            (Map::Identity, lo, hi)
        };
        pieces.push(map);
        let piece = pieces.len() - 1;
        let g = |t: f64| map.apply(&f, t);
        let (value, error) = qk21(&g, tlo, thi).ok_or(Error::NonConvergent {
            lo,
            hi,
            value: f64::NAN,
            error: f64::INFINITY,
            subdivisions: 0,
        })?;
        heap.push(Panel {
            piece,
            lo: tlo,
            hi: thi,
            value,
            error,
        });
    }

    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();
    let mut subdivisions = 0usize;

    loop {
        let budget = settings.abs_tol.max(settings.rel_tol * total.abs());
        if total_err <= budget {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        if subdivisions >= settings.max_subdivisions {
            let map = pieces[worst.piece];
            let (x1, x2) = (map.to_x(worst.lo), map.to_x(worst.hi));
            return Err(Error::NonConvergent {
                lo: x1.min(x2),
                hi: x1.max(x2),
                value: total,
                error: total_err,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // Panel cannot be split further in floating point.
            done.push(worst);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let map = pieces[worst.piece];
        let g = |t: f64| map.apply(&f, t);
        let left = qk21(&g, worst.lo, mid);
        let right = qk21(&g, mid, worst.hi);
        let (Some((v1, e1)), Some((v2, e2))) = (left, right) else {
            let (x1, x2) = (map.to_x(worst.lo), map.to_x(worst.hi));
            return Err(Error::NonConvergent {
                lo: x1.min(x2),
                hi: x1.max(x2),
                value: f64::NAN,
                error: f64::INFINITY,
                subdivisions,
            });
        };
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            piece: worst.piece,
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            piece: worst.piece,
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
        });
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|p, q| p.piece.cmp(&q.piece).then(p.lo.total_cmp(&q.lo)));
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    let value = pairwise_sum(&values);
    let abs_error = pairwise_sum(&errors);
    let budget = settings.abs_tol.max(settings.rel_tol * value.abs());
    if abs_error > budget * 1.0001 {
        return Err(Error::NonConvergent {
            lo: a,
            hi: b,
            value,
            error: abs_error,
            subdivisions,
        });
    }
    Ok(Integral {
        value,
        abs_error,
        subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> QuadratureSettings {
        QuadratureSettings {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_subdivisions: 2000,
        }
    }

    #[test]
    fn polynomials_up_to_degree_ten_are_exact() {
        for k in 0..=10 {
            let r = integrate(|x: f64| x.powi(k), 0.0, 1.0, &[], &tight()).unwrap();
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((r.value - exact).abs() < 1e-12, "degree {k}: {}", r.value);
        }
    }

    #[test]
    fn exponential_on_half_line() {
        let r = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &[], &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn whole_line_gaussian() {
        let r = integrate(
            |x: f64| (-x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &[],
            &tight(),
        )
        .unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} = 2
        let s = QuadratureSettings::default();
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, &[], &s).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{r:?}");
        // ∫_0^1 x^{-0.9} = 10
        let r = integrate(|x: f64| x.powf(-0.9), 0.0, 1.0, &[], &s).unwrap();
        assert!((r.value - 10.0).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn divergent_endpoint_is_reported() {
        let s = QuadratureSettings::default();
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &[], &s);
        assert!(matches!(r, Err(Error::NonConvergent { .. })), "{r:?}");
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let s = QuadratureSettings::default();
        let r = integrate(|x: f64| x, 1.0, 0.0, &[], &s).unwrap();
        assert!((r.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn kink_with_break_point() {
        let s = QuadratureSettings::default();
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], &s).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-13);
    }

    #[test]
    fn invalid_settings_rejected() {
        let s = QuadratureSettings {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(integrate(|x: f64| x, 0.0, 1.0, &[], &s).is_err());
    }
}
