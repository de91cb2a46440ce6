//! Log-spaced evaluation grids and golden-section search.

/// Log-uniform grid on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl LogGrid {
    pub const fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        if self.n == 1 {
            return vec![self.lo];
        }
        let h = (b - a) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i == 0 {
                    self.lo
                } else if i + 1 == self.n {
                    self.hi
                } else {
                    (a + h * i as f64).exp()
                }
            })
            .collect()
    }
}

impl Default for LogGrid {
    /// 2048 points on `[1e-8, 1e8]`.
    fn default() -> Self {
        Self::new(1e-8, 1e8, 2048)
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximises a unimodal `f` on `[a, b]`; returns `(argmax, max)`.
///
/// The returned maximum is the best value seen during the search, so it is
/// never above the true supremum for exact `f`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best) = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best {
                best = fc;
                best_x = c;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best {
                best = fd;
                best_x = d;
            }
        }
    }
    (best_x, best)
}

/// Minimises a unimodal `f` on `[a, b]`; returns `(argmin, min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|t| -f(t), a, b, rel_tol);
    (x, -v)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
