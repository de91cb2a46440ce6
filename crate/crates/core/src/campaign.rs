//! End-to-end pipelines: Hardy fit, `αₙ` calibration, ledger, modular and
//! norm checks over a corpus; Muckenhoupt sweeps over weight parameters.

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{compact_corpus, TestFunction};
use crate::gn::{self, AlphaCalibration, ConstantLedger, GnReport, Mode, NormRow};
use crate::hardy::{self, HardyFit, HardyFitOptions, MuckenhouptReport};
use crate::measure::{MeasureFamily, WeightedMeasure};
use crate::nfunc::{simonenko_indices, SimonenkoIndices};
use crate::quad::QuadratureSettings;
use crate::triple::YoungTriple;
use crate::Result;

#[derive(Debug, Clone)]
pub struct GnCampaign {
    pub triple: YoungTriple,
    pub mu: WeightedMeasure,
    pub corpus: Vec<TestFunction>,
    pub mode: Mode,
    pub a_dilation: f64,
    pub theta_grid: Vec<f64>,
    /// Divisor applied to `B` for the sensitivity check.
    pub corruption: f64,
    pub settings: QuadratureSettings,
}

impl GnCampaign {
    /// Campaign over the compact corpus of the measure's domain with the
    /// default θ grid and `A = 1`.
    pub fn new(triple: YoungTriple, mu: WeightedMeasure, mode: Mode) -> Self {
        let corpus = compact_corpus(mu.domain());
        Self {
            triple,
            mu,
            corpus,
            mode,
            a_dilation: 1.0,
            theta_grid: gn::default_theta_grid(),
            corruption: 100.0,
            settings: QuadratureSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GnCampaignReport {
    pub mode: Mode,
    pub measure: String,
    pub triple: YoungTriple,
    pub indices: SimonenkoIndices,
    pub hardy: HardyFit,
    pub alpha: AlphaCalibration,
    pub ledger: ConstantLedger,
    pub modular: Vec<GnReport>,
    pub norms: Vec<NormRow>,
    /// Why the norm rows are absent, if they are.
    pub norms_skipped: Option<String>,
    pub corrupted_ledger: ConstantLedger,
    /// Corpus members violating the modular inequality with the corrupted `B`.
    pub corrupted_violations: Vec<String>,
    pub notes: Vec<String>,
}

impl GnCampaignReport {
    pub fn modular_ok(&self) -> bool {
        self.modular.iter().all(|r| r.satisfied)
    }

    pub fn norms_ok(&self) -> bool {
        self.norms.iter().all(|r| r.satisfied)
    }

    pub fn corruption_detected(&self) -> bool {
        !self.corrupted_violations.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.modular_ok() && self.norms_ok() && self.corruption_detected()
    }
}

fn notes_for(mu: &WeightedMeasure, mode: Mode) -> Vec<String> {
    let mut notes = Vec::new();
    if let MeasureFamily::Distance { a } = mu.family() {
        notes.push(format!(
            "distance weight a = {a}: the distance Hardy inequality needs a < q-1, which this run assumes; the opposite hypothesis a > q-1 is not exercised"
        ));
    }
    if mode == Mode::H1 {
        notes.push("theta restricted to (0, 1]".into());
    }
    notes
}

/// Fit Hardy constants, calibrate `αₙ`, build the ledger and run the
/// modular and norm checks over the corpus.
pub fn run_gn(c: &GnCampaign) -> Result<GnCampaignReport> {
    let s = &c.settings;
    let t = &c.triple;
    let indices = simonenko_indices(&t.m)?;
    let scales: Vec<f64> = c
        .theta_grid
        .iter()
        .filter(|&&th| c.mode == Mode::H || th <= 1.0)
        .map(|th| th / c.a_dilation)
        .collect();
    let opts = HardyFitOptions {
        a_dilation: c.a_dilation,
        remainder: (c.mode == Mode::H1).then(|| t.m.clone()),
        derivative_scales: scales,
        settings: *s,
    };
    let fit = hardy::fit_hardy_constants(&t.p, &c.mu, &c.corpus, &opts)?;
    let alpha = gn::calibrate_alpha_n(&c.corpus, &t.m, &c.mu, s)?;
    let ledger = gn::build_ledger(&fit, alpha.alpha, &indices)?;

    let modular: Vec<GnReport> = c
        .corpus
        .par_iter()
        .map(|u| gn::gn_modular_check(u, t, &c.mu, &ledger, &c.theta_grid, s))
        .collect::<Result<_>>()?;
    let (p_ok, q_ok) = t.nfunction_flags();
    let (norms, norms_skipped) = if p_ok && q_ok {
        (
            c.corpus
                .par_iter()
                .map(|u| gn::gn_norm_check(u, t, &c.mu, &ledger, s))
                .collect::<Result<_>>()?,
            None,
        )
    } else {
        (vec![], Some(format!("P valid: {p_ok}, Q valid: {q_ok}")))
    };
    let corrupted_ledger = ledger.with_b_divided(c.corruption);
    let corrupted: Vec<GnReport> = c
        .corpus
        .par_iter()
        .map(|u| gn::gn_modular_check(u, t, &c.mu, &corrupted_ledger, &c.theta_grid, s))
        .collect::<Result<_>>()?;
    let corrupted_violations = corrupted
        .into_iter()
        .filter(|r| !r.satisfied)
        .map(|r| r.function)
        .collect();

    Ok(GnCampaignReport {
        mode: c.mode,
        measure: c.mu.to_string(),
        triple: t.clone(),
        indices,
        hardy: fit,
        alpha,
        ledger,
        modular,
        norms,
        norms_skipped,
        corrupted_ledger,
        corrupted_violations,
        notes: notes_for(&c.mu, c.mode),
    })
}

/// `0 ≤ α < p-1`, the exact condition for `x^α e^{-x^β}` and `β > 0`.
pub fn powerexp_finite(alpha: f64, p: f64) -> bool {
    alpha >= 0.0 && alpha < p - 1.0
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub expected_finite: bool,
    pub report: MuckenhouptReport,
}

impl SweepRow {
    pub fn agrees(&self) -> bool {
        self.expected_finite == self.report.finite
    }
}

/// Muckenhoupt verdicts for `x^α e^{-x^β}` over the product grid, in
/// `(α, β, p)` lexicographic order.
pub fn muckenhoupt_sweep(
    alphas: &[f64],
    betas: &[f64],
    ps: &[f64],
    s: &QuadratureSettings,
) -> Result<Vec<SweepRow>> {
    let mut cells = Vec::new();
    for &alpha in alphas {
        for &beta in betas {
            for &p in ps {
                cells.push((alpha, beta, p));
            }
        }
    }
    cells
        .par_iter()
        .map(|&(alpha, beta, p)| {
            let mu = WeightedMeasure::power_exponential(alpha, beta)?;
            let report = hardy::muckenhoupt_check(&mu, p, s)?;
            Ok(SweepRow {
                alpha,
                beta,
                p,
                expected_finite: powerexp_finite(alpha, p),
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunc::NFunction;

    #[test]
    fn gaussian_square_campaign_h() {
        let m = NFunction::power(2.0).unwrap();
        let t = YoungTriple::diagonal(&m).unwrap();
        let mu = WeightedMeasure::power_exponential(0.0, 2.0).unwrap();
        let r = run_gn(&GnCampaign::new(t, mu, Mode::H)).unwrap();
        assert!(
            r.modular_ok(),
            "{:?}",
            r.modular
                .iter()
                .filter(|x| !x.satisfied)
                .collect::<Vec<_>>()
        );
        assert!(r.norms_ok());
        assert!(r.corruption_detected());
        assert!(r.alpha.alpha <= 10.0);
        assert_eq!(r.ledger, r.ledger.recompute());
    }

    #[test]
    fn sweep_small() {
        let rows =
            muckenhoupt_sweep(&[0.0, 1.5], &[1.0], &[2.0], &QuadratureSettings::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(SweepRow::agrees));
    }
}
