//! Campaign configuration, read from a TOML file.
//!
//! ```toml
//! measure = "gaussian"
//! nfunction = "power(2)"
//! triple = "diagonal"        # or "mf(power(2,0.5))", "explicit(p=power(4),q=power(4))"
//! p = 2.0
//! mode = "h"
//! corpus = "compact"
//! seed = 1
//!
//! [quadrature]
//! rel_tol = 1e-9
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use orlicz_gn::gn::{default_theta_grid, Mode};
use orlicz_gn::spec::SpecCall;
use orlicz_gn::{NFunction, QuadratureSettings, WeightedMeasure, YoungTriple};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusSelector {
    /// Compactly supported members only.
    #[default]
    Compact,
    /// Everything, including slowly decaying members.
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSection {
    fn default() -> Self {
        let d = QuadratureSettings::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_subdivisions: d.max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub ps: Vec<f64>,
    /// Also fit `K`, `K₁`, `K₂` on the finite cells.
    pub hardy_fit: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            alphas: vec![0.0, 0.3, 0.9, 1.0, 1.5],
            betas: vec![0.5, 1.0, 2.0],
            ps: vec![1.5, 2.0, 3.0],
            hardy_fit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            lo: 1e-2,
            hi: 1e2,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub measure: String,
    pub nfunction: String,
    pub triple: String,
    pub p: f64,
    pub mode: String,
    pub corpus: CorpusSelector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    pub a_dilation: f64,
    pub seed: u64,
    pub samples: usize,
    /// Assertion slack; meaning depends on the subcommand.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect_finite: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub quadrature: QuadSection,
    pub conjugate: GridSection,
    pub sweep: SweepSection,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            measure: "powerexp(alpha=0,beta=2)".into(),
            nfunction: "power(2)".into(),
            triple: "diagonal".into(),
            p: 2.0,
            mode: "h".into(),
            corpus: CorpusSelector::Compact,
            theta: None,
            a_dilation: 1.0,
            seed: 1,
            samples: 100_000,
            tol: None,
            expect_finite: None,
            output: None,
            quadrature: QuadSection::default(),
            conjugate: GridSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn config_err(e: orlicz_gn::Error) -> CliError {
    CliError::Config(e.to_string())
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| bad(e.message().to_string()))?;
        c.check()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check(&self) -> Result<()> {
        self.measure()?;
        self.nfunction()?;
        self.mode()?;
        self.settings()?;
        self.triple_spec()?;
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(bad(format!("p must exceed 1 (got {})", self.p)));
        }
        if !(self.a_dilation > 0.0 && self.a_dilation.is_finite()) {
            return Err(bad("a_dilation must be positive"));
        }
        if let Some(th) = &self.theta {
            if th.is_empty() || th.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return Err(bad("theta must be a non-empty list of positive numbers"));
            }
        }
        if self.samples == 0 {
            return Err(bad("samples must be positive"));
        }
        let g = &self.conjugate;
        if !(g.lo > 0.0 && g.hi > g.lo && g.hi.is_finite() && g.points >= 2) {
            return Err(bad(
                "conjugate grid needs 0 < lo < hi and at least 2 points",
            ));
        }
        let s = &self.sweep;
        if s.alphas.is_empty() || s.betas.is_empty() || s.ps.is_empty() {
            return Err(bad("sweep lists must be non-empty"));
        }
        Ok(())
    }

    /// Same campaign with every spec string in its canonical spelling.
    pub fn canonical(&self) -> Result<Self> {
        let mut c = self.clone();
        c.measure = self.measure()?.to_string();
        c.nfunction = self.nfunction()?.to_string();
        c.mode = self.mode()?.to_string();
        c.triple = self.triple_spec()?.to_string();
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| bad(e.to_string()))
    }

    pub fn measure(&self) -> Result<WeightedMeasure> {
        WeightedMeasure::from_spec(&self.measure).map_err(config_err)
    }

    pub fn nfunction(&self) -> Result<NFunction> {
        NFunction::from_spec(&self.nfunction).map_err(config_err)
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode.parse().map_err(config_err)
    }

    pub fn settings(&self) -> Result<QuadratureSettings> {
        let q = &self.quadrature;
        let s = QuadratureSettings {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
        };
        s.validate().map_err(config_err)?;
        Ok(s)
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        self.theta.clone().unwrap_or_else(default_theta_grid)
    }

    fn triple_spec(&self) -> Result<TripleSpec> {
        TripleSpec::parse(&self.triple)
    }

    /// Builds the Young triple over `nfunction`.
    pub fn triple(&self) -> Result<YoungTriple> {
        let m = self.nfunction()?;
        Ok(match self.triple_spec()? {
            TripleSpec::Diagonal => YoungTriple::diagonal(&m)?,
            TripleSpec::Mf { f, c } => YoungTriple::mf(&m, &f, c)?,
            TripleSpec::Explicit { p, q } => YoungTriple::explicit(&m, &p, &q),
        })
    }
}

#[derive(Debug, Clone)]
enum TripleSpec {
    Diagonal,
    Mf { f: NFunction, c: Option<f64> },
    Explicit { p: NFunction, q: NFunction },
}

impl TripleSpec {
    fn parse(text: &str) -> Result<Self> {
        let call = SpecCall::parse(text).map_err(config_err)?;
        let one = |key: &str, pos: usize| -> Result<NFunction> {
            let raw = match call.get(key) {
                Some([v]) => v.clone(),
                Some(_) => return Err(bad(format!("`{key}` takes one N-function"))),
                None => call
                    .positional
                    .get(pos)
                    .cloned()
                    .ok_or_else(|| bad(format!("triple `{text}` is missing `{key}`")))?,
            };
            NFunction::from_spec(&raw).map_err(config_err)
        };
        match call.name.as_str() {
            "diagonal" => {
                call.check(&[], 0).map_err(config_err)?;
                Ok(Self::Diagonal)
            }
            "mf" => {
                call.check(&["f", "c"], 1).map_err(config_err)?;
                let c = call.num("c", 9).map_err(config_err)?;
                Ok(Self::Mf { f: one("f", 0)?, c })
            }
            "explicit" => {
                call.check(&["p", "q"], 2).map_err(config_err)?;
                Ok(Self::Explicit {
                    p: one("p", 0)?,
                    q: one("q", 1)?,
                })
            }
            other => Err(bad(format!(
                "unknown triple `{other}` (expected diagonal, mf or explicit)"
            ))),
        }
    }
}

impl std::fmt::Display for TripleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Diagonal => f.write_str("diagonal"),
            Self::Mf { f: g, c: None } => write!(f, "mf({g})"),
            Self::Mf { f: g, c: Some(c) } => write!(f, "mf({g},c={c})"),
            Self::Explicit { p, q } => write!(f, "explicit(p={p},q={q})"),
        }
    }
}
