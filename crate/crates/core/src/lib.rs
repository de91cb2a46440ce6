//! Numerical verification of weighted Hardy and Gagliardo–Nirenberg
//! inequalities in Orlicz spaces over one-dimensional measures
//! `μ(dx) = e^{-φ(x)} dx`.
//!
//! The crate is organised bottom-up:
//!
//! * [`quad`] adaptive Gauss–Kronrod quadrature with infinite-interval maps,
//! * [`measure`] weighted measures and modular integrals against them,
//! * [`nfunc`] N-functions, conjugates, Simonenko indices and Δ₂ checks,
//! * [`triple`] Young triples `(M, P, Q)` and the sampled condition (Y),
//! * [`corpus`] test functions with closed-form derivatives,
//! * [`norms`] modulars and Luxemburg norms,
//! * [`hardy`] the Muckenhoupt criterion and empirical Hardy constants,
//! * [`gn`] the constant ledger and the interpolation checks,
//! * [`campaign`] the end-to-end pipeline used by the command-line runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod corpus;
mod error;
pub mod gn;
pub mod grid;
pub mod hardy;
pub mod measure;
pub mod nfunc;
pub mod norms;
pub mod quad;
pub mod spec;
pub mod triple;

pub use corpus::TestFunction;
pub use error::{Error, Result};
pub use measure::{MeasureFamily, WeightedMeasure};
pub use nfunc::{NFunction, SimonenkoIndices};
pub use quad::QuadratureSettings;
pub use triple::YoungTriple;
