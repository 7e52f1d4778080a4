//! Exact and Monte Carlo analysis of decomposable strongly critical
//! multitype Galton-Watson branching processes.
//!
//! The library has five layers:
//!
//! - [`model`]: process specifications, criticality validation, derived
//!   constants, and exact PGF evaluation of single offspring laws.
//! - [`pgf`]: the exact engine: generation-by-generation iteration of the
//!   vector PGF and its Jacobian, giving survival probabilities, conditional
//!   transforms, reduced family-tree laws, and single-ancestor probabilities.
//! - [`sim`]: Monte Carlo genealogy simulation with survivor marking,
//!   reduced-process extraction, ancestor statistics, conditioned sampling by
//!   rejection, and emigrant totals.
//! - [`limits`]: closed-form evaluators for every limiting object the other
//!   layers are compared against.
//! - [`verify`]: the statistical harness confronting exact and empirical
//!   quantities with the limit laws, producing machine-readable reports.

pub mod error;
pub mod limits;
pub mod model;
pub mod models;
pub mod pgf;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use model::{derive_constants, DerivedConstants, ModelSpec, OffspringLaw, ValidatedModel};
