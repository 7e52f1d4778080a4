//! Statistical verification harness: confronts exact (PGF-engine) and
//! empirical (simulator) quantities with the closed-form limit laws and with
//! each other, emitting machine-readable [`ComparisonReport`]s.
//!
//! Every comparison carries an explicit tolerance; reports embed full
//! provenance (seed, partition, window-sequence choices, attempt counts) and
//! regenerate bit-identically from it.

pub mod acceptance;
pub mod checks;
pub mod enumeration;
pub mod report;
pub mod stats;

pub use acceptance::{AcceptanceConfig, CriterionOutcome};
pub use checks::{
    check_emigrant_tail, check_mc_vs_pgf, check_mrca_exact, check_mrca_type_mc,
    check_reduced_onedim, check_survival_asymptotics, check_yaglom, default_probe_grid,
    window_growth, window_offset, McConfig, ReducedRegime,
};
pub use report::{ComparisonReport, ProbePoint, Provenance};
