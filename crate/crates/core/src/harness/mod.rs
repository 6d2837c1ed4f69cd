//! End-to-end checks on gallery maps: derivative identities against
//! independent oracles, norm inequalities against derived constants or
//! committed regression baselines, and the suite runner with its reports.

mod baseline;
mod identity;
mod report;
mod suite;
mod theorem;

pub use baseline::{Baseline, Baselines};
pub use identity::{verify_composition_identity, verify_inverse_identity, verify_product_identity, inverse_context, Discrepancy, Tolerance};
pub use report::{to_csv, write_reports, CheckReport, Outcome, Verdict};
pub use suite::{catalog, parse_suite_list, run_check, run_suite, select, CheckSpec, SuiteConfig, SuiteOutcome, DEFAULT_GRID};
pub use theorem::{boyd_gate, verify_gn_inequality, verify_theorem1_pipeline, GATE_THRESHOLD};

use crate::maps::MapError;
use crate::multilinear::MultilinearError;
use crate::spaces::SpaceError;
use crate::symbolic::SymbolicError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
    #[error("domain mismatch: {0}")]
    Domain(String),
    #[error("no regression baseline for `{0}`")]
    MissingBaseline(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Multilinear(#[from] MultilinearError),
    #[error("report output: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Errors caused by the request rather than by a check's numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config { .. } | HarnessError::UnknownCheck(_) | HarnessError::Domain(_))
    }
}
