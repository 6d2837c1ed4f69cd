//! Rearrangement-invariant norms of step profiles.
//!
//! A profile stands for `|u|` on a domain of finite measure; every norm is a
//! function of its distribution and is evaluated on `u*` over
//! `(0, |Ω|)`. Lebesgue and Lorentz norms are closed-form sums over pieces,
//! Orlicz norms solve for the Luxemburg constant by bisection.

mod boyd;
mod checks;
mod norm;
mod profile;
mod spec;
mod young;

pub use boyd::{boyd_lower_index, default_t_grid, dilation_operator_norm, BoydEstimate, DilationBracket};
pub use checks::{check_hlp, check_holder, random_hlp_partner, HlpReport, HlpVerdict, HolderReport};
pub use norm::norm;
pub use profile::StepProfile;
pub use spec::SpaceSpec;
pub use young::{adaptive_simpson, check_young_condition, young_integral, YoungFunction, YoungReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
    #[error("Luxemburg norm diverged: {0}")]
    Divergence(String),
    #[error("at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("Hölder exponents: {0}")]
    ExponentSum(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("profile CSV: {0}")]
    Csv(String),
}
