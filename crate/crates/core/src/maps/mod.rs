//! Closed-form bilipschitz test maps, scalar test functions, finite
//! differences and grid sampling into step profiles.

mod fd;
mod sampling;
mod scalar;
mod test_map;

pub use fd::{default_step, finite_difference_jet};
pub use sampling::{sample_derivative_profile, sample_scalar_profile, SampleGrid};
pub use scalar::{Polynomial, ScalarFn};
pub use test_map::{by_name, gallery, InverseMode, TestMap};

use crate::multilinear::MultilinearError;
use crate::spaces::SpaceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("inversion failed after {iterations} iterations, residual {residual:e}")]
    Inversion { residual: f64, iterations: usize },
    #[error("finite-difference stencil leaves the domain: {0}")]
    StencilOutsideDomain(String),
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("derivative order {0} above the supported maximum")]
    Order(u32),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Multilinear(#[from] MultilinearError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}
