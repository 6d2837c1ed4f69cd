//! Dense multilinear maps, their tensor products and compositions, and the
//! numeric evaluation of symbolic expansions from derivative jets.

mod eval;
mod map;

pub use eval::{evaluate_expansion, evaluate_expr, evaluate_term, JetContext};
pub use map::{MultilinearMap, NormBracket, NormMode};

use crate::symbolic::FactorSymbol;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MultilinearError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no jet supplied for {0}")]
    MissingJet(FactorSymbol),
}
