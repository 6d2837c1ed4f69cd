//! Exact symbolic expansions of `D^m (f∘g)`, `D^m f⁻¹` and `D^m (fg)`.

mod expand;
mod expansion;
mod holder;
mod term;
pub mod univariate;

pub use expand::{
    composition_by_differentiation, differentiate_expansion, expand_composition, expand_inverse, expand_product,
    Expander, DEFAULT_MAX_ORDER,
};
pub use expansion::{validate_term, DerivativeExpansion, ExpansionKind, InverseMode};
pub use holder::{holder_exponents, reciprocal_sum, Exponent};
pub use term::{EvalPoint, Factor, FactorSymbol, FunctionTag, TensorExpr, TensorTerm};


#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("derivative order {order} outside [{min}, {max}]")]
    InvalidOrder { order: u32, min: u32, max: u32 },
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("invalid expansion: {0}")]
    InvalidExpansion(String),
    #[error("integer coefficient overflow")]
    CoefficientOverflow,
    #[error("malformed expansion JSON: {0}")]
    Json(String),
}
