use std::collections::HashMap;

use super::{MultilinearError, MultilinearMap};
use crate::symbolic::{DerivativeExpansion, Factor, FactorSymbol, TensorExpr, TensorTerm};

/// Numeric values of the symbols of an expansion at one point.
///
/// `D^k f` at the identity point and at the composed point are distinct
/// entries. Every entry of order `k` must have arity `k` and act on `R^n`.
#[derive(Debug, Clone, Default)]
pub struct JetContext {
    dim: usize,
    jets: HashMap<FactorSymbol, MultilinearMap>,
}

impl JetContext {
    pub fn new(dim: usize) -> Self {
        Self { dim, jets: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, symbol: FactorSymbol, value: MultilinearMap) -> Result<(), MultilinearError> {
        if value.arity() != symbol.order as usize || value.in_dim() != self.dim {
            return Err(MultilinearError::Dimension(format!(
                "jet for {symbol} has arity {} on R^{}, expected arity {} on R^{}",
                value.arity(),
                value.in_dim(),
                symbol.order,
                self.dim
            )));
        }
        self.jets.insert(symbol, value);
        Ok(())
    }

    pub fn with(mut self, symbol: FactorSymbol, value: MultilinearMap) -> Result<Self, MultilinearError> {
        self.insert(symbol, value)?;
        Ok(self)
    }

    pub fn get(&self, symbol: FactorSymbol) -> Result<&MultilinearMap, MultilinearError> {
        self.jets.get(&symbol).ok_or(MultilinearError::MissingJet(symbol))
    }
}

fn evaluate_factor(f: &Factor, ctx: &JetContext) -> Result<MultilinearMap, MultilinearError> {
    match f {
        Factor::Symbol(s) => ctx.get(*s).cloned(),
        Factor::Nested(e) => evaluate_expr(e, ctx),
    }
}

/// `leading · outer · (⊗ inner)`. Without an outer map the inner factors are
/// tensored directly; the leading map takes the core in its first slot and
/// its remaining slots stay free.
pub fn evaluate_expr(e: &TensorExpr, ctx: &JetContext) -> Result<MultilinearMap, MultilinearError> {
    let inner = e.inner.iter().map(|f| evaluate_factor(f, ctx)).collect::<Result<Vec<_>, _>>()?;
    let core = match e.outer {
        Some(outer) => {
            let refs: Vec<&MultilinearMap> = inner.iter().collect();
            ctx.get(outer)?.compose(&refs)?
        }
        None => {
            let mut it = inner.into_iter();
            let first = it.next().ok_or_else(|| MultilinearError::Dimension("empty term".into()))?;
            it.try_fold(first, |acc, m| acc.tensor_product(&m))?
        }
    };
    match e.leading {
        None => Ok(core),
        Some(lead) => {
            let lead_map = ctx.get(lead)?;
            let id = MultilinearMap::identity(ctx.dim());
            let mut parts = vec![&core];
            parts.extend(std::iter::repeat_n(&id, lead_map.arity().saturating_sub(1)));
            lead_map.compose(&parts)
        }
    }
}

pub fn evaluate_term(t: &TensorTerm, ctx: &JetContext) -> Result<MultilinearMap, MultilinearError> {
    Ok(evaluate_expr(&t.expr, ctx)?.scaled(t.coefficient as f64))
}

/// Sum of the term values. Terms may place their arguments in different
/// orders, so the sum equals the derivative after [`MultilinearMap::symmetrize`].
pub fn evaluate_expansion(e: &DerivativeExpansion, ctx: &JetContext) -> Result<MultilinearMap, MultilinearError> {
    let mut terms = e.terms.iter();
    let first = match terms.next() {
        Some(t) => evaluate_term(t, ctx)?,
        None => return Err(MultilinearError::Dimension("empty expansion".into())),
    };
    terms.try_fold(first, |acc, t| acc.add(&evaluate_term(t, ctx)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{expand_composition, expand_inverse, InverseMode};

    fn scalar(k: usize, v: f64) -> MultilinearMap {
        MultilinearMap::from_entries(k, 1, 1, vec![v]).unwrap()
    }

    #[test]
    fn inverse_second_derivative_in_one_dimension() {
        let (a, b) = (1.7, -0.3);
        let ctx = JetContext::new(1)
            .with(FactorSymbol::finv(1), scalar(1, 1.0 / a))
            .unwrap()
            .with(FactorSymbol::f_composed(2), scalar(2, b))
            .unwrap();
        let e = expand_inverse(2, InverseMode::Substituted).unwrap();
        let v = evaluate_term(&e.terms[0], &ctx).unwrap();
        assert!((v.entries()[0] + b / a.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn affine_inverse_has_no_second_derivative() {
        let ctx = JetContext::new(1)
            .with(FactorSymbol::finv(1), scalar(1, 0.5))
            .unwrap()
            .with(FactorSymbol::f_composed(2), scalar(2, 0.0))
            .unwrap();
        let e = expand_inverse(2, InverseMode::Substituted).unwrap();
        assert_eq!(evaluate_expansion(&e, &ctx).unwrap().entries(), &[0.0]);
    }

    #[test]
    fn sin_after_exp_second_derivative() {
        // f = sin, g = exp at 0: g = g' = g'' = 1
        let x = 1.0f64;
        let mut ctx = JetContext::new(1);
        ctx.insert(FactorSymbol::f_composed(1), scalar(1, x.cos())).unwrap();
        ctx.insert(FactorSymbol::f_composed(2), scalar(2, -x.sin())).unwrap();
        ctx.insert(FactorSymbol::g(1), scalar(1, 1.0)).unwrap();
        ctx.insert(FactorSymbol::g(2), scalar(2, 1.0)).unwrap();
        let v = evaluate_expansion(&expand_composition(2).unwrap(), &ctx).unwrap();
        assert!((v.entries()[0] - (x.cos() - x.sin())).abs() < 1e-15);
    }

    #[test]
    fn missing_jet_is_reported() {
        let ctx = JetContext::new(1);
        let e = expand_composition(1).unwrap();
        assert!(matches!(evaluate_expansion(&e, &ctx), Err(MultilinearError::MissingJet(_))));
    }

    #[test]
    fn jet_shape_is_checked() {
        assert!(JetContext::new(2).with(FactorSymbol::g(2), scalar(2, 1.0)).is_err());
    }
}
