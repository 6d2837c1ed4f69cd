//! Generation of derivative expansions.
//!
//! Formal differentiation follows three rewrite rules, applied through the
//! product rule to every symbol of a term:
//!
//! * a composed factor `D^k f(φ)` becomes `D^{k+1} f(φ)` and gains `Dφ` as
//!   its new *first* inner slot (`φ = g` or `φ = f⁻¹`);
//! * a factor at the free point, `D^k g` or `D^k f⁻¹`, becomes `D^{k+1}`;
//! * in substituted inverse expansions `D(Df⁻¹)` is immediately replaced by
//!   `-Df⁻¹ · D²f(f⁻¹) · (Df⁻¹ ⊗ Df⁻¹)`, which nests terms.

use super::expansion::{DerivativeExpansion, ExpansionKind, InverseMode};
use super::term::{Factor, FactorSymbol, FunctionTag, TensorExpr, TensorTerm};
use super::SymbolicError;

pub const DEFAULT_MAX_ORDER: u32 = 8;

/// Expansion generator with a configurable order cap.
#[derive(Debug, Clone, Copy)]
pub struct Expander {
    pub max_order: u32,
}

impl Default for Expander {
    fn default() -> Self {
        Self { max_order: DEFAULT_MAX_ORDER }
    }
}

#[derive(Debug, Clone, Copy)]
enum Rules {
    Composition,
    Inverse(InverseMode),
    Product,
}

impl Rules {
    fn of(e: &DerivativeExpansion) -> Self {
        match e.kind {
            ExpansionKind::Composition => Rules::Composition,
            ExpansionKind::Inverse => Rules::Inverse(e.mode.unwrap_or_default()),
            ExpansionKind::Product => Rules::Product,
        }
    }

    /// `Dφ`, the factor produced by differentiating a composed symbol.
    fn inner_derivative(self) -> FactorSymbol {
        match self {
            Rules::Composition => FactorSymbol::g(1),
            _ => FactorSymbol::finv(1),
        }
    }

    fn substitutes(self) -> bool {
        matches!(self, Rules::Inverse(InverseMode::Substituted))
    }
}

/// `-Df⁻¹ · D²f(f⁻¹) · (a ⊗ Df⁻¹)`: the substituted value of `D²f⁻¹⟨a, ·⟩`.
fn second_inverse_applied_to(a: Factor) -> TensorExpr {
    TensorExpr::new(
        Some(FactorSymbol::finv(1)),
        Some(FactorSymbol::f_composed(2)),
        vec![a, FactorSymbol::finv(1).into()],
    )
}

fn derive_expr(e: &TensorExpr, rules: Rules) -> Vec<(i64, TensorExpr)> {
    let mut out = Vec::new();

    if let Some(lead) = e.leading {
        if rules.substitutes() && lead.function == FunctionTag::FInv {
            debug_assert_eq!(lead.order, 1);
            let previous = TensorExpr::new(Some(lead), e.outer, e.inner.clone());
            out.push((-1, second_inverse_applied_to(Factor::Nested(Box::new(previous)))));
        } else {
            out.push((1, TensorExpr::new(Some(lead.raised()), e.outer, e.inner.clone())));
        }
    }

    if let Some(outer) = e.outer {
        let mut inner = Vec::with_capacity(e.inner.len() + 1);
        inner.push(rules.inner_derivative().into());
        inner.extend(e.inner.iter().cloned());
        out.push((1, TensorExpr::new(e.leading, Some(outer.raised()), inner)));
    }

    for (i, factor) in e.inner.iter().enumerate() {
        for (c, replaced) in derive_factor(factor, rules) {
            let mut inner = e.inner.clone();
            inner[i] = replaced;
            out.push((c, TensorExpr::new(e.leading, e.outer, inner)));
        }
    }
    out
}

fn derive_factor(f: &Factor, rules: Rules) -> Vec<(i64, Factor)> {
    match f {
        Factor::Symbol(s) if rules.substitutes() && s.function == FunctionTag::FInv => {
            debug_assert_eq!(s.order, 1);
            vec![(-1, Factor::Nested(Box::new(second_inverse_applied_to(FactorSymbol::finv(1).into()))))]
        }
        Factor::Symbol(s) if s.at == super::term::EvalPoint::Composed => {
            // a bare composed symbol never sits in an inner slot of the
            // supported grammars
            unreachable!("composed symbol {s} in inner slot")
        }
        Factor::Symbol(s) => vec![(1, Factor::Symbol(s.raised()))],
        Factor::Nested(n) => derive_expr(n, rules)
            .into_iter()
            .map(|(c, e)| (c, Factor::Nested(Box::new(e))))
            .collect(),
    }
}

impl Expander {
    pub fn new(max_order: u32) -> Self {
        Self { max_order }
    }

    fn check_order(&self, m: u32, min: u32) -> Result<(), SymbolicError> {
        if m < min || m > self.max_order {
            return Err(SymbolicError::InvalidOrder { order: m, min, max: self.max_order });
        }
        Ok(())
    }

    /// `D^m (f∘g)`, enumerated directly.
    ///
    /// The ordered term `(D^r f∘g)·D^{k₁}g ⊗ … ⊗ D^{k_r}g` collects the set
    /// partitions of `{1..m}` whose blocks, listed by decreasing least
    /// element, have sizes `k₁ … k_r`. Listing the blocks the other way
    /// round as `b₁ … b_r`, block `i` holds the smallest element not yet
    /// used plus `bᵢ - 1` of the remaining `m - (b₁+…+b_{i-1}) - 1`, which
    /// gives the product of binomials below.
    pub fn expand_composition(&self, m: u32) -> Result<DerivativeExpansion, SymbolicError> {
        self.check_order(m, 1)?;
        let mut terms = Vec::new();
        for parts in compositions(m) {
            let mut coeff: i64 = 1;
            let mut used = 0;
            for &b in parts.iter().rev() {
                let c = binomial(m - used - 1, b - 1).ok_or(SymbolicError::CoefficientOverflow)?;
                coeff = coeff.checked_mul(c).ok_or(SymbolicError::CoefficientOverflow)?;
                used += b;
            }
            let inner = parts.iter().map(|&k| FactorSymbol::g(k).into()).collect::<Vec<Factor>>();
            let outer = FactorSymbol::f_composed(parts.len() as u32);
            terms.push(TensorTerm::new(coeff, TensorExpr::new(None, Some(outer), inner)));
        }
        DerivativeExpansion::new(ExpansionKind::Composition, None, m, terms).canonicalize()
    }

    /// `D^m f⁻¹` for `m ≥ 2`, by differentiating the second-order identity
    /// `D²f⁻¹ = -Df⁻¹ · D²f(f⁻¹) · (Df⁻¹ ⊗ Df⁻¹)` `m - 2` times.
    pub fn expand_inverse(&self, m: u32, mode: InverseMode) -> Result<DerivativeExpansion, SymbolicError> {
        self.check_order(m, 2)?;
        let seed = TensorTerm::new(-1, second_inverse_applied_to(FactorSymbol::finv(1).into()));
        let mut e = DerivativeExpansion::new(ExpansionKind::Inverse, Some(mode), 2, vec![seed]);
        while e.order < m {
            e = self.differentiate(&e)?;
        }
        Ok(e)
    }

    /// Leibniz rule: `Σ_j C(m,j) D^j f ⊗ D^{m-j} g`.
    pub fn expand_product(&self, m: u32) -> Result<DerivativeExpansion, SymbolicError> {
        self.check_order(m, 1)?;
        let terms = (0..=m)
            .map(|j| {
                let c = binomial(m, j).ok_or(SymbolicError::CoefficientOverflow)?;
                Ok(TensorTerm::new(
                    c,
                    TensorExpr::new(None, None, vec![FactorSymbol::f(j).into(), FactorSymbol::g(m - j).into()]),
                ))
            })
            .collect::<Result<Vec<_>, SymbolicError>>()?;
        DerivativeExpansion::new(ExpansionKind::Product, None, m, terms).canonicalize()
    }

    /// Formal derivative of an expansion, one order up, canonicalized.
    pub fn differentiate(&self, e: &DerivativeExpansion) -> Result<DerivativeExpansion, SymbolicError> {
        self.check_order(e.order + 1, 1)?;
        let rules = Rules::of(e);
        let mut terms = Vec::new();
        for t in &e.terms {
            for (c, expr) in derive_expr(&t.expr, rules) {
                let coeff = t.coefficient.checked_mul(c).ok_or(SymbolicError::CoefficientOverflow)?;
                terms.push(TensorTerm::new(coeff, expr));
            }
        }
        DerivativeExpansion::new(e.kind, e.mode, e.order + 1, terms).canonicalize()
    }
}

pub fn expand_composition(m: u32) -> Result<DerivativeExpansion, SymbolicError> {
    Expander::default().expand_composition(m)
}

pub fn expand_inverse(m: u32, mode: InverseMode) -> Result<DerivativeExpansion, SymbolicError> {
    Expander::default().expand_inverse(m, mode)
}

pub fn expand_product(m: u32) -> Result<DerivativeExpansion, SymbolicError> {
    Expander::default().expand_product(m)
}

pub fn differentiate_expansion(e: &DerivativeExpansion) -> Result<DerivativeExpansion, SymbolicError> {
    Expander::default().differentiate(e)
}

/// The `m - 1`-fold formal derivative of `(Df∘g)·Dg`; a second route to
/// [`expand_composition`].
pub fn composition_by_differentiation(m: u32, expander: &Expander) -> Result<DerivativeExpansion, SymbolicError> {
    expander.check_order(m, 1)?;
    let seed = TensorTerm::new(
        1,
        TensorExpr::new(None, Some(FactorSymbol::f_composed(1)), vec![FactorSymbol::g(1).into()]),
    );
    let mut e = DerivativeExpansion::new(ExpansionKind::Composition, None, 1, vec![seed]);
    while e.order < m {
        e = expander.differentiate(&e)?;
    }
    Ok(e)
}

/// All ordered tuples of positive integers summing to `m`.
fn compositions(m: u32) -> Vec<Vec<u32>> {
    fn rec(left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in 1..=left {
            cur.push(k);
            rec(left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn binomial(n: u32, k: u32) -> Option<i64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(i64::from(n - i))? / i64::from(i + 1);
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(0, 0), Some(1));
        assert_eq!(binomial(3, 4), Some(0));
        assert_eq!(binomial(8, 4), Some(70));
    }

    #[test]
    fn composition_count() {
        assert_eq!(compositions(4).len(), 8);
    }

    #[test]
    fn order_bounds() {
        let x = Expander::default();
        assert!(matches!(x.expand_composition(0), Err(SymbolicError::InvalidOrder { .. })));
        assert!(matches!(x.expand_composition(9), Err(SymbolicError::InvalidOrder { .. })));
        assert!(matches!(x.expand_inverse(1, InverseMode::Unsubstituted), Err(SymbolicError::InvalidOrder { .. })));
        assert!(matches!(x.expand_product(0), Err(SymbolicError::InvalidOrder { .. })));
        let capped = Expander::new(3);
        let e3 = capped.expand_composition(3).unwrap();
        assert!(matches!(capped.differentiate(&e3), Err(SymbolicError::InvalidOrder { .. })));
    }

    #[test]
    fn product_rows() {
        let e = expand_product(2).unwrap();
        let coeffs: Vec<i64> = e.terms.iter().map(|t| t.coefficient).collect();
        assert_eq!(coeffs, vec![1, 2, 1]);
        let e5 = expand_product(5).unwrap();
        let j2 = e5
            .terms
            .iter()
            .find(|t| t.inner()[0].as_symbol() == Some(FactorSymbol::f(2)))
            .unwrap();
        assert_eq!(j2.coefficient, 10);
    }

    #[test]
    fn product_seed() {
        let e = expand_product(1).unwrap();
        assert_eq!(e.terms.len(), 2);
        for t in &e.terms {
            assert_eq!(t.coefficient, 1);
        }
    }
}
