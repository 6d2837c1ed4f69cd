use std::cmp::Reverse;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::term::{EvalPoint, Factor, FactorSymbol, FunctionTag, TensorExpr, TensorTerm};
use super::SymbolicError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionKind {
    /// `D^m (f∘g)`
    Composition,
    /// `D^m f⁻¹`
    Inverse,
    /// `D^m (f g)` for scalar `f`, `g`
    Product,
}

/// How lower-order inverse derivatives are represented in an inverse expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InverseMode {
    /// Flat terms `D^{k₋₁}f⁻¹ · D^{k₀}f(f⁻¹) · ⊗ D^{kᵢ}f⁻¹` with `kᵢ < m`.
    #[default]
    Unsubstituted,
    /// Every `D^k f⁻¹` with `k ≥ 2` is expanded recursively; only `Df⁻¹` and
    /// `D^k f(f⁻¹)` remain, at the price of nested terms.
    Substituted,
}

/// Full symbolic expansion of an `order`-th derivative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeExpansion {
    pub kind: ExpansionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<InverseMode>,
    pub order: u32,
    pub terms: Vec<TensorTerm>,
}

/// Sort key of the canonical order: outer order descending, then the inner
/// slots lexicographically descending (this reproduces the usual written
/// order `D²g⊗Dg` before `Dg⊗D²g`), then the leading symbol.
fn canonical_key(e: &TensorExpr) -> impl Ord + '_ {
    (
        Reverse(e.outer.map(|o| o.order)),
        Reverse(e.inner_orders()),
        Reverse(e.leading.map(|l| l.order)),
        Reverse(e),
    )
}

impl DerivativeExpansion {
    pub fn new(kind: ExpansionKind, mode: Option<InverseMode>, order: u32, terms: Vec<TensorTerm>) -> Self {
        Self { kind, mode, order, terms }
    }

    /// Merges duplicate term bodies, drops zero coefficients and sorts.
    /// Tensor factors keep their order; `⊗` is not commutative here.
    pub fn canonicalize(&self) -> Result<Self, SymbolicError> {
        let mut merged: HashMap<&TensorExpr, i64> = HashMap::with_capacity(self.terms.len());
        let mut first_seen: Vec<&TensorExpr> = Vec::new();
        for t in &self.terms {
            match merged.get_mut(&t.expr) {
                Some(c) => *c = c.checked_add(t.coefficient).ok_or(SymbolicError::CoefficientOverflow)?,
                None => {
                    merged.insert(&t.expr, t.coefficient);
                    first_seen.push(&t.expr);
                }
            }
        }
        let mut terms: Vec<TensorTerm> = first_seen
            .into_iter()
            .filter_map(|e| {
                let c = merged[e];
                (c != 0).then(|| TensorTerm::new(c, e.clone()))
            })
            .collect();
        terms.sort_by(|a, b| canonical_key(&a.expr).cmp(&canonical_key(&b.expr)));
        Ok(Self { kind: self.kind, mode: self.mode, order: self.order, terms })
    }

    /// Checks every kind-specific structural invariant.
    pub fn validate(&self) -> Result<(), SymbolicError> {
        if self.order == 0 {
            return Err(SymbolicError::InvalidOrder { order: 0, min: 1, max: u32::MAX });
        }
        match (self.kind, self.mode) {
            (ExpansionKind::Inverse, None) => {
                return Err(SymbolicError::InvalidExpansion("inverse expansion without mode".into()))
            }
            (ExpansionKind::Composition | ExpansionKind::Product, Some(_)) => {
                return Err(SymbolicError::InvalidExpansion("mode is only meaningful for inverse expansions".into()))
            }
            _ => {}
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.terms {
            if t.coefficient == 0 {
                return Err(SymbolicError::InvalidTerm(format!("zero coefficient on {t}")));
            }
            if !seen.insert(&t.expr) {
                return Err(SymbolicError::InvalidExpansion(format!("duplicate term {t}")));
            }
            validate_term(self.kind, self.mode.unwrap_or_default(), self.order, t)?;
        }
        Ok(())
    }

    /// Multiplies every coefficient by `factor` (overflow is an error).
    pub fn scaled(&self, factor: i64) -> Result<Self, SymbolicError> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                t.coefficient
                    .checked_mul(factor)
                    .map(|c| TensorTerm::new(c, t.expr.clone()))
                    .ok_or(SymbolicError::CoefficientOverflow)
            })
            .collect::<Result<_, _>>()?;
        Self::new(self.kind, self.mode, self.order, terms).canonicalize()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("expansions always serialize")
    }

    /// Parses and validates the JSON form produced by [`Self::to_json`].
    pub fn from_json(s: &str) -> Result<Self, SymbolicError> {
        let e: Self = serde_json::from_str(s).map_err(|e| SymbolicError::Json(e.to_string()))?;
        e.validate()?;
        Ok(e)
    }
}

fn expect_symbol(
    s: FactorSymbol,
    function: FunctionTag,
    at: EvalPoint,
    min_order: u32,
    what: &str,
) -> Result<(), SymbolicError> {
    if s.function != function || s.at != at || s.order < min_order {
        return Err(SymbolicError::InvalidTerm(format!("{what} has unexpected symbol {s}")));
    }
    Ok(())
}

/// Validates one term against the kind's grammar. Public so that
/// hand-built terms can be checked before evaluation.
pub fn validate_term(kind: ExpansionKind, mode: InverseMode, m: u32, t: &TensorTerm) -> Result<(), SymbolicError> {
    let e = &t.expr;
    match kind {
        ExpansionKind::Composition => {
            if e.leading.is_some() {
                return Err(SymbolicError::InvalidTerm(format!("composition term with leading factor: {t}")));
            }
            let outer = e.outer.ok_or_else(|| SymbolicError::InvalidTerm(format!("missing outer factor: {t}")))?;
            expect_symbol(outer, FunctionTag::F, EvalPoint::Composed, 1, "outer factor")?;
            check_inner_len(outer, e, t)?;
            for f in &e.inner {
                let s = f
                    .as_symbol()
                    .ok_or_else(|| SymbolicError::InvalidTerm(format!("nested factor in composition term: {t}")))?;
                expect_symbol(s, FunctionTag::G, EvalPoint::Identity, 1, "inner factor")?;
            }
            check_sum(e.arity(), m, t)
        }
        ExpansionKind::Inverse => {
            validate_inverse_expr(mode, e, t)?;
            let leading = e.leading.expect("checked above").order;
            let inner_sum: u32 = e.inner.iter().map(Factor::arity).sum();
            if leading + inner_sum != m + 1 {
                return Err(SymbolicError::InvalidTerm(format!(
                    "k-sum {} + {} differs from m + 1 = {}: {t}",
                    leading,
                    inner_sum,
                    m + 1
                )));
            }
            Ok(())
        }
        ExpansionKind::Product => {
            if e.leading.is_some() || e.outer.is_some() || e.inner.len() != 2 {
                return Err(SymbolicError::InvalidTerm(format!("product term must be D^j f ⊗ D^(m-j) g: {t}")));
            }
            let (a, b) = match (e.inner[0].as_symbol(), e.inner[1].as_symbol()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(SymbolicError::InvalidTerm(format!("nested factor in product term: {t}"))),
            };
            expect_symbol(a, FunctionTag::F, EvalPoint::Identity, 0, "first product factor")?;
            expect_symbol(b, FunctionTag::G, EvalPoint::Identity, 0, "second product factor")?;
            check_sum(e.arity(), m, t)
        }
    }
}

fn check_inner_len(outer: FactorSymbol, e: &TensorExpr, t: &TensorTerm) -> Result<(), SymbolicError> {
    if e.inner.len() != outer.order as usize {
        return Err(SymbolicError::InvalidTerm(format!(
            "outer order {} but {} inner factors: {t}",
            outer.order,
            e.inner.len()
        )));
    }
    Ok(())
}

fn check_sum(arity: u32, m: u32, t: &TensorTerm) -> Result<(), SymbolicError> {
    if arity != m {
        return Err(SymbolicError::InvalidTerm(format!("term has {arity} free directions, expected {m}: {t}")));
    }
    Ok(())
}

fn validate_inverse_expr(mode: InverseMode, e: &TensorExpr, t: &TensorTerm) -> Result<(), SymbolicError> {
    let leading = e
        .leading
        .ok_or_else(|| SymbolicError::InvalidTerm(format!("inverse term without leading factor: {t}")))?;
    expect_symbol(leading, FunctionTag::FInv, EvalPoint::Identity, 1, "leading factor")?;
    let outer = e.outer.ok_or_else(|| SymbolicError::InvalidTerm(format!("missing outer factor: {t}")))?;
    expect_symbol(outer, FunctionTag::F, EvalPoint::Composed, 2, "outer factor")?;
    check_inner_len(outer, e, t)?;
    match mode {
        InverseMode::Unsubstituted => {
            for f in &e.inner {
                let s = f
                    .as_symbol()
                    .ok_or_else(|| SymbolicError::InvalidTerm(format!("nested factor in unsubstituted term: {t}")))?;
                expect_symbol(s, FunctionTag::FInv, EvalPoint::Identity, 1, "inner factor")?;
            }
        }
        InverseMode::Substituted => {
            if leading.order != 1 {
                return Err(SymbolicError::InvalidTerm(format!("substituted term with higher leading factor: {t}")));
            }
            for f in &e.inner {
                match f {
                    Factor::Symbol(s) if *s == FactorSymbol::finv(1) => {}
                    Factor::Symbol(s) => {
                        return Err(SymbolicError::InvalidTerm(format!("substituted term keeps {s}: {t}")))
                    }
                    Factor::Nested(n) => validate_inverse_expr(mode, n, t)?,
                }
            }
        }
    }
    Ok(())
}

impl fmt::Display for DerivativeExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lhs, point) = match self.kind {
            ExpansionKind::Composition => ("(f∘g)", "g"),
            ExpansionKind::Inverse => ("f⁻¹", "f⁻¹"),
            ExpansionKind::Product => ("(fg)", ""),
        };
        write!(f, "D^{} {lhs} =", self.order)?;
        for (i, t) in self.terms.iter().enumerate() {
            let sign = if t.coefficient < 0 { "-" } else if i == 0 { "" } else { "+" };
            write!(f, "\n  {sign} ")?;
            if t.coefficient.abs() != 1 {
                write!(f, "{}·", t.coefficient.abs())?;
            }
            t.expr.render(f, point)?;
        }
        Ok(())
    }
}
