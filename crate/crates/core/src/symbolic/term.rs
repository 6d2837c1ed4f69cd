//! Symbols and tensor terms of high-order derivative formulas.
//!
//! A term is a tree. Its root is a [`TensorExpr`]: an optional *leading*
//! map, an optional *outer* map and an ordered list of *inner* factors that
//! are tensored together and fed into the argument slots of the outer map.
//! When a leading map `D^k f⁻¹` is present, the value of `outer · (⊗ inner)`
//! goes into its first slot and the remaining `k - 1` slots take free
//! directions. Inner factors are either plain symbols or nested expressions;
//! nesting only occurs in fully substituted inverse expansions.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Which function a derivative symbol refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FunctionTag {
    #[serde(rename = "F")]
    F,
    #[serde(rename = "G")]
    G,
    #[serde(rename = "FINV")]
    FInv,
}

/// Where a derivative is evaluated: at the free point `y`, or at the inner
/// map's value (`g(y)` for compositions, `f⁻¹(y)` for inverses).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalPoint {
    Identity,
    Composed,
}

/// `D^order fn` evaluated at `at`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSymbol {
    // field order matters for the derived Ord: derivative order dominates
    pub order: u32,
    #[serde(rename = "fn")]
    pub function: FunctionTag,
    pub at: EvalPoint,
}

impl FactorSymbol {
    pub const fn new(function: FunctionTag, order: u32, at: EvalPoint) -> Self {
        Self { order, function, at }
    }

    /// `D^k f` evaluated at the composed point.
    pub const fn f_composed(order: u32) -> Self {
        Self::new(FunctionTag::F, order, EvalPoint::Composed)
    }

    pub const fn f(order: u32) -> Self {
        Self::new(FunctionTag::F, order, EvalPoint::Identity)
    }

    pub const fn g(order: u32) -> Self {
        Self::new(FunctionTag::G, order, EvalPoint::Identity)
    }

    pub const fn finv(order: u32) -> Self {
        Self::new(FunctionTag::FInv, order, EvalPoint::Identity)
    }

    /// Same symbol, one derivative higher.
    pub const fn raised(self) -> Self {
        Self { order: self.order + 1, ..self }
    }
}

/// One slot of a tensor product.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Factor {
    Symbol(FactorSymbol),
    Nested(Box<TensorExpr>),
}

impl Factor {
    /// Number of free direction arguments this factor consumes.
    pub fn arity(&self) -> u32 {
        match self {
            Factor::Symbol(s) => s.order,
            Factor::Nested(e) => e.arity(),
        }
    }

    pub fn as_symbol(&self) -> Option<FactorSymbol> {
        match self {
            Factor::Symbol(s) => Some(*s),
            Factor::Nested(_) => None,
        }
    }
}

impl From<FactorSymbol> for Factor {
    fn from(s: FactorSymbol) -> Self {
        Factor::Symbol(s)
    }
}

/// Coefficient-free body of a term: `leading · outer · (inner_1 ⊗ … ⊗ inner_j)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorExpr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leading: Option<FactorSymbol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<FactorSymbol>,
    pub inner: Vec<Factor>,
}

impl TensorExpr {
    pub fn new(leading: Option<FactorSymbol>, outer: Option<FactorSymbol>, inner: Vec<Factor>) -> Self {
        Self { leading, outer, inner }
    }

    /// Number of free direction arguments of the whole expression.
    pub fn arity(&self) -> u32 {
        let leading_extra = self.leading.map_or(0, |l| l.order.saturating_sub(1));
        leading_extra + self.inner.iter().map(Factor::arity).sum::<u32>()
    }

    /// Derivative orders of the inner slots; nested slots report their arity.
    pub fn inner_orders(&self) -> Vec<u32> {
        self.inner.iter().map(Factor::arity).collect()
    }

    /// True when no inner slot is a nested expression.
    pub fn is_flat(&self) -> bool {
        self.inner.iter().all(|f| matches!(f, Factor::Symbol(_)))
    }

    /// Visit every symbol in the tree, leading first, then outer, then inner
    /// factors left to right.
    pub fn for_each_symbol(&self, visit: &mut impl FnMut(FactorSymbol)) {
        if let Some(l) = self.leading {
            visit(l);
        }
        if let Some(o) = self.outer {
            visit(o);
        }
        for f in &self.inner {
            match f {
                Factor::Symbol(s) => visit(*s),
                Factor::Nested(e) => e.for_each_symbol(visit),
            }
        }
    }
}

/// A summand of a derivative expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorTerm {
    #[serde(rename = "coeff")]
    pub coefficient: i64,
    #[serde(flatten)]
    pub expr: TensorExpr,
}

impl TensorTerm {
    pub fn new(coefficient: i64, expr: TensorExpr) -> Self {
        Self { coefficient, expr }
    }

    pub fn leading(&self) -> Option<FactorSymbol> {
        self.expr.leading
    }

    pub fn outer(&self) -> Option<FactorSymbol> {
        self.expr.outer
    }

    pub fn inner(&self) -> &[Factor] {
        &self.expr.inner
    }
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

impl FactorSymbol {
    fn render(&self, out: &mut impl fmt::Write, composed_point: &str) -> fmt::Result {
        let name = match self.function {
            FunctionTag::F => "f",
            FunctionTag::G => "g",
            FunctionTag::FInv => "f⁻¹",
        };
        match self.order {
            0 => write!(out, "{name}")?,
            1 => write!(out, "D{name}")?,
            k => write!(out, "D{}{name}", superscript(k))?,
        }
        if self.at == EvalPoint::Composed {
            write!(out, "∘{composed_point}")?;
        }
        Ok(())
    }
}

impl fmt::Display for FactorSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f, "·")
    }
}

impl TensorExpr {
    /// Human-readable form; composed symbols print as `D^k f∘{composed_point}`.
    pub fn render(&self, out: &mut impl fmt::Write, composed_point: &str) -> fmt::Result {
        if let Some(l) = self.leading {
            l.render(out, composed_point)?;
            write!(out, "·")?;
        }
        if let Some(o) = self.outer {
            write!(out, "(")?;
            o.render(out, composed_point)?;
            write!(out, ")·")?;
        }
        for (i, factor) in self.inner.iter().enumerate() {
            if i > 0 {
                write!(out, "⊗")?;
            }
            match factor {
                Factor::Symbol(s) => s.render(out, composed_point)?,
                Factor::Nested(e) => {
                    write!(out, "[")?;
                    e.render(out, composed_point)?;
                    write!(out, "]")?;
                }
            }
        }
        Ok(())
    }

    fn composed_point(&self) -> &'static str {
        let mut has_g = false;
        self.for_each_symbol(&mut |s| has_g |= s.function == FunctionTag::G);
        if has_g {
            "g"
        } else {
            "f⁻¹"
        }
    }
}

impl fmt::Display for TensorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f, self.composed_point())
    }
}

impl fmt::Display for TensorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.coefficient, self.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_counts_leading_extra_slots() {
        // D²f⁻¹ · D²f(f⁻¹) · (Df⁻¹ ⊗ Df⁻¹): 1 + 2 free directions
        let e = TensorExpr::new(
            Some(FactorSymbol::finv(2)),
            Some(FactorSymbol::f_composed(2)),
            vec![FactorSymbol::finv(1).into(), FactorSymbol::finv(1).into()],
        );
        assert_eq!(e.arity(), 3);
        assert!(e.is_flat());
    }

    #[test]
    fn symbol_json_shape() {
        let s = FactorSymbol::f_composed(3);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"order":3,"fn":"F","at":"composed"}"#);
    }

    #[test]
    fn display_reads_like_the_usual_notation() {
        let t = TensorTerm::new(
            2,
            TensorExpr::new(
                None,
                Some(FactorSymbol::f_composed(2)),
                vec![FactorSymbol::g(1).into(), FactorSymbol::g(2).into()],
            ),
        );
        assert_eq!(t.to_string(), "2·(D²f∘g)·Dg⊗D²g");
    }
}
