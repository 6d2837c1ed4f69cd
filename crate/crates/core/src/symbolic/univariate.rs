//! One-dimensional formal differentiation over commutative Laurent
//! monomials, used as an independent oracle for the tensor expansions.
//!
//! In one dimension every derivative is a scalar, so a tensor term collapses
//! to a monomial in the variables `F_k = f^{(k)}(φ)` and `G_k = g^{(k)}`.
//! The inverse oracle never mentions `f⁻¹`: it starts from
//! `(f⁻¹)' = 1/f'(f⁻¹) = F₁⁻¹` and differentiates with
//! `d/dy F_k = F_{k+1} · F₁⁻¹`, so negative powers of `F₁` appear.

use std::collections::BTreeMap;
use std::fmt;

use super::expansion::DerivativeExpansion;
use super::term::{Factor, FactorSymbol, FunctionTag, TensorExpr};
use super::SymbolicError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// `f^{(k)}`, at the composed point where one exists
    F(u32),
    /// `g^{(k)}`
    G(u32),
}

/// Sorted `(variable, exponent)` pairs with non-zero exponents.
pub type Monomial = Vec<(Var, i32)>;

/// A Laurent polynomial with exact integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    terms: BTreeMap<Monomial, i64>,
}

fn mul_monomial(a: &Monomial, var: Var, exp: i32) -> Monomial {
    let mut map: BTreeMap<Var, i32> = a.iter().copied().collect();
    *map.entry(var).or_insert(0) += exp;
    map.into_iter().filter(|&(_, e)| e != 0).collect()
}

impl LaurentPoly {
    pub fn monomial(coeff: i64, factors: &[(Var, i32)]) -> Self {
        let mut m: Monomial = Vec::new();
        for &(v, e) in factors {
            m = mul_monomial(&m, v, e);
        }
        let mut p = Self::default();
        p.add_term(m, coeff).expect("single term cannot overflow");
        p
    }

    fn add_term(&mut self, m: Monomial, c: i64) -> Result<(), SymbolicError> {
        let entry = self.terms.entry(m).or_insert(0);
        *entry = entry.checked_add(c).ok_or(SymbolicError::CoefficientOverflow)?;
        self.terms.retain(|_, c| *c != 0);
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Formal derivative, given `d/dy` of every variable as a polynomial.
    pub fn differentiate(&self, rule: impl Fn(Var) -> LaurentPoly) -> Result<Self, SymbolicError> {
        let mut out = Self::default();
        for (mono, &c) in &self.terms {
            for &(v, e) in mono {
                // d(v^e) = e v^{e-1} dv
                let base = mul_monomial(mono, v, -1);
                let dv = rule(v);
                for (dm, dc) in dv.terms() {
                    let mut prod = base.clone();
                    for &(w, we) in dm {
                        prod = mul_monomial(&prod, w, we);
                    }
                    let coeff = c
                        .checked_mul(i64::from(e))
                        .and_then(|x| x.checked_mul(dc))
                        .ok_or(SymbolicError::CoefficientOverflow)?;
                    out.add_term(prod, coeff)?;
                }
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, value: impl Fn(Var) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, &c)| c as f64 * m.iter().map(|&(v, e)| value(v).powi(e)).product::<f64>())
            .sum()
    }

    /// Sum of coefficients of monomials containing `var` (any power).
    pub fn coefficient_sum_with(&self, var: Var) -> i64 {
        self.terms
            .iter()
            .filter(|(m, _)| m.iter().any(|&(v, _)| v == var))
            .map(|(_, &c)| c)
            .sum()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (v, e) in m {
                let name = match v {
                    Var::F(k) => format!("F{k}"),
                    Var::G(k) => format!("G{k}"),
                };
                write!(f, "·{name}^{e}")?;
            }
        }
        Ok(())
    }
}

/// `(f∘g)^{(m)}` in the variables `F_k = f^{(k)}(g)`, `G_k = g^{(k)}`.
pub fn composition_oracle(m: u32) -> Result<LaurentPoly, SymbolicError> {
    let mut p = LaurentPoly::monomial(1, &[(Var::F(1), 1), (Var::G(1), 1)]);
    let rule = |v: Var| match v {
        Var::F(k) => LaurentPoly::monomial(1, &[(Var::F(k + 1), 1), (Var::G(1), 1)]),
        Var::G(k) => LaurentPoly::monomial(1, &[(Var::G(k + 1), 1)]),
    };
    for _ in 1..m {
        p = p.differentiate(rule)?;
    }
    Ok(p)
}

/// `(f⁻¹)^{(m)}` in the variables `F_k = f^{(k)}(f⁻¹)`.
pub fn inverse_oracle(m: u32) -> Result<LaurentPoly, SymbolicError> {
    let mut p = LaurentPoly::monomial(1, &[(Var::F(1), -1)]);
    let rule = |v: Var| match v {
        Var::F(k) => LaurentPoly::monomial(1, &[(Var::F(k + 1), 1), (Var::F(1), -1)]),
        Var::G(_) => LaurentPoly::default(),
    };
    for _ in 1..m {
        p = p.differentiate(rule)?;
    }
    Ok(p)
}

/// `(fg)^{(m)}` in the variables `F_k = f^{(k)}`, `G_k = g^{(k)}`.
pub fn product_oracle(m: u32) -> Result<LaurentPoly, SymbolicError> {
    let mut p = LaurentPoly::monomial(1, &[(Var::F(0), 1), (Var::G(0), 1)]);
    let rule = |v: Var| match v {
        Var::F(k) => LaurentPoly::monomial(1, &[(Var::F(k + 1), 1)]),
        Var::G(k) => LaurentPoly::monomial(1, &[(Var::G(k + 1), 1)]),
    };
    for _ in 0..m {
        p = p.differentiate(rule)?;
    }
    Ok(p)
}

fn symbol_var(s: FactorSymbol) -> Result<(Var, i32), SymbolicError> {
    match s.function {
        FunctionTag::F => Ok((Var::F(s.order), 1)),
        FunctionTag::G => Ok((Var::G(s.order), 1)),
        FunctionTag::FInv if s.order == 1 => Ok((Var::F(1), -1)),
        FunctionTag::FInv => Err(SymbolicError::InvalidTerm(format!(
            "{s} has no one-dimensional projection; use a substituted expansion"
        ))),
    }
}

fn collect_expr(e: &TensorExpr, acc: &mut Vec<(Var, i32)>) -> Result<(), SymbolicError> {
    for s in e.leading.iter().chain(e.outer.iter()) {
        acc.push(symbol_var(*s)?);
    }
    for f in &e.inner {
        match f {
            Factor::Symbol(s) => acc.push(symbol_var(*s)?),
            Factor::Nested(n) => collect_expr(n, acc)?,
        }
    }
    Ok(())
}

/// Collapses a tensor expansion to its one-dimensional scalar form.
/// Inverse expansions must be substituted (only `Df⁻¹ = F₁⁻¹` may remain).
pub fn project(e: &DerivativeExpansion) -> Result<LaurentPoly, SymbolicError> {
    let mut out = LaurentPoly::default();
    for t in &e.terms {
        let mut factors = Vec::new();
        collect_expr(&t.expr, &mut factors)?;
        let key = factors.into_iter().fold(Monomial::new(), |m, (v, e)| mul_monomial(&m, v, e));
        out.add_term(key, t.coefficient)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_derivative_of_composition() {
        // f''(g) g'^2 + f'(g) g''
        let p = composition_oracle(2).unwrap();
        let expected = {
            let mut q = LaurentPoly::monomial(1, &[(Var::F(2), 1), (Var::G(1), 2)]);
            q.add_term(vec![(Var::F(1), 1), (Var::G(2), 1)], 1).unwrap();
            q
        };
        assert_eq!(p, expected);
    }

    #[test]
    fn second_derivative_of_inverse() {
        // (f⁻¹)'' = -f''/f'^3
        let p = inverse_oracle(2).unwrap();
        assert_eq!(p, LaurentPoly::monomial(-1, &[(Var::F(2), 1), (Var::F(1), -3)]));
    }

    #[test]
    fn third_derivative_of_inverse() {
        // (f⁻¹)''' = 3 f''^2 / f'^5 - f''' / f'^4
        let p = inverse_oracle(3).unwrap();
        let mut q = LaurentPoly::monomial(3, &[(Var::F(2), 2), (Var::F(1), -5)]);
        q.add_term(vec![(Var::F(1), -4), (Var::F(3), 1)], -1).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn leibniz_row() {
        let p = product_oracle(3).unwrap();
        let coeffs: Vec<i64> = p.terms().map(|(_, c)| c).collect();
        assert_eq!(coeffs.iter().sum::<i64>(), 8);
        assert_eq!(p.len(), 4);
    }
}
