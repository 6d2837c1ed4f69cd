//! Hölder exponents attached to the factors of an expansion term.
//!
//! For a factor of order `k` in a term of an `m`-th derivative the exponent
//! is `(m-1)/(k-1)`, with `∞` for first-order factors (those are bounded).
//! The reciprocals of a term always add up to exactly one.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};

use super::expansion::ExpansionKind;
use super::term::TensorTerm;
use super::SymbolicError;

/// An exponent in `[1, ∞]`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational64),
    Infinite,
}

impl Exponent {
    pub fn finite(num: i64, den: i64) -> Self {
        Exponent::Finite(Rational64::new(num, den))
    }

    pub fn reciprocal(self) -> Rational64 {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinite => Rational64::zero(),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => *p.numer() as f64 / *p.denom() as f64,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// Order-`k` factor inside an order-`m` formula: `(m-1)/(k-1)`.
    fn for_order(k: u32, m: u32) -> Self {
        if k <= 1 {
            Exponent::Infinite
        } else {
            Exponent::finite(i64::from(m) - 1, i64::from(k) - 1)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "∞"),
        }
    }
}

/// Sum of reciprocals, exactly.
pub fn reciprocal_sum(exponents: &[Exponent]) -> Rational64 {
    exponents.iter().map(|e| e.reciprocal()).sum()
}

/// Exponents for the factors of a flat term, listed as `[leading, outer,
/// inner…]` (absent slots skipped).
///
/// * inverse and composition terms: `(m-1)/(k-1)` per factor of order `k`;
/// * product terms `D^j f ⊗ D^{m-j} g`: `(m-1)/(j-1)` and `(m-1)/(m-j)`,
///   with `∞` for an undifferentiated or first-order factor and `1` for the
///   `m`-th order partner of an undifferentiated one.
pub fn holder_exponents(kind: ExpansionKind, t: &TensorTerm, m: u32) -> Result<Vec<Exponent>, SymbolicError> {
    if m < 2 {
        return Err(SymbolicError::InvalidOrder { order: m, min: 2, max: u32::MAX });
    }
    if !t.expr.is_flat() {
        return Err(SymbolicError::InvalidTerm(format!("nested term has no factor-wise exponents: {t}")));
    }
    let orders: Vec<u32> = t
        .leading()
        .into_iter()
        .chain(t.outer())
        .chain(t.inner().iter().filter_map(|f| f.as_symbol()))
        .map(|s| s.order)
        .collect();
    let exponents: Vec<Exponent> = match kind {
        ExpansionKind::Inverse | ExpansionKind::Composition => {
            let slots = t.outer().map(|o| o.order as usize);
            if slots != Some(t.inner().len()) || (kind == ExpansionKind::Inverse) != t.leading().is_some() {
                return Err(SymbolicError::InvalidTerm(format!("malformed term for {kind:?}: {t}")));
            }
            // with one inner slot per outer argument, the k-sum constraint
            // is equivalent to Σ (k - 1) = m - 1 over all factors
            let total_excess: i64 = orders.iter().map(|&k| i64::from(k) - 1).sum();
            if total_excess != i64::from(m) - 1 {
                return Err(SymbolicError::InvalidTerm(format!(
                    "orders {orders:?} violate the k-sum constraint for m = {m}: {t}"
                )));
            }
            orders.iter().map(|&k| Exponent::for_order(k, m)).collect()
        }
        ExpansionKind::Product => {
            let [j, l] = orders[..] else {
                return Err(SymbolicError::InvalidTerm(format!("product term needs two factors: {t}")));
            };
            if j + l != m {
                return Err(SymbolicError::InvalidTerm(format!("product orders {j} + {l} differ from {m}: {t}")));
            }
            let one = Exponent::Finite(Rational64::one());
            match (j, l) {
                (0, _) => vec![Exponent::Infinite, one],
                (_, 0) => vec![one, Exponent::Infinite],
                _ => vec![Exponent::for_order(j, m), Exponent::finite(i64::from(m) - 1, i64::from(l))],
            }
        }
    };
    debug_assert_eq!(reciprocal_sum(&exponents), Rational64::one());
    Ok(exponents)
}
