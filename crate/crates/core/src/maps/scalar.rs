use std::collections::BTreeMap;
use std::fmt;
use std::f64::consts::FRAC_PI_4;

use super::MapError;
use crate::multilinear::MultilinearMap;

/// A real polynomial in `n` variables: exponent tuple ↦ coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self, MapError> {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != dim {
                return Err(MapError::Dimension(format!("monomial {e:?} in {dim} variables")));
            }
            *map.entry(e).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self { dim, terms: map })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn partial(&self, i: usize) -> Self {
        let terms = self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, &c)| {
            let mut e2 = e.clone();
            e2[i] -= 1;
            (e2, c * f64::from(e[i]))
        });
        Self::new(self.dim, terms).expect("same dimension")
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MapError> {
        if self.dim != other.dim {
            return Err(MapError::Dimension("polynomials in different numbers of variables".into()));
        }
        let terms = self.terms.iter().flat_map(|(ea, ca)| {
            other.terms.iter().map(move |(eb, cb)| (ea.iter().zip(eb).map(|(a, b)| a + b).collect(), ca * cb))
        });
        Self::new(self.dim, terms.collect::<Vec<_>>())
    }
}

/// Scalar test functions with closed-form derivatives of every order.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFn {
    Constant { dim: usize, value: f64 },
    Sin,
    Exp,
    /// `eˣ sin x`, whose `m`-th derivative is `2^{m/2} eˣ sin(x + mπ/4)`
    ExpSin,
    Polynomial(Polynomial),
}

impl ScalarFn {
    pub fn dim(&self) -> usize {
        match self {
            ScalarFn::Constant { dim, .. } => *dim,
            ScalarFn::Polynomial(p) => p.dim,
            _ => 1,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.derivative_1d(0, x).unwrap_or_else(|| match self {
            ScalarFn::Constant { value, .. } => *value,
            ScalarFn::Polynomial(p) => p.eval(x),
            _ => unreachable!("one-dimensional functions handled above"),
        })
    }

    fn derivative_1d(&self, m: u32, x: &[f64]) -> Option<f64> {
        let t = x[0];
        let mf = f64::from(m);
        match self {
            ScalarFn::Sin => Some((t + mf * std::f64::consts::FRAC_PI_2).sin()),
            ScalarFn::Exp => Some(t.exp()),
            ScalarFn::ExpSin => Some(2f64.powf(mf / 2.0) * t.exp() * (t + mf * FRAC_PI_4).sin()),
            _ => None,
        }
    }

    /// `D^k u(x)` as a `k`-linear map into `R`.
    pub fn jet(&self, k: u32, x: &[f64]) -> Result<MultilinearMap, MapError> {
        let n = self.dim();
        if x.len() != n {
            return Err(MapError::Dimension(format!("point in R^{} for a function on R^{n}", x.len())));
        }
        if k == 0 {
            return Ok(MultilinearMap::vector(n, vec![self.eval(x)]));
        }
        let ku = k as usize;
        let mut m = MultilinearMap::zeros(ku, n, 1);
        match self {
            ScalarFn::Constant { .. } => {}
            ScalarFn::Polynomial(p) => {
                let total = n.pow(k);
                let mut idx = vec![0usize; ku];
                for flat in 0..total {
                    let mut r = flat;
                    for slot in (0..ku).rev() {
                        idx[slot] = r % n;
                        r /= n;
                    }
                    let d = idx.iter().fold(p.clone(), |q, &i| q.partial(i));
                    m.set(0, &idx, d.eval(x));
                }
            }
            _ => m.set(0, &vec![0; ku], self.derivative_1d(k, x).expect("one-dimensional")),
        }
        Ok(m)
    }

    /// The pointwise product in closed form, where one is available.
    pub fn times(&self, other: &Self) -> Option<Self> {
        use ScalarFn::*;
        match (self, other) {
            (Constant { dim, value: a }, Constant { value: b, .. }) => Some(Constant { dim: *dim, value: a * b }),
            (Sin, Exp) | (Exp, Sin) => Some(ExpSin),
            (Polynomial(p), Polynomial(q)) => p.mul(q).ok().map(Polynomial),
            _ => None,
        }
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Constant { value, .. } => write!(f, "const({value})"),
            ScalarFn::Sin => f.write_str("sin"),
            ScalarFn::Exp => f.write_str("exp"),
            ScalarFn::ExpSin => f.write_str("exp*sin"),
            ScalarFn::Polynomial(p) => write!(f, "poly({} terms in {} variables)", p.terms.len(), p.dim),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sin_derivatives() {
        // (eˣ sin x)' = eˣ (sin x + cos x)
        let x = 0.3f64;
        let d1 = ScalarFn::ExpSin.jet(1, &[x]).unwrap().entries()[0];
        assert!((d1 - x.exp() * (x.sin() + x.cos())).abs() < 1e-14);
        // (eˣ sin x)'' = 2 eˣ cos x
        let d2 = ScalarFn::ExpSin.jet(2, &[x]).unwrap().entries()[0];
        assert!((d2 - 2.0 * x.exp() * x.cos()).abs() < 1e-14);
    }

    #[test]
    fn polynomial_jets() {
        // p = x²y + 3y
        let p = Polynomial::new(2, [(vec![2, 1], 1.0), (vec![0, 1], 3.0)]).unwrap();
        let u = ScalarFn::Polynomial(p);
        let j = u.jet(2, &[2.0, 5.0]).unwrap();
        assert_eq!(j.get(0, &[0, 0]), 10.0);
        assert_eq!(j.get(0, &[0, 1]), 4.0);
        assert_eq!(j.get(0, &[1, 0]), 4.0);
        assert_eq!(j.get(0, &[1, 1]), 0.0);
    }

    #[test]
    fn closed_form_products() {
        assert_eq!(ScalarFn::Sin.times(&ScalarFn::Exp), Some(ScalarFn::ExpSin));
        let p = Polynomial::new(1, [(vec![1], 1.0)]).unwrap();
        let sq = ScalarFn::Polynomial(p.clone()).times(&ScalarFn::Polynomial(p)).unwrap();
        assert_eq!(sq.eval(&[3.0]), 9.0);
        assert_eq!(ScalarFn::Sin.times(&ScalarFn::Sin), None);
    }
}
