use std::f64::consts::{FRAC_PI_2, PI};

use super::MapError;
use crate::multilinear::MultilinearMap;
use crate::symbolic::DEFAULT_MAX_ORDER;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_POLISH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InverseMode {
    ClosedForm,
    Newton,
}

/// `fᵢ(x) = bᵢ + Σⱼ Aᵢⱼ xⱼ + Σⱼ Sᵢⱼ sin xⱼ` on an open box.
///
/// Every derivative of order `k ≥ 2` is diagonal in the input index:
/// `∂ᵏfᵢ/∂xⱼᵏ = Sᵢⱼ sin(xⱼ + kπ/2)`, all mixed partials vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct TestMap {
    name: String,
    domain: Vec<(f64, f64)>,
    offset: Vec<f64>,
    linear: Vec<Vec<f64>>,
    sine: Vec<Vec<f64>>,
    lipschitz: f64,
}

fn sin_derivative(k: u32, x: f64) -> f64 {
    (x + f64::from(k) * FRAC_PI_2).sin()
}

fn solve(a: &[Vec<f64>], r: &[f64]) -> Option<Vec<f64>> {
    match a.len() {
        1 => (a[0][0] != 0.0).then(|| vec![r[0] / a[0][0]]),
        2 => {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            (det != 0.0).then(|| {
                vec![(a[1][1] * r[0] - a[0][1] * r[1]) / det, (a[0][0] * r[1] - a[1][0] * r[0]) / det]
            })
        }
        _ => None,
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl TestMap {
    pub fn new(
        name: impl Into<String>,
        domain: Vec<(f64, f64)>,
        offset: Vec<f64>,
        linear: Vec<Vec<f64>>,
        sine: Vec<Vec<f64>>,
        lipschitz: f64,
    ) -> Result<Self, MapError> {
        let n = domain.len();
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !(1..=2).contains(&n) || offset.len() != n || !square(&linear) || !square(&sine) {
            return Err(MapError::Dimension(format!("test maps act on R^1 or R^2 with matching coefficients, got n = {n}")));
        }
        if domain.iter().any(|&(a, b)| !(a < b)) || !(lipschitz >= 1.0) {
            return Err(MapError::Dimension("empty domain or bilipschitz constant below 1".into()));
        }
        Ok(Self { name: name.into(), domain, offset, linear, sine, lipschitz })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn domain_measure(&self) -> f64 {
        self.domain.iter().map(|(a, b)| b - a).product()
    }

    pub fn inverse_mode(&self) -> InverseMode {
        if self.sine.iter().flatten().all(|&s| s == 0.0) {
            InverseMode::ClosedForm
        } else {
            InverseMode::Newton
        }
    }

    /// Distance from `x` to the complement of the domain (negative outside).
    pub fn depth(&self, x: &[f64]) -> f64 {
        self.domain.iter().zip(x).map(|(&(a, b), &xi)| (xi - a).min(b - xi)).fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                self.offset[i]
                    + (0..self.dim()).map(|j| self.linear[i][j] * x[j] + self.sine[i][j] * x[j].sin()).sum::<f64>()
            })
            .collect()
    }

    fn jacobian_matrix(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.linear[i][j] + self.sine[i][j] * x[j].cos()).collect())
            .collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> f64 {
        let m = self.jacobian_matrix(x);
        match self.dim() {
            1 => m[0][0],
            _ => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        }
    }

    /// `D^k f(x)` in closed form; order 0 is the value as a vector.
    pub fn jet(&self, k: u32, x: &[f64]) -> Result<MultilinearMap, MapError> {
        let n = self.dim();
        match k {
            0 => Ok(MultilinearMap::vector(n, self.eval(x))),
            1 => Ok(MultilinearMap::linear(&self.jacobian_matrix(x))?),
            _ if k > DEFAULT_MAX_ORDER => Err(MapError::Order(k)),
            _ => {
                let mut m = MultilinearMap::zeros(k as usize, n, n);
                for i in 0..n {
                    for j in 0..n {
                        m.set(i, &vec![j; k as usize], self.sine[i][j] * sin_derivative(k, x[j]));
                    }
                }
                Ok(m)
            }
        }
    }

    /// `x` with `|f(x) - y| ≤ tol`: closed form for affine maps, otherwise
    /// damped Newton from the solution of the linear part.
    pub fn invert(&self, y: &[f64], tol: f64) -> Result<Vec<f64>, MapError> {
        let shifted: Vec<f64> = y.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        let mut x = solve(&self.linear, &shifted)
            .ok_or_else(|| MapError::Inversion { residual: f64::NAN, iterations: 0 })?;
        if self.inverse_mode() == InverseMode::ClosedForm {
            return Ok(x);
        }
        let residual = |x: &[f64]| -> Vec<f64> { self.eval(x).iter().zip(y).map(|(a, b)| a - b).collect() };
        let mut r = residual(&x);
        let mut rn = euclid(&r);
        let mut polished = 0;
        for iter in 0..NEWTON_MAX_ITER {
            if rn <= tol {
                if polished == NEWTON_POLISH {
                    return Ok(x);
                }
                polished += 1;
            }
            let step = solve(&self.jacobian_matrix(&x), &r)
                .ok_or(MapError::Inversion { residual: rn, iterations: iter })?;
            let mut damping = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - damping * s).collect();
                let tr = residual(&trial);
                let tn = euclid(&tr);
                if tn < rn {
                    (x, r, rn) = (trial, tr, tn);
                    break;
                }
                if damping < 1e-6 {
                    // no descent left: converged to round-off, or stuck
                    return if rn <= tol { Ok(x) } else { Err(MapError::Inversion { residual: rn, iterations: iter }) };
                }
                damping /= 2.0;
            }
        }
        if rn <= tol {
            Ok(x)
        } else {
            Err(MapError::Inversion { residual: rn, iterations: NEWTON_MAX_ITER })
        }
    }
}

/// The shipped maps. Constants `L` hold with `L⁻¹|x-y| ≤ |f(x)-f(y)| ≤ L|x-y|`
/// on the whole plane, since `Df = αI + E` with `‖E‖ ≤ β` gives singular
/// values in `[α-β, α+β]`.
pub fn gallery() -> Vec<TestMap> {
    let c = FRAC_PI_2;
    let two_pi = 2.0 * PI;
    vec![
        // 2x + 1
        TestMap::new("AFFINE_1D", vec![(0.0, 1.0)], vec![1.0], vec![vec![2.0]], vec![vec![0.0]], 2.0),
        // x/2 + 1/4, mapping (0,1) into (0,1)
        TestMap::new("HALF_AFFINE_1D", vec![(0.0, 1.0)], vec![0.25], vec![vec![0.5]], vec![vec![0.0]], 2.0),
        // x + sin(x)/2, f' ∈ [1/2, 3/2]
        TestMap::new("SINE_1D", vec![(0.0, two_pi)], vec![0.0], vec![vec![1.0]], vec![vec![0.5]], 2.0),
        // (x + sin(y)/4, y + sin(x)/4), singular values in [3/4, 5/4]
        TestMap::new(
            "SHEAR_2D",
            vec![(0.0, PI), (0.0, PI)],
            vec![0.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 0.25], vec![0.25, 0.0]],
            4.0 / 3.0,
        ),
        // c + (x - c)/2 + sin(y)/8 and symmetric, c = π/2; maps (0,π)² into
        // itself, singular values in [3/8, 5/8]
        TestMap::new(
            "SHEAR_2D_B",
            vec![(0.0, PI), (0.0, PI)],
            vec![c / 2.0, c / 2.0],
            vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            vec![vec![0.0, 0.125], vec![0.125, 0.0]],
            8.0 / 3.0,
        ),
    ]
    .into_iter()
    .map(|m| m.expect("gallery maps are well formed"))
    .collect()
}

pub fn by_name(name: &str) -> Result<TestMap, MapError> {
    gallery().into_iter().find(|m| m.name() == name).ok_or_else(|| MapError::UnknownMap(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_jets_and_inverse() {
        let m = by_name("AFFINE_1D").unwrap();
        assert_eq!(m.jet(2, &[0.3]).unwrap().max_abs(), 0.0);
        assert_eq!(m.jet(1, &[0.3]).unwrap().entries(), &[2.0]);
        assert_eq!(m.invert(&[2.0], 1e-12).unwrap(), vec![0.5]);
        assert_eq!(m.inverse_mode(), InverseMode::ClosedForm);
    }

    #[test]
    fn sine_third_derivative() {
        let m = by_name("SINE_1D").unwrap();
        let x = 0.7f64;
        assert!((m.jet(2, &[x]).unwrap().entries()[0] + 0.5 * x.sin()).abs() < 1e-15);
        assert!((m.jet(3, &[x]).unwrap().entries()[0] + 0.5 * x.cos()).abs() < 1e-15);
    }

    #[test]
    fn shear_jets_are_diagonal() {
        let m = by_name("SHEAR_2D").unwrap();
        let j = m.jet(2, &[0.4, 1.1]).unwrap();
        assert_eq!(j.get(0, &[0, 1]), 0.0);
        assert!((j.get(0, &[1, 1]) + 0.25 * 1.1f64.sin()).abs() < 1e-15);
        assert!((j.get(1, &[0, 0]) + 0.25 * 0.4f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn newton_round_trip() {
        let m = by_name("SHEAR_2D").unwrap();
        let x = [0.3, 2.9];
        let back = m.invert(&m.eval(&x), 1e-12).unwrap();
        assert!((back[0] - x[0]).abs() < 1e-11 && (back[1] - x[1]).abs() < 1e-11);
    }

    #[test]
    fn unknown_map() {
        assert!(matches!(by_name("NOPE"), Err(MapError::UnknownMap(_))));
        assert!(matches!(by_name("SINE_1D").unwrap().jet(9, &[0.0]), Err(MapError::Order(9))));
    }
}
