use super::test_map::TestMap;
use super::MapError;
use crate::multilinear::MultilinearMap;

/// Default step: `1e-3` up to order 2, `1e-2` for orders 3 and 4. Past that,
/// round-off `ε/h^k` dominates and no step gives useful accuracy.
pub fn default_step(order: u32) -> f64 {
    if order <= 2 {
        1e-3
    } else {
        1e-2
    }
}

/// Nondecreasing index tuples of length `k` over `0..n`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

fn permutations_of(idx: &[usize]) -> Vec<Vec<usize>> {
    let mut perms = vec![idx.to_vec()];
    let mut cur = idx.to_vec();
    // lexicographic successors of the sorted tuple enumerate each distinct
    // arrangement once
    loop {
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return perms;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        perms.push(cur.clone());
    }
}

/// `∂^k f / ∂x_{i₁}…∂x_{i_k}` by nested central differences: a sum over
/// `σ ∈ {±1}^k` of `∏σ · f(x + h Σ σ_t e_{i_t}) / (2h)^k`.
fn nested_central(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>, MapError>,
    x: &[f64],
    idx: &[usize],
    h: f64,
    out_dim: usize,
) -> Result<Vec<f64>, MapError> {
    let k = idx.len();
    let mut acc = vec![0.0; out_dim];
    let mut p = x.to_vec();
    for signs in 0u32..(1 << k) {
        p.copy_from_slice(x);
        let mut sign = 1.0;
        for (t, &i) in idx.iter().enumerate() {
            if signs & (1 << t) != 0 {
                p[i] -= h;
                sign = -sign;
            } else {
                p[i] += h;
            }
        }
        for (a, v) in acc.iter_mut().zip(f(&p)?) {
            *a += sign * v;
        }
    }
    let scale = (2.0 * h).powi(k as i32);
    Ok(acc.into_iter().map(|a| a / scale).collect())
}

/// `D^k F(x)` by nested central differences, Richardson-extrapolated once:
/// `(4 D(h/2) - D(h)) / 3`. Error `O(h⁴) + O(ε/h^k)`; the stencil reaches
/// `k·h` along one axis. The caller checks that the stencil fits.
pub fn finite_difference_jet(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>, MapError>,
    x: &[f64],
    order: u32,
    h: f64,
) -> Result<MultilinearMap, MapError> {
    let value = f(x)?;
    let (n, d) = (x.len(), value.len());
    if order == 0 {
        return Ok(MultilinearMap::vector(n, value));
    }
    let k = order as usize;
    let mut m = MultilinearMap::zeros(k, n, d);
    for idx in multisets(n, k) {
        let coarse = nested_central(f, x, &idx, h, d)?;
        let fine = nested_central(f, x, &idx, h / 2.0, d)?;
        for perm in permutations_of(&idx) {
            for o in 0..d {
                m.set(o, &perm, (4.0 * fine[o] - coarse[o]) / 3.0);
            }
        }
    }
    Ok(m)
}

fn check_fits(depth: f64, reach: f64) -> Result<(), MapError> {
    if depth < reach {
        return Err(MapError::StencilOutsideDomain(format!(
            "stencil reaches {reach:.3e} but the point is {depth:.3e} from the boundary"
        )));
    }
    Ok(())
}

impl TestMap {
    pub fn fd_jet(&self, order: u32, x: &[f64], h: f64) -> Result<MultilinearMap, MapError> {
        check_fits(self.depth(x), f64::from(order) * h)?;
        finite_difference_jet(&|p| Ok(self.eval(p)), x, order, h)
    }

    /// `D^k f⁻¹(y)` by differencing Newton inversion. Preimages of the
    /// stencil lie within `L·k·h·√n` of `f⁻¹(y)`, which must stay inside.
    pub fn fd_inverse_jet(&self, order: u32, y: &[f64], h: f64, tol: f64) -> Result<MultilinearMap, MapError> {
        let x = self.invert(y, tol)?;
        let reach = self.lipschitz() * f64::from(order) * h * (self.dim() as f64).sqrt();
        check_fits(self.depth(&x), reach)?;
        finite_difference_jet(&|p| self.invert(p, tol), y, order, h)
    }

    /// `D^k (self ∘ inner)(x)` by differencing the composite.
    pub fn fd_composite_jet(&self, inner: &TestMap, order: u32, x: &[f64], h: f64) -> Result<MultilinearMap, MapError> {
        check_fits(inner.depth(x), f64::from(order) * h)?;
        finite_difference_jet(&|p| Ok(self.eval(&inner.eval(p))), x, order, h)
    }
}
