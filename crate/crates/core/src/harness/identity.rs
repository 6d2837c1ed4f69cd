use crate::maps::{default_step, finite_difference_jet, MapError, SampleGrid, ScalarFn, TestMap};
use crate::multilinear::{evaluate_expansion, JetContext, MultilinearError, MultilinearMap};
use crate::symbolic::univariate::{composition_oracle, inverse_oracle, Var};
use crate::symbolic::{expand_composition, expand_inverse, expand_product, FactorSymbol, InverseMode};

use super::report::{Outcome, Verdict};
use super::HarnessError;

pub(crate) const NEWTON_TOL: f64 = 1e-12;
/// Step of the two-dimensional finite-difference oracles.
pub(crate) const FD_STEP_2D: f64 = 1e-2;
/// Below this peak the oracle is treated as zero and the discrepancy is absolute.
const ZERO_SCALE: f64 = 1e-12;
const ABSOLUTE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// on `max |a - b| / max |b|`, absolute `1e-10` when the oracle vanishes
    Relative(f64),
    /// on `max |a - b|`
    Absolute(f64),
}

/// `max |a - b| / max |b|` over all points and entries, or the absolute
/// difference when the oracle vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Discrepancy {
    pub diff: f64,
    pub scale: f64,
}

impl Discrepancy {
    pub fn update(&mut self, value: &[f64], oracle: &[f64]) {
        for (a, b) in value.iter().zip(oracle) {
            self.diff = self.diff.max((a - b).abs());
            self.scale = self.scale.max(b.abs());
        }
    }

    pub fn is_absolute(&self) -> bool {
        self.scale < ZERO_SCALE
    }

    pub fn value(&self) -> f64 {
        if self.is_absolute() {
            self.diff
        } else {
            self.diff / self.scale
        }
    }

    fn outcome(&self, inputs: String, tol: Tolerance, points: usize) -> Outcome {
        let (ratio, tol, mode) = match tol {
            Tolerance::Absolute(t) => (self.diff, t, "absolute"),
            Tolerance::Relative(_) if self.is_absolute() => (self.diff, ABSOLUTE_TOL, "absolute"),
            Tolerance::Relative(t) => (self.value(), t, "relative"),
        };
        Outcome {
            inputs,
            lhs: self.diff,
            rhs: self.scale,
            ratio,
            tol,
            verdict: if ratio <= tol { Verdict::Pass } else { Verdict::Fail },
            notes: vec![format!("{mode} discrepancy over {points} points")],
        }
    }
}

pub(crate) fn invert_linear(a: &MultilinearMap) -> Result<MultilinearMap, HarnessError> {
    let e = a.entries();
    let rows = match a.in_dim() {
        1 => vec![vec![1.0 / e[0]]],
        2 => {
            let det = e[0] * e[3] - e[1] * e[2];
            vec![vec![e[3] / det, -e[1] / det], vec![-e[2] / det, e[0] / det]]
        }
        n => return Err(MultilinearError::Dimension(format!("no inverse formula on R^{n}")).into()),
    };
    Ok(MultilinearMap::linear(&rows)?)
}

/// Jets of `f` at `x = f⁻¹(y)` (composed symbols) and of `f⁻¹` at `y` up to
/// order `top - 1`; `D^k f⁻¹` for `k ≥ 2` comes from the order-`k` expansion
/// evaluated on the lower orders.
pub fn inverse_context(map: &TestMap, x: &[f64], top: u32) -> Result<JetContext, HarnessError> {
    let mut ctx = JetContext::new(map.dim());
    for k in 1..=top {
        ctx.insert(FactorSymbol::f_composed(k), map.jet(k, x)?)?;
    }
    ctx.insert(FactorSymbol::finv(1), invert_linear(&map.jet(1, x)?)?)?;
    for k in 2..top {
        let value = evaluate_expansion(&expand_inverse(k, InverseMode::Unsubstituted)?, &ctx)?.symmetrize();
        ctx.insert(FactorSymbol::finv(k), value)?;
    }
    Ok(ctx)
}

fn identity_grid(map: &TestMap, margin: f64, resolution: usize) -> Result<SampleGrid, HarnessError> {
    let width = map.domain().iter().map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    if 2.0 * margin >= width {
        return Err(HarnessError::Domain(format!("{} is too small for a stencil margin of {margin}", map.name())));
    }
    Ok(SampleGrid::interior(map, margin, resolution)?)
}

/// `D^m f⁻¹` from the unsubstituted expansion against the scalar oracle in
/// one dimension and against differenced Newton inversion in two, at the
/// images `y = f(x)` of interior grid centers.
pub fn verify_inverse_identity(map: &TestMap, m: u32, resolution: usize, tol: Tolerance) -> Result<Outcome, HarnessError> {
    let n = map.dim();
    let expansion = expand_inverse(m, InverseMode::Unsubstituted)?;
    let oracle_1d = if n == 1 { Some(inverse_oracle(m)?) } else { None };
    let margin = if n == 1 { 0.0 } else { map.lipschitz() * f64::from(m) * FD_STEP_2D * (n as f64).sqrt() * 1.01 };
    let grid = identity_grid(map, margin, resolution)?;
    let mut d = Discrepancy::default();
    for c in grid.centers() {
        let y = map.eval(&c);
        let x = map.invert(&y, NEWTON_TOL)?;
        let value = evaluate_expansion(&expansion, &inverse_context(map, &x, m)?)?.symmetrize();
        match &oracle_1d {
            Some(poly) => {
                let derivs: Vec<f64> = (0..=m).map(|k| map.jet(k, &x).map(|j| j.entries()[0])).collect::<Result<_, _>>()?;
                let exact = poly.evaluate(|v| match v {
                    Var::F(k) => derivs[k as usize],
                    Var::G(_) => unreachable!("inverse oracle has no g"),
                });
                d.update(value.entries(), &[exact]);
            }
            None => d.update(value.entries(), map.fd_inverse_jet(m, &y, FD_STEP_2D, NEWTON_TOL)?.entries()),
        }
    }
    let oracle = if n == 1 { "scalar oracle" } else { "finite differences h=1e-2" };
    Ok(d.outcome(format!("map={} m={m} grid={resolution} oracle={oracle}", map.name()), tol, grid.cell_count()))
}

/// Largest coordinate-wise gap by which `g` leaves the domain of `f`,
/// sampled on a closed lattice of `g`'s domain.
fn domain_escape(f: &TestMap, g: &TestMap) -> f64 {
    const LATTICE: usize = 33;
    let n = g.dim();
    let mut worst = f64::NEG_INFINITY;
    for flat in 0..LATTICE.pow(n as u32) {
        let mut r = flat;
        let x: Vec<f64> = g
            .domain()
            .iter()
            .map(|&(a, b)| {
                let i = r % LATTICE;
                r /= LATTICE;
                a + (b - a) * i as f64 / (LATTICE - 1) as f64
            })
            .collect();
        worst = worst.max(-f.depth(&g.eval(&x)));
    }
    worst
}

/// `D^m (f∘g)` from the composition expansion against the scalar oracle in
/// one dimension and against differencing the composite in two.
pub fn verify_composition_identity(
    f: &TestMap,
    g: &TestMap,
    m: u32,
    resolution: usize,
    tol: Tolerance,
) -> Result<Outcome, HarnessError> {
    if f.dim() != g.dim() {
        return Err(HarnessError::Domain(format!("{} and {} act on different spaces", f.name(), g.name())));
    }
    if domain_escape(f, g) >= 0.0 {
        return Err(HarnessError::Domain(format!("{} does not map its domain into that of {}", g.name(), f.name())));
    }
    let n = g.dim();
    let expansion = expand_composition(m)?;
    let oracle_1d = if n == 1 { Some(composition_oracle(m)?) } else { None };
    let margin = if n == 1 { 0.0 } else { f64::from(m) * FD_STEP_2D * 1.01 };
    let grid = identity_grid(g, margin, resolution)?;
    let mut d = Discrepancy::default();
    for x in grid.centers() {
        let gx = g.eval(&x);
        let mut ctx = JetContext::new(n);
        for k in 1..=m {
            ctx.insert(FactorSymbol::f_composed(k), f.jet(k, &gx)?)?;
            ctx.insert(FactorSymbol::g(k), g.jet(k, &x)?)?;
        }
        let value = evaluate_expansion(&expansion, &ctx)?.symmetrize();
        match &oracle_1d {
            Some(poly) => {
                let exact = poly.evaluate(|v| match v {
                    Var::F(k) => f.jet(k, &gx).map(|j| j.entries()[0]).unwrap_or(f64::NAN),
                    Var::G(k) => g.jet(k, &x).map(|j| j.entries()[0]).unwrap_or(f64::NAN),
                });
                d.update(value.entries(), &[exact]);
            }
            None => d.update(value.entries(), f.fd_composite_jet(g, m, &x, FD_STEP_2D)?.entries()),
        }
    }
    let oracle = if n == 1 { "scalar oracle" } else { "finite differences h=1e-2" };
    Ok(d.outcome(format!("f={} g={} m={m} grid={resolution} oracle={oracle}", f.name(), g.name()), tol, grid.cell_count()))
}

/// `D^m (uv)` from the Leibniz expansion against the closed form of the
/// product where one exists, else against differencing the product.
pub fn verify_product_identity(
    u: &ScalarFn,
    v: &ScalarFn,
    domain: &[(f64, f64)],
    m: u32,
    resolution: usize,
    tol: Tolerance,
) -> Result<Outcome, HarnessError> {
    let n = domain.len();
    if u.dim() != n || v.dim() != n {
        return Err(HarnessError::Domain("factors and domain differ in dimension".into()));
    }
    let expansion = expand_product(m)?;
    let closed = u.times(v);
    let h = default_step(m);
    let margin = if closed.is_some() { 0.0 } else { f64::from(m) * h * 1.01 };
    let grid = SampleGrid::new(domain.iter().map(|&(a, b)| (a + margin, b - margin)).collect(), resolution)?;
    let mut d = Discrepancy::default();
    for x in grid.centers() {
        let mut ctx = JetContext::new(n);
        for j in 0..=m {
            ctx.insert(FactorSymbol::f(j), u.jet(j, &x)?)?;
            ctx.insert(FactorSymbol::g(j), v.jet(j, &x)?)?;
        }
        let value = evaluate_expansion(&expansion, &ctx)?.symmetrize();
        let oracle = match &closed {
            Some(w) => w.jet(m, &x)?,
            None => finite_difference_jet(&|p| Ok::<_, MapError>(vec![u.eval(p) * v.eval(p)]), &x, m, h)?,
        };
        d.update(value.entries(), oracle.entries());
    }
    let oracle = if closed.is_some() { "closed-form product" } else { "finite differences" };
    Ok(d.outcome(format!("u={u} v={v} m={m} grid={resolution} oracle={oracle}"), tol, grid.cell_count()))
}
