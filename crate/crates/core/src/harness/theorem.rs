use std::collections::HashMap;

use rayon::prelude::*;

use crate::maps::{default_step, sample_derivative_profile, sample_scalar_profile, SampleGrid, ScalarFn, TestMap};
use crate::multilinear::{NormMode, MultilinearMap};
use crate::spaces::{boyd_lower_index, check_hlp, check_young_condition, default_t_grid, norm, SpaceSpec, StepProfile};
use crate::symbolic::{expand_inverse, holder_exponents, Exponent, ExpansionKind, FactorSymbol, InverseMode};

use super::baseline::Baseline;
use super::identity::{inverse_context, NEWTON_TOL};
use super::report::{Outcome, Verdict};
use super::HarnessError;

/// Spaces whose estimated lower Boyd index reaches this are skipped.
pub const GATE_THRESHOLD: f64 = 0.98;
const BOUND_SLACK: f64 = 1e-9;
const GN_DRIFT: f64 = 0.01;
const THM1_DRIFT: f64 = 0.05;

/// `Some(reason)` when `x` fails the standing hypotheses: lower Boyd index
/// below [`GATE_THRESHOLD`] and, for Orlicz spaces, the Young integral
/// condition with `c = 1`.
pub fn boyd_gate(x: &SpaceSpec) -> Result<Option<String>, HarnessError> {
    let alpha = boyd_lower_index(x, &default_t_grid())?.slope;
    if alpha >= GATE_THRESHOLD {
        return Ok(Some(format!("estimated lower Boyd index {alpha:.4} ≥ {GATE_THRESHOLD}")));
    }
    if let SpaceSpec::Orlicz(a) = x {
        let grid: Vec<f64> = (-10..=10).map(|k| 2f64.powi(k)).collect();
        let young = check_young_condition(a, 1.0, &grid)?;
        if !young.holds_on_grid {
            return Ok(Some(format!("Young condition fails, worst ratio {:.4}", young.worst_ratio)));
        }
    }
    Ok(None)
}

fn safe_ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn drift(coarse: f64, fine: f64) -> f64 {
    if coarse == fine {
        0.0
    } else {
        (fine - coarse).abs() / fine.abs().max(coarse.abs())
    }
}

fn exponent_space(x: &SpaceSpec, e: Exponent) -> SpaceSpec {
    match e {
        Exponent::Infinite => SpaceSpec::Linf,
        Exponent::Finite(r) if r == 1.into() => x.clone(),
        e => SpaceSpec::convexified(x.clone(), e.to_f64()),
    }
}

struct GnSides {
    lhs: f64,
    rhs: f64,
}

fn gn_sides(u: &ScalarFn, domain: &[(f64, f64)], j: u32, k: u32, x: &SpaceSpec, res: usize) -> Result<GnSides, HarnessError> {
    let grid = SampleGrid::new(domain.to_vec(), res)?;
    let theta = f64::from(j) / f64::from(k);
    let dj = sample_scalar_profile(u, j, &grid)?;
    let dk = sample_scalar_profile(u, k, &grid)?;
    let sup = sample_scalar_profile(u, 0, &grid)?.sup();
    let lhs = norm(&dj, &SpaceSpec::convexified(x.clone(), 1.0 / theta))?;
    let rhs = norm(&dk, x)?.powf(theta) * sup.powf(1.0 - theta);
    Ok(GnSides { lhs, rhs })
}

/// `‖D^j u‖_{X^{k/j}} ≤ C ‖D^k u‖_X^{j/k} ‖u‖_∞^{1-j/k}` on midpoint samples,
/// with `C` the committed regression constant. The ratio must also move by
/// less than 1% when the grid is doubled.
pub fn verify_gn_inequality(
    u: &ScalarFn,
    domain: &[(f64, f64)],
    j: u32,
    k: u32,
    x: &SpaceSpec,
    resolution: usize,
    baseline: Option<Baseline>,
) -> Result<Outcome, HarnessError> {
    let inputs = format!("u={u} j={j} k={k} X={x} grid={resolution}");
    if !(1 <= j && j < k) {
        return Err(HarnessError::Config { line: 0, column: 0, message: format!("need 1 ≤ j < k, got j={j}, k={k}") });
    }
    if let Some(reason) = boyd_gate(x)? {
        return Ok(Outcome::skipped(inputs, reason));
    }
    let coarse = gn_sides(u, domain, j, k, x, resolution)?;
    let fine = gn_sides(u, domain, j, k, x, 2 * resolution)?;
    let ratio = safe_ratio(coarse.lhs, coarse.rhs);
    let d = drift(ratio, safe_ratio(fine.lhs, fine.rhs));
    let c_reg = match baseline {
        Some(b) => b.c_reg,
        // a vanishing left side needs no constant
        None if coarse.lhs == 0.0 => 0.0,
        None => return Err(HarnessError::MissingBaseline(inputs)),
    };
    let pass = ratio.is_finite() && ratio <= c_reg && d < GN_DRIFT;
    Ok(Outcome {
        inputs,
        lhs: coarse.lhs,
        rhs: coarse.rhs,
        ratio,
        tol: c_reg,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        notes: vec![format!("drift on grid doubling {d:.3e} (limit {GN_DRIFT})")],
    })
}

/// Cells of the shrunken domain `G`, their images and image measures.
struct ImageCells {
    points: Vec<Vec<f64>>,
    measures: Vec<f64>,
}

fn image_cells(map: &TestMap, grid: &SampleGrid) -> ImageCells {
    let cell = grid.cell_measure();
    let points = grid.centers();
    let measures = points.iter().map(|x| map.jacobian(x).abs() * cell).collect();
    ImageCells { points, measures }
}

/// `‖D³f⁻¹‖_X` on the image and the Hölder-split sum over the flat terms of
/// the third-order expansion, each factor in `X^{(m-1)/(k-1)}`, with `D²f⁻¹`
/// assembled from the second-order expansion.
fn third_order_sides(map: &TestMap, x: &SpaceSpec, grid: &SampleGrid) -> Result<(f64, f64), HarnessError> {
    const M: u32 = 3;
    let lhs = norm(&sample_derivative_profile(map, M, grid, true)?, x)?;
    let cells = image_cells(map, grid);
    let expansion = expand_inverse(M, InverseMode::Unsubstituted)?;
    let mut symbols: Vec<FactorSymbol> = Vec::new();
    for t in &expansion.terms {
        t.expr.for_each_symbol(&mut |s| {
            if !symbols.contains(&s) {
                symbols.push(s);
            }
        });
    }
    let norms_per_cell = cells
        .points
        .par_iter()
        .map(|c| {
            let y = map.eval(c);
            let xc = map.invert(&y, NEWTON_TOL)?;
            let ctx = inverse_context(map, &xc, M)?;
            symbols
                .iter()
                .map(|&s| Ok(ctx.get(s).map(|j: &MultilinearMap| j.operator_norm(NormMode::Sampled))?))
                .collect::<Result<Vec<f64>, HarnessError>>()
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut profiles: HashMap<FactorSymbol, StepProfile> = HashMap::new();
    for (i, &s) in symbols.iter().enumerate() {
        let pieces = norms_per_cell.iter().zip(&cells.measures).map(|(v, &m)| (v[i], m)).collect();
        profiles.insert(s, StepProfile::new(pieces)?);
    }
    let mut rhs = 0.0;
    for t in &expansion.terms {
        let factors = t.leading().into_iter().chain(t.outer()).chain(t.inner().iter().filter_map(|f| f.as_symbol()));
        let exponents = holder_exponents(ExpansionKind::Inverse, t, M)?;
        let mut product = t.coefficient.unsigned_abs() as f64;
        for (s, e) in factors.zip(exponents) {
            product *= norm(&profiles[&s], &exponent_space(x, e))?;
        }
        rhs += product;
    }
    Ok((lhs, rhs))
}

/// Round-off floor `tol / h^m` of differenced Newton inversion, as the norm
/// of that constant over the image; with `eta`, in the similar space.
fn fd_floor(m: u32, image_measure: f64, x: &SpaceSpec, eta: Option<f64>) -> Result<f64, HarnessError> {
    let level = NEWTON_TOL / default_step(m).powi(m as i32);
    let eta = eta.unwrap_or(1.0);
    Ok(norm(&StepProfile::new(vec![(level, image_measure / eta)])?, x)? / eta)
}

/// Integrability of `D^m f⁻¹` on the image of the shrunken domain `G`.
///
/// * `m = 2`: `‖D²f⁻¹‖_{X(f(G))} ≤ L^{3+n} η⁻¹ ‖D²f‖_{X(G)}`, norms on
///   `f(G)` taken in the similar space, `η = |f(G)| / |G|` from the image cells.
/// * `m = 3`: ratio of `‖D³f⁻¹‖_X` to the Hölder-split right side, below the
///   regression constant and stable within 5% under grid doubling.
///
/// The left side comes from differencing Newton inversion and is reduced by
/// its round-off floor before comparison.
pub fn verify_theorem1_pipeline(
    map: &TestMap,
    m: u32,
    x: &SpaceSpec,
    resolution: usize,
    baseline: Option<Baseline>,
) -> Result<Outcome, HarnessError> {
    let inputs = format!("map={} m={m} X={x} grid={resolution}", map.name());
    if let Some(reason) = boyd_gate(x)? {
        return Ok(Outcome::skipped(inputs, reason));
    }
    let n = map.dim();
    let margin = map.lipschitz() * f64::from(m) * default_step(m) * (n as f64).sqrt() * 1.01;
    match m {
        2 => {
            let grid = SampleGrid::interior(map, margin, resolution)?;
            let d2f = sample_derivative_profile(map, 2, &grid, false)?;
            let d2finv = sample_derivative_profile(map, 2, &grid, true)?;
            let hlp = check_hlp(&d2f, &d2finv, x)?;
            let floor = fd_floor(2, d2finv.total_measure(), x, Some(hlp.eta))?;
            let lhs = (hlp.lhs - floor).max(0.0);
            let bound = map.lipschitz().powi(3 + n as i32) * hlp.rhs;
            let ratio = safe_ratio(lhs, bound);
            let pass = hlp.lhs.is_finite() && lhs <= bound * (1.0 + BOUND_SLACK);
            Ok(Outcome {
                inputs,
                lhs,
                rhs: bound,
                ratio,
                tol: 1.0,
                verdict: if pass { Verdict::Pass } else { Verdict::Fail },
                notes: vec![
                    format!("eta {:.6}", hlp.eta),
                    format!("raw image norm {:.6e}", hlp.raw_lhs),
                    format!("difference floor {floor:.3e}"),
                ],
            })
        }
        3 => {
            let sides = |res| -> Result<(f64, f64, f64), HarnessError> {
                let grid = SampleGrid::interior(map, margin, res)?;
                let (lhs, rhs) = third_order_sides(map, x, &grid)?;
                let image: f64 = image_cells(map, &grid).measures.iter().sum();
                let floor = fd_floor(3, image, x, None)?;
                Ok(((lhs - floor).max(0.0), rhs, floor))
            };
            let (lhs, rhs, floor) = sides(resolution)?;
            let (lhs_fine, rhs_fine, _) = sides(2 * resolution)?;
            let ratio = safe_ratio(lhs, rhs);
            let d = drift(ratio, safe_ratio(lhs_fine, rhs_fine));
            let c_reg = match baseline {
                Some(b) => b.c_reg,
                None if lhs == 0.0 => 0.0,
                None => return Err(HarnessError::MissingBaseline(inputs)),
            };
            let pass = lhs.is_finite() && rhs.is_finite() && ratio <= c_reg && d < THM1_DRIFT;
            Ok(Outcome {
                inputs,
                lhs,
                rhs,
                ratio,
                tol: c_reg,
                verdict: if pass { Verdict::Pass } else { Verdict::Fail },
                notes: vec![
                    format!("drift on grid doubling {d:.3e} (limit {THM1_DRIFT})"),
                    format!("difference floor {floor:.3e}"),
                ],
            })
        }
        _ => Err(HarnessError::Config { line: 0, column: 0, message: format!("norm pipeline supports m = 2, 3, got {m}") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::by_name;

    #[test]
    fn gates() {
        assert!(boyd_gate(&SpaceSpec::Lebesgue(2.0)).unwrap().is_none());
        assert!(boyd_gate(&"Orlicz:pow3".parse().unwrap()).unwrap().is_none());
        assert!(boyd_gate(&SpaceSpec::Lebesgue(1.0)).unwrap().is_some());
    }

    #[test]
    fn affine_inverse_has_no_second_derivative() {
        let o = verify_theorem1_pipeline(&by_name("AFFINE_1D").unwrap(), 2, &SpaceSpec::Lebesgue(2.0), 16, None).unwrap();
        assert_eq!(o.verdict, Verdict::Pass, "{o:?}");
        assert_eq!(o.lhs, 0.0);
    }

    #[test]
    fn constant_has_zero_ratio() {
        let u = ScalarFn::Constant { dim: 1, value: 3.0 };
        let o = verify_gn_inequality(&u, &[(0.0, 1.0)], 1, 2, &SpaceSpec::Lebesgue(2.0), 16, None).unwrap();
        assert_eq!(o.ratio, 0.0);
        assert_eq!(o.verdict, Verdict::Pass);
    }
}
