use super::norm::norm;
use super::profile::StepProfile;
use super::spec::SpaceSpec;
use super::SpaceError;

/// `lower ≤ ‖E_s‖ ≤ upper`; `upper` is `None` where no closed form is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationBracket {
    pub lower: f64,
    pub upper: Option<f64>,
}

/// Dyadic depth of the test family: indicators of `(0, a 2^{-j})`.
const FAMILY_DEPTH: i32 = 60;
const POWER_EXPONENTS: [f64; 3] = [0.25, 0.5, 0.75];

/// Indicators of `(0, a 2^{-j})` and dyadic steps of `(x/a)^{-θ}`, on `(0, a)`.
fn extremal_family(a: f64) -> Vec<StepProfile> {
    let mut family = Vec::new();
    for j in 0..=FAMILY_DEPTH {
        let r = a * 2f64.powi(-j);
        family.push(StepProfile::indicator(r, a).expect("r ≤ a"));
    }
    for theta in POWER_EXPONENTS {
        // piece j covers [a 2^{-j-1}, a 2^{-j}); the innermost one reaches 0
        let pieces: Vec<(f64, f64)> =
            std::iter::once((2f64.powf(f64::from(FAMILY_DEPTH) * theta), a * 2f64.powi(-FAMILY_DEPTH)))
                .chain((0..FAMILY_DEPTH).rev().map(|j| (2f64.powf(f64::from(j) * theta), a * 2f64.powi(-j - 1))))
                .collect();
        family.push(StepProfile::new(pieces).expect("positive pieces"));
    }
    family
}

fn analytic_upper(x: &SpaceSpec, s: f64) -> Option<f64> {
    match x {
        SpaceSpec::Linf => Some(1.0),
        SpaceSpec::Lebesgue(p) => Some(s.powf(-1.0 / p)),
        SpaceSpec::Lorentz { p, .. } => Some(s.powf(-1.0 / p)),
        SpaceSpec::Convexified { base, alpha } => analytic_upper(base, s).map(|u| u.powf(1.0 / alpha)),
        SpaceSpec::Orlicz(_) => None,
    }
}

/// `‖E_s‖` on the representation space over `(0, a)`.
pub fn dilation_operator_norm(x: &SpaceSpec, s: f64, a: f64) -> Result<DilationBracket, SpaceError> {
    if !(s > 0.0 && s.is_finite()) || !(a > 0.0 && a.is_finite()) {
        return Err(SpaceError::Range(format!("dilation needs s > 0 and a > 0, got s = {s}, a = {a}")));
    }
    x.validate()?;
    let mut lower = 0.0f64;
    for u in extremal_family(a) {
        let n = norm(&u, x)?;
        if n > 0.0 {
            lower = lower.max(norm(&u.dilate(s, a)?, x)? / n);
        }
    }
    Ok(DilationBracket { lower, upper: analytic_upper(x, s) })
}

/// One-sided estimate of the lower Boyd index from the lower bounds of
/// `‖E_{1/t}‖` on `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoydEstimate {
    pub slope: f64,
    /// root mean square residual of the fit in log–log coordinates
    pub residual: f64,
    /// `(t, lower bound of ‖E_{1/t}‖)`
    pub points: Vec<(f64, f64)>,
}

/// `2^1, 2^2, …, 2^20`.
pub fn default_t_grid() -> Vec<f64> {
    (1..=20).map(|k| 2f64.powi(k)).collect()
}

/// Least-squares slope of `log ‖E_{1/t}‖` against `log t`.
pub fn boyd_lower_index(x: &SpaceSpec, t_grid: &[f64]) -> Result<BoydEstimate, SpaceError> {
    if t_grid.len() < 4 {
        return Err(SpaceError::Range(format!("Boyd index needs at least 4 grid points, got {}", t_grid.len())));
    }
    if t_grid.iter().any(|&t| !(t >= 1.0 && t.is_finite())) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpaceError::Range("Boyd grid must be finite, ≥ 1 and strictly increasing".into()));
    }
    let points = t_grid
        .iter()
        .map(|&t| Ok((t, dilation_operator_norm(x, 1.0 / t, 1.0)?.lower)))
        .collect::<Result<Vec<_>, SpaceError>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok(BoydEstimate { slope, residual, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_dilation_is_attained() {
        for t in [1.0, 3.0, 100.0] {
            let b = dilation_operator_norm(&SpaceSpec::Lebesgue(2.0), 1.0 / t, 1.0).unwrap();
            let exact = t.sqrt();
            assert!(b.lower <= exact * (1.0 + 1e-12));
            assert!((b.lower - exact).abs() < 1e-6);
            assert!((b.upper.unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn linf_dilation_is_one() {
        let b = dilation_operator_norm(&SpaceSpec::Linf, 0.1, 1.0).unwrap();
        assert_eq!(b.lower, 1.0);
        assert_eq!(b.upper, Some(1.0));
    }

    #[test]
    fn grid_is_checked() {
        assert!(boyd_lower_index(&SpaceSpec::Linf, &[2.0, 4.0, 8.0]).is_err());
        assert!(boyd_lower_index(&SpaceSpec::Linf, &[2.0, 4.0, 3.0, 8.0]).is_err());
    }

    #[test]
    fn boyd_of_l2() {
        let e = boyd_lower_index(&SpaceSpec::Lebesgue(2.0), &default_t_grid()).unwrap();
        assert!((e.slope - 0.5).abs() < 0.02);
        assert!(e.residual < 1e-6);
    }
}
