use std::fmt;

use super::SpaceError;

/// A Young function: convex, non-decreasing, `A(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum YoungFunction {
    /// `t^p`, `p ≥ 1`
    Power(f64),
    /// `e^t - 1`
    Exp,
    /// Piecewise linear through `(0, 0)` and the given points, extended
    /// past the last point with the last slope.
    Table(Vec<(f64, f64)>),
}

impl YoungFunction {
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self, SpaceError> {
        let f = YoungFunction::Table(points);
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        match self {
            YoungFunction::Power(p) if !(*p >= 1.0 && p.is_finite()) => {
                Err(SpaceError::UnsupportedSpace(format!("power Young function needs 1 ≤ p < ∞, got {p}")))
            }
            YoungFunction::Table(pts) => {
                if pts.is_empty() {
                    return Err(SpaceError::UnsupportedSpace("empty Young table".into()));
                }
                let mut prev = (0.0, 0.0);
                let mut prev_slope = 0.0;
                for (i, &(x, y)) in pts.iter().enumerate() {
                    if !(x.is_finite() && y.is_finite() && x > prev.0) {
                        return Err(SpaceError::UnsupportedSpace(format!(
                            "Young table point {i}: abscissae must be finite and increase from 0"
                        )));
                    }
                    let slope = (y - prev.1) / (x - prev.0);
                    if slope < prev_slope * (1.0 - 1e-12) {
                        return Err(SpaceError::UnsupportedSpace(format!(
                            "Young table is not convex and non-decreasing at point {i}"
                        )));
                    }
                    prev = (x, y);
                    prev_slope = slope;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            YoungFunction::Power(p) => t.powf(*p),
            YoungFunction::Exp => t.exp_m1(),
            YoungFunction::Table(pts) => {
                let mut prev = (0.0, 0.0);
                for &(x, y) in pts {
                    if t <= x {
                        return prev.1 + (y - prev.1) * (t - prev.0) / (x - prev.0);
                    }
                    prev = (x, y);
                }
                let (x0, y0) = if pts.len() >= 2 { pts[pts.len() - 2] } else { (0.0, 0.0) };
                let slope = (prev.1 - y0) / (prev.0 - x0);
                prev.1 + slope * (t - prev.0)
            }
        }
    }
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungFunction::Power(p) => write!(f, "pow{p}"),
            YoungFunction::Exp => write!(f, "exp"),
            YoungFunction::Table(pts) => {
                write!(f, "table(")?;
                for (i, (x, y)) in pts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{x}:{y}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Adaptive Simpson on `[a, b]` to relative tolerance `rel`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> Result<f64, SpaceError> {
    fn rec(
        f: &impl Fn(f64) -> f64,
        (a, fa): (f64, f64),
        (b, fb): (f64, f64),
        (m, fm): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, SpaceError> {
        let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if !delta.is_finite() {
            return Err(SpaceError::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(rec(f, (a, fa), (m, fm), (lm, flm), left, tol / 2.0, depth - 1)?
            + rec(f, (m, fm), (b, fb), (rm, frm), right, tol / 2.0, depth - 1)?)
    }
    let m = (a + b) / 2.0;
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel * whole.abs().max(f64::MIN_POSITIVE);
    rec(f, (a, fa), (b, fb), (m, fm), whole, tol, 48)
}

/// `∫₀ᵗ A(s)/s² ds` over dyadic pieces `[t2^{-j-1}, t2^{-j}]`, with a
/// geometric tail. `None` when the pieces stop decaying (the integral
/// diverges at 0, as for `A(s) ~ s`).
pub fn young_integral(a: &YoungFunction, t: f64) -> Result<Option<f64>, SpaceError> {
    const STALL: f64 = 1.0 - 1e-3;
    let integrand = |s: f64| a.eval(s) / (s * s);
    let mut total = 0.0;
    let mut hi = t;
    let mut prev: Option<f64> = None;
    let mut stalled = 0;
    for _ in 0..1074 {
        let lo = hi / 2.0;
        if lo == 0.0 {
            break;
        }
        let piece = adaptive_simpson(&integrand, lo, hi, 1e-10)?;
        total += piece;
        if piece <= 0.0 {
            return Ok(Some(total));
        }
        if let Some(p) = prev {
            let r = piece / p;
            if r >= STALL {
                stalled += 1;
                if stalled >= 3 {
                    return Ok(None);
                }
            } else {
                stalled = 0;
                let tail = piece * r / (1.0 - r);
                if tail <= 1e-13 * total {
                    return Ok(Some(total + tail));
                }
            }
        }
        prev = Some(piece);
        hi = lo;
    }
    Ok(Some(total))
}

#[derive(Debug, Clone, PartialEq)]
pub struct YoungReport {
    /// `(t, ∫₀ᵗ A(s)/s² ds, A(ct)/t)` per grid point.
    pub rows: Vec<(f64, f64, f64)>,
    pub worst_ratio: f64,
    pub holds_on_grid: bool,
    /// `false` when `A(s)/s²` is not integrable at 0; nothing else is
    /// then meaningful and `holds_on_grid` is `false`.
    pub integrable: bool,
}

/// `∫₀ᵗ A(s)/s² ds ≤ A(ct)/t` on every grid point, up to `1e-6` relative.
pub fn check_young_condition(a: &YoungFunction, c: f64, t_grid: &[f64]) -> Result<YoungReport, SpaceError> {
    a.validate()?;
    if !(c > 0.0) || t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(SpaceError::Range("Young condition needs c > 0 and positive finite t".into()));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let Some(lhs) = young_integral(a, t)? else {
            return Ok(YoungReport { rows, worst_ratio: f64::INFINITY, holds_on_grid: false, integrable: false });
        };
        let rhs = a.eval(c * t) / t;
        worst = worst.max(if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 });
        rows.push((t, lhs, rhs));
    }
    Ok(YoungReport { rows, worst_ratio: worst, holds_on_grid: worst <= 1.0 + 1e-6, integrable: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_evaluation_and_validation() {
        let a = YoungFunction::table(vec![(1.0, 0.5), (2.0, 2.0)]).unwrap();
        assert_eq!(a.eval(0.5), 0.25);
        assert_eq!(a.eval(1.5), 1.25);
        assert_eq!(a.eval(3.0), 3.5);
        assert!(YoungFunction::table(vec![(1.0, 2.0), (2.0, 2.5)]).is_err());
        assert!(YoungFunction::table(vec![(1.0, -1.0)]).is_err());
        assert!(YoungFunction::Power(0.5).validate().is_err());
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = adaptive_simpson(&|x: f64| x * x * x - x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn square_and_cube_closed_forms() {
        for t in [0.1, 1.0, 7.5] {
            let sq = young_integral(&YoungFunction::Power(2.0), t).unwrap().unwrap();
            assert!((sq - t).abs() <= 1e-12 * t);
            let cu = young_integral(&YoungFunction::Power(3.0), t).unwrap().unwrap();
            assert!((cu - t * t / 2.0).abs() <= 1e-12 * t * t);
        }
    }

    #[test]
    fn linear_young_function_diverges() {
        assert_eq!(young_integral(&YoungFunction::Power(1.0), 1.0).unwrap(), None);
        let r = check_young_condition(&YoungFunction::Power(1.0), 1.0, &[1.0]).unwrap();
        assert!(!r.integrable && !r.holds_on_grid);
    }

    #[test]
    fn square_holds_iff_c_at_least_one() {
        let grid = [0.5, 1.0, 4.0];
        assert!(check_young_condition(&YoungFunction::Power(2.0), 1.0, &grid).unwrap().holds_on_grid);
        assert!(check_young_condition(&YoungFunction::Power(2.0), 1.5, &grid).unwrap().holds_on_grid);
        let r = check_young_condition(&YoungFunction::Power(2.0), 0.9, &grid).unwrap();
        assert!(!r.holds_on_grid);
        assert!((r.worst_ratio - 1.0 / 0.81).abs() < 1e-10);
    }
}
