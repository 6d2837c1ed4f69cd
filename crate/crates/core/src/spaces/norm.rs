use super::profile::StepProfile;
use super::spec::SpaceSpec;
use super::young::YoungFunction;
use super::SpaceError;

const BISECTION_CAP: usize = 200;

/// `‖u‖_X`, computed on `u*` so that it depends only on the distribution.
pub fn norm(u: &StepProfile, x: &SpaceSpec) -> Result<f64, SpaceError> {
    x.validate()?;
    norm_of_rearranged(&u.decreasing_rearrangement(), x)
}

fn norm_of_rearranged(star: &StepProfile, x: &SpaceSpec) -> Result<f64, SpaceError> {
    match x {
        SpaceSpec::Linf => Ok(star.sup()),
        SpaceSpec::Lebesgue(p) => Ok(lebesgue(star, *p)),
        SpaceSpec::Lorentz { p, q } => Ok(lorentz(star, *p, *q)),
        SpaceSpec::Orlicz(a) => luxemburg(star, a),
        SpaceSpec::Convexified { base, alpha } => {
            let powered = star.powf(*alpha)?;
            Ok(norm_of_rearranged(&powered, base)?.powf(1.0 / alpha))
        }
    }
}

/// `(Σ vᵖ μ)^{1/p}`, scaled by the sup to stay in range.
fn lebesgue(u: &StepProfile, p: f64) -> f64 {
    let sup = u.sup();
    if p == f64::INFINITY || sup == 0.0 {
        return sup;
    }
    let s: f64 = u.pieces().iter().map(|&(v, m)| (v / sup).powf(p) * m).sum();
    sup * s.powf(1.0 / p)
}

/// `(∫₀^∞ (t^{1/p} u*(t))^q dt/t)^{1/q}` on the pieces `(a, b)` of `u*`:
/// `Σ v^q (p/q)(b^{q/p} - a^{q/p})`; `q = ∞` gives `max v·b^{1/p}`.
fn lorentz(star: &StepProfile, p: f64, q: f64) -> f64 {
    let sup = star.sup();
    if sup == 0.0 {
        return 0.0;
    }
    let mut a = 0.0f64;
    if q == f64::INFINITY {
        let mut best = 0.0f64;
        for &(v, m) in star.pieces() {
            let b = a + m;
            best = best.max(v * b.powf(1.0 / p));
            a = b;
        }
        return best;
    }
    let r = q / p;
    let mut s = 0.0;
    for &(v, m) in star.pieces() {
        let b = a + m;
        s += (v / sup).powf(q) * (p / q) * (b.powf(r) - a.powf(r));
        a = b;
    }
    sup * s.powf(1.0 / q)
}

/// `inf{λ > 0 : Σ A(v/λ) μ ≤ 1}`. The modular is exact for step profiles.
fn luxemburg(u: &StepProfile, a: &YoungFunction) -> Result<f64, SpaceError> {
    let sup = u.sup();
    if sup == 0.0 {
        return Ok(0.0);
    }
    let modular = |lambda: f64| -> f64 { u.pieces().iter().map(|&(v, m)| a.eval(v / lambda) * m).sum() };
    let (mut lo, mut hi) = (sup, sup);
    let mut steps = 0;
    while modular(hi) > 1.0 {
        hi *= 2.0;
        steps += 1;
        if steps > BISECTION_CAP || !hi.is_finite() {
            return Err(SpaceError::Divergence(format!("cannot bracket the Luxemburg norm from above for {a}")));
        }
    }
    while modular(lo) <= 1.0 {
        lo /= 2.0;
        steps += 1;
        if steps > BISECTION_CAP || lo == 0.0 {
            return Err(SpaceError::Divergence(format!("cannot bracket the Luxemburg norm from below for {a}")));
        }
    }
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            return Ok(hi);
        }
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(SpaceError::Divergence(format!("Luxemburg bisection did not converge for {a}")))
}

impl SpaceSpec {
    pub fn norm(&self, u: &StepProfile) -> Result<f64, SpaceError> {
        norm(u, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(a: f64) -> StepProfile {
        StepProfile::indicator(a, 1.0).unwrap()
    }

    #[test]
    fn indicator_norms() {
        let a: f64 = 0.3;
        assert!((norm(&chi(a), &SpaceSpec::Lebesgue(3.0)).unwrap() - a.powf(1.0 / 3.0)).abs() < 1e-15);
        let (p, q) = (2.0, 1.0);
        let lor = norm(&chi(a), &SpaceSpec::Lorentz { p, q }).unwrap();
        assert!((lor - (p / q).powf(1.0 / q) * a.powf(1.0 / p)).abs() < 1e-12);
        let orl = norm(&chi(a), &SpaceSpec::Orlicz(YoungFunction::Power(3.0))).unwrap();
        assert!((orl - a.powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(norm(&chi(a), &SpaceSpec::Linf).unwrap(), 1.0);
        assert_eq!(norm(&chi(a), &SpaceSpec::Lorentz { p: 2.0, q: f64::INFINITY }).unwrap(), a.sqrt());
    }

    #[test]
    fn lorentz_diagonal_is_lebesgue() {
        let u = StepProfile::new(vec![(1.0, 0.2), (3.0, 0.5), (0.5, 0.3)]).unwrap();
        let l = norm(&u, &SpaceSpec::Lorentz { p: 3.0, q: 3.0 }).unwrap();
        assert!((l - norm(&u, &SpaceSpec::Lebesgue(3.0)).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn convexified_square_is_l4() {
        let u = StepProfile::new(vec![(1.0, 0.2), (3.0, 0.5), (0.5, 0.3)]).unwrap();
        let c = norm(&u, &SpaceSpec::convexified(SpaceSpec::Lebesgue(2.0), 2.0)).unwrap();
        let l4 = norm(&u, &SpaceSpec::Lebesgue(4.0)).unwrap();
        assert!((c - l4).abs() <= 1e-12 * l4);
    }

    #[test]
    fn lorentz_below_one_is_rejected() {
        assert!(matches!(
            norm(&chi(0.5), &SpaceSpec::Lorentz { p: 1.0, q: 2.0 }),
            Err(SpaceError::UnsupportedSpace(_))
        ));
    }

    #[test]
    fn zero_profile_has_zero_norm() {
        let z = StepProfile::new(vec![(0.0, 1.0)]).unwrap();
        assert_eq!(norm(&z, &SpaceSpec::Orlicz(YoungFunction::Exp)).unwrap(), 0.0);
    }
}
