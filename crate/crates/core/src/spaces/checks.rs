use num_rational::Rational64;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use super::norm::norm;
use super::profile::StepProfile;
use super::spec::SpaceSpec;
use super::SpaceError;
use crate::symbolic::{reciprocal_sum, Exponent};

const REL_TOL: f64 = 1e-9;
const PREMISE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    /// `‖∏ fᵢ‖_X`
    pub lhs: f64,
    /// `∏ ‖fᵢ‖_{X^{pᵢ}}`
    pub rhs: f64,
    /// constant allowed in front of `rhs`: `k^{1/p}` for a Lorentz
    /// quasi-norm (`q > p`) with `k` factors, else 1
    pub constant: f64,
    pub holds: bool,
}

fn space_power(x: &SpaceSpec, p: Exponent) -> SpaceSpec {
    match p {
        Exponent::Infinite => SpaceSpec::Linf,
        Exponent::Finite(_) => SpaceSpec::convexified(x.clone(), p.to_f64()),
    }
}

/// `‖∏ fᵢ‖_X ≤ ∏ ‖fᵢ‖_{X^{pᵢ}}` for `Σ 1/pᵢ = 1`, checked exactly on the
/// exponents.
pub fn check_holder(factors: &[StepProfile], exponents: &[Exponent], x: &SpaceSpec) -> Result<HolderReport, SpaceError> {
    if factors.len() != exponents.len() || factors.is_empty() {
        return Err(SpaceError::ExponentSum(format!("{} factors with {} exponents", factors.len(), exponents.len())));
    }
    if exponents.iter().any(|e| matches!(e, Exponent::Finite(p) if *p < Rational64::one())) {
        return Err(SpaceError::ExponentSum("exponents must lie in [1, ∞]".into()));
    }
    let sum = reciprocal_sum(exponents);
    if sum != Rational64::one() {
        return Err(SpaceError::ExponentSum(format!("reciprocal exponents sum to {sum}, not 1")));
    }
    x.validate()?;
    let refs: Vec<&StepProfile> = factors.iter().collect();
    let lhs = norm(&StepProfile::product(&refs)?, x)?;
    let mut rhs = 1.0;
    for (f, &p) in factors.iter().zip(exponents) {
        rhs *= norm(f, &space_power(x, p))?;
    }
    let constant = match x {
        SpaceSpec::Lorentz { p, q } if q > p => (factors.len() as f64).powf(1.0 / p),
        _ => 1.0,
    };
    Ok(HolderReport { lhs, rhs, constant, holds: lhs <= constant * rhs * (1.0 + REL_TOL) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HlpVerdict {
    Holds,
    Fails,
    /// the premise is false, so nothing is asserted
    Vacuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HlpReport {
    /// `|Ω'| / |Ω|`
    pub eta: f64,
    pub premise_holds: bool,
    /// `max_t (∫₀ᵗ E_η g* - ∫₀ᵗ f*)`, positive when the premise fails
    pub premise_gap: f64,
    /// `‖g‖_{X(Ω')} = η⁻¹ ‖E_η g*‖_{X(0,|Ω|)}`
    pub lhs: f64,
    /// `η⁻¹ ‖f‖_{X(Ω)}`
    pub rhs: f64,
    /// `‖g*‖_{X(0,|Ω'|)}` without rescaling, for reference
    pub raw_lhs: f64,
    pub conclusion_holds: bool,
    pub verdict: HlpVerdict,
}

/// `∫₀ᵗ E_η g* ≤ ∫₀ᵗ f*` for all `t` ⟹ `‖g‖_{X(Ω')} ≤ η⁻¹ ‖f‖_{X(Ω)}`.
///
/// Norms over `Ω'` are those of the similar space: `g` is carried to
/// `(0, |Ω|)` by `E_η` and the result is scaled by `η⁻¹`.
pub fn check_hlp(f: &StepProfile, g: &StepProfile, x: &SpaceSpec) -> Result<HlpReport, SpaceError> {
    x.validate()?;
    let omega = f.total_measure();
    let eta = g.total_measure() / omega;
    let f_star = f.decreasing_rearrangement();
    let h = g.decreasing_rearrangement().dilate(eta, omega)?;
    let (measures, values) = StepProfile::co_refine(&[&h, &f_star])?;
    let (mut ih, mut if_, mut gap) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    let scale = f_star.integral().max(h.integral()).max(f64::MIN_POSITIVE);
    for (i, m) in measures.iter().enumerate() {
        ih += values[0][i] * m;
        if_ += values[1][i] * m;
        gap = gap.max(ih - if_);
    }
    let premise_holds = gap <= PREMISE_SLACK * scale;
    let lhs = norm(&h, x)? / eta;
    let rhs = norm(&f_star, x)? / eta;
    let conclusion_holds = lhs <= rhs * (1.0 + REL_TOL);
    let verdict = match (premise_holds, conclusion_holds) {
        (false, _) => HlpVerdict::Vacuous,
        (true, true) => HlpVerdict::Holds,
        (true, false) => HlpVerdict::Fails,
    };
    Ok(HlpReport {
        eta,
        premise_holds,
        premise_gap: gap,
        lhs,
        rhs,
        raw_lhs: norm(g, x)?,
        conclusion_holds,
        verdict,
    })
}

/// A profile `g` on `(0, η|Ω|)` whose rescaled rearrangement `E_η g*` is
/// majorized by `f*`: `f*` is averaged over random consecutive blocks,
/// shrunk by a random factor in `(0, 1]`, stretched by `η` and shuffled.
pub fn random_hlp_partner(f: &StepProfile, eta: f64, rng: &mut impl Rng) -> Result<StepProfile, SpaceError> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(SpaceError::Range(format!("η must be positive, got {eta}")));
    }
    let star = f.decreasing_rearrangement();
    let shrink = rng.gen_range(0.1..=1.0);
    let mut pieces = Vec::new();
    let mut i = 0;
    let src = star.pieces();
    while i < src.len() {
        let len = rng.gen_range(1..=3).min(src.len() - i);
        let block = &src[i..i + len];
        let m: f64 = block.iter().map(|p| p.1).sum();
        let avg = block.iter().map(|p| p.0 * p.1).sum::<f64>() / m;
        pieces.push((avg * shrink, m * eta));
        i += len;
    }
    pieces.shuffle(rng);
    StepProfile::new(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(pieces: &[(f64, f64)]) -> StepProfile {
        StepProfile::new(pieces.to_vec()).unwrap()
    }

    #[test]
    fn cauchy_schwarz_equality_case() {
        let chi = StepProfile::indicator(0.4, 1.0).unwrap();
        let two = Exponent::finite(2, 1);
        let r = check_holder(&[chi.clone(), chi], &[two, two], &SpaceSpec::Lebesgue(1.0)).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn exponent_sum_is_exact() {
        let u = p(&[(1.0, 1.0)]);
        let three = Exponent::finite(3, 1);
        assert!(matches!(
            check_holder(&[u.clone(), u], &[three, three], &SpaceSpec::Lebesgue(1.0)),
            Err(SpaceError::ExponentSum(_))
        ));
    }

    #[test]
    fn infinite_exponent_uses_sup() {
        let a = p(&[(2.0, 0.5), (1.0, 0.5)]);
        let b = p(&[(3.0, 0.25), (0.5, 0.75)]);
        let r = check_holder(&[a, b], &[Exponent::Infinite, Exponent::finite(1, 1)], &SpaceSpec::Lebesgue(2.0)).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn hlp_identity_case() {
        let f = p(&[(1.0, 0.3), (4.0, 0.2), (2.0, 0.5)]);
        let r = check_hlp(&f, &f, &SpaceSpec::Lebesgue(2.0)).unwrap();
        assert_eq!(r.eta, 1.0);
        assert!(r.premise_holds);
        assert!((r.lhs - r.rhs).abs() < 1e-15);
        assert_eq!(r.verdict, HlpVerdict::Holds);
    }

    #[test]
    fn hlp_vacuous_when_premise_fails() {
        let f = p(&[(1.0, 1.0)]);
        let g = p(&[(2.0, 1.0)]);
        let r = check_hlp(&f, &g, &SpaceSpec::Lebesgue(2.0)).unwrap();
        assert!(!r.premise_holds);
        assert_eq!(r.verdict, HlpVerdict::Vacuous);
    }
}
