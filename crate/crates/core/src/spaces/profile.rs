use std::io::{Read, Write};

use super::SpaceError;

/// Breakpoints closer than this fraction of the total measure are merged
/// when two profiles are co-refined.
const BREAKPOINT_SLACK: f64 = 1e-12;

/// A nonnegative step function on `(0, total_measure)`.
///
/// Piece `i` occupies `[m₀+…+m_{i-1}, m₀+…+m_i)`; only the order of the
/// pieces carries position, so any measure-preserving rearrangement of a
/// set of cells is represented by a permutation of pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    pieces: Vec<(f64, f64)>,
    total_measure: f64,
}

impl StepProfile {
    /// Pieces as `(value, measure)`; values `≥ 0`, measures `> 0`, all finite.
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self, SpaceError> {
        if pieces.is_empty() {
            return Err(SpaceError::InvalidProfile("a profile needs at least one piece".into()));
        }
        for (i, &(v, m)) in pieces.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SpaceError::InvalidProfile(format!("piece {i}: value {v} is not a finite nonnegative number")));
            }
            if !(m.is_finite() && m > 0.0) {
                return Err(SpaceError::InvalidProfile(format!("piece {i}: measure {m} is not finite and positive")));
            }
        }
        let total_measure = pieces.iter().map(|p| p.1).sum();
        Ok(Self { pieces, total_measure })
    }

    /// `|v|` on consecutive cells of equal measure.
    pub fn from_samples(values: &[f64], cell_measure: f64) -> Result<Self, SpaceError> {
        Self::new(values.iter().map(|v| (v.abs(), cell_measure)).collect())
    }

    pub fn indicator(measure: f64, total_measure: f64) -> Result<Self, SpaceError> {
        if !(measure > 0.0 && measure <= total_measure) {
            return Err(SpaceError::InvalidProfile(format!("indicator of {measure} inside {total_measure}")));
        }
        let mut pieces = vec![(1.0, measure)];
        if total_measure > measure {
            pieces.push((0.0, total_measure - measure));
        }
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn sup(&self) -> f64 {
        self.pieces.iter().map(|p| p.0).fold(0.0, f64::max)
    }

    pub fn is_rearranged(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].0 >= w[1].0)
    }

    /// `u*`: pieces sorted by value, descending, ties kept in order.
    pub fn decreasing_rearrangement(&self) -> Self {
        let mut pieces = self.pieces.clone();
        pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self { pieces, total_measure: self.total_measure }
    }

    /// `|{u > λ}|`.
    pub fn distribution(&self, lambda: f64) -> f64 {
        self.pieces.iter().filter(|p| p.0 > lambda).map(|p| p.1).sum()
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self, SpaceError> {
        Self::new(self.pieces.iter().map(|&(v, m)| (f(v), m)).collect())
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self, SpaceError> {
        self.map_values(|v| v * lambda)
    }

    pub fn powf(&self, alpha: f64) -> Result<Self, SpaceError> {
        self.map_values(|v| v.powf(alpha))
    }

    /// Splits every piece at the breakpoints of all profiles. Returns the
    /// common measures and, per profile, the value on each common piece.
    pub fn co_refine(profiles: &[&Self]) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpaceError> {
        let Some(first) = profiles.first() else {
            return Ok((Vec::new(), Vec::new()));
        };
        let total = first.total_measure;
        for p in profiles {
            if (p.total_measure - total).abs() > BREAKPOINT_SLACK * total {
                return Err(SpaceError::InvalidProfile(format!(
                    "total measures {} and {total} differ",
                    p.total_measure
                )));
            }
        }
        let ends: Vec<Vec<f64>> = profiles
            .iter()
            .map(|p| {
                p.pieces
                    .iter()
                    .scan(0.0, |acc, &(_, m)| {
                        *acc += m;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        let slack = BREAKPOINT_SLACK * total;
        let mut all: Vec<f64> = ends.concat();
        all.sort_by(f64::total_cmp);
        let mut cuts: Vec<f64> = Vec::with_capacity(all.len());
        for c in all {
            match cuts.last_mut() {
                Some(last) if c - *last <= slack => *last = last.max(c),
                _ => cuts.push(c),
            }
        }
        let mut cursor = vec![0usize; profiles.len()];
        let mut measures = Vec::with_capacity(cuts.len());
        let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(cuts.len()); profiles.len()];
        let mut start = 0.0;
        for end in cuts {
            for (k, p) in profiles.iter().enumerate() {
                while cursor[k] + 1 < p.pieces.len() && ends[k][cursor[k]] <= start + slack {
                    cursor[k] += 1;
                }
                values[k].push(p.pieces[cursor[k]].0);
            }
            measures.push(end - start);
            start = end;
        }
        Ok((measures, values))
    }

    /// Pointwise product of profiles on a common domain.
    pub fn product(profiles: &[&Self]) -> Result<Self, SpaceError> {
        let (measures, values) = Self::co_refine(profiles)?;
        Self::new(
            measures
                .iter()
                .enumerate()
                .map(|(i, &m)| (values.iter().map(|v| v[i]).product(), m))
                .collect(),
        )
    }

    /// `E_s u(x) = u(sx)` for `sx` inside the domain of `u`, `0` otherwise,
    /// on the output domain `(0, a)`.
    pub fn dilate(&self, s: f64, a: f64) -> Result<Self, SpaceError> {
        if !(s > 0.0 && s.is_finite()) || !(a > 0.0 && a.is_finite()) {
            return Err(SpaceError::Range(format!("dilation needs s > 0 and a > 0, got s = {s}, a = {a}")));
        }
        let mut pieces = Vec::with_capacity(self.pieces.len() + 1);
        let mut end = 0.0;
        for &(v, m) in &self.pieces {
            let scaled = m / s;
            if (end + scaled - a).abs() <= BREAKPOINT_SLACK * a {
                // ends on the boundary up to rounding: keep the piece whole
                pieces.push((v, scaled));
                end = a;
                break;
            }
            if end + scaled > a {
                if a > end {
                    pieces.push((v, a - end));
                }
                end = a;
                break;
            }
            pieces.push((v, scaled));
            end += scaled;
        }
        if a > end {
            pieces.push((0.0, a - end));
        }
        Self::new(pieces)
    }

    /// `∫₀ᵗ u*(s) ds`, exactly.
    pub fn partial_integral(&self, t: f64) -> Result<f64, SpaceError> {
        if !(t >= 0.0 && t <= self.total_measure * (1.0 + BREAKPOINT_SLACK)) {
            return Err(SpaceError::Range(format!("t = {t} outside [0, {}]", self.total_measure)));
        }
        let star = self.decreasing_rearrangement();
        let mut acc = 0.0;
        let mut left = t;
        for &(v, m) in &star.pieces {
            if left <= 0.0 {
                break;
            }
            acc += v * m.min(left);
            left -= m;
        }
        Ok(acc)
    }

    pub fn integral(&self) -> f64 {
        self.pieces.iter().map(|&(v, m)| v * m).sum()
    }

    /// `#total_measure=` header, then `value,measure` rows.
    pub fn write_csv(&self, out: impl Write) -> Result<(), SpaceError> {
        let mut out = out;
        writeln!(out, "#total_measure={}", self.total_measure).map_err(|e| SpaceError::Csv(e.to_string()))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["value", "measure"]).map_err(|e| SpaceError::Csv(e.to_string()))?;
        for &(v, m) in &self.pieces {
            w.write_record([v.to_string(), m.to_string()]).map_err(|e| SpaceError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| SpaceError::Csv(e.to_string()))
    }

    pub fn read_csv(input: impl Read) -> Result<Self, SpaceError> {
        let mut text = String::new();
        let mut input = input;
        input.read_to_string(&mut text).map_err(|e| SpaceError::Csv(e.to_string()))?;
        let (header, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
        let declared: f64 = header
            .trim()
            .strip_prefix("#total_measure=")
            .ok_or_else(|| SpaceError::Csv("line 1: expected `#total_measure=<number>`".into()))?
            .trim()
            .parse()
            .map_err(|e| SpaceError::Csv(format!("line 1: {e}")))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(body.as_bytes());
        let mut pieces = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| SpaceError::Csv(format!("line {line}: {e}")))?;
            if i == 0 && rec.get(0) == Some("value") {
                continue;
            }
            if rec.len() != 2 {
                return Err(SpaceError::Csv(format!("line {line}: expected `value,measure`")));
            }
            let num = |k: usize| -> Result<f64, SpaceError> {
                rec[k].parse().map_err(|e| SpaceError::Csv(format!("line {line}, column {}: {e}", k + 1)))
            };
            pieces.push((num(0)?, num(1)?));
        }
        let p = Self::new(pieces)?;
        if (p.total_measure - declared).abs() > BREAKPOINT_SLACK * declared.abs().max(p.total_measure) {
            return Err(SpaceError::Csv(format!(
                "declared total measure {declared} differs from the sum of measures {}",
                p.total_measure
            )));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(pieces: &[(f64, f64)]) -> StepProfile {
        StepProfile::new(pieces.to_vec()).unwrap()
    }

    #[test]
    fn rearrangement_sorts_descending() {
        let u = p(&[(1.0, 0.5), (3.0, 0.25), (2.0, 0.25)]);
        assert_eq!(u.decreasing_rearrangement().pieces(), &[(3.0, 0.25), (2.0, 0.25), (1.0, 0.5)]);
        let s = u.decreasing_rearrangement();
        assert_eq!(s.decreasing_rearrangement(), s);
    }

    #[test]
    fn rejects_bad_pieces() {
        assert!(StepProfile::new(vec![]).is_err());
        assert!(StepProfile::new(vec![(-1.0, 1.0)]).is_err());
        assert!(StepProfile::new(vec![(1.0, 0.0)]).is_err());
        assert!(StepProfile::new(vec![(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn dilation_of_indicator() {
        let chi = p(&[(1.0, 1.0)]);
        assert_eq!(chi.dilate(2.0, 1.0).unwrap().pieces(), &[(1.0, 0.5), (0.0, 0.5)]);
        assert_eq!(chi.dilate(1.0, 1.0).unwrap(), chi);
        assert_eq!(chi.dilate(0.5, 1.0).unwrap().pieces(), &[(1.0, 1.0)]);
        assert!(chi.dilate(0.0, 1.0).is_err());
        assert!(chi.dilate(1.0, -1.0).is_err());
    }

    #[test]
    fn co_refinement_merges_breakpoints() {
        let a = p(&[(1.0, 0.5), (2.0, 0.5)]);
        let b = p(&[(3.0, 0.25), (4.0, 0.75)]);
        let (m, v) = StepProfile::co_refine(&[&a, &b]).unwrap();
        assert_eq!(m, vec![0.25, 0.25, 0.5]);
        assert_eq!(v, vec![vec![1.0, 1.0, 2.0], vec![3.0, 4.0, 4.0]]);
        let prod = StepProfile::product(&[&a, &b]).unwrap();
        assert_eq!(prod.pieces(), &[(3.0, 0.25), (4.0, 0.25), (8.0, 0.5)]);
    }

    #[test]
    fn co_refinement_rejects_domain_mismatch() {
        let a = p(&[(1.0, 1.0)]);
        let b = p(&[(1.0, 2.0)]);
        assert!(StepProfile::co_refine(&[&a, &b]).is_err());
    }

    #[test]
    fn partial_integrals() {
        let chi = StepProfile::indicator(0.3, 1.0).unwrap();
        assert!((chi.partial_integral(0.5).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(chi.partial_integral(0.0).unwrap(), 0.0);
        assert!(chi.partial_integral(1e-300).unwrap() < 1e-299);
        assert!(chi.partial_integral(1.5).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let u = p(&[(0.1, 0.3), (2.5, 0.7)]);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        assert_eq!(StepProfile::read_csv(buf.as_slice()).unwrap(), u);
        assert!(StepProfile::read_csv("value,measure\n1,1\n".as_bytes()).is_err());
        assert!(StepProfile::read_csv("#total_measure=2\n1,1\n".as_bytes()).is_err());
        let err = StepProfile::read_csv("#total_measure=1\n1,x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
