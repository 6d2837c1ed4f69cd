use std::fmt;
use std::str::FromStr;

use super::young::YoungFunction;
use super::SpaceError;

/// A rearrangement-invariant norm.
///
/// Textual form: `Linf`, `Lp:2`, `Lp:inf`, `Lorentz:2,1`, `Lorentz:3,inf`,
/// `Orlicz:pow3`, `Orlicz:exp`, `Orlicz:table(1:0.5;2:2)`, `Conv(Lp:2)^1.5`.
/// Numbers are decimal literals, `inf`, or fractions `a/b`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Lebesgue(f64),
    Lorentz { p: f64, q: f64 },
    Orlicz(YoungFunction),
    Convexified { base: Box<SpaceSpec>, alpha: f64 },
    Linf,
}

impl SpaceSpec {
    /// `X^α`; `α = ∞` gives `L^∞`.
    pub fn convexified(base: SpaceSpec, alpha: f64) -> Self {
        if alpha == f64::INFINITY {
            SpaceSpec::Linf
        } else {
            SpaceSpec::Convexified { base: Box::new(base), alpha }
        }
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        match self {
            SpaceSpec::Lebesgue(p) if !(*p >= 1.0) => {
                Err(SpaceError::UnsupportedSpace(format!("Lebesgue exponent must be ≥ 1, got {p}")))
            }
            SpaceSpec::Lorentz { p, q } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(SpaceError::UnsupportedSpace(format!(
                        "Lorentz L^{{{p},{q}}} is not a Banach function space; need 1 < p < ∞"
                    )));
                }
                if !(*q >= 1.0) {
                    return Err(SpaceError::UnsupportedSpace(format!("Lorentz second index must be ≥ 1, got {q}")));
                }
                Ok(())
            }
            SpaceSpec::Orlicz(a) => a.validate(),
            SpaceSpec::Convexified { base, alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(SpaceError::UnsupportedSpace(format!("convexification exponent must be > 0, got {alpha}")));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x == f64::INFINITY {
        write!(f, "inf")
    } else {
        write!(f, "{x}")
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Linf => write!(f, "Linf"),
            SpaceSpec::Lebesgue(p) => {
                write!(f, "Lp:")?;
                write_num(f, *p)
            }
            SpaceSpec::Lorentz { p, q } => {
                write!(f, "Lorentz:")?;
                write_num(f, *p)?;
                write!(f, ",")?;
                write_num(f, *q)
            }
            SpaceSpec::Orlicz(a) => write!(f, "Orlicz:{a}"),
            SpaceSpec::Convexified { base, alpha } => {
                write!(f, "Conv({base})^")?;
                write_num(f, *alpha)
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> SpaceError {
        SpaceError::Parse { pos: self.pos, msg: msg.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), SpaceError> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{lit}`")))
        }
    }

    fn number(&mut self) -> Result<f64, SpaceError> {
        if self.eat("inf") {
            return Ok(f64::INFINITY);
        }
        let start = self.pos;
        let len = self
            .rest()
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || ((c == '+' || c == '-') && i > 0))
            })
            .map_or(self.rest().len(), |(i, _)| i);
        if len == 0 {
            return Err(self.err("expected a number"));
        }
        let text = &self.src[start..start + len];
        let num: f64 = text.parse().map_err(|_| self.err(format!("malformed number `{text}`")))?;
        self.pos += len;
        if self.eat("/") {
            let den_pos = self.pos;
            let den = self.number()?;
            if den == 0.0 || den.is_infinite() {
                self.pos = den_pos;
                return Err(self.err("fraction denominator must be finite and non-zero"));
            }
            return Ok(num / den);
        }
        Ok(num)
    }

    fn young(&mut self) -> Result<YoungFunction, SpaceError> {
        let start = self.pos;
        let f = if self.eat("pow") {
            YoungFunction::Power(self.number()?)
        } else if self.eat("exp") {
            YoungFunction::Exp
        } else if self.eat("table(") {
            let mut pts = Vec::new();
            loop {
                let x = self.number()?;
                self.expect(":")?;
                let y = self.number()?;
                pts.push((x, y));
                if self.eat(")") {
                    break;
                }
                self.expect(";")?;
            }
            YoungFunction::Table(pts)
        } else {
            return Err(self.err("expected a Young function: `pow<p>`, `exp` or `table(x:y;…)`"));
        };
        f.validate().map_err(|e| SpaceError::Parse { pos: start, msg: e.to_string() })?;
        Ok(f)
    }

    fn spec(&mut self) -> Result<SpaceSpec, SpaceError> {
        let start = self.pos;
        let s = if self.eat("Linf") {
            SpaceSpec::Linf
        } else if self.eat("Lp:") {
            SpaceSpec::Lebesgue(self.number()?)
        } else if self.eat("Lorentz:") {
            let p = self.number()?;
            self.expect(",")?;
            let q = self.number()?;
            SpaceSpec::Lorentz { p, q }
        } else if self.eat("Orlicz:") {
            SpaceSpec::Orlicz(self.young()?)
        } else if self.eat("Conv(") {
            let base = self.spec()?;
            self.expect(")^")?;
            let alpha = self.number()?;
            SpaceSpec::convexified(base, alpha)
        } else {
            return Err(self.err("expected `Linf`, `Lp:`, `Lorentz:`, `Orlicz:` or `Conv(`"));
        };
        s.validate().map_err(|e| SpaceError::Parse { pos: start, msg: e.to_string() })?;
        Ok(s)
    }
}

impl FromStr for SpaceSpec {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, SpaceError> {
        let mut p = Parser { src: s, pos: 0 };
        let spec = p.spec()?;
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        assert_eq!("Linf".parse::<SpaceSpec>().unwrap(), SpaceSpec::Linf);
        assert_eq!("Lp:2".parse::<SpaceSpec>().unwrap(), SpaceSpec::Lebesgue(2.0));
        assert_eq!("Lp:7/3".parse::<SpaceSpec>().unwrap(), SpaceSpec::Lebesgue(7.0 / 3.0));
        assert_eq!("Lp:inf".parse::<SpaceSpec>().unwrap(), SpaceSpec::Lebesgue(f64::INFINITY));
        assert_eq!("Lorentz:2,1".parse::<SpaceSpec>().unwrap(), SpaceSpec::Lorentz { p: 2.0, q: 1.0 });
        assert_eq!("Orlicz:pow3".parse::<SpaceSpec>().unwrap(), SpaceSpec::Orlicz(YoungFunction::Power(3.0)));
        assert_eq!(
            "Conv(Lp:2)^1.5".parse::<SpaceSpec>().unwrap(),
            SpaceSpec::convexified(SpaceSpec::Lebesgue(2.0), 1.5)
        );
        assert_eq!("Conv(Lp:2)^inf".parse::<SpaceSpec>().unwrap(), SpaceSpec::Linf);
    }

    #[test]
    fn display_round_trips() {
        for s in ["Linf", "Lp:2", "Lp:inf", "Lorentz:2,1", "Lorentz:3,inf", "Orlicz:pow3", "Orlicz:exp",
            "Orlicz:table(1:0.5;2:2)", "Conv(Lp:2)^1.5", "Conv(Conv(Lorentz:4,2)^2)^0.5"]
        {
            let spec: SpaceSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn errors_carry_positions() {
        let pos = |s: &str| match s.parse::<SpaceSpec>() {
            Err(SpaceError::Parse { pos, .. }) => pos,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(pos("Lq:2"), 0);
        assert_eq!(pos("Lp:x"), 3);
        assert_eq!(pos("Lorentz:2;1"), 9);
        assert_eq!(pos("Lorentz:1,2"), 0);
        assert_eq!(pos("Conv(Lp:2)1.5"), 9);
        assert_eq!(pos("Lp:2 "), 4);
        assert_eq!(pos("Orlicz:table(1:2;2:2.5)"), 7);
        assert_eq!(pos("Lp:1/0"), 5);
    }
}
