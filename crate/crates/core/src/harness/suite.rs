use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::maps::{by_name, Polynomial, ScalarFn};
use crate::spaces::{check_hlp, random_hlp_partner, HlpVerdict, SpaceSpec, StepProfile};

use super::baseline::Baselines;
use super::identity::{verify_composition_identity, verify_inverse_identity, verify_product_identity, Tolerance};
use super::report::{write_reports, CheckReport, Outcome, Verdict};
use super::theorem::{verify_gn_inequality, verify_theorem1_pipeline};
use super::HarnessError;

pub const DEFAULT_GRID: usize = 32;
/// Identity checks evaluate at most this many points per axis.
const IDENTITY_POINTS: usize = 16;

const MAPS_1D: [&str; 3] = ["AFFINE_1D", "HALF_AFFINE_1D", "SINE_1D"];
const MAPS_2D: [&str; 2] = ["SHEAR_2D", "SHEAR_2D_B"];
const COMPOSITIONS: [(&str, &str); 3] =
    [("AFFINE_1D", "HALF_AFFINE_1D"), ("SINE_1D", "AFFINE_1D"), ("SHEAR_2D", "SHEAR_2D_B")];
const PRODUCTS: [&str; 3] = ["const", "sin_exp", "poly2d"];
const NORM_SPACES: [&str; 3] = ["L2", "Lorentz22", "OrliczPow3"];
const THM1_MAPS: [&str; 3] = ["AFFINE_1D", "SINE_1D", "SHEAR_2D"];
/// `(function, j, k, space)`
const GN_CASES: [(&str, u32, u32, &str); 13] = [
    ("const", 1, 2, "L2"),
    ("sin", 1, 2, "L2"),
    ("sin", 1, 2, "Lorentz22"),
    ("sin", 1, 2, "OrliczPow3"),
    ("sin", 1, 3, "L2"),
    ("sin", 2, 3, "L2"),
    ("sin", 1, 3, "OrliczPow3"),
    ("sin", 2, 3, "Lorentz22"),
    ("sin", 1, 2, "L1"),
    ("poly2d", 1, 2, "L2"),
    ("poly2d", 1, 2, "OrliczPow3"),
    ("poly2d", 1, 3, "Lorentz22"),
    ("poly2d", 2, 3, "L2"),
];

fn space(token: &str) -> SpaceSpec {
    match token {
        "L1" => SpaceSpec::Lebesgue(1.0),
        "L2" => SpaceSpec::Lebesgue(2.0),
        "Lorentz22" => SpaceSpec::Lorentz { p: 2.0, q: 2.0 },
        "OrliczPow3" => "Orlicz:pow3".parse().expect("valid spec"),
        _ => unreachable!("catalog space token {token}"),
    }
}

/// `x²y - 2xy³ + y + 3` and `1 + x y²`, on the unit square.
fn polynomial_pair() -> (ScalarFn, ScalarFn) {
    let p = Polynomial::new(2, [(vec![2, 1], 1.0), (vec![1, 3], -2.0), (vec![0, 1], 1.0), (vec![0, 0], 3.0)]);
    let q = Polynomial::new(2, [(vec![0, 0], 1.0), (vec![1, 2], 1.0)]);
    (ScalarFn::Polynomial(p.expect("two variables")), ScalarFn::Polynomial(q.expect("two variables")))
}

fn test_function(name: &str) -> (ScalarFn, Vec<(f64, f64)>) {
    match name {
        "const" => (ScalarFn::Constant { dim: 1, value: 3.0 }, vec![(0.0, 1.0)]),
        "sin" => (ScalarFn::Sin, vec![(0.0, 2.0 * std::f64::consts::PI)]),
        "poly2d" => (polynomial_pair().0, vec![(0.0, 1.0); 2]),
        _ => unreachable!("catalog function {name}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum CheckKind {
    Inverse { map: &'static str, m: u32 },
    Composition { f: &'static str, g: &'static str, m: u32 },
    Product { pair: &'static str, m: u32 },
    Gn { u: &'static str, j: u32, k: u32, space: &'static str },
    Theorem1 { map: &'static str, space: &'static str, m: u32 },
    Hlp { dominated: bool, space: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub id: String,
    kind: CheckKind,
}

/// Every shipped check, sorted by id.
pub fn catalog() -> Vec<CheckSpec> {
    let mut out = Vec::new();
    let mut push = |id: String, kind| out.push(CheckSpec { id, kind });
    for m in 2..=4 {
        for map in MAPS_1D.into_iter().chain(MAPS_2D) {
            push(format!("inv.{map}.m{m}"), CheckKind::Inverse { map, m });
        }
    }
    for m in 1..=4 {
        for (f, g) in COMPOSITIONS {
            push(format!("comp.{f}.{g}.m{m}"), CheckKind::Composition { f, g, m });
        }
        for pair in PRODUCTS {
            push(format!("prod.{pair}.m{m}"), CheckKind::Product { pair, m });
        }
    }
    for (u, j, k, space) in GN_CASES {
        push(format!("gn.{u}.j{j}.k{k}.{space}"), CheckKind::Gn { u, j, k, space });
    }
    for map in THM1_MAPS {
        for space in NORM_SPACES {
            for m in 2..=3 {
                push(format!("thm1.{map}.{space}.m{m}"), CheckKind::Theorem1 { map, space, m });
            }
        }
    }
    for space in NORM_SPACES {
        push(format!("hlp.dominated.{space}"), CheckKind::Hlp { dominated: true, space });
        push(format!("hlp.undominated.{space}"), CheckKind::Hlp { dominated: false, space });
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Checks matching `patterns`: `default` for everything, an exact id, or a
/// prefix ending in `*`. Each pattern must match something.
pub fn select(patterns: &[String]) -> Result<Vec<CheckSpec>, HarnessError> {
    let all = catalog();
    let mut chosen: Vec<CheckSpec> = Vec::new();
    for p in patterns {
        let matches: Vec<&CheckSpec> = match p.as_str() {
            "default" => all.iter().collect(),
            _ => match p.strip_suffix('*') {
                Some(prefix) => all.iter().filter(|c| c.id.starts_with(prefix)).collect(),
                None => all.iter().filter(|c| c.id == *p).collect(),
            },
        };
        if matches.is_empty() {
            return Err(HarnessError::UnknownCheck(p.clone()));
        }
        chosen.extend(matches.into_iter().cloned());
    }
    chosen.sort_by(|a, b| a.id.cmp(&b.id));
    chosen.dedup_by(|a, b| a.id == b.id);
    Ok(chosen)
}

fn fnv1a(seed: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(id.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn identity_tol(dim: usize, m: u32) -> Tolerance {
    match (dim, m) {
        (1, _) => Tolerance::Relative(1e-6),
        (_, ..=2) => Tolerance::Relative(1e-4),
        _ => Tolerance::Relative(1e-3),
    }
}

fn hlp_check(dominated: bool, x: &SpaceSpec, grid: usize, rng: &mut ChaCha8Rng) -> Result<Outcome, HarnessError> {
    let f = StepProfile::new((0..grid).map(|_| (rng.gen_range(0.0..5.0), rng.gen_range(0.05..1.0))).collect())?;
    let eta = rng.gen_range(0.5..2.0);
    let g = if dominated {
        random_hlp_partner(&f, eta, rng)?
    } else {
        // three times the stretched f: every partial integral is too large
        StepProfile::new(f.pieces().iter().map(|&(v, m)| (3.0 * v + 1.0, m * eta)).collect())?
    };
    let r = check_hlp(&f, &g, x)?;
    let verdict = match r.verdict {
        HlpVerdict::Holds => Verdict::Pass,
        HlpVerdict::Fails => Verdict::Fail,
        HlpVerdict::Vacuous => Verdict::Vacuous,
    };
    Ok(Outcome {
        inputs: format!("pieces={grid} eta={eta:.6} X={x}"),
        lhs: r.lhs,
        rhs: r.rhs,
        ratio: r.lhs / r.rhs,
        tol: 1.0,
        verdict,
        notes: vec![format!("premise gap {:.3e}", r.premise_gap)],
    })
}

fn run_kind(kind: &CheckKind, grid: usize, rng: &mut ChaCha8Rng, baselines: &Baselines) -> Result<Outcome, HarnessError> {
    let points = grid.min(IDENTITY_POINTS);
    match *kind {
        CheckKind::Inverse { map, m } => {
            let map = by_name(map)?;
            verify_inverse_identity(&map, m, points, identity_tol(map.dim(), m))
        }
        CheckKind::Composition { f, g, m } => {
            let (f, g) = (by_name(f)?, by_name(g)?);
            verify_composition_identity(&f, &g, m, points, identity_tol(g.dim(), m))
        }
        CheckKind::Product { pair, m } => {
            let (u, v, domain, tol) = match pair {
                "const" => {
                    let c = |value| ScalarFn::Constant { dim: 2, value };
                    (c(2.0), c(-0.5), vec![(0.0, 1.0); 2], Tolerance::Relative(1e-6))
                }
                "sin_exp" => (ScalarFn::Sin, ScalarFn::Exp, vec![(-1.0, 2.0)], Tolerance::Relative(1e-6)),
                _ => {
                    let (p, q) = polynomial_pair();
                    (p, q, vec![(0.0, 1.0); 2], Tolerance::Absolute(1e-10))
                }
            };
            verify_product_identity(&u, &v, &domain, m, points, tol)
        }
        CheckKind::Gn { u, j, k, space: token } => {
            let (f, domain) = test_function(u);
            let baseline = baselines.gn.get(&format!("{u}.j{j}.k{k}.{token}")).copied();
            verify_gn_inequality(&f, &domain, j, k, &space(token), grid, baseline)
        }
        CheckKind::Theorem1 { map, space: token, m } => {
            let baseline = baselines.thm1.get(&format!("{map}.{token}")).copied();
            verify_theorem1_pipeline(&by_name(map)?, m, &space(token), grid, if m == 3 { baseline } else { None })
        }
        CheckKind::Hlp { dominated, space: token } => hlp_check(dominated, &space(token), grid, rng),
    }
}

/// Runs one check; numerical failures become a FAIL report, request errors
/// are returned.
pub fn run_check(spec: &CheckSpec, grid: usize, seed: u64, baselines: &Baselines) -> Result<CheckReport, HarnessError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(seed, &spec.id));
    let outcome = match run_kind(&spec.kind, grid, &mut rng, baselines) {
        Ok(o) => o,
        Err(e) if e.is_config() => return Err(e),
        Err(e) => Outcome::errored(spec.id.clone(), &e),
    };
    Ok(CheckReport { check_id: spec.id.clone(), outcome, runtime_ms: start.elapsed().as_secs_f64() * 1e3 })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum SuiteField {
    Name(String),
    Ids(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    suite: Option<SuiteField>,
    grid: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    timing: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// check ids, `*`-prefixes or `default`
    pub suite: Vec<String>,
    pub grid: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { suite: vec!["default".into()], grid: DEFAULT_GRID, seed: 0, out: None, timing: false }
    }
}

pub(crate) fn config_error(text: &str, e: &toml::de::Error) -> HarnessError {
    let offset = e.span().map_or(0, |s| s.start);
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    HarnessError::Config { line, column, message: e.message().to_string() }
}

impl SuiteConfig {
    /// TOML with optional keys `suite` (a name or a list of ids), `grid`,
    /// `seed`, `out` and `timing`.
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_error(text, &e))?;
        let d = Self::default();
        let suite = match raw.suite {
            None => d.suite,
            Some(SuiteField::Name(s)) => parse_suite_list(&s),
            Some(SuiteField::Ids(ids)) => ids,
        };
        let grid = raw.grid.unwrap_or(d.grid);
        if grid < 2 {
            return Err(HarnessError::Config { line: 0, column: 0, message: format!("grid must be at least 2, got {grid}") });
        }
        Ok(Self { suite, grid, seed: raw.seed.unwrap_or(d.seed), out: raw.out, timing: raw.timing.unwrap_or(false) })
    }
}

/// `default`, or comma-separated ids and prefixes; blank means nothing.
pub fn parse_suite_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(String::from).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<CheckReport>,
    /// 0 when nothing failed, 1 otherwise
    pub exit_code: i32,
}

/// Selects, runs in parallel, merges by check id and writes `reports.csv`
/// and `reports.json` when an output directory is configured.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutcome, HarnessError> {
    let checks = select(&config.suite)?;
    let baselines = Baselines::shipped();
    let mut reports = checks
        .par_iter()
        .map(|c| run_check(c, config.grid, config.seed, &baselines))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    reports.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    if let Some(dir) = &config.out {
        write_reports(dir, &reports, config.timing)?;
    }
    let exit_code = if reports.iter().all(CheckReport::passed) { 0 } else { 1 };
    Ok(SuiteOutcome { reports, exit_code })
}
