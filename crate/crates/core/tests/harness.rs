use bilip::harness::{
    inverse_context, run_suite, select, to_csv, verify_gn_inequality, verify_inverse_identity, verify_theorem1_pipeline,
    Baselines, HarnessError, SuiteConfig, Tolerance, Verdict,
};
use bilip::maps::{by_name, Polynomial, ScalarFn};
use bilip::multilinear::evaluate_expansion;
use bilip::spaces::SpaceSpec;
use bilip::symbolic::{expand_inverse, InverseMode};

fn config(ids: &[&str], seed: u64) -> SuiteConfig {
    SuiteConfig { suite: ids.iter().map(|s| s.to_string()).collect(), grid: 16, seed, ..SuiteConfig::default() }
}

#[test]
fn empty_selection_is_empty_and_passes() {
    let out = run_suite(&config(&[], 0)).unwrap();
    assert!(out.reports.is_empty());
    assert_eq!(out.exit_code, 0);
}

#[test]
fn unknown_check_is_a_config_error() {
    let err = run_suite(&config(&["inv.NOPE.m2"], 0)).unwrap_err();
    assert!(matches!(err, HarnessError::UnknownCheck(_)));
    assert!(err.is_config());
}

#[test]
fn same_seed_gives_identical_csv() {
    let ids = ["hlp.*", "thm1.SINE_1D.L2.*", "inv.SHEAR_2D.m3"];
    let a = to_csv(&run_suite(&config(&ids, 11)).unwrap().reports, false).unwrap();
    let b = to_csv(&run_suite(&config(&ids, 11)).unwrap().reports, false).unwrap();
    assert_eq!(a, b);
    let c = to_csv(&run_suite(&config(&ids, 12)).unwrap().reports, false).unwrap();
    assert_ne!(a, c, "the seed drives the randomized checks");
}

#[test]
fn conditional_checks_separate_vacuous_from_pass() {
    let out = run_suite(&config(&["hlp.*"], 3)).unwrap();
    for r in &out.reports {
        let expected = if r.check_id.contains("undominated") { Verdict::Vacuous } else { Verdict::Pass };
        assert_eq!(r.outcome.verdict, expected, "{}", r.check_id);
    }
    assert_eq!(out.exit_code, 0);
}

#[test]
fn config_file_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("suite = [\"prod.*\"]\ngrid = 8\nseed = 5\nout = {:?}\n", dir.path().join("r"));
    let cfg = SuiteConfig::from_toml(&text).unwrap();
    let out = run_suite(&cfg).unwrap();
    assert_eq!(out.reports.len(), select(&["prod.*".into()]).unwrap().len());
    let csv = std::fs::read_to_string(dir.path().join("r/reports.csv")).unwrap();
    assert!(csv.starts_with("check_id,lhs,rhs,ratio,tol,verdict,runtime_ms\n"));
    assert_eq!(csv.lines().count(), out.reports.len() + 1);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r/reports.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), out.reports.len());
}

#[test]
fn shear_third_order_within_difference_model() {
    let o = verify_inverse_identity(&by_name("SHEAR_2D").unwrap(), 3, 8, Tolerance::Relative(1e-3)).unwrap();
    assert_eq!(o.verdict, Verdict::Pass);
    assert!(o.ratio <= 1e-3);
}

#[test]
fn halving_the_step_does_not_worsen_the_discrepancy() {
    // truncation ~h⁴ dominates at these steps; round-off tol/h³ stays below 1e-5
    let map = by_name("SHEAR_2D").unwrap();
    let expansion = expand_inverse(3, InverseMode::Unsubstituted).unwrap();
    let y = map.eval(&[1.2, 1.9]);
    let x = map.invert(&y, 1e-12).unwrap();
    let exact = evaluate_expansion(&expansion, &inverse_context(&map, &x, 3).unwrap()).unwrap().symmetrize();
    let err = |h: f64| map.fd_inverse_jet(3, &y, h, 1e-12).unwrap().max_abs_diff(&exact).unwrap();
    let mut prev = err(4e-2);
    for h in [2e-2, 1e-2, 5e-3] {
        let e = err(h);
        assert!(e <= prev + 1e-12 / h.powi(3) * 8.0, "h={h}: {e:e} after {prev:e}");
        prev = e;
    }
}

#[test]
fn gn_ratio_is_scale_invariant() {
    let baselines = Baselines::shipped();
    let b = baselines.gn("poly2d.j1.k2.L2").unwrap();
    let terms = |s: f64| [(vec![2, 1], s), (vec![1, 3], -2.0 * s), (vec![0, 1], s), (vec![0, 0], 3.0 * s)];
    let ratio = |s: f64| {
        let u = ScalarFn::Polynomial(Polynomial::new(2, terms(s)).unwrap());
        verify_gn_inequality(&u, &[(0.0, 1.0); 2], 1, 2, &SpaceSpec::Lebesgue(2.0), 16, Some(b)).unwrap().ratio
    };
    let (r1, r7) = (ratio(1.0), ratio(-7.0));
    assert!((r1 - r7).abs() <= 1e-12 * r1, "{r1} vs {r7}");
}

#[test]
fn sine_gn_stable_under_refinement() {
    let b = Baselines::shipped().gn("sin.j1.k2.L2").unwrap();
    let dom = [(0.0, 2.0 * std::f64::consts::PI)];
    let o = verify_gn_inequality(&ScalarFn::Sin, &dom, 1, 2, &SpaceSpec::Lebesgue(2.0), 64, Some(b)).unwrap();
    assert_eq!(o.verdict, Verdict::Pass, "{o:?}");
}

#[test]
fn gate_skips_spaces_with_boyd_index_one() {
    let o = verify_theorem1_pipeline(&by_name("SINE_1D").unwrap(), 2, &SpaceSpec::Lebesgue(1.0), 16, None).unwrap();
    assert_eq!(o.verdict, Verdict::SkippedGate);
}

#[test]
fn sine_lorentz_second_order_bound() {
    let x: SpaceSpec = "Lorentz:2,2".parse().unwrap();
    let o = verify_theorem1_pipeline(&by_name("SINE_1D").unwrap(), 2, &x, 64, None).unwrap();
    assert_eq!(o.verdict, Verdict::Pass);
    assert!(o.lhs > 0.0 && o.lhs <= o.rhs);
}
