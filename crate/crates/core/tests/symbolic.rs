use bilip::symbolic::univariate::{self, Var};
use bilip::symbolic::{
    composition_by_differentiation, differentiate_expansion, expand_composition, expand_inverse, expand_product,
    holder_exponents, reciprocal_sum, DerivativeExpansion, Expander, ExpansionKind, Factor, FactorSymbol,
    InverseMode, TensorExpr, TensorTerm,
};
use num_rational::Rational64;

fn comp(c: i64, outer: u32, inner: &[u32]) -> TensorTerm {
    TensorTerm::new(
        c,
        TensorExpr::new(
            None,
            Some(FactorSymbol::f_composed(outer)),
            inner.iter().map(|&k| FactorSymbol::g(k).into()).collect(),
        ),
    )
}

/// Stirling numbers of the second kind by their recurrence.
fn stirling2(n: u32, k: u32) -> i64 {
    match (n, k) {
        (0, 0) => 1,
        (_, 0) | (0, _) => 0,
        _ => i64::from(k) * stirling2(n - 1, k) + stirling2(n - 1, k - 1),
    }
}

#[test]
fn composition_low_orders_match_written_formulas() {
    assert_eq!(expand_composition(1).unwrap().terms, vec![comp(1, 1, &[1])]);
    assert_eq!(expand_composition(2).unwrap().terms, vec![comp(1, 2, &[1, 1]), comp(1, 1, &[2])]);
    assert_eq!(
        expand_composition(3).unwrap().terms,
        vec![comp(1, 3, &[1, 1, 1]), comp(1, 2, &[2, 1]), comp(2, 2, &[1, 2]), comp(1, 1, &[3])]
    );
}

#[test]
fn composition_k_sums_and_stirling() {
    for m in 1..=8 {
        let e = expand_composition(m).unwrap();
        e.validate().unwrap();
        for t in &e.terms {
            assert_eq!(t.expr.inner_orders().iter().sum::<u32>(), m);
        }
    }
    for m in 1..=6 {
        let e = expand_composition(m).unwrap();
        let oracle = univariate::composition_oracle(m).unwrap();
        for k in 1..=m {
            let ours: i64 = e
                .terms
                .iter()
                .filter(|t| t.outer().unwrap().order == k)
                .map(|t| t.coefficient)
                .sum();
            assert_eq!(ours, oracle.coefficient_sum_with(Var::F(k)), "m={m} k={k}");
            assert_eq!(ours, stirling2(m, k), "m={m} k={k}");
        }
    }
}

#[test]
fn composition_two_routes_agree() {
    let x = Expander::default();
    for m in 1..=6 {
        assert_eq!(composition_by_differentiation(m, &x).unwrap(), expand_composition(m).unwrap(), "m={m}");
    }
    assert_eq!(differentiate_expansion(&expand_composition(1).unwrap()).unwrap(), expand_composition(2).unwrap());
}

#[test]
fn composition_projects_onto_one_dimensional_oracle() {
    for m in 1..=7 {
        let ours = univariate::project(&expand_composition(m).unwrap()).unwrap();
        assert_eq!(ours, univariate::composition_oracle(m).unwrap(), "m={m}");
    }
}

#[test]
fn inverse_seed() {
    for mode in [InverseMode::Unsubstituted, InverseMode::Substituted] {
        let e = expand_inverse(2, mode).unwrap();
        assert_eq!(
            e.terms,
            vec![TensorTerm::new(
                -1,
                TensorExpr::new(
                    Some(FactorSymbol::finv(1)),
                    Some(FactorSymbol::f_composed(2)),
                    vec![FactorSymbol::finv(1).into(), FactorSymbol::finv(1).into()]
                )
            )]
        );
    }
}

#[test]
fn unsubstituted_inverse_term_shape() {
    for m in 2..=8 {
        let e = expand_inverse(m, InverseMode::Unsubstituted).unwrap();
        e.validate().unwrap();
        for t in &e.terms {
            let lead = t.leading().unwrap().order;
            let outer = t.outer().unwrap().order;
            let inner: u32 = t.expr.inner_orders().iter().sum();
            assert_eq!(lead + inner, m + 1);
            assert!(outer >= 2);
            assert!(lead < m || m == 2);
            assert!(t.inner().iter().all(|f| f.arity() < m));
        }
    }
    // m = 3 by hand: differentiate -Df⁻¹·D²f·(Df⁻¹⊗Df⁻¹) once
    let e3 = expand_inverse(3, InverseMode::Unsubstituted).unwrap();
    assert_eq!(e3.terms.len(), 4);
    assert!(e3.terms.iter().all(|t| t.coefficient == -1));
}

#[test]
fn substituted_inverse_matches_one_dimensional_oracle() {
    for m in 2..=6 {
        let e = expand_inverse(m, InverseMode::Substituted).unwrap();
        e.validate().unwrap();
        let ours = univariate::project(&e).unwrap();
        assert_eq!(ours, univariate::inverse_oracle(m).unwrap(), "m={m}");
    }
}

#[test]
fn inverse_orders_three_and_four_frozen() {
    // (f⁻¹)''' = 3 F2² F1⁻⁵ − F3 F1⁻⁴
    // (f⁻¹)'''' = −15 F2³ F1⁻⁷ + 10 F2 F3 F1⁻⁶ − F4 F1⁻⁵
    let p3 = univariate::project(&expand_inverse(3, InverseMode::Substituted).unwrap()).unwrap();
    let p4 = univariate::project(&expand_inverse(4, InverseMode::Substituted).unwrap()).unwrap();
    let eval = |p: &univariate::LaurentPoly, f: [f64; 4]| p.evaluate(|v| if let Var::F(k) = v { f[k as usize - 1] } else { 0.0 });
    let f: [f64; 4] = [1.3, -0.7, 0.4, 2.1];
    let closed3 = 3.0 * f[1].powi(2) / f[0].powi(5) - f[2] / f[0].powi(4);
    let closed4 = -15.0 * f[1].powi(3) / f[0].powi(7) + 10.0 * f[1] * f[2] / f[0].powi(6) - f[3] / f[0].powi(5);
    assert!((eval(&p3, f) - closed3).abs() < 1e-12);
    assert!((eval(&p4, f) - closed4).abs() < 1e-12);
}

#[test]
fn differentiation_continues_inverse_expansions() {
    for mode in [InverseMode::Unsubstituted, InverseMode::Substituted] {
        let e2 = expand_inverse(2, mode).unwrap();
        assert_eq!(differentiate_expansion(&e2).unwrap(), expand_inverse(3, mode).unwrap());
    }
}

#[test]
fn product_rows_sum_to_powers_of_two() {
    for m in 1..=8 {
        let e = expand_product(m).unwrap();
        e.validate().unwrap();
        assert_eq!(e.terms.len() as u32, m + 1);
        assert_eq!(e.terms.iter().map(|t| t.coefficient).sum::<i64>(), 1 << m);
        assert_eq!(univariate::project(&e).unwrap(), univariate::product_oracle(m).unwrap());
    }
    assert_eq!(differentiate_expansion(&expand_product(3).unwrap()).unwrap(), expand_product(4).unwrap());
}

#[test]
fn canonical_form_is_idempotent() {
    for m in 1..=5 {
        for e in [
            expand_composition(m).unwrap(),
            expand_product(m).unwrap(),
            expand_inverse(m.max(2), InverseMode::Substituted).unwrap(),
        ] {
            assert_eq!(e.canonicalize().unwrap(), e);
        }
    }
}

#[test]
fn holder_exponents_sum_to_one_on_every_term() {
    for m in 2..=8 {
        let e = expand_inverse(m, InverseMode::Unsubstituted).unwrap();
        for t in &e.terms {
            let ex = holder_exponents(ExpansionKind::Inverse, t, m).unwrap();
            assert_eq!(reciprocal_sum(&ex), Rational64::from_integer(1), "{t}");
        }
        let c = expand_composition(m).unwrap();
        for t in &c.terms {
            let ex = holder_exponents(ExpansionKind::Composition, t, m).unwrap();
            assert_eq!(reciprocal_sum(&ex), Rational64::from_integer(1), "{t}");
        }
        let p = expand_product(m).unwrap();
        for t in &p.terms {
            let ex = holder_exponents(ExpansionKind::Product, t, m).unwrap();
            assert_eq!(reciprocal_sum(&ex), Rational64::from_integer(1), "{t}");
        }
    }
}

#[test]
fn json_round_trip_and_shape() {
    for e in [
        expand_composition(3).unwrap(),
        expand_inverse(4, InverseMode::Unsubstituted).unwrap(),
        expand_inverse(4, InverseMode::Substituted).unwrap(),
        expand_product(3).unwrap(),
    ] {
        let back = DerivativeExpansion::from_json(&e.to_json()).unwrap();
        assert_eq!(back, e);
    }
    let v: serde_json::Value = serde_json::from_str(&expand_composition(1).unwrap().to_json()).unwrap();
    assert_eq!(
        v,
        serde_json::json!({
            "kind": "composition",
            "order": 1,
            "terms": [{
                "coeff": 1,
                "outer": {"fn": "F", "order": 1, "at": "composed"},
                "inner": [{"fn": "G", "order": 1, "at": "identity"}]
            }]
        })
    );
}

#[test]
fn json_rejects_invalid_content() {
    let bad = r#"{"kind":"composition","order":3,"terms":[{"coeff":1,"outer":{"fn":"F","order":1,"at":"composed"},"inner":[{"fn":"G","order":2,"at":"identity"}]}]}"#;
    assert!(DerivativeExpansion::from_json(bad).is_err());
    assert!(DerivativeExpansion::from_json("{").is_err());
}

#[test]
fn nested_factors_only_in_substituted_mode() {
    let sub = expand_inverse(4, InverseMode::Substituted).unwrap();
    assert!(sub.terms.iter().any(|t| t.inner().iter().any(|f| matches!(f, Factor::Nested(_)))));
    let unsub = expand_inverse(4, InverseMode::Unsubstituted).unwrap();
    assert!(unsub.terms.iter().all(|t| t.expr.is_flat()));
}

#[test]
fn maximal_order_is_reachable() {
    let started = std::time::Instant::now();
    let e = expand_inverse(8, InverseMode::Substituted).unwrap();
    assert_eq!(univariate::project(&e).unwrap(), univariate::inverse_oracle(8).unwrap());
    assert!(started.elapsed().as_secs() < 30);
}
