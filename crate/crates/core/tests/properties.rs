//! Structural identities checked on random inputs and on every fixture.

mod common;

use characteristica::corpus::load_corpus;
use characteristica::expr::{equiv, parse_expr, Func, Rational};
use characteristica::factor::{factor_principal, FirstOrderOp};
use characteristica::pde::{lambdas, Kind};
use characteristica::{Expr, Oracle, VarPair};
use common::*;
use proptest::prelude::*;

/// Random expression in x, y that stays finite on [0.5, 1.5]^2.
fn tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4i64..=4).prop_map(Expr::int),
        (1i64..=4, 2i64..=5).prop_map(|(n, d)| Expr::frac(n, d)),
        Just(Expr::var("x")),
        Just(Expr::var("y")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 1i64..=3).prop_map(|(a, n)| a.powi(n)),
            (inner.clone(), prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Tanh)])
                .prop_map(|(a, f)| Expr::apply(f, a)),
            // denominators and logs kept positive
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (Expr::int(3) + b.powi(2))),
            inner.clone().prop_map(|a| Expr::ln(Expr::int(2) + a.powi(2))),
            inner.prop_map(|a| Expr::exp(Expr::sin(a))),
        ]
    })
}

fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| Rational::new(n, d))
}

/// Constant-coefficient hyperbolic equation with roots `l1 != l2`.
fn hyperbolic_constant() -> impl Strategy<Value = (Rational, Rational, Rational)> {
    (rational(), rational(), prop_oneof![Just(1i64), Just(2), Just(-3)])
        .prop_filter("distinct roots", |(l1, l2, _)| l1 != l2)
        .prop_map(|(l1, l2, a)| (Rational::from_integer(a), l1, l2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simplify_preserves_values(e in tree()) {
        let r = box_region(0.5, 1.5);
        prop_assert!(equiv(&e, &e.simplify(), &r, &Oracle::default()).unwrap(), "{}", e.pretty());
    }

    #[test]
    fn printed_text_parses_back(e in tree()) {
        let r = box_region(0.5, 1.5);
        let back = parse_expr(&e.pretty(), &VarPair::default()).unwrap();
        prop_assert!(equiv(&e, &back, &r, &Oracle::default()).unwrap(), "{}", e.pretty());
    }

    #[test]
    fn derivative_matches_central_difference(e in tree(), px in 0.6f64..1.4, py in 0.6f64..1.4) {
        let d = e.diff("x").simplify();
        let f = |x: f64| e.eval_at(["x", "y"], x, py);
        let h = 1e-5;
        if let (Ok(sym), Ok(a), Ok(b)) = (d.eval_at(["x", "y"], px, py), f(px + h), f(px - h)) {
            let fd: f64 = (a - b) / (2.0 * h);
            prop_assert!((sym - fd).abs() <= 1e-5 * (1.0 + sym.abs()), "{} at ({px}, {py}): {sym} vs {fd}", e.pretty());
        }
    }

    #[test]
    fn constant_roots_and_vieta((a, l1, l2) in hyperbolic_constant()) {
        let p = constant_pde(&a, &l1, &l2);
        let r = box_region(0.5, 1.5);
        let cfg = Oracle::default();
        prop_assert_eq!(lambdas(&p, &r, &cfg).unwrap().kind, Kind::Hyperbolic);
        prop_assert_eq!(roots_and_vieta(&p, &r, &cfg), Ok(()));
    }

    #[test]
    fn chain_rule_lead_is_minus_four_delta_over_a((a, l1, l2) in hyperbolic_constant()) {
        let p = constant_pde(&a, &l1, &l2);
        let v = VarPair::default();
        let phi = (v.ye() + Expr::rational(l1) * v.xe()).simplify();
        let psi = (v.ye() + Expr::rational(l2) * v.xe()).simplify();
        prop_assert_eq!(chain_rule_lead(&p, &phi, &psi, &box_region(0.5, 1.5), &Oracle::default()), Ok(()));
    }

    #[test]
    fn commutator_on_constant_coefficients((a, l1, l2) in hyperbolic_constant()) {
        let p = constant_pde(&a, &l1, &l2);
        let (r, cfg) = (box_region(0.5, 1.5), Oracle::default());
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        prop_assert_eq!(commutator_identity(&p, &pair, &r, &cfg), Ok(()));
    }

    #[test]
    fn invariants_compose(k in 1i64..4, shift in -2i64..=2) {
        // any function of an invariant is again an invariant
        let cfg = Oracle::default();
        for fx in load_corpus().unwrap() {
            let Some(phi) = fx.phi_expr().unwrap() else { continue };
            let r = fx.sample_region::<f64>().unwrap();
            let p = fx.parse_pde().unwrap();
            let Ok(pair) = factor_principal(&p, &r, &cfg) else { continue };
            let g = Expr::sin(Expr::int(k) * phi.clone() + Expr::int(shift));
            prop_assert!(zero(&pair.plus.apply(&g), &r, &cfg), "{}", fx.id);
        }
    }
}

#[test]
fn principal_on_plus_invariant_is_a_times_residue() {
    let cfg = Oracle::default();
    let fixtures = hyperbolic_x_fixtures();
    assert!(fixtures.len() >= 5);
    for (fx, p, r, pair) in fixtures {
        let phi = fx.phi_expr().unwrap().unwrap();
        assert_eq!(principal_on_invariant(&p, &pair, &phi, &r, &cfg), Ok(()), "{}", fx.id);
        assert_eq!(roots_and_vieta(&p, &r, &cfg), Ok(()), "{}", fx.id);
    }
}

#[test]
fn commutator_is_a_multiple_of_d_y() {
    let cfg = Oracle::default();
    for (fx, p, r, pair) in hyperbolic_x_fixtures() {
        assert_eq!(commutator_identity(&p, &pair, &r, &cfg), Ok(()), "{}", fx.id);
    }
}

#[test]
fn factor_product_reproduces_principal_on_probes() {
    let cfg = Oracle::default();
    for fx in load_corpus().unwrap() {
        let p = fx.parse_pde().unwrap();
        let r = fx.sample_region().unwrap();
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        assert_eq!(factor_identity(&p, &pair, &r, &cfg), Ok(()), "{}", fx.id);
    }
}

#[test]
fn jacobians_of_fixture_maps_are_reciprocal() {
    let cfg = Oracle::default();
    let mut seen = 0;
    for fx in load_corpus().unwrap() {
        let Some(map) = fixture_map(&fx) else { continue };
        let r = fx.sample_region().unwrap();
        assert_eq!(jacobian_reciprocity(&map, &r, &cfg), Ok(()), "{}", fx.id);
        seen += 1;
    }
    assert!(seen >= 8);
}

#[test]
fn monic_operator_annihilates_its_own_level_sets() {
    let v = VarPair::default();
    let r = box_region(0.5, 1.5);
    let cfg = Oracle::default();
    let op = FirstOrderOp::monic(v.clone(), parse_expr("-y/x", &v).unwrap());
    assert!(zero(&op.apply(&parse_expr("cos(y/x) + (y/x)^3", &v).unwrap()), &r, &cfg));
}
