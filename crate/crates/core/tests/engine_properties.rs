mod common;

use derivkit::calculus::{antiderivative, differentiate, table_rules};
use derivkit::expr::{canonicalize, parse_equation, parse_latex, to_latex, Equation, Expr, FuncKind, SymbolTable};
use derivkit::gen::random_expr;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{bind, ridders, value};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Expr::sym),
        (-4i64..5, 1i64..4).prop_map(|(n, d)| Expr::rational(n, d)),
    ]
}

/// Trees built straight from the variants, so they are usually not
/// canonical.
fn raw_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 40, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(Expr::Add),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Expr::Mul),
            (inner.clone(), -2i64..4).prop_map(|(b, n)| Expr::Pow(Box::new(b), Box::new(Expr::int(n)))),
            inner.clone().prop_map(|a| Expr::Func(FuncKind::Sin, Box::new(a))),
            inner.clone().prop_map(|a| Expr::Func(FuncKind::Cos, Box::new(a))),
            inner.clone().prop_map(|a| Expr::Func(FuncKind::Exp, Box::new(a))),
            inner.prop_map(|a| Expr::Func(FuncKind::Log, Box::new(a))),
        ]
    })
}

/// Sixteen positive bindings of x, y, z.
fn bindings() -> Vec<std::collections::HashMap<String, f64>> {
    (0..16)
        .map(|i| {
            let t = i as f64;
            bind(&[
                ("x", 0.3 + 0.137 * t),
                ("y", 2.4 - 0.113 * t),
                ("z", 0.9 + 0.05 * (t * 1.7).sin()),
            ])
        })
        .collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn canonicalize_is_idempotent(e in raw_expr()) {
        let c = canonicalize(&e);
        prop_assert_eq!(canonicalize(&c), c);
    }

    #[test]
    fn canonicalize_preserves_value(e in raw_expr()) {
        let c = canonicalize(&e);
        for b in bindings() {
            if let (Some(x), Some(y)) = (value(&e, &b), value(&c, &b)) {
                if x.abs() < 1e6 {
                    prop_assert!(close(x, y, 1e-9), "{e} -> {c}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn latex_round_trip(e in raw_expr()) {
        let table = SymbolTable::default();
        let c = canonicalize(&e);
        let s = to_latex(&c, &table).unwrap();
        prop_assert_eq!(parse_latex(&s, &table).unwrap(), c, "{}", s);
    }

    #[test]
    fn operand_order_does_not_matter(mut terms in prop::collection::vec(raw_expr(), 2..5), k in 0usize..24) {
        let sum = Expr::add(terms.clone());
        let prod = Expr::mul(terms.clone());
        let n = terms.len();
        terms.rotate_left(k % n);
        terms.swap(0, (k / n) % n);
        prop_assert_eq!(Expr::add(terms.clone()), sum);
        prop_assert_eq!(Expr::mul(terms), prod);
    }

    #[test]
    fn identity_substitution(e in raw_expr(), t in raw_expr()) {
        let c = canonicalize(&e);
        let t = canonicalize(&t);
        prop_assert_eq!(c.substitute(&t, &t), c);
    }

    #[test]
    fn derivative_matches_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&["x", "y"], 3, &mut rng);
        let d = differentiate(&e, "x");
        for i in 0..8 {
            let x0 = 0.4 + 0.2 * i as f64;
            let Some(want) = value(&d, &bind(&[("x", x0), ("y", 1.3)])) else { continue };
            let f = |x: f64| value(&e, &bind(&[("x", x), ("y", 1.3)]));
            let Some((got, err)) = ridders(f, x0, 0.05) else { continue };
            // Points too close to a singularity for the difference quotient
            // to resolve are skipped.
            if err > 1e-8 * want.abs().max(1.0) {
                continue;
            }
            prop_assert!(close(got, want, 1e-6), "d/dx {e} = {d} at x={x0}: {got} vs {want}");
        }
    }

    #[test]
    fn integration_inverts_differentiation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&["x", "y"], 2, &mut rng);
        if let Some(f) = antiderivative(&e, "x") {
            let back = differentiate(&f, "x");
            for b in bindings() {
                if let (Some(u), Some(v)) = (value(&back, &b), value(&e, &b)) {
                    prop_assert!(close(u, v, 1e-9), "{e}: {back}");
                }
            }
        }
    }
}

#[test]
fn table_rules_are_exact() {
    for (name, e) in table_rules("x", "k") {
        let f = antiderivative(&e, "x").expect(name);
        assert_eq!(differentiate(&f, "x"), e, "{name}");
    }
}

#[test]
fn worked_examples() {
    let t = SymbolTable::default();
    let x = Expr::sym("x");
    assert_eq!(Expr::add([x.clone(), x.clone()]), Expr::mul([Expr::int(2), x.clone()]));
    assert_eq!(Expr::add([x.clone(), Expr::zero()]), x);
    let e = Expr::add([Expr::mul([Expr::int(2), x.clone()]), Expr::pow(x.clone(), Expr::int(2))]);
    assert_eq!(e.substitute(&x, &Expr::int(3)), Expr::int(15));
    let v = value(
        &parse_latex("\\frac{J^{2}}{2} + J v + f", &t).unwrap(),
        &bind(&[("J", 2.0), ("v", 3.0), ("f", 1.0)]),
    );
    assert_eq!(v, Some(9.0));
    let eq: Equation = parse_equation("\\frac{1}{P_{e}} = x", &t).unwrap();
    assert_eq!(eq.lhs, Expr::pow(Expr::sym("P_{e}"), Expr::int(-1)));
}
