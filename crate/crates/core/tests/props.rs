//! Property suites: printer/parser round trip, piecewise totality,
//! purity of evaluation, and case consistency of the bound function.

use proptest::prelude::*;
use recbound::bounds::{d_r, CaseTag, USolution};
use recbound::exprfn::{parse_expr, BinOp, Expr, Func1, Func2};
use recbound::recspec::{preset, PRESET_NAMES};

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => (0u32..1000).prop_map(|n| Expr::Num(f64::from(n))),
        2 => (0.0f64..1e9).prop_map(Expr::Num),
        2 => (0.0f64..1.0).prop_map(Expr::Num),
        3 => Just(Expr::Var),
    ];
    leaf.prop_recursive(5, 48, 3, |inner| {
        let bin_op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow),
        ];
        let f1 = prop_oneof![
            Just(Func1::Ln),
            Just(Func1::Log2),
            Just(Func1::Ceil),
            Just(Func1::Floor),
            Just(Func1::Sqrt),
        ];
        let f2 = prop_oneof![Just(Func2::Log), Just(Func2::Max), Just(Func2::Min)];
        prop_oneof![
            (bin_op, inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (f1, inner.clone()).prop_map(|(f, e)| Expr::Call1(f, Box::new(e))),
            (f2, inner.clone(), inner)
                .prop_map(|(f, a, b)| Expr::Call2(f, Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_identity(e in arb_expr()) {
        let printed = e.to_string();
        let back = parse_expr(&printed)
            .unwrap_or_else(|err| panic!("printed `{printed}` failed to parse: {err}"));
        prop_assert_eq!(back, e, "printed form: {}", printed);
    }

    #[test]
    fn d_r_case_consistency(
        idx in 0usize..PRESET_NAMES.len(),
        x in 0.0f64..1e4,
        r in -2.0f64..4000.0,
    ) {
        let spec = preset(PRESET_NAMES[idx]).unwrap();
        let b = d_r(&spec, r, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.bound), "bound {} out of range", b.bound);

        // Recompute the case from the definition.
        let u = USolution::new(&spec);
        let expected = if r <= spec.u_base {
            CaseTag::RLeUd
        } else if x <= spec.terminal_d {
            CaseTag::BelowD
        } else if u.eval(x).unwrap() >= r {
            CaseTag::UGeR
        } else {
            CaseTag::General
        };
        prop_assert_eq!(b.case, expected);
        match expected {
            CaseTag::RLeUd | CaseTag::UGeR => prop_assert_eq!(b.bound, 1.0),
            CaseTag::BelowD => prop_assert_eq!(b.bound, 0.0),
            _ => {}
        }
    }
}

proptest! {
    #[test]
    fn preset_functions_total_and_pure(
        idx in 0usize..PRESET_NAMES.len(),
        x in 0.0f64..1e6,
    ) {
        let spec = preset(PRESET_NAMES[idx]).unwrap();
        let fns = [
            Some(&spec.toll),
            Some(&spec.shrink),
            spec.g1.as_ref(),
            spec.g2.as_ref(),
            spec.u.as_ref(),
        ];
        for f in fns.into_iter().flatten() {
            let v1 = f.eval(x).unwrap();
            let v2 = f.eval(x).unwrap();
            prop_assert!(v1.is_finite());
            prop_assert_eq!(v1.to_bits(), v2.to_bits(), "eval not bit-stable");
        }
    }
}
