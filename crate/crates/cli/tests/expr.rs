use bernfrac_cli::expr::{parse_expr, BinOp, Expr, ExprKind, Func, Var};
use bernfrac_core::special::gamma;
use proptest::prelude::*;

// Reference semantics written out separately from `Expr::eval`.
fn naive(e: &Expr, t: f64, x: f64) -> Option<f64> {
    let v = match &e.kind {
        ExprKind::Num(v) => *v,
        ExprKind::Var(Var::T) => t,
        ExprKind::Var(Var::X) => x,
        ExprKind::Neg(a) => -naive(a, t, x)?,
        ExprKind::Bin(op, a, b) => {
            let a = naive(a, t, x)?;
            let b = naive(b, t, x)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return None;
                    }
                    a / b
                }
                BinOp::Pow => a.powf(b),
            }
        }
        ExprKind::Call(f, args) => {
            let a = naive(&args[0], t, x)?;
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Ln => {
                    if a <= 0.0 {
                        return None;
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return None;
                    }
                    a.sqrt()
                }
                Func::Abs => a.abs(),
                Func::Pow => a.powf(naive(&args[1], t, x)?),
                Func::Gamma => gamma(a).ok()?,
            }
        }
    };
    v.is_finite().then_some(v)
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0..10.0f64).prop_map(Expr::num),
        (0u32..1000).prop_map(|k| Expr::num(k as f64 / 8.0)),
        Just(Expr::var(Var::T)),
        Just(Expr::var(Var::X)),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow),
        ];
        prop_oneof![
            inner.clone().prop_map(Expr::negate),
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            (0usize..8, inner.clone(), inner).prop_map(|(k, a, b)| {
                let f = Func::ALL[k];
                let args = if f.arity() == 2 { vec![a, b] } else { vec![a] };
                Expr::call(f, args)
            }),
        ]
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in arb_expr()) {
        let printed = e.to_string();
        let back = parse_expr(&printed).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", printed);
        prop_assert_eq!(back.to_string(), printed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn printed_form_evaluates_like_the_tree(e in arb_expr(), t in 0.0..1.0f64, x in -2.0..2.0f64) {
        let direct = naive(&e, t, x);
        let reparsed = parse_expr(&e.to_string()).unwrap().eval(t, x).ok();
        match (direct, reparsed) {
            (Some(a), Some(b)) => prop_assert!(close(a, b), "{} at ({t}, {x}): {a} vs {b}", e),
            (None, None) => {}
            other => prop_assert!(false, "{} at ({t}, {x}): {other:?}", e),
        }
    }
}

#[test]
fn unary_minus_is_looser_than_power() {
    let e = parse_expr("-t^2").unwrap();
    let mut rng = 0x2545f4914f6cdd1du64;
    for _ in 0..100 {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        let t = (rng >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0;
        assert_eq!(e.eval(t, 0.0).unwrap(), -(t * t));
        assert_eq!(Some(-(t * t)), naive(&e, t, 0.0));
    }
}

#[test]
fn forcing_expressions() {
    let e = parse_expr("0.8*t^3").unwrap();
    assert!((e.eval(0.5, 0.0).unwrap() - 0.1).abs() < 1e-15);
    // forcing of the polynomial test problem entered as text
    let src = "120/gamma(6-1.5)*t^(5-1.5) - 3*24/gamma(5-1.5)*t^(4-1.5) + 2*6/gamma(4-1.5)*t^(3-1.5) + (t^5-3*t^4+2*t^3)^2";
    let e = parse_expr(src).unwrap();
    let lib = bernfrac_core::oracles::poly_fode_forcing(1.0, 1.5, 0.5).unwrap();
    assert!(
        (e.eval(0.5, 0.0).unwrap() - lib).abs() < 1e-13,
        "{} vs {lib}",
        e.eval(0.5, 0.0).unwrap()
    );
}
