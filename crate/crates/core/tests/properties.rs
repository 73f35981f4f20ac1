use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use proptest::prelude::*;

use varlp::conditions::check_finite_measure;
use varlp::exact::ExactSum;
use varlp::experiments::any_cube_violates;
use varlp::expr::{BinOp, CmpOp, Cond, Func, Var};
use varlp::{
    luxemburg_norm, maximal_fast, maximal_oracle, modular, parse, ExponentField, Expr, GridDomain, GridFunction,
    Verdict,
};

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// `true` if `v` is a nearest double to `r` (ties to even).
fn is_nearest(v: f64, r: &BigRational) -> bool {
    let err = (rational(v) - r).abs();
    for n in [v.next_up(), v.next_down()] {
        if !n.is_finite() {
            continue;
        }
        let other = (rational(n) - r).abs();
        if other < err || (other == err && v.to_bits() & 1 == 1) {
            return false;
        }
    }
    true
}

fn finite_double() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        (-1e300..1e300f64),
        (-1e-300..1e-300f64),
        any::<u64>().prop_map(|b| f64::from_bits(b & 0x000f_ffff_ffff_ffff)),
        Just(0.1),
        Just(1.0),
    ]
}

proptest! {
    #[test]
    fn exact_sum_is_correctly_rounded(values in prop::collection::vec(finite_double(), 0..40)) {
        let got = ExactSum::from_values(values.iter().copied()).value();
        let total = values.iter().fold(BigRational::zero(), |acc, &v| acc + rational(v));
        prop_assert!(is_nearest(got, &total), "{got} for {total}");
    }

    #[test]
    fn exact_quotient_is_correctly_rounded(values in prop::collection::vec(finite_double(), 1..20), d in 1u64..100_000) {
        let got = ExactSum::from_values(values.iter().copied()).div_value(d);
        let total = values.iter().fold(BigRational::zero(), |acc, &v| acc + rational(v));
        let q = total / BigRational::from_integer(BigInt::from(d));
        prop_assert!(is_nearest(got, &q), "{got} for {q}");
    }

    #[test]
    fn exact_sum_ignores_order(mut values in prop::collection::vec(finite_double(), 0..30), seed in any::<u64>()) {
        let a = ExactSum::from_values(values.iter().copied());
        let n = values.len();
        if n > 1 {
            values.rotate_left((seed as usize) % n);
            values.swap(0, (seed as usize / 7) % n);
        }
        prop_assert_eq!(a, ExactSum::from_values(values));
    }
}

// Expression trees the parser can produce: non-negative literals, chi with
// ordered bounds, variadic min/max with at least two arguments.
fn literal() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..20u32).prop_map(f64::from),
        0.0..10.0f64,
        1e-7..1e-5f64,
        1e16..1e18f64
    ]
}

fn var() -> impl Strategy<Value = Var> {
    prop_oneof![Just(Var::X), Just(Var::X1), Just(Var::X2)]
}

fn expr_tree(piecewise: bool) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        literal().prop_map(Expr::Number),
        var().prop_map(Expr::Var),
        (-5.0..5.0f64, 0.01..5.0f64).prop_map(|(a, w)| Expr::Chi(a, a + w)),
    ];
    leaf.prop_recursive(4, 40, 4, move |inner| {
        let binop = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow)
        ];
        let unary = prop_oneof![
            Just(Func::Abs),
            Just(Func::Log),
            Just(Func::Exp),
            Just(Func::Sqrt),
            Just(Func::LogLog)
        ];
        let cmp = prop_oneof![
            Just(CmpOp::Lt),
            Just(CmpOp::Le),
            Just(CmpOp::Gt),
            Just(CmpOp::Ge),
            Just(CmpOp::Eq)
        ];
        let mut options = vec![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))).boxed(),
            (binop, inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expr::binary(op, a, b))
                .boxed(),
            (unary, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])).boxed(),
            (any::<bool>(), prop::collection::vec(inner.clone(), 2..4))
                .prop_map(|(min, args)| Expr::Call(if min { Func::Min } else { Func::Max }, args))
                .boxed(),
        ];
        if piecewise {
            let cond = (cmp, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Cond::Cmp(op, a, b));
            let cond = cond.prop_recursive(2, 4, 2, |c| {
                (any::<bool>(), c.clone(), c).prop_map(|(and, a, b)| {
                    if and {
                        Cond::And(Box::new(a), Box::new(b))
                    } else {
                        Cond::Or(Box::new(a), Box::new(b))
                    }
                })
            });
            options.push(
                (prop::collection::vec((cond, inner.clone()), 1..3), inner)
                    .prop_map(|(arms, other)| Expr::Piecewise(arms, Box::new(other)))
                    .boxed(),
            );
        }
        prop::strategy::Union::new(options)
    })
}

/// Postfix program for the reference evaluator.
#[derive(Debug)]
enum Op {
    Push(f64),
    Load(usize),
    Chi(f64, f64),
    Neg,
    Bin(BinOp),
    Unary(Func),
    Fold(Func, usize),
}

fn compile(e: &Expr, out: &mut Vec<Op>) {
    match e {
        Expr::Number(v) => out.push(Op::Push(*v)),
        Expr::Var(v) => out.push(Op::Load(v.axis())),
        Expr::Chi(a, b) => out.push(Op::Chi(*a, *b)),
        Expr::Neg(a) => {
            compile(a, out);
            out.push(Op::Neg);
        }
        Expr::Binary(op, a, b) => {
            compile(a, out);
            compile(b, out);
            out.push(Op::Bin(*op));
        }
        Expr::Call(f, args) => {
            for a in args {
                compile(a, out);
            }
            out.push(if f.is_variadic() {
                Op::Fold(*f, args.len())
            } else {
                Op::Unary(*f)
            });
        }
        Expr::Piecewise(..) => unreachable!("no piecewise in the reference"),
    }
}

/// Stack machine with the documented domain rules; `None` on a domain error.
fn run(program: &[Op], point: &[f64]) -> Option<f64> {
    let mut stack: Vec<f64> = Vec::new();
    for op in program {
        let v = match op {
            Op::Push(v) => *v,
            Op::Load(axis) => *point.get(*axis)?,
            Op::Chi(a, b) => {
                let x = point[0];
                if *a <= x && x <= *b {
                    1.0
                } else {
                    0.0
                }
            }
            Op::Neg => -stack.pop()?,
            Op::Bin(b) => {
                let y = stack.pop()?;
                let x = stack.pop()?;
                match b {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div if y == 0.0 => return None,
                    BinOp::Div => x / y,
                    BinOp::Pow if x < 0.0 && y.fract() != 0.0 => return None,
                    BinOp::Pow if x == 0.0 && y < 0.0 => return None,
                    BinOp::Pow => x.powf(y),
                }
            }
            Op::Unary(f) => {
                let x = stack.pop()?;
                match f {
                    Func::Abs => x.abs(),
                    Func::Exp => x.exp(),
                    Func::Log if x <= 0.0 => return None,
                    Func::Log => x.ln(),
                    Func::LogLog if x <= 1.0 => return None,
                    Func::LogLog => x.ln().ln(),
                    Func::Sqrt if x < 0.0 => return None,
                    Func::Sqrt => x.sqrt(),
                    _ => unreachable!(),
                }
            }
            Op::Fold(f, n) => {
                let args = stack.split_off(stack.len() - n);
                let mut acc = args[0];
                for &a in &args[1..] {
                    acc = if *f == Func::Min { acc.min(a) } else { acc.max(a) };
                }
                acc
            }
        };
        stack.push(v);
    }
    stack.pop()
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printing_round_trips(e in expr_tree(true)) {
        let text = e.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn eval_matches_stack_machine(e in expr_tree(false), x in -6.0..6.0f64, y in -6.0..6.0f64) {
        let mut program = Vec::new();
        compile(&e, &mut program);
        let reference = run(&program, &[x, y]);
        match (e.eval(&[x, y]), reference) {
            (Ok(a), Some(b)) => prop_assert!(same(a, b), "{e}: {a} vs {b}"),
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "{e}: {a:?} vs {b:?}"),
        }
    }
}

fn line(values: Vec<f64>) -> GridFunction {
    let dom = GridDomain::interval(0.0, values.len() as f64 * 0.5, 0.5).unwrap();
    GridFunction::new(&dom, values).unwrap()
}

fn nonneg(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![0.0..100.0f64, Just(0.0), Just(2.5)], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn maximal_dominates_and_matches_oracle(v in prop::collection::vec(-50.0..50.0f64, 1..80)) {
        let f = line(v);
        let m = maximal_fast(&f);
        prop_assert_eq!(&m, &maximal_oracle(&f));
        for (mf, fv) in m.mf.values().iter().zip(f.values()) {
            prop_assert!(*mf >= fv.abs());
        }
    }

    #[test]
    fn maximal_is_monotone(pair in (1usize..60).prop_flat_map(|n| (nonneg(n), nonneg(n)))) {
        let (a, extra) = pair;
        let b: Vec<f64> = a.iter().zip(&extra).map(|(x, e)| x + e).collect();
        let (ma, mb) = (maximal_fast(&line(a)), maximal_fast(&line(b)));
        for (x, y) in ma.mf.values().iter().zip(mb.mf.values()) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn maximal_is_sublinear_and_homogeneous(pair in (1usize..60).prop_flat_map(|n| (nonneg(n), nonneg(n))), k in -3i32..4) {
        let (a, b) = pair;
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (ma, mb, ms) = (maximal_fast(&line(a.clone())), maximal_fast(&line(b)), maximal_fast(&line(sum)));
        for ((s, x), y) in ms.mf.values().iter().zip(ma.mf.values()).zip(mb.mf.values()) {
            prop_assert!(*s <= (x + y) * (1.0 + 4.0 * f64::EPSILON));
        }
        let c = 2f64.powi(k);
        let scaled = maximal_fast(&line(a.iter().map(|x| c * x).collect()));
        for (s, x) in scaled.mf.values().iter().zip(ma.mf.values()) {
            prop_assert_eq!(*s, c * x);
        }
    }

    #[test]
    fn maximal_2d_matches_oracle(nx in 1usize..10, ny in 1usize..10, seed in any::<u64>()) {
        let dom = GridDomain::from_bounds(&[0.0, 0.0], &[nx as f64, ny as f64], 1.0).unwrap();
        let mut s = seed;
        let f = GridFunction::from_fn(&dom, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 40) % 5) as f64 * 0.75
        }).unwrap();
        prop_assert_eq!(maximal_fast(&f), maximal_oracle(&f));
    }

    #[test]
    fn cube_search_agrees_with_global_verdict(
        pair in (1usize..40).prop_flat_map(|n| (prop::collection::vec(1.1..4.0f64, n), prop::collection::vec(1.1..4.0f64, n)))
    ) {
        let (pv, qv) = pair;
        let dom = GridDomain::interval(0.0, pv.len() as f64, 1.0).unwrap();
        let p = ExponentField::new(GridFunction::new(&dom, pv).unwrap()).unwrap();
        let q = ExponentField::new(GridFunction::new(&dom, qv).unwrap()).unwrap();
        let global = check_finite_measure(&p, &q, &dom).unwrap().verdict == Verdict::Fails;
        prop_assert_eq!(any_cube_violates(&p, &q, &dom), global);
    }

    #[test]
    fn scaling_coherence(v in prop::collection::vec(0.01..10.0f64, 1..60), p_val in 1.0..6.0f64) {
        let f = line(v);
        let dom = f.domain().clone();
        let p = ExponentField::constant(&dom, p_val).unwrap();
        let two_f = f.scale(2.0).unwrap();
        let (n1, n2) = (
            luxemburg_norm(&f, &p, &dom, 1e-10).unwrap(),
            luxemburg_norm(&two_f, &p, &dom, 1e-10).unwrap(),
        );
        prop_assert!((n2 - 2.0 * n1).abs() <= 1e-9 * n2);
        let (r1, r2) = (modular(&f, &p, &dom).unwrap().value, modular(&two_f, &p, &dom).unwrap().value);
        let expected = 2f64.powf(p_val) * r1;
        prop_assert!((r2 - expected).abs() <= 1e-12 * expected);
    }
}

#[test]
fn rational_oracle_sanity() {
    // The oracle itself: 0.1 + 0.2 rounds to 0.30000000000000004.
    let r = rational(0.1) + rational(0.2);
    assert!(is_nearest(0.30000000000000004, &r));
    assert!(!is_nearest(0.3, &r));
    let third = BigRational::from_f64(1.0).unwrap() / BigRational::from_integer(BigInt::from(3));
    assert!(is_nearest(1.0 / 3.0, &third));
}
