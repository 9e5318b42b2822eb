use std::collections::BTreeMap;

use condsym::catalog::{apply_equivalence, builtin, instantiate, quadratic_roots, Equivalence, QuadraticRoots};
use condsym::invariance::{
    conditional_residual, determining_system_for, is_lie_symmetry, residual_coefficients, verify, EvolutionPDE, Status,
    SymmetryOperator,
};
use condsym::numerics::{Slot, Tape};
use condsym::parser::{parse_equation, parse_equation_raw, parse_expression, parse_params};
use condsym::symexpr::render::plain;
use condsym::symexpr::{
    apply_point_transform, collect_powers, differentiate, equal, evaluate, normalize, substitute, Assumptions,
    Bindings, Dep, EvalPoint, EvalValue, Expr, Indep, Param, PointTransform, Rational, SymbolKey,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, d)| q(p, d))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    small_rational().prop_filter("nonzero", |r| *r != q(0, 1))
}

/// Source text of a random expression over t, x, V and two parameters.
fn expr_text(with_exp: bool) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        Just("x".to_string()),
        Just("V".to_string()),
        Just("lam".to_string()),
        Just("lam1".to_string()),
        (-5i64..=5).prop_map(|k| format!("({k})")),
        (1i64..=5, 2i64..=4).prop_map(|(p, d)| format!("({p}/{d})")),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let mut arms = vec![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")).boxed(),
            (inner.clone(), 0u32..=3).prop_map(|(a, k)| format!("({a})^{k}")).boxed(),
        ];
        if with_exp {
            arms.push(inner.clone().prop_map(|a| format!("exp({a})")).boxed());
        }
        proptest::strategy::Union::new(arms)
    })
}

fn expr(with_exp: bool) -> impl Strategy<Value = Expr> {
    expr_text(with_exp).prop_map(|s| parse_expression(&s).unwrap_or_else(|d| panic!("{s}: {d}")))
}

fn norm(e: &Expr) -> Expr {
    normalize(e).unwrap()
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn differentiation_is_linear(e1 in expr(true), e2 in expr(true), a in small_rational(), b in small_rational()) {
        for v in [Indep::T.into(), Indep::X.into()] {
            let combo = Expr::Const(a.clone()) * e1.clone() + Expr::Const(b.clone()) * e2.clone();
            let lhs = norm(&differentiate(&combo, v).unwrap());
            let rhs = Expr::Const(a.clone()) * differentiate(&e1, v).unwrap()
                + Expr::Const(b.clone()) * differentiate(&e2, v).unwrap();
            prop_assert_eq!(lhs, norm(&rhs));
        }
    }

    #[test]
    fn mixed_partials_commute(e in expr(true)) {
        let tx = differentiate(&differentiate(&e, Indep::T.into()).unwrap(), Indep::X.into()).unwrap();
        let xt = differentiate(&differentiate(&e, Indep::X.into()).unwrap(), Indep::T.into()).unwrap();
        prop_assert_eq!(norm(&tx), norm(&xt));
    }

    #[test]
    fn normalization_is_idempotent(e in expr(true)) {
        let once = norm(&e);
        prop_assert_eq!(norm(&once), once);
    }

    #[test]
    fn equality_agrees_with_exact_evaluation(e in expr(false), f in expr(false)) {
        // (e + f)^2 against its expansion.
        let a = (e.clone() + f.clone()).powi(2);
        let b = e.clone().powi(2) + Expr::int(2) * e * f.clone() + f.powi(2);
        let ass = Assumptions::new();
        prop_assert!(equal(&a, &b, &ass).unwrap());
        let mut r = rng();
        for _ in 0..8 {
            let pt = EvalPoint::random(&mut r, &[&a, &b], &ass).unwrap();
            match (evaluate(&a, &pt).unwrap(), evaluate(&b, &pt).unwrap()) {
                (Some(EvalValue::Exact(x)), Some(EvalValue::Exact(y))) => prop_assert_eq!(x, y),
                (x, y) => prop_assert!(false, "non-exact values {x:?} {y:?}"),
            }
        }
    }

    #[test]
    fn unequal_expressions_are_told_apart(e in expr(false)) {
        let shifted = e.clone() + Expr::int(1);
        prop_assert!(!equal(&e, &shifted, &Assumptions::new()).unwrap());
    }

    #[test]
    fn render_then_parse(e in expr(true)) {
        let back = parse_expression(&plain(&e)).unwrap();
        prop_assert_eq!(norm(&back), norm(&e));
    }

    #[test]
    fn parser_never_panics(s in "[-+*/^() a-zA-Z0-9_,.=]{0,40}") {
        let _ = parse_expression(&s);
        let _ = parse_equation(&s);
    }

    #[test]
    fn collected_powers_sum_to_input(e in expr(true)) {
        let c = collect_powers(&e, Dep::V, &Assumptions::new()).unwrap();
        let mut sum = Expr::zero();
        for (class, coeff) in &c.classes {
            sum = sum + coeff.clone() * class.atom(Dep::V);
        }
        prop_assert!(equal(&sum, &e, &Assumptions::new()).unwrap(), "{} vs {}", plain(&sum), plain(&e));
    }

    #[test]
    fn tape_matches_exact_evaluation(e in expr(false), tv in small_rational(), xv in small_rational(), vv in nonzero_rational()) {
        let b: Bindings = [("lam", q(3, 2)), ("lam1", q(-1, 3))]
            .into_iter()
            .map(|(k, v)| (SymbolKey::Param(Param::new(k).unwrap()), Expr::Const(v)))
            .collect();
        let bound = substitute(&e, &b).unwrap();
        let tape = Tape::compile(&bound, &[Slot::t(), Slot::x(), Slot::v()]).unwrap();
        let point: Bindings = [
            (SymbolKey::Indep(Indep::T), tv.clone()),
            (SymbolKey::Indep(Indep::X), xv.clone()),
            (SymbolKey::Dep(Dep::V), vv.clone()),
        ]
        .into_iter()
        .map(|(k, v)| (k, Expr::Const(v)))
        .collect();
        let exact = norm(&substitute(&bound, &point).unwrap());
        let exact = exact.as_constant().expect("closed expression");
        let f = |r: &Rational| num::ToPrimitive::to_f64(r).unwrap();
        let got = tape.eval(&[f(&tv), f(&xv), f(&vv)]);
        let want = f(exact);
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "{got} vs {want}");
    }
}

fn pde(text: &str) -> EvolutionPDE {
    parse_equation(text).unwrap()
}

/// Operators with coefficients polynomial in V and rational in nothing else.
fn poly_operator() -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>)> {
    (proptest::collection::vec(small_rational(), 0..3), proptest::collection::vec(small_rational(), 0..4))
}

fn poly_in_v(c: &[Rational]) -> Expr {
    c.iter().enumerate().fold(Expr::zero(), |acc, (k, a)| acc + Expr::Const(a.clone()) * Expr::v().powi(k as i64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_degree_at_most_three((xi, eta) in poly_operator()) {
        let op = SymmetryOperator::new(poly_in_v(&xi), poly_in_v(&eta)).unwrap();
        for eq in ["Vxx = V*Vt - V*Vx + V^3 - V", "Vxx = Vt - lam*V*Vx + lam2*V^2", "Vxx = exp(V)*Vt + V"] {
            let c = residual_coefficients(&pde(eq), &op).unwrap();
            prop_assert!(c.len() <= 4, "degree {}", c.len() as i64 - 1);
        }
    }

    #[test]
    fn lie_implies_conditional((xi, eta) in poly_operator()) {
        let op = SymmetryOperator::new(poly_in_v(&xi), poly_in_v(&eta)).unwrap();
        for eq in ["Vxx = Vt", "Vxx = Vt - V*Vx", "Vxx = V*Vt + V^2"] {
            let p = pde(eq);
            if is_lie_symmetry(&p, &op).unwrap() {
                prop_assert!(norm(&conditional_residual(&p, &op).unwrap()).is_zero());
            }
        }
    }

    #[test]
    fn verdict_matches_determining_system((xi, eta) in poly_operator()) {
        let op = SymmetryOperator::new(poly_in_v(&xi), poly_in_v(&eta)).unwrap();
        let p = pde("Vxx = Vt - V*Vx + V^2 - V");
        let v = verify(&p, &op, &Assumptions::new()).unwrap();
        let sys = determining_system_for(&p, &op).unwrap();
        let all_zero = sys.equations.iter().all(|e| norm(e).is_zero());
        prop_assert_eq!(v.status != Status::NotASymmetry, all_zero);
        if v.status == Status::NotASymmetry {
            prop_assert!(v.witness.as_ref().is_some_and(|w| !w.is_zero()));
        }
    }

    #[test]
    fn quadratic_roots_satisfy_equation(lam in nonzero_rational(), lam3 in small_rational()) {
        // 2p^2 + lam p + 9 lam3 - lam^2 = 0
        let (a, b, c) = (q(2, 1), lam.clone(), q(9, 1) * lam3.clone() - lam.clone() * lam.clone());
        match quadratic_roots(&a, &b, &c) {
            QuadraticRoots::Rational(r) => {
                for p in r {
                    prop_assert_eq!(a.clone() * p.clone() * p.clone() + b.clone() * p + c.clone(), q(0, 1));
                }
            }
            QuadraticRoots::Irrational(r) => {
                let f = |x: &Rational| num::ToPrimitive::to_f64(x).unwrap();
                for p in r {
                    let v = f(&a) * p * p + f(&b) * p + f(&c);
                    prop_assert!(v.abs() <= 1e-12 * (1.0 + f(&c).abs()), "{v}");
                }
            }
            QuadraticRoots::Complex => {
                prop_assert!(b.clone() * b - q(8, 1) * c < q(0, 1));
            }
        }
    }

    #[test]
    fn galilean_round_trip(c in nonzero_rational(), k in small_rational()) {
        let eq = parse_equation_raw(&format!("Vt = Vxx + ({k})*V*Vx + V^2 - V")).unwrap();
        let t = PointTransform::Galilean { c: Expr::Const(c) };
        let there = apply_point_transform(&eq, &t).unwrap();
        let back = apply_point_transform(&there, &t.inverse()).unwrap();
        prop_assert!(equal(&back.rhs, &eq.rhs, &Assumptions::new()).unwrap());
    }

    #[test]
    fn galilean_preserves_status(speed in nonzero_rational(), lam in nonzero_rational()) {
        let params = parse_params(&format!("lam={lam}, lam0=0, lam2=-1")).unwrap();
        let before = instantiate("thm2.iv", &params, None).unwrap();
        let want = verify(&before.pde, &before.operators[0].operator, &before.assumptions).unwrap().status;
        let t = Equivalence::parse("galilean", Some(&speed.to_string())).unwrap();
        let tr = apply_equivalence("thm2.iv", &params, None, &t).unwrap();
        for op in &tr.operators {
            prop_assert_eq!(verify(&tr.pde, op, &tr.pde.default_assumptions()).unwrap().status, want);
        }
    }
}

const MULTIPLIERS: [&str; 4] = ["2", "-1/3", "x^2 + 1", "exp(t)"];

#[test]
fn verdicts_invariant_under_multipliers() {
    for e in builtin().entries().iter().filter(|e| !e.is_alias()) {
        let fx = &e.fixtures[0];
        let inst = instantiate(&e.id, &fx.params, fx.candidate.as_ref()).unwrap();
        for op in inst.operators.iter().map(|o| &o.operator).chain(&inst.mutants) {
            let want = verify(&inst.pde, op, &inst.assumptions).unwrap().status;
            for m in MULTIPLIERS {
                let m = parse_expression(m).unwrap();
                let scaled =
                    SymmetryOperator::from_raw(&m, &(m.clone() * op.xi.clone()), &(m.clone() * op.eta.clone()), op.dep)
                        .unwrap();
                let got = verify(&inst.pde, &scaled, &inst.assumptions).unwrap().status;
                assert_eq!(got, want, "{} with multiplier {}", e.id, plain(&m));
            }
        }
    }
}

#[test]
fn catalog_expressions_round_trip() {
    for e in builtin().entries() {
        let texts = e.u_equation.iter().chain(&e.v_equation).map(|t| t.text.clone());
        for text in texts {
            let (lhs, rhs) = text.split_once('=').unwrap();
            for side in [lhs, rhs] {
                let parsed = parse_expression(side.trim()).unwrap();
                let again = parse_expression(&plain(&parsed)).unwrap();
                assert!(equal(&parsed, &again, &Assumptions::new()).unwrap(), "{}: {side}", e.id);
            }
        }
    }
}

#[test]
fn lambda_zero_keeps_symmetry() {
    let params: BTreeMap<String, Rational> = parse_params("lam=1, lam1=-1/2, lam2=1/2, lam3=1, m=1").unwrap();
    let t = Equivalence::parse("lambda-zero", None).unwrap();
    let tr = apply_equivalence("thm1.i", &params, None, &t).unwrap();
    for op in &tr.operators {
        assert_ne!(verify(&tr.pde, op, &tr.pde.default_assumptions()).unwrap().status, Status::NotASymmetry);
    }
}
