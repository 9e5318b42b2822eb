use std::collections::BTreeMap;

use condsym::catalog::{self, builtin, Equivalence, QuadraticRoots};
use condsym::invariance::{verify, Status};
use condsym::parser::{parse_bindings, parse_expression, parse_params};
use condsym::symexpr::render::plain;
use condsym::symexpr::{Bindings, Expr, Rational};
use condsym::Error;

fn params(s: &str) -> BTreeMap<String, Rational> {
    parse_params(s).unwrap()
}

fn cand(s: &str) -> Bindings {
    parse_bindings(s).unwrap().into_iter().collect()
}

fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

#[test]
fn every_fixture_verifies_with_expected_status() {
    let mut failures = Vec::new();
    for entry in builtin().entries().iter().filter(|e| !e.is_alias()) {
        assert!(entry.fixtures.len() >= 5, "{} has {} fixtures", entry.id, entry.fixtures.len());
        for fx in &entry.fixtures {
            let inst = match catalog::instantiate(&entry.id, &fx.params, fx.candidate.as_ref()) {
                Ok(i) => i,
                Err(e) => {
                    failures.push(format!("{} [{}]: {e}", entry.id, fx.params_text));
                    continue;
                }
            };
            for op in &inst.operators {
                let v = verify(&inst.pde, &op.operator, &inst.assumptions).unwrap();
                if v.status != inst.expected_at(fx) {
                    failures.push(format!(
                        "{} [{}] {:?}: got {:?}, witness {:?}",
                        entry.id,
                        fx.params_text,
                        op.label,
                        v.status,
                        v.witness.as_ref().map(plain)
                    ));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn every_mutation_is_rejected() {
    let mut failures = Vec::new();
    for entry in builtin().entries().iter().filter(|e| !e.is_alias()) {
        assert!(!entry.mutations.is_empty(), "{} has no mutations", entry.id);
        let fx = &entry.fixtures[0];
        let inst = catalog::instantiate(&entry.id, &fx.params, fx.candidate.as_ref()).unwrap();
        for (m, tpl) in inst.mutants.iter().zip(&entry.mutations) {
            let v = verify(&inst.pde, m, &inst.assumptions).unwrap();
            let witness_nonzero = v.witness.as_ref().is_some_and(|w| !w.is_zero());
            if v.status != Status::NotASymmetry || !witness_nonzero {
                failures.push(format!("{}: `{}` gave {:?}", entry.id, tpl.text, v.status));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn listing() {
    let list = catalog::list_entries();
    assert!(list.len() >= 14);
    for id in [
        "thm1.i",
        "thm1.ii",
        "thm1.iii",
        "thm2.i",
        "thm2.ii",
        "thm2.iii",
        "thm2.iv",
        "thm2.v.quadratic",
        "thm2.v.overdetermined",
        "app.murray",
        "app.porous-murray",
        "app.fast-murray",
        "app.fast-murray-b",
        "app.fn-convective",
        "app.kpp-convective",
        "app.newell-whitehead",
        "app.fn-fast",
        "app.rd-fast",
    ] {
        assert!(list.iter().any(|e| e.id == id), "missing {id}");
    }
    let burgers = builtin().entry("thm2.iii").unwrap();
    assert_eq!(burgers.system.as_deref(), Some("sys8ad"));
    assert!(builtin().entry("app.rd-fast").unwrap().has_flag("lambda-zero"));
    assert!(builtin().entry("app.murray").unwrap().cross_refs.contains(&"thm2.iv".to_string()));
    assert!(matches!(builtin().entry("nope"), Err(Error::UnknownEntry(_))));
}

#[test]
fn constraint_violations_rejected() {
    let e = catalog::instantiate("thm1.i", &params("m=1, lam=1, lam1=1, lam2=0, lam3=0"), None);
    assert!(matches!(e, Err(Error::ConstraintViolation(_))));
    let e = catalog::instantiate("thm1.i", &params("m=-1, lam=1, lam1=1, lam2=1, lam3=0"), None);
    assert!(matches!(e, Err(Error::ConstraintViolation(_))));
    let e = catalog::instantiate("thm1.ii", &params("lam=1, lam1=0, lam2=1, lam3=0"), None);
    assert!(matches!(e, Err(Error::ConstraintViolation(_))));
    let e = catalog::instantiate("thm2.iv", &params("lam=1, lam0=1, lam2=0"), None);
    assert!(matches!(e, Err(Error::ConstraintViolation(_))));
    let e = catalog::instantiate("app.fn-convective", &params("lam=1, lam3=1, delta=2"), None);
    assert!(matches!(e, Err(Error::ConstraintViolation(_))));
    // A system entry needs a solution, and the solution is checked.
    let p = params("lam=1, lam1=0, lam2=2, lam3=3");
    assert!(matches!(catalog::instantiate("thm1.iii", &p, None), Err(Error::ConstraintViolation(_))));
    let bad = cand("f=0; g=0; h=2");
    assert!(matches!(catalog::instantiate("thm1.iii", &p, Some(&bad)), Err(Error::ConstraintViolation(_))));
    let e = catalog::instantiate("thm1.i", &params("mu=1"), None);
    assert!(matches!(e, Err(Error::ConstraintViolation(_))));
}

#[test]
fn thm1_i_concrete_pair() {
    let inst = catalog::instantiate("thm1.i", &params("m=1, lam=1, lam1=1, lam2=1, lam3=0"), None).unwrap();
    assert_eq!(inst.params["n"], q(-1, 2));
    assert_eq!(inst.operators.len(), 1);
    let u = inst.operators[0].u_operator.as_ref().unwrap();
    assert_eq!(u.eta, parse_expression("U + U^(-1)").unwrap());
    let v = verify(&inst.pde, &inst.operators[0].operator, &inst.assumptions).unwrap();
    assert_eq!(v.status, Status::ConditionalSymmetry);
}

#[test]
fn quadratic_roots_for_cubic_case() {
    let inst = catalog::instantiate("thm2.v.quadratic", &params("lam=1, lam0=1, lam1=0, lam3=-2/9"), None).unwrap();
    let labels: Vec<_> = inst.operators.iter().map(|o| o.label.clone().unwrap()).collect();
    assert_eq!(labels, ["p = -3/2", "p = 1"]);
    for o in &inst.operators {
        assert_eq!(verify(&inst.pde, &o.operator, &inst.assumptions).unwrap().status, Status::ConditionalSymmetry);
    }
    assert_eq!(
        catalog::quadratic_roots(&q(2, 1), &q(1, 1), &q(-3, 1)),
        QuadraticRoots::Rational(vec![q(-3, 2), q(1, 1)])
    );
    match catalog::quadratic_roots(&q(1, 1), &q(0, 1), &q(-2, 1)) {
        QuadraticRoots::Irrational([a, b]) => {
            assert!((a + 2f64.sqrt()).abs() < 1e-12 && (b - 2f64.sqrt()).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    let irr = catalog::instantiate("thm2.v.quadratic", &params("lam=1, lam0=1, lam1=0, lam3=1/18"), None);
    assert!(matches!(irr, Err(Error::UnsupportedClass(_))), "{irr:?}");
}

#[test]
fn symbolic_exponent_instantiation() {
    let inst = catalog::instantiate("thm1.i", &params("lam=1, lam1=1, lam2=1, lam3=1"), None).unwrap();
    assert!(!inst.params.contains_key("n"));
    let v = verify(&inst.pde, &inst.operators[0].operator, &inst.assumptions).unwrap();
    assert_eq!(v.status, Status::ConditionalSymmetry);
}

#[test]
fn thm1_iii_half_lam2_matches_thm1_i() {
    let a =
        catalog::instantiate("thm1.iii", &params("lam=1, lam1=0, lam2=2, lam3=3"), Some(&cand("f=0; g=0; h=lam2/2")))
            .unwrap();
    // Same equation as thm1.i at m = -1/2, lam1 = 0 with lam3' = -lam3/lam2.
    let b = catalog::instantiate("thm1.i", &params("m=-1/2, lam=1, lam1=0, lam2=2, lam3=-3/2"), None).unwrap();
    assert_eq!(a.pde.f0, b.pde.f0);
    assert_eq!(a.pde.f1, b.pde.f1);
    assert_eq!(a.pde.f2, b.pde.f2);
    assert_eq!(a.operators[0].operator, b.operators[0].operator);
}

#[test]
fn constraint_residuals() {
    let z = |v: Vec<Expr>| v.iter().all(Expr::is_zero);
    // (0, 0, lam2/2) with lam1 = 0 and everything else symbolic.
    let r = catalog::constraint_residual("sys9", &params("lam1=0"), &cand("f=0; g=0; h=lam2/2")).unwrap();
    assert!(z(r));
    let r = catalog::constraint_residual("ode10", &params("lam=0, lam2=0"), &cand("h=6*x^(-2)")).unwrap();
    assert!(z(r));
    let r = catalog::constraint_residual("sys8ad", &BTreeMap::new(), &cand("a=0; b=0; q=0")).unwrap();
    assert!(z(r));
    let r = catalog::constraint_residual("sys8ad", &BTreeMap::new(), &cand("a=a0; b=b0; q=c1")).unwrap();
    assert!(z(r));
    let r = catalog::constraint_residual("sys14ad", &BTreeMap::new(), &cand("b=b0")).unwrap();
    assert!(r[0].is_zero() && r[1].is_zero());
    assert_eq!(r[2], parse_expression("9*lam0*lam3*b0/lam - c0").unwrap());
    let r = catalog::constraint_residual("sys14ad", &params("lam=3, lam3=1, lam0=1, c0=6"), &cand("b=2")).unwrap();
    assert!(z(r));
    let r = catalog::constraint_residual("ode10", &params("lam=0, lam2=0"), &cand("h=x^(-2)")).unwrap();
    assert!(!r[0].is_zero());
    assert!(matches!(
        catalog::constraint_residual("sys99", &BTreeMap::new(), &Bindings::new()),
        Err(Error::UnknownSystem(_))
    ));
}

#[test]
fn depress_cubic_gives_normal_form() {
    let p = params("lam=1, lam3=1, delta=1/2");
    let t = catalog::apply_equivalence("app.fn-convective", &p, None, &Equivalence::DepressCubic).unwrap();
    let (l3, d) = (q(1, 1), q(1, 2));
    let one = q(1, 1);
    let third = q(1, 3);
    let lam1 = &l3 * (&third * (&d + &one) * (&d + &one) - &d);
    let lam0 = &l3 * &third * (&d + &one) * (q(2, 9) * (&d + &one) * (&d + &one) - &d);
    assert_eq!(t.params["lam1"], lam1);
    assert_eq!(t.params["lam0"], lam0);
    assert_eq!(t.params["lam3"], -l3);
    for op in &t.operators {
        assert_eq!(verify(&t.pde, op, &Default::default()).unwrap().status, Status::ConditionalSymmetry);
    }
    // The result is the cubic case with the new coefficients.
    let mut np = t.params.clone();
    np.remove("k");
    let cubic = catalog::instantiate("thm2.v.quadratic", &np, None).unwrap();
    assert_eq!(cubic.pde.f2, t.pde.f2);
    for (a, b) in cubic.operators.iter().zip(&t.operators) {
        assert_eq!(&a.operator, b);
    }
}

#[test]
fn galilean_removes_linear_convection() {
    let p = params("lam=2, lam1=1, lam2=0, lam3=1");
    let t = catalog::apply_equivalence("aux.log-galilean", &p, None, &Equivalence::parse("galilean", None).unwrap())
        .unwrap();
    let plain_rd = catalog::instantiate("thm1.ii", &params("lam=0, lam1=1, lam2=0, lam3=1"), None).unwrap();
    assert_eq!(t.pde.f2, plain_rd.pde.f2);
    assert_eq!(t.pde.f1, plain_rd.pde.f1);
    assert_eq!(t.operators[0], plain_rd.operators[0].operator);
}

/// Entry, parameters, candidate, transform, transform argument.
type Case<'a> = (&'a str, &'a str, Option<&'a str>, &'a str, Option<&'a str>);

#[test]
fn equivalences_preserve_status() {
    let cases: &[Case] = &[
        ("thm1.i", "m=1, lam=1, lam1=1, lam2=1, lam3=1", None, "lambda-zero", None),
        ("thm1.ii", "lam=1, lam1=1, lam2=1, lam3=1", None, "lambda-zero", None),
        ("thm1.i", "m=2, lam=1, lam1=1, lam2=1, lam3=1", None, "multiplier", Some("1 + t^2*U")),
        ("thm2.iv", "lam=1, lam0=0, lam2=-1", None, "galilean", Some("3")),
        ("app.kpp-convective", "lam=1, lam3=-2/9", None, "depress-cubic", None),
        ("app.newell-whitehead", "lam=2, lam1=-1, lam3=-8/9", None, "depress-cubic", None),
        ("thm1.iii", "lam=1, lam1=0, lam2=2, lam3=3", Some("f=0; g=0; h=lam2/2"), "lambda-zero", None),
    ];
    for (id, p, c, t, arg) in cases {
        let p = params(p);
        let c = c.map(cand);
        let before = catalog::instantiate(id, &p, c.as_ref()).unwrap();
        let tr = catalog::apply_equivalence(id, &p, c.as_ref(), &Equivalence::parse(t, *arg).unwrap()).unwrap();
        for (o, n) in before.operators.iter().zip(&tr.operators) {
            let s0 = verify(&before.pde, &o.operator, &before.assumptions).unwrap().status;
            let s1 = verify(&tr.pde, n, &tr.pde.default_assumptions()).unwrap().status;
            assert_eq!(s0, s1, "{id} under {t}");
        }
    }
}

#[test]
fn inapplicable_transforms_rejected() {
    let p = params("m=1, lam=1, lam1=1, lam2=1, lam3=1");
    let e = catalog::apply_equivalence("thm1.i", &p, None, &Equivalence::DepressCubic);
    assert!(matches!(e, Err(Error::InapplicableTransform(_))));
    let e = catalog::apply_equivalence("thm2.iv", &params("lam=1, lam0=0, lam2=-1"), None, &Equivalence::LambdaZero);
    assert!(matches!(e, Err(Error::InapplicableTransform(_))));
    assert!(Equivalence::parse("rotate", None).is_err());
    assert!(Equivalence::parse("multiplier", None).is_err());
    let alias = catalog::instantiate("rem2.cubic", &BTreeMap::new(), None);
    assert!(matches!(alias, Err(Error::UnsupportedClass(_))));
}
