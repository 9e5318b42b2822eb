//! Acceptance suite: one line per criterion, then a single assertion over all
//! of them so that every line is printed even when one fails.
//!
//! ```bash
//! cargo test --test acceptance -- --nocapture
//! ```

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use condsym::catalog::{builtin, constraint_residual, instantiate, quadratic_roots, QuadraticRoots};
use condsym::invariance::{
    generate_determining_system, rational_multiple, split_determining, verify, DeterminingSystem, Family, Status,
    SymmetryOperator,
};
use condsym::numerics::{
    integrate_ode, invariant_flow_check, ode_constraint_check, steps_for, FlowCheckOptions, Grid1D, OdeSystem, Slot,
    Tape,
};
use condsym::parser::{parse_bindings, parse_expression, parse_operator, parse_params};
use condsym::symexpr::render::plain;
use condsym::symexpr::{normalize, substitute, AffineExponent, Assumptions, Bindings, Coord, Expr, FuncSym, Rational};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn e(s: &str) -> Expr {
    parse_expression(s).unwrap_or_else(|d| panic!("{s}: {d}"))
}

fn bindings(s: &str) -> Bindings {
    parse_bindings(s).unwrap().into_iter().collect()
}

fn params(s: &str) -> BTreeMap<String, Rational> {
    parse_params(s).unwrap()
}

fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

/// Pairs generated and golden equations one-to-one up to nonzero rational
/// factors. Returns the first golden equation without a partner.
fn match_up_to_scaling(got: &[Expr], want: &[&str]) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!("{} equations, expected {}", got.len(), want.len()));
    }
    let mut used = vec![false; got.len()];
    for w in want {
        let w = e(w);
        let hit = got
            .iter()
            .enumerate()
            .position(|(i, g)| !used[i] && rational_multiple(g, &w).unwrap().is_some_and(|r| r != q(0, 1)));
        match hit {
            Some(i) => used[i] = true,
            None => return Err(format!("no match for {}", plain(&w))),
        }
    }
    Ok(())
}

fn system(fam: Family) -> DeterminingSystem {
    generate_determining_system(&fam.pde(), &SymmetryOperator::formal()).unwrap()
}

const GOLDEN_16: [&str; 4] = [
    "xi_VV",
    "eta_VV - 2*xi_V*(-lam - xi*V^n) - 2*xi_xV",
    "(2*xi_V*eta - 2*xi*xi_x - xi_t)*V^n - xi*eta*n*V^(n-1) - lam*xi_x + 3*xi_V*F - 2*eta_xV + xi_xx",
    "eta*F_V + (2*xi_x - eta_V)*F + n*eta^2*V^(n-1) + 2*xi_x*eta*V^n + eta_t*V^n - lam*eta_x - eta_xx",
];

const GOLDEN_23: [&str; 4] = [
    "xi_VV",
    "eta_VV - 2*xi_V*(-lam - xi*exp(V)) - 2*xi_xV",
    "(xi_t + 2*xi*xi_x - 2*xi_V*eta + xi*eta)*exp(V) + lam*xi_x - 3*xi_V*F + 2*eta_xV - xi_xx",
    "eta*F_V + (2*xi_x - eta_V)*F + (eta^2 + 2*xi_x*eta + eta_t)*exp(V) - lam*eta_x - eta_xx",
];

const GOLDEN_62: [&str; 4] = [
    "xi_VV",
    "eta_VV - 2*xi_V*(-lam*V^(n+1) - xi*V^n) - 2*xi_xV",
    "lam*xi_x*V^(n+1) + ((-2*xi_V + lam*(n+1))*eta + 2*xi*xi_x + xi_t)*V^n + xi*eta*n*V^(n-1) - 3*xi_V*F + 2*eta_xV - xi_xx",
    "eta*F_V + (2*xi_x - eta_V)*F + n*eta^2*V^(n-1) + 2*xi_x*eta*V^n + eta_t*V^n - lam*V^(n+1)*eta_x - eta_xx",
];

const GOLDEN_63: [&str; 4] = [
    "xi_VV",
    "eta_VV + 2*xi_V*(lam + xi)*exp(V) - 2*xi_xV",
    "(xi_t + 2*xi*xi_x + (lam + xi - 2*xi_V)*eta + lam*xi_x)*exp(V) - 3*xi_V*F + 2*eta_xV - xi_xx",
    "eta*F_V + (2*xi_x - eta_V)*F + (eta^2 + 2*xi_x*eta + eta_t - lam*eta_x)*exp(V) - eta_xx",
];

fn criterion_1() -> Outcome {
    let cases = [
        (Family::PowerPlain, &GOLDEN_16),
        (Family::ExpPlain, &GOLDEN_23),
        (Family::PowerConvective, &GOLDEN_62),
        (Family::ExpConvective, &GOLDEN_63),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (fam, golden) in cases {
        let start = Instant::now();
        let sys = system(fam);
        let took = start.elapsed();
        let verdict = match_up_to_scaling(&sys.equations, golden);
        let ok = verdict.is_ok() && took < Duration::from_secs(1);
        pass &= ok;
        parts.push(match verdict {
            Ok(()) => format!("{} {:.0} ms", fam.name(), took.as_secs_f64() * 1e3),
            Err(m) => format!("{}: {m}", fam.name()),
        });
    }
    outcome(pass, parts.join(", "))
}

struct CatalogRun {
    entries: usize,
    min_fixtures: usize,
    fixture_failures: Vec<String>,
    mutation_failures: Vec<String>,
    entries_without_mutation: Vec<String>,
    mutations: usize,
    verify_time: Duration,
    mutation_time: Duration,
}

fn run_catalog() -> CatalogRun {
    let mut run = CatalogRun {
        entries: 0,
        min_fixtures: usize::MAX,
        fixture_failures: vec![],
        mutation_failures: vec![],
        entries_without_mutation: vec![],
        mutations: 0,
        verify_time: Duration::ZERO,
        mutation_time: Duration::ZERO,
    };
    for entry in builtin().entries().iter().filter(|e| !e.is_alias()) {
        run.entries += 1;
        run.min_fixtures = run.min_fixtures.min(entry.fixtures.len());
        if entry.mutations.is_empty() {
            run.entries_without_mutation.push(entry.id.clone());
        }
        for fx in &entry.fixtures {
            let start = Instant::now();
            let inst = match instantiate(&entry.id, &fx.params, fx.candidate.as_ref()) {
                Ok(i) => i,
                Err(err) => {
                    run.fixture_failures.push(format!("{} [{}]: {err}", entry.id, fx.params_text));
                    continue;
                }
            };
            let want = inst.expected_at(fx);
            for o in &inst.operators {
                let got = verify(&inst.pde, &o.operator, &inst.assumptions).map(|v| v.status);
                if got.as_ref().ok() != Some(&want) {
                    run.fixture_failures.push(format!("{} [{}]: {got:?}", entry.id, fx.params_text));
                }
            }
            run.verify_time += start.elapsed();

            let start = Instant::now();
            for m in &inst.mutants {
                run.mutations += 1;
                match verify(&inst.pde, m, &inst.assumptions) {
                    Ok(v) if v.status == Status::NotASymmetry && v.witness.as_ref().is_some_and(|w| !w.is_zero()) => {}
                    other => run.mutation_failures.push(format!("{} [{}]: {other:?}", entry.id, fx.params_text)),
                }
            }
            run.mutation_time += start.elapsed();
        }
    }
    run
}

fn criterion_2(run: &CatalogRun) -> Outcome {
    let pass = run.entries >= 14
        && run.min_fixtures >= 5
        && run.fixture_failures.is_empty()
        && run.verify_time < Duration::from_secs(30);
    let mut detail = format!(
        "{} entries, >= {} fixtures each, {} failures, {:.2} s",
        run.entries,
        run.min_fixtures,
        run.fixture_failures.len(),
        run.verify_time.as_secs_f64()
    );
    if let Some(f) = run.fixture_failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(pass, detail)
}

fn criterion_3(run: &CatalogRun) -> Outcome {
    let pass = run.entries_without_mutation.is_empty()
        && run.mutation_failures.is_empty()
        && run.mutation_time < Duration::from_secs(30);
    let mut detail = format!(
        "{} mutated operators rejected with witnesses, {} failures, {:.2} s",
        run.mutations - run.mutation_failures.len(),
        run.mutation_failures.len(),
        run.mutation_time.as_secs_f64()
    );
    if !run.entries_without_mutation.is_empty() {
        detail.push_str(&format!("; no mutation: {:?}", run.entries_without_mutation));
    }
    if let Some(f) = run.mutation_failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(pass, detail)
}

fn criterion_4() -> Outcome {
    const LINEAR: &str = "xi=f; eta=g*V+h";
    let n_ne_1 = Assumptions::new().with_exponent_ne(AffineExponent::n_plus(0), q(1, 1)).unwrap();
    let mut failures = Vec::new();

    let split = split_determining(&system(Family::PowerPlain), &bindings(LINEAR), &n_ne_1).unwrap();
    let want = [
        "2*f*f_x + f_t + n*f*g",
        "f*h",
        "f_xx - lam*f_x - 2*g_x",
        "(g*V+h)*F_V + (2*f_x - g)*F + n*V^(n-1)*(g*V+h)^2 - h_xx - lam*h_x - (g_xx + lam*g_x)*V \
         + (g_t + 2*f_x*g)*V^(n+1) + (h_t + 2*f_x*h)*V^n",
    ];
    if let Err(m) = match_up_to_scaling(&split.equations, &want) {
        failures.push(format!("power-plain: {m}"));
    }

    let split = split_determining(&system(Family::ExpPlain), &bindings(LINEAR), &Assumptions::new()).unwrap();
    let want = [
        "f*h + f_t + 2*f*f_x",
        "f*g",
        "lam*f_x + 2*g_x - f_xx",
        "(g*V+h)*F_V + (2*f_x - g)*F + (g*V+h)^2*exp(V) - h_xx - lam*h_x - (g_xx + lam*g_x)*V \
         + (g_t + 2*f_x*g)*V*exp(V) + (h_t + 2*f_x*h)*exp(V)",
    ];
    if let Err(m) = match_up_to_scaling(&split.equations, &want) {
        failures.push(format!("exp-plain: {m}"));
    }

    // Power-convective: the unsplit equation and then its split by powers of V.
    let sys = system(Family::PowerConvective);
    let whole =
        e("lam*((n+1)*g + f_x)*V^(n+1) + (lam*(n+1)*h + f_t + 2*f*f_x + n*f*g)*V^n + n*f*h*V^(n-1) + 2*g_x - f_xx");
    let unsplit_found = sys.equations.iter().any(|eq| {
        let s = substitute(eq, &bindings(LINEAR)).unwrap();
        rational_multiple(&s, &whole).unwrap().is_some()
    });
    if !unsplit_found {
        failures.push("power-convective: unsplit equation not reproduced".into());
    }
    let split = split_determining(&sys, &bindings(LINEAR), &n_ne_1).unwrap();
    for w in ["(n+1)*g + f_x", "lam*(n+1)*h + f_t + 2*f*f_x + n*f*g", "f*h", "2*g_x - f_xx"] {
        if !split.equations.iter().any(|eq| rational_multiple(eq, &e(w)).unwrap().is_some()) {
            failures.push(format!("power-convective: missing {w}"));
        }
    }
    let detail = if failures.is_empty() {
        "power-plain (n != 1), exp-plain and power-convective splits reproduced".to_string()
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn all_zero(r: &[Expr]) -> bool {
    r.iter().all(|x| normalize(x).unwrap().is_zero())
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let r = constraint_residual("sys9", &params("lam1=0"), &bindings("f=0; g=0; h=lam2/2")).unwrap();
    if !all_zero(&r) {
        failures.push("sys9 with (0, 0, lam2/2)".to_string());
    }
    let r = constraint_residual("ode10", &params("lam=0, lam2=0"), &bindings("h=6*x^(-2)")).unwrap();
    if !all_zero(&r) {
        failures.push("ode10 with 6/x^2".into());
    }
    let r = constraint_residual("sys8ad", &BTreeMap::new(), &bindings("a=a0; b=b0; q=c1")).unwrap();
    if !all_zero(&r) {
        failures.push("sys8ad with constants".into());
    }
    // c0 = 3 lam0 b0 / gamma with gamma = lam / (3 lam3).
    let r = constraint_residual("sys14ad", &BTreeMap::new(), &bindings("b=b0")).unwrap();
    let c0 = bindings("c0 = 9*lam0*lam3*b0/lam");
    let r: Vec<Expr> = r.iter().map(|x| substitute(x, &c0).unwrap()).collect();
    if !all_zero(&r) {
        failures.push("sys14ad with constant b".into());
    }

    let grid = Grid1D::new(1.0, 2.0, 1001).unwrap();
    let c = ode_constraint_check("ode10", &params("lam=0, lam2=0"), &bindings("h=6*x^(-2)"), &grid, 0.0).unwrap();
    if c.extrapolated_residual > 1e-6 {
        failures.push(format!("FD residual {:.3e}", c.extrapolated_residual));
    }
    let detail = format!(
        "symbolic: {}; FD at N = 1001: extrapolated {:.3e}, raw {:.3e}, ratio {:.3}",
        if failures.is_empty() { "all zero".to_string() } else { failures.join(", ") },
        c.extrapolated_residual,
        c.max_residual,
        c.refinement_ratio.unwrap_or(f64::NAN)
    );
    outcome(failures.is_empty(), detail)
}

fn criterion_6() -> Outcome {
    // 2p^2 + lam p + 9 lam3 - lam^2 at lam = 1, lam3 = -2/9.
    let roots = match quadratic_roots(&q(2, 1), &q(1, 1), &(q(9, 1) * q(-2, 9) - q(1, 1))) {
        QuadraticRoots::Rational(mut r) => {
            r.sort();
            r
        }
        other => return outcome(false, format!("roots {other:?}")),
    };
    let roots_ok = roots == vec![q(-3, 2), q(1, 1)];
    let inst = instantiate("thm2.v.quadratic", &params("lam=1, lam3=-2/9"), None).unwrap();
    let statuses: Vec<String> = inst
        .operators
        .iter()
        .map(|o| {
            let s = verify(&inst.pde, &o.operator, &inst.assumptions).unwrap().status;
            format!("{} {}", o.label.as_deref().unwrap_or("?"), s.as_str())
        })
        .collect();
    let ops_ok = inst.operators.len() == 2 && statuses.iter().all(|s| s.ends_with("ConditionalSymmetry"));
    let shown: Vec<String> = roots.iter().map(|r| plain(&Expr::Const(r.clone()))).collect();
    outcome(roots_ok && ops_ok, format!("p in {{{}}}; {}", shown.join(", "), statuses.join(", ")))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let grid = Grid1D::new(0.0, 1.0, 201).unwrap();
    let band = |r: &[f64]| r.last().is_some_and(|x| (3.0..=5.0).contains(x));

    let p1 = params("m=1, lam=1, lam1=-1/2, lam2=1/2, lam3=1");
    let r1 = invariant_flow_check("thm1.i", &p1, &FlowCheckOptions::new(grid, 0.5)).unwrap();
    let ok1 = r1.max_flow_deviation <= 1e-4 && band(&r1.refinement_ratios);

    let mut o2 = FlowCheckOptions::new(grid, 0.5);
    o2.profile = [1.0, 0.1];
    let r2 = invariant_flow_check("thm2.iv", &params("lam=1, lam0=0, lam2=-1"), &o2).unwrap();
    let ok2 = r2.max_flow_deviation <= 1e-4 && band(&r2.refinement_ratios);

    let mut o3 = FlowCheckOptions::new(grid, 0.5);
    o3.operator = Some(parse_operator("Q = Dt + (0*V + 1)*DV").unwrap());
    let r3 = invariant_flow_check("thm1.i", &p1, &o3).unwrap();
    let ok3 = r3.levels.iter().all(|l| l.max_flow_deviation > 1e-2);

    let took = start.elapsed();
    let pass = ok1 && ok2 && ok3 && took < Duration::from_secs(60);
    let last = |r: &[f64]| r.last().copied().unwrap_or(f64::NAN);
    outcome(
        pass,
        format!(
            "thm1.i {:.2e} (ratio {:.3}), thm2.iv {:.2e} (ratio {:.3}), control min {:.2e}, {:.1} s",
            r1.max_flow_deviation,
            last(&r1.refinement_ratios),
            r2.max_flow_deviation,
            last(&r2.refinement_ratios),
            r3.levels.iter().map(|l| l.max_flow_deviation).fold(f64::INFINITY, f64::min),
            took.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let h = FuncSym::standard("h").unwrap();
    let slots = [Slot::x(), Slot::Func(h.clone()), Slot::Func(h.derived(Coord::X).unwrap())];
    let tape = |s: &str| Tape::compile(&e(s), &slots).unwrap();
    let sys = OdeSystem::new(vec![tape("h_x"), tape("h^2")]).unwrap();
    let error = |step: f64| {
        let tr = integrate_ode(&sys, &[6.0, -12.0], 1.0, 2.0, steps_for(1.0, 2.0, step)).unwrap();
        tr.abscissae.iter().zip(&tr.states).map(|(x, s)| (s[0] - 6.0 / (x * x)).abs()).fold(0.0, f64::max)
    };
    let errors: Vec<f64> = (0..4).map(|k| error(0.1 / f64::from(1 << k))).collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let orders: Vec<f64> = ratios.iter().map(|r| r.log2()).collect();
    let pass = orders.iter().all(|o| *o >= 3.9);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    outcome(pass, format!("observed orders {}; error ratios {}", fmt(&orders), fmt(&ratios)))
}

#[test]
fn acceptance_criteria() {
    let catalog = run_catalog();
    let results = [
        criterion_1(),
        criterion_2(&catalog),
        criterion_3(&catalog),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    for (i, r) in results.iter().enumerate() {
        println!("criterion {}: {} ({})", i + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, r)| !r.pass).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
