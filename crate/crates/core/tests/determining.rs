use condsym::invariance::{
    generate_determining_system, rational_multiple, split_determining, DeterminingSystem, Family, SymmetryOperator,
};
use condsym::parser::{parse_bindings, parse_expression};
use condsym::symexpr::render::plain;
use condsym::symexpr::{AffineExponent, Assumptions, Bindings, Expr, Rational};

fn e(s: &str) -> Expr {
    parse_expression(s).unwrap_or_else(|d| panic!("{s}: {d}"))
}

fn bindings(s: &str) -> Bindings {
    parse_bindings(s).unwrap().into_iter().collect()
}

/// Every golden equation matches a distinct generated one up to a nonzero
/// rational factor, and the counts agree.
fn assert_same_up_to_scaling(got: &DeterminingSystem, want: &[&str]) {
    let rendered: Vec<String> = got.equations.iter().map(plain).collect();
    assert_eq!(got.equations.len(), want.len(), "generated: {rendered:#?}");
    let mut used = vec![false; want.len()];
    for g in &got.equations {
        let hit = want.iter().enumerate().find(|(i, w)| {
            !used[*i] && rational_multiple(g, &e(w)).unwrap().is_some_and(|r| r != Rational::from_integer(0.into()))
        });
        match hit {
            Some((i, _)) => used[i] = true,
            None => panic!("no golden match for {}\ngenerated: {rendered:#?}", plain(g)),
        }
    }
}

fn system(fam: Family) -> DeterminingSystem {
    generate_determining_system(&fam.pde(), &SymmetryOperator::formal()).unwrap()
}

#[test]
fn power_plain_system() {
    assert_same_up_to_scaling(
        &system(Family::PowerPlain),
        &[
            "xi_VV",
            "eta_VV - 2*xi_V*(-lam - xi*V^n) - 2*xi_xV",
            "(2*xi_V*eta - 2*xi*xi_x - xi_t)*V^n - xi*eta*n*V^(n-1) - lam*xi_x + 3*xi_V*F - 2*eta_xV + xi_xx",
            "eta*F_V + (2*xi_x - eta_V)*F + n*eta^2*V^(n-1) + 2*xi_x*eta*V^n + eta_t*V^n - lam*eta_x - eta_xx",
        ],
    );
}

#[test]
fn exp_plain_system() {
    assert_same_up_to_scaling(
        &system(Family::ExpPlain),
        &[
            "xi_VV",
            "eta_VV - 2*xi_V*(-lam - xi*exp(V)) - 2*xi_xV",
            "(xi_t + 2*xi*xi_x - 2*xi_V*eta + xi*eta)*exp(V) + lam*xi_x - 3*xi_V*F + 2*eta_xV - xi_xx",
            "eta*F_V + (2*xi_x - eta_V)*F + (eta^2 + 2*xi_x*eta + eta_t)*exp(V) - lam*eta_x - eta_xx",
        ],
    );
}

#[test]
fn power_convective_system() {
    // The last two equations are listed in the opposite order in the source.
    assert_same_up_to_scaling(
        &system(Family::PowerConvective),
        &[
            "xi_VV",
            "eta_VV - 2*xi_V*(-lam*V^(n+1) - xi*V^n) - 2*xi_xV",
            "eta*F_V + (2*xi_x - eta_V)*F + n*eta^2*V^(n-1) + 2*xi_x*eta*V^n + eta_t*V^n - lam*V^(n+1)*eta_x - eta_xx",
            "lam*xi_x*V^(n+1) + ((-2*xi_V + lam*(n+1))*eta + 2*xi*xi_x + xi_t)*V^n + xi*eta*n*V^(n-1) - 3*xi_V*F + 2*eta_xV - xi_xx",
        ],
    );
}

#[test]
fn exp_convective_system() {
    assert_same_up_to_scaling(
        &system(Family::ExpConvective),
        &[
            "xi_VV",
            "eta_VV + 2*xi_V*(lam + xi)*exp(V) - 2*xi_xV",
            "(xi_t + 2*xi*xi_x + (lam + xi - 2*xi_V)*eta + lam*xi_x)*exp(V) - 3*xi_V*F + 2*eta_xV - xi_xx",
            "eta*F_V + (2*xi_x - eta_V)*F + (eta^2 + 2*xi_x*eta + eta_t - lam*eta_x)*exp(V) - eta_xx",
        ],
    );
}

#[test]
fn unsupported_family_rejected() {
    let pde = condsym::parser::parse_equation("Vxx = V^2*Vt + F(V)").unwrap();
    assert!(generate_determining_system(&pde, &SymmetryOperator::formal()).is_err());
}

fn n_ne_one() -> Assumptions {
    Assumptions::new().with_exponent_ne(AffineExponent::n_plus(0), Rational::from_integer(1.into())).unwrap()
}

const LINEAR: &str = "xi=f; eta=g*V+h";

#[test]
fn power_plain_split_with_linear_ansatz() {
    let split = split_determining(&system(Family::PowerPlain), &bindings(LINEAR), &n_ne_one()).unwrap();
    assert_same_up_to_scaling(
        &split,
        &[
            "2*f*f_x + f_t + n*f*g",
            "f*h",
            "f_xx - lam*f_x - 2*g_x",
            "(g*V+h)*F_V + (2*f_x - g)*F + n*V^(n-1)*(g*V+h)^2 - h_xx - lam*h_x - (g_xx + lam*g_x)*V \
             + (g_t + 2*f_x*g)*V^(n+1) + (h_t + 2*f_x*h)*V^n",
        ],
    );
}

#[test]
fn power_plain_split_merges_without_ledger() {
    let split = split_determining(&system(Family::PowerPlain), &bindings(LINEAR), &Assumptions::new()).unwrap();
    assert!(!split.merges.is_empty());
    assert_eq!(split.equations.len(), 3);
}

#[test]
fn exp_plain_split_with_linear_ansatz() {
    let split = split_determining(&system(Family::ExpPlain), &bindings(LINEAR), &Assumptions::new()).unwrap();
    assert_same_up_to_scaling(
        &split,
        &[
            "f*h + f_t + 2*f*f_x",
            "f*g",
            "lam*f_x + 2*g_x - f_xx",
            "(g*V+h)*F_V + (2*f_x - g)*F + (g*V+h)^2*exp(V) - h_xx - lam*h_x - (g_xx + lam*g_x)*V \
             + (g_t + 2*f_x*g)*V*exp(V) + (h_t + 2*f_x*h)*exp(V)",
        ],
    );
}

#[test]
fn power_convective_split_with_linear_ansatz() {
    let split = split_determining(&system(Family::PowerConvective), &bindings(LINEAR), &n_ne_one()).unwrap();
    // The unsplit equation before separating powers of V.
    let sys = system(Family::PowerConvective);
    let before: Vec<Expr> = sys
        .equations
        .iter()
        .map(|q| condsym::symexpr::substitute(q, &bindings(LINEAR)).unwrap())
        .filter(|q| !q.is_zero())
        .collect();
    let whole =
        e("lam*((n+1)*g + f_x)*V^(n+1) + (lam*(n+1)*h + f_t + 2*f*f_x + n*f*g)*V^n + n*f*h*V^(n-1) + 2*g_x - f_xx");
    assert!(before.iter().any(|q| rational_multiple(q, &whole).unwrap().is_some()));
    let expected = ["(n+1)*g + f_x", "lam*(n+1)*h + f_t + 2*f*f_x + n*f*g", "f*h", "2*g_x - f_xx"];
    for w in expected {
        assert!(split.equations.iter().any(|q| rational_multiple(q, &e(w)).unwrap().is_some()), "missing {w}");
    }
}
