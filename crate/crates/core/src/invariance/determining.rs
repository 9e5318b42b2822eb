use std::fmt;

use crate::error::{Error, Result};
use crate::symexpr::poly::{Atom, Poly};
use crate::symexpr::{
    collect_powers, normalize, substitute, to_poly, Assumptions, Bindings, Dep, Expr, FuncSym, Param, Rational,
};

use super::pde::{v_pow_n, EvolutionPDE, SymmetryOperator};
use super::residual_coefficients;

/// The four canonical families with formal `F(V)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    PowerPlain,
    PowerConvective,
    ExpPlain,
    ExpConvective,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::PowerPlain, Family::ExpPlain, Family::PowerConvective, Family::ExpConvective];

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::PowerPlain => "power-plain",
            Family::PowerConvective => "power-convective",
            Family::ExpPlain => "exp-plain",
            Family::ExpConvective => "exp-convective",
        }
    }

    fn f0(&self) -> Expr {
        match self {
            Family::PowerPlain | Family::PowerConvective => v_pow_n(0),
            Family::ExpPlain | Family::ExpConvective => Expr::v().exp(),
        }
    }

    fn f1(&self) -> Expr {
        let lam = Expr::param("lam");
        match self {
            Family::PowerPlain | Family::ExpPlain => -lam,
            Family::PowerConvective => -lam * v_pow_n(1),
            Family::ExpConvective => -lam * Expr::v().exp(),
        }
    }

    pub fn pde(&self) -> EvolutionPDE {
        EvolutionPDE::new(self.f0(), self.f1(), Expr::func("F")).expect("family is an evolution equation")
    }

    pub fn assumptions(&self) -> Assumptions {
        let base = match self {
            Family::PowerPlain | Family::PowerConvective => Assumptions::power_family(),
            _ => Assumptions::new(),
        };
        base.with_nonzero(Param::new("lam").expect("name"))
    }

    fn matching(pde: &EvolutionPDE) -> Result<Option<Family>> {
        for fam in Family::ALL {
            if normalize(&fam.f0())? == pde.f0 && normalize(&fam.f1())? == pde.f1 {
                return Ok(Some(fam));
            }
        }
        Ok(None)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Equations (each `= 0`) in formal unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingSystem {
    pub equations: Vec<Expr>,
    pub unknowns: Vec<FuncSym>,
    pub assumptions: Assumptions,
    /// Exponent classes merged because the ledger could not separate them.
    pub merges: Vec<String>,
}

impl DeterminingSystem {
    fn build(equations: Vec<Expr>, assumptions: Assumptions, merges: Vec<String>) -> Result<Self> {
        let mut unknowns: Vec<FuncSym> = Vec::new();
        for e in &equations {
            let p = to_poly(e)?;
            collect_funcs(&p, &mut unknowns);
        }
        unknowns.sort();
        Ok(DeterminingSystem { equations, unknowns, assumptions, merges })
    }
}

fn collect_funcs(p: &Poly, out: &mut Vec<FuncSym>) {
    for (m, _) in p.terms() {
        for a in m.0.keys() {
            match a {
                Atom::Func(f) => {
                    let b = f.base();
                    if !out.contains(&b) {
                        out.push(b);
                    }
                }
                Atom::Exp(q) | Atom::Ln(q) | Atom::Radical(q) => collect_funcs(q, out),
                _ => {}
            }
        }
    }
}

/// The `Vx`-coefficients (degree 3 down to 0) of the conditional residual of
/// `pde` for `ansatz`, without checking the family menu.
pub fn determining_system_for(pde: &EvolutionPDE, ansatz: &SymmetryOperator) -> Result<DeterminingSystem> {
    let mut coeffs = residual_coefficients(pde, ansatz)?;
    if coeffs.len() > 4 {
        return Err(Error::Soundness(format!("residual has degree {} in Vx", coeffs.len() - 1)));
    }
    coeffs.resize(4, Expr::zero());
    coeffs.reverse();
    let equations = coeffs.into_iter().filter(|e| !e.is_zero()).collect();
    DeterminingSystem::build(equations, pde.default_assumptions(), vec![])
}

/// Determining system of one of the four families for the formal ansatz
/// (or a more specific one).
pub fn generate_determining_system(pde: &EvolutionPDE, ansatz: &SymmetryOperator) -> Result<DeterminingSystem> {
    let fam = Family::matching(pde)?.ok_or_else(|| {
        Error::UnsupportedClass("F0 must be V^n or exp(V) and F1 one of -lam, -lam*V^(n+1), -lam*exp(V)".into())
    })?;
    if pde.f2 != Expr::func("F") {
        return Err(Error::UnsupportedClass("F2 must be the formal function F".into()));
    }
    let mut sys = determining_system_for(pde, ansatz)?;
    sys.assumptions = fam.assumptions();
    Ok(sys)
}

/// Substitute a partial solution and split every equation by powers of `V`.
/// Equations whose coefficients still depend on `V` (through `F`) are kept
/// whole.
pub fn split_determining(
    system: &DeterminingSystem,
    bindings: &Bindings,
    assumptions: &Assumptions,
) -> Result<DeterminingSystem> {
    let ass = system.assumptions.merged(assumptions)?;
    let mut equations = Vec::new();
    let mut merges = Vec::new();
    for eq in &system.equations {
        let e = substitute(eq, bindings)?;
        if e.is_zero() {
            continue;
        }
        match collect_powers(&e, Dep::V, &ass) {
            Ok(c) => {
                merges.extend(c.merges);
                for (_, coef) in c.classes {
                    equations.push(strip_nonzero_factors(&coef, &ass)?);
                }
            }
            Err(Error::NotSplittable(_)) => equations.push(strip_nonzero_factors(&e, &ass)?),
            Err(other) => return Err(other),
        }
    }
    DeterminingSystem::build(equations, ass, merges)
}

/// Divide out parameter factors common to every term when the ledger says
/// they are nonzero.
fn strip_nonzero_factors(e: &Expr, ass: &Assumptions) -> Result<Expr> {
    let p = to_poly(e)?.canonical()?;
    let Some((first, _)) = p.terms().next() else {
        return Ok(e.clone());
    };
    let mut common = Poly::one();
    let mut found = false;
    for a in first.0.keys() {
        let Atom::Param(q) = a else { continue };
        if !ass.param_nonzero(q) {
            continue;
        }
        let k = p
            .terms()
            .filter_map(|(m, _)| m.0.get(a).and_then(|x| x.as_integer()))
            .filter(|k| *k > 0)
            .min()
            .unwrap_or(0);
        if k > 0 && p.terms().all(|(m, _)| m.0.get(a).and_then(|x| x.as_integer()).is_some_and(|j| j >= k)) {
            common = common.mul(&Poly::atom(a.clone()).powi(k)?)?;
            found = true;
        }
    }
    if !found {
        return Ok(e.clone());
    }
    let q = p.mul(&common.powi(-1)?)?.canonical()?;
    Ok(Expr::from_poly(&q))
}

/// `r` with `a = r b`, both nonzero.
pub fn rational_multiple(a: &Expr, b: &Expr) -> Result<Option<Rational>> {
    let pa = to_poly(a)?.canonical()?;
    let pb = to_poly(b)?.canonical()?;
    if pa.is_zero() || pb.is_zero() {
        return Ok((pa.is_zero() && pb.is_zero()).then(|| Rational::from_integer(1.into())));
    }
    let (Some((ma, ca)), Some((mb, cb))) = (pa.leading_term(), pb.leading_term()) else {
        return Ok(None);
    };
    if ma != mb {
        return Ok(None);
    }
    let r = ca / cb;
    Ok(pa.sub(&pb.scale(&r)).canonical()?.is_zero().then_some(r))
}
