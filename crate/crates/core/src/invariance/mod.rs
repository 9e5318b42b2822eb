//! Prolongation, conditional and classical invariance, and determining systems.

mod determining;
mod pde;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use determining::{
    determining_system_for, generate_determining_system, rational_multiple, split_determining, DeterminingSystem,
    Family,
};
pub use pde::{EvolutionPDE, Origin, RawOperator, SymmetryOperator};

use crate::error::{Error, Result};
use crate::symexpr::default_seed;
use crate::symexpr::poly::{Atom, Poly};
use crate::symexpr::{
    equal_with, normalize, partial, partial_jet, to_poly, total, Assumptions, Coord, Dep, Expr, Indep, Jet,
};

/// Second prolongation coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Prolongation {
    pub eta_t: Expr,
    pub eta_x: Expr,
    pub eta_xx: Expr,
}

struct Prolonged {
    t: Poly,
    x: Poly,
    xx: Poly,
}

fn prolong_poly(tau: &Poly, xi: &Poly, eta: &Poly) -> Result<Prolonged> {
    let vt = Poly::jet(Jet::vt());
    let vx = Poly::jet(Jet::vx());
    // Characteristic eta - tau Vt - xi Vx.
    let ch = eta.sub(&tau.mul(&vt)?).sub(&xi.mul(&vx)?);
    let cx = total(&ch, Indep::X)?;
    let t = total(&ch, Indep::T)?.add(&tau.mul(&Poly::jet(Jet::vtt()))?).add(&xi.mul(&Poly::jet(Jet::vtx()))?);
    let x = cx.add(&tau.mul(&Poly::jet(Jet::vtx()))?).add(&xi.mul(&Poly::jet(Jet::vxx()))?);
    let xx = total(&cx, Indep::X)?
        .add(&tau.mul(&Poly::jet(Jet { dep: Dep::V, t: 1, x: 2 }))?)
        .add(&xi.mul(&Poly::jet(Jet { dep: Dep::V, t: 0, x: 3 }))?);
    Ok(Prolonged { t: t.canonical()?, x: x.canonical()?, xx: xx.canonical()? })
}

fn check_v(op: &SymmetryOperator) -> Result<()> {
    if op.dep != Dep::V {
        return Err(Error::UnsupportedClass("prolongation runs in V-coordinates".into()));
    }
    op.check_variables()
}

/// Second prolongation of a normalized operator in V-coordinates.
pub fn prolong2(op: &SymmetryOperator) -> Result<Prolongation> {
    check_v(op)?;
    let p = prolong_poly(&Poly::one(), &to_poly(&op.xi)?, &to_poly(&op.eta)?)?;
    Ok(Prolongation { eta_t: Expr::from_poly(&p.t), eta_x: Expr::from_poly(&p.x), eta_xx: Expr::from_poly(&p.xx) })
}

/// `pr Q` applied to `delta`.
fn apply_prolonged(delta: &Poly, tau: &Poly, xi: &Poly, eta: &Poly) -> Result<Poly> {
    let pr = prolong_poly(tau, xi, eta)?;
    let mut out = tau.mul(&partial(delta, Coord::T)?)?;
    out.add_assign(&xi.mul(&partial(delta, Coord::X)?)?);
    out.add_assign(&eta.mul(&partial(delta, Coord::V)?)?);
    out.add_assign(&pr.t.mul(&partial_jet(delta, Jet::vt())?)?);
    out.add_assign(&pr.x.mul(&partial_jet(delta, Jet::vx())?)?);
    out.add_assign(&pr.xx.mul(&partial_jet(delta, Jet::vxx())?)?);
    Ok(out)
}

/// Replace jets by the given right sides until none is left.
fn eliminate(p: &Poly, rules: &[(Jet, Poly)]) -> Result<Poly> {
    let mut cur = p.clone();
    for _ in 0..8 {
        let present = rules.iter().any(|(j, _)| cur.contains(&|a| *a == Atom::Jet(*j)));
        if !present {
            return cur.canonical();
        }
        let f = |a: &Atom| -> Result<Option<Poly>> {
            Ok(match a {
                Atom::Jet(j) => rules.iter().find(|(k, _)| k == j).map(|(_, v)| v.clone()),
                _ => None,
            })
        };
        cur = cur.map_atoms(&f)?;
    }
    Err(Error::Soundness("jet elimination did not terminate".into()))
}

fn pde_polys(pde: &EvolutionPDE) -> Result<(Poly, Poly)> {
    Ok((to_poly(&pde.delta())?, to_poly(&pde.rhs())?))
}

/// Conditional-invariance residual as a polynomial in `Vx` (the sign is
/// chosen so its `Vx`-coefficients read like the classical determining
/// equations).
pub fn conditional_residual(pde: &EvolutionPDE, op: &SymmetryOperator) -> Result<Expr> {
    Ok(Expr::from_poly(&conditional_poly(pde, op)?))
}

fn conditional_poly(pde: &EvolutionPDE, op: &SymmetryOperator) -> Result<Poly> {
    let op = op.in_v(pde)?;
    check_v(&op)?;
    if pde.f0.is_zero() {
        return Err(Error::UnsupportedClass("F0 is identically zero".into()));
    }
    let (delta, rhs) = pde_polys(pde)?;
    let xi = to_poly(&op.xi)?;
    let eta = to_poly(&op.eta)?;
    let applied = apply_prolonged(&delta, &Poly::one(), &xi, &eta)?.neg();
    let isc = eta.sub(&xi.mul(&Poly::jet(Jet::vx()))?);
    let rules = vec![
        (Jet::vtt(), total(&isc, Indep::T)?),
        (Jet::vtx(), total(&isc, Indep::X)?),
        (Jet::vxx(), rhs),
        (Jet::vt(), isc),
    ];
    let out = eliminate(&applied, &rules)?;
    if out.contains(&|a| matches!(a, Atom::Jet(j) if *j != Jet::vx())) {
        return Err(Error::Soundness("residual still contains jets other than Vx".into()));
    }
    Ok(out)
}

/// Coefficients of `Vx^0, Vx^1, ...` of the conditional residual.
pub fn residual_coefficients(pde: &EvolutionPDE, op: &SymmetryOperator) -> Result<Vec<Expr>> {
    coefficients_in_vx(&conditional_poly(pde, op)?)
}

pub(crate) fn coefficients_in_vx(p: &Poly) -> Result<Vec<Expr>> {
    let by = p.collect_atom(&Atom::Jet(Jet::vx()));
    let mut out: Vec<Expr> = Vec::new();
    for (e, c) in by {
        let k = match e.as_integer() {
            Some(k) if (0..=16).contains(&k) => k as usize,
            _ => return Err(Error::Soundness(format!("residual has Vx exponent {e}"))),
        };
        if out.len() <= k {
            out.resize(k + 1, Expr::zero());
        }
        out[k] = Expr::from_poly(&c.canonical()?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    ConditionalSymmetry,
    LieSymmetry,
    NotASymmetry,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::ConditionalSymmetry => "ConditionalSymmetry",
            Status::LieSymmetry => "LieSymmetry",
            Status::NotASymmetry => "NotASymmetry",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// First nonzero residual coefficient (lowest `Vx` degree).
    pub witness: Option<Expr>,
    pub witness_degree: Option<usize>,
    /// Multiplier turning the operator into a Lie symmetry.
    pub multiplier: Option<Expr>,
    /// Randomized evaluation points used by the soundness monitor.
    pub checked_points: usize,
}

/// Conditional symmetry test refined by the Lie test.
pub fn verify(pde: &EvolutionPDE, op: &SymmetryOperator, assumptions: &Assumptions) -> Result<Verdict> {
    let coeffs = residual_coefficients(pde, op)?;
    let mut rng = ChaCha8Rng::seed_from_u64(default_seed());
    let mut points = 0;
    for (k, c) in coeffs.iter().enumerate() {
        let check = equal_with(c, &Expr::zero(), assumptions, &mut rng)?;
        points += check.points;
        if !check.equal {
            return Ok(Verdict {
                status: Status::NotASymmetry,
                witness: Some(c.clone()),
                witness_degree: Some(k),
                multiplier: None,
                checked_points: points,
            });
        }
    }
    let lie = lie_multiplier(pde, op)?;
    Ok(Verdict {
        status: if lie.is_some() { Status::LieSymmetry } else { Status::ConditionalSymmetry },
        witness: None,
        witness_degree: None,
        multiplier: lie.filter(|m| *m != Expr::one()),
        checked_points: points,
    })
}

/// Classical invariance residual of `tau d/dt + xi d/dx + eta d/dV`:
/// only `Vxx` is eliminated.
pub fn classical_residual(pde: &EvolutionPDE, raw: &RawOperator) -> Result<Expr> {
    let (delta, rhs) = pde_polys(pde)?;
    let tau = to_poly(&raw.tau)?;
    let xi = to_poly(&raw.xi)?;
    let eta = to_poly(&raw.eta)?;
    let applied = apply_prolonged(&delta, &tau, &xi, &eta)?;
    Ok(Expr::from_poly(&eliminate(&applied, &[(Jet::vxx(), rhs)])?))
}

/// Is the operator (as normalized) a Lie symmetry?
pub fn is_lie_symmetry(pde: &EvolutionPDE, op: &SymmetryOperator) -> Result<bool> {
    Ok(lie_multiplier(pde, op)?.is_some())
}

/// A multiplier `M` such that `M Q` passes the classical test: `1` first,
/// then the product of the denominators of `xi` and `eta`, then that product
/// times each exponential atom or its reciprocal.
pub fn lie_multiplier(pde: &EvolutionPDE, op: &SymmetryOperator) -> Result<Option<Expr>> {
    let op = op.in_v(pde)?;
    check_v(&op)?;
    let raw = op.raw();
    if classical_residual(pde, &raw)?.is_zero() {
        return Ok(Some(Expr::one()));
    }
    let den = denominator(&[&op.xi, &op.eta])?;
    let base = raw.scaled(&den)?;
    if den != Expr::one() && classical_residual(pde, &base)?.is_zero() {
        return Ok(Some(den));
    }
    for e in exp_atoms(&[&base.tau, &base.xi, &base.eta])? {
        for k in [-1, 1] {
            let m = normalize(&(den.clone() * e.clone().powi(k)))?;
            if classical_residual(pde, &raw.scaled(&m)?)?.is_zero() {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}

/// Distinct `exp(..)` atoms in the given expressions.
fn exp_atoms(es: &[&Expr]) -> Result<Vec<Expr>> {
    let mut out: Vec<Expr> = Vec::new();
    for e in es {
        for (m, _) in to_poly(e)?.canonical()?.terms() {
            for a in m.0.keys() {
                if let Atom::Exp(q) = a {
                    let x = Expr::from_poly(&Poly::atom(Atom::Exp(q.clone())));
                    if !out.contains(&x) {
                        out.push(x);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Product of the atoms carrying negative exponents in the given expressions.
fn denominator(es: &[&Expr]) -> Result<Expr> {
    let mut den = Poly::one();
    let mut seen: Vec<Atom> = Vec::new();
    for e in es {
        let p = to_poly(e)?.canonical()?;
        for (m, _) in p.terms() {
            for (a, ex) in &m.0 {
                let neg = ex.as_constant().is_some_and(|c| c < &num::zero());
                if neg && !matches!(a, Atom::Dep(_)) && !seen.contains(a) {
                    seen.push(a.clone());
                    den = den.mul(&Poly::atom(a.clone()).pow(&-ex)?)?;
                }
            }
        }
    }
    Ok(Expr::from_poly(&den.canonical()?))
}

/// `M` with `op2 = M op1`, if the three coefficient ratios agree.
pub fn equivalent_up_to_multiplier(op1: &RawOperator, op2: &RawOperator) -> Result<Option<Expr>> {
    if op1.dep != op2.dep {
        return Ok(None);
    }
    let t1 = to_poly(&op1.tau)?;
    let t2 = to_poly(&op2.tau)?;
    if t1.canonical()?.is_zero() || t2.canonical()?.is_zero() {
        return Err(Error::UnsupportedClass("d/dt coefficient is identically zero".into()));
    }
    // Cross-multiplied: xi2 tau1 = xi1 tau2, eta2 tau1 = eta1 tau2.
    for (a, b) in [(&op1.xi, &op2.xi), (&op1.eta, &op2.eta)] {
        let lhs = to_poly(b)?.mul(&t1)?;
        let rhs = to_poly(a)?.mul(&t2)?;
        if !lhs.sub(&rhs).canonical()?.is_zero() {
            return Ok(None);
        }
    }
    let m = t2.mul(&t1.powi(-1)?)?.canonical()?;
    Ok(Some(Expr::from_poly(&m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_equation, parse_expression, parse_operator};
    use crate::symexpr::FuncSym;

    fn e(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn trivial_prolongation() {
        let p = prolong2(&SymmetryOperator::new(Expr::zero(), Expr::zero()).unwrap()).unwrap();
        assert!(p.eta_t.is_zero() && p.eta_x.is_zero() && p.eta_xx.is_zero());
    }

    #[test]
    fn prolongation_of_eta_of_v() {
        let eta = Expr::Func(FuncSym::new("eta", vec![Coord::V]).unwrap());
        let p = prolong2(&SymmetryOperator::new(Expr::zero(), eta).unwrap()).unwrap();
        assert_eq!(p.eta_x, e("D(eta(V),V)*Vx"));
        assert_eq!(p.eta_xx, e("D(eta(V),V,2)*Vx^2 + D(eta(V),V)*Vxx"));
    }

    #[test]
    fn prolongation_of_linear_ansatz() {
        let op = SymmetryOperator::new(e("f"), e("g*V+h")).unwrap();
        let p = prolong2(&op).unwrap();
        assert_eq!(p.eta_t, e("g_t*V + h_t + g*Vt - f_t*Vx"));
    }

    #[test]
    fn theorem_one_first_case_canonical() {
        let pde = parse_equation("Vxx = V^n*Vt - lam*Vx + (lam1s*V+lam2s)*(lam3-V^n)").unwrap();
        let op = parse_operator("Q = Dt + (lam1s*V+lam2s)*DV").unwrap();
        let r = conditional_residual(&pde, &op).unwrap();
        assert!(r.is_zero(), "{}", crate::symexpr::render::plain(&r));
        let v = verify(&pde, &op, &Assumptions::power_family()).unwrap();
        assert_eq!(v.status, Status::ConditionalSymmetry);
    }

    #[test]
    fn perturbed_reaction_gives_witness() {
        let pde = parse_equation("Vxx = V^n*Vt - lam*Vx + (lam1s*V+lam2s)*(lam3-V^n) + 1").unwrap();
        let op = parse_operator("Q = Dt + (lam1s*V+lam2s)*DV").unwrap();
        let v = verify(&pde, &op, &Assumptions::power_family()).unwrap();
        assert_eq!(v.status, Status::NotASymmetry);
        assert_eq!(v.witness, Some(normalize(&-Expr::param("lam1s")).unwrap()));
    }

    #[test]
    fn time_translation_is_lie() {
        let pde = parse_equation("Vxx = Vt").unwrap();
        let op = parse_operator("Q = Dt").unwrap();
        assert_eq!(verify(&pde, &op, &Assumptions::new()).unwrap().status, Status::LieSymmetry);
    }

    #[test]
    fn multiplier_recovered() {
        let op = parse_operator("Q = Dt + (lam1*U + lam2*U^(-m))*DU").unwrap().raw();
        let scaled = op.scaled(&Expr::int(3)).unwrap();
        assert_eq!(equivalent_up_to_multiplier(&op, &scaled).unwrap(), Some(Expr::int(3)));
        let other = RawOperator::new(Expr::one(), Expr::one(), op.eta.clone(), op.dep);
        assert_eq!(equivalent_up_to_multiplier(&op, &other).unwrap(), None);
    }
}
