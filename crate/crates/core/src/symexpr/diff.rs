use super::exponent::AffineExponent;
use super::poly::{Atom, Monomial, Poly};
use super::symbols::{Coord, Dep, Indep, Jet};
use super::{Expr, Rational};
use crate::error::Result;

/// Differentiation variable.
///
/// Independent variables give *total* derivatives (`V` is a function of
/// `(t, x)` in jet notation); dependent and jet symbols give partial
/// derivatives with every other jet coordinate held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Indep(Indep),
    Dep(Dep),
    Jet(Jet),
}

impl From<Indep> for Var {
    fn from(i: Indep) -> Var {
        Var::Indep(i)
    }
}

impl From<Jet> for Var {
    fn from(j: Jet) -> Var {
        Var::Jet(j)
    }
}

impl From<Dep> for Var {
    fn from(d: Dep) -> Var {
        Var::Dep(d)
    }
}

pub fn differentiate(e: &Expr, v: Var) -> Result<Expr> {
    let p = super::to_poly(e)?;
    let d = match v {
        Var::Indep(i) => total(&p, i)?,
        Var::Dep(d) => partial(&p, Coord::Dep(d))?,
        Var::Jet(j) => partial_jet(&p, j)?,
    };
    Ok(Expr::from_poly(&d.canonical()?))
}

/// Total derivative `D_t` / `D_x`.
pub fn total(p: &Poly, i: Indep) -> Result<Poly> {
    derive(p, &|a| {
        Ok(match a {
            Atom::Indep(j) if *j == i => Poly::one(),
            Atom::Dep(d) => Poly::jet(Jet { dep: *d, t: (i == Indep::T) as u8, x: (i == Indep::X) as u8 }),
            Atom::Jet(j) => Poly::jet(j.bump(i)),
            Atom::Func(f) => {
                let mut out = Poly::zero();
                for &arg in f.args() {
                    match arg {
                        Coord::Indep(j) if j == i => {
                            out.add_assign(&Poly::func(f.derived(arg).expect("declared argument")));
                        }
                        Coord::Dep(d) => {
                            let df = Poly::func(f.derived(arg).expect("declared argument"));
                            let dd = Poly::jet(Jet { dep: d, t: (i == Indep::T) as u8, x: (i == Indep::X) as u8 });
                            out.add_assign(&df.mul(&dd)?);
                        }
                        _ => {}
                    }
                }
                out
            }
            _ => Poly::zero(),
        })
    })
}

/// Partial derivative with respect to a jet-space coordinate.
pub fn partial(p: &Poly, c: Coord) -> Result<Poly> {
    derive(p, &|a| {
        Ok(match (a, c) {
            (Atom::Indep(j), Coord::Indep(k)) if *j == k => Poly::one(),
            (Atom::Dep(d), Coord::Dep(e)) if *d == e => Poly::one(),
            (Atom::Func(f), _) => f.derived(c).map(Poly::func).unwrap_or_default(),
            _ => Poly::zero(),
        })
    })
}

pub fn partial_jet(p: &Poly, j: Jet) -> Result<Poly> {
    derive(p, &|a| {
        Ok(match a {
            Atom::Jet(k) if *k == j => Poly::one(),
            _ => Poly::zero(),
        })
    })
}

/// Product and chain rule over the canonical form; `base` differentiates
/// plain atoms.
fn derive(p: &Poly, base: &dyn Fn(&Atom) -> Result<Poly>) -> Result<Poly> {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        for (a, e) in &m.0 {
            let inner = match a {
                Atom::Exp(arg) => derive(arg, base)?,
                Atom::Ln(arg) => {
                    let da = derive(arg, base)?;
                    if da.is_zero() {
                        continue;
                    }
                    da.mul(&arg.powi(-1)?)?
                }
                Atom::Radical(arg) => derive(arg, base)?,
                _ => base(a)?,
            };
            if inner.is_zero() {
                continue;
            }
            let mut rest = m.0.clone();
            let factor = match a {
                // exp(arg) stays in place, chain rule supplies arg'.
                Atom::Exp(_) => Poly::constant(c.clone()),
                _ => {
                    let lowered = e - &AffineExponent::one();
                    if lowered.is_zero() {
                        rest.remove(a);
                    } else {
                        rest.insert(a.clone(), lowered);
                    }
                    Poly::from_exponent(e).scale(c)
                }
            };
            let term = Poly::term(Rational::from_integer(1.into()), Monomial::one())
                .mul_monomial(&Monomial(rest))?
                .mul(&factor)?
                .mul(&inner)?;
            out.add_assign(&term);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{normalize, AffineExponent};

    #[test]
    fn power_rule_with_symbolic_exponent() {
        // d/dV (V^n Vt) = n V^(n-1) Vt
        let e = Expr::v().pow(AffineExponent::n_plus(0)) * Expr::jet(Jet::vt());
        let d = differentiate(&e, Var::Dep(Dep::V)).unwrap();
        let want =
            normalize(&(Expr::param("n") * Expr::v().pow(AffineExponent::n_plus(-1)) * Expr::jet(Jet::vt()))).unwrap();
        assert_eq!(d, want);
    }

    #[test]
    fn formal_function_derivatives_increment_multi_index() {
        let f = Expr::func("F");
        let d2 = differentiate(&differentiate(&f, Var::Dep(Dep::V)).unwrap(), Var::Dep(Dep::V)).unwrap();
        assert_eq!(crate::symexpr::render::plain(&d2), "F_VV");
    }

    #[test]
    fn total_time_derivative_through_jets() {
        // D_t (exp(V) Vt) = exp(V) Vt^2 + exp(V) Vtt
        let e = Expr::v().exp() * Expr::jet(Jet::vt());
        let d = differentiate(&e, Var::Indep(Indep::T)).unwrap();
        let want =
            normalize(&(Expr::v().exp() * Expr::jet(Jet::vt()).powi(2) + Expr::v().exp() * Expr::jet(Jet::vtt())))
                .unwrap();
        assert_eq!(d, want);
    }

    #[test]
    fn total_derivative_of_function_of_v() {
        // D_x xi(t,x,V) = xi_x + xi_V Vx
        let d = differentiate(&Expr::func("xi"), Var::Indep(Indep::X)).unwrap();
        assert_eq!(crate::symexpr::render::plain(&d), "Vx*xi_V+xi_x");
    }

    #[test]
    fn unrelated_symbol_gives_zero() {
        let d = differentiate(&Expr::param("lam"), Var::Jet(Jet::vx())).unwrap();
        assert!(d.is_zero());
    }
}
