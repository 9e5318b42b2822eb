//! Exact symbolic expressions over the rationals.

mod assumptions;
mod collect;
mod diff;
mod eval;
mod exponent;
mod expr;
pub mod poly;
pub mod render;
mod subst;
mod symbols;
mod transform;

pub use assumptions::{Assumptions, Inequation};
pub use collect::{collect_powers, AtomClass, Collected};
pub use diff::{differentiate, Var};
pub use eval::{equal, equal_with, evaluate, EqualityCheck, EvalPoint, EvalValue};
pub use exponent::{AffineExponent, ExponentSymbol};
pub use expr::Expr;
pub use poly::Limits;
pub use subst::{substitute, Bindings, SymbolKey};
pub use symbols::{is_parameter_name, Coord, Dep, FuncSym, Indep, Jet, Param, FUNCTION_NAMES};
pub use transform::{apply_point_transform, Equation, PointTransform};

pub(crate) use diff::{partial, partial_jet, total};
pub(crate) use eval::default_seed;
pub(crate) use subst::{parse_jet, poly_to_exponent};
pub use transform::{rename_dep, transform_operator};

use crate::error::Result;
use poly::Poly;

pub type Rational = num::BigRational;

/// Canonical form with the default size limit.
pub fn normalize(e: &Expr) -> Result<Expr> {
    normalize_with(e, &Limits::default())
}

pub fn normalize_with(e: &Expr, lim: &Limits) -> Result<Expr> {
    Ok(Expr::from_poly(&to_poly_with(e, lim)?.canonical()?))
}

pub(crate) fn to_poly(e: &Expr) -> Result<Poly> {
    to_poly_with(e, &Limits::default())
}

pub(crate) fn to_poly_with(e: &Expr, lim: &Limits) -> Result<Poly> {
    Ok(match e {
        Expr::Const(c) => Poly::constant(c.clone()),
        Expr::Param(p) => Poly::param(p.clone()),
        Expr::Indep(i) => Poly::indep(*i),
        Expr::Dep(d) => Poly::dep(*d),
        Expr::Jet(j) => Poly::jet(*j),
        Expr::Func(f) => Poly::func(f.clone()),
        Expr::Sum(items) => {
            let mut acc = Poly::zero();
            for it in items {
                acc.add_assign(&to_poly_with(it, lim)?);
                if acc.len() > lim.max_terms {
                    return Err(crate::error::Error::SizeLimit { limit: lim.max_terms });
                }
            }
            acc
        }
        Expr::Product(items) => {
            let mut acc = Poly::one();
            for it in items {
                acc = acc.mul_with(&to_poly_with(it, lim)?, lim)?;
            }
            acc
        }
        Expr::Power(b, ex) => to_poly_with(b, lim)?.pow_with(ex, lim)?,
        Expr::Exp(a) => Poly::exp(&to_poly_with(a, lim)?)?,
        Expr::Ln(a) => Poly::ln(&to_poly_with(a, lim)?)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n() -> AffineExponent {
        AffineExponent::n_plus(0)
    }

    #[test]
    fn exponent_arithmetic_cancels() {
        let e = Expr::v() * Expr::v().pow(n()) - Expr::v().pow(AffineExponent::n_plus(1));
        assert!(normalize(&e).unwrap().is_zero());
    }

    #[test]
    fn expansion_of_reaction_term() {
        let e = (Expr::param("lam1") * Expr::v() + Expr::param("lam2")) * (Expr::param("lam3") - Expr::v().pow(n()));
        let want = Expr::param("lam1") * Expr::param("lam3") * Expr::v() + Expr::param("lam2") * Expr::param("lam3")
            - Expr::param("lam1") * Expr::v().pow(AffineExponent::n_plus(1))
            - Expr::param("lam2") * Expr::v().pow(n());
        assert_eq!(normalize(&e).unwrap(), normalize(&want).unwrap());
        assert!(matches!(normalize(&e).unwrap(), Expr::Sum(ref v) if v.len() == 4));
    }

    #[test]
    fn idempotent() {
        let e = (Expr::v() + 1).powi(3) / (Expr::v() + 1) + Expr::v().exp() * Expr::v().exp();
        let once = normalize(&e).unwrap();
        assert_eq!(normalize(&once).unwrap(), once);
    }

    #[test]
    fn size_limit_aborts() {
        let e = (Expr::v() + Expr::param("lam") + Expr::param("n") + Expr::t() + 1).powi(12);
        let lim = Limits { max_terms: 200 };
        assert!(matches!(normalize_with(&e, &lim), Err(crate::error::Error::SizeLimit { .. })));
    }
}
