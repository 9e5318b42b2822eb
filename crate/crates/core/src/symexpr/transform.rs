//! Point transformations of jet-form equations and operator coefficients.

use num::{One, Zero};

use super::diff::{partial, total};
use super::exponent::{AffineExponent, ExponentSymbol};
use super::poly::{Atom, Poly};
use super::subst::{substitute_poly, Bindings, SymbolKey};
use super::symbols::{Coord, Dep, FuncSym, Indep, Jet, Param};
use super::{to_poly, Expr, Rational};
use crate::error::{Error, Result};

/// Equation `lhs = rhs` in jet variables; `lhs` is normally a single jet.
#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Equation {
    pub fn new(lhs: Expr, rhs: Expr) -> Self {
        Equation { lhs, rhs }
    }

    /// `lhs - rhs`
    pub fn residual(&self) -> Expr {
        self.lhs.clone() - self.rhs.clone()
    }

    fn lead(&self) -> Result<Jet> {
        match &self.lhs {
            Expr::Jet(j) => Ok(*j),
            _ => Err(Error::Malformed("equation left side must be a single jet symbol".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointTransform {
    /// `V = U^(m+1)`. With `m: None` the exponent stays symbolic and the
    /// result is written in `n = -m/(m+1)`.
    Power {
        m: Option<Rational>,
    },
    /// Back from `V` to `U = V^(n+1)`.
    PowerInverse {
        m: Option<Rational>,
    },
    /// `V = ln U`
    Log,
    LogInverse,
    /// `y = x + c t` (the new variable keeps the name `x`).
    Galilean {
        c: Expr,
    },
    /// `W = U - k`
    AffineShift {
        k: Expr,
    },
    /// `U = W + k`
    AffineShiftInverse {
        k: Expr,
    },
}

impl PointTransform {
    pub fn inverse(&self) -> PointTransform {
        match self {
            PointTransform::Power { m } => PointTransform::PowerInverse { m: m.clone() },
            PointTransform::PowerInverse { m } => PointTransform::Power { m: m.clone() },
            PointTransform::Log => PointTransform::LogInverse,
            PointTransform::LogInverse => PointTransform::Log,
            PointTransform::Galilean { c } => PointTransform::Galilean { c: -c.clone() },
            PointTransform::AffineShift { k } => PointTransform::AffineShiftInverse { k: k.clone() },
            PointTransform::AffineShiftInverse { k } => PointTransform::AffineShift { k: k.clone() },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PointTransform::Power { .. } => "power",
            PointTransform::PowerInverse { .. } => "power-inverse",
            PointTransform::Log => "log",
            PointTransform::LogInverse => "log-inverse",
            PointTransform::Galilean { .. } => "galilean",
            PointTransform::AffineShift { .. } => "affine-shift",
            PointTransform::AffineShiftInverse { .. } => "affine-shift-inverse",
        }
    }
}

fn param(name: &str) -> Param {
    Param::new(name).expect("valid parameter")
}

fn n_of_m(m: &Rational) -> Result<Rational> {
    let k = m + Rational::one();
    if k.is_zero() {
        return Err(Error::InapplicableTransform("power substitution with m = -1 (use the log substitution)".into()));
    }
    Ok(-m / k)
}

fn bind_param(p: &Poly, name: &str, value: Poly) -> Result<Poly> {
    let mut b = Bindings::new();
    b.insert(SymbolKey::Param(param(name)), Expr::from_poly(&value));
    substitute_poly(p, &b)
}

/// How the old dependent variable is written in the new one.
struct DepChange<'a> {
    old: Dep,
    new: Dep,
    /// `old` as a polynomial in `new` (used for jets).
    phi: Poly,
    /// `old^e` in terms of `new`.
    power: &'a dyn Fn(&AffineExponent) -> Result<Poly>,
    /// Exponent symbol eliminated by the change and its replacement value.
    eliminated: Option<(ExponentSymbol, Poly)>,
}

impl DepChange<'_> {
    fn apply(&self, p: &Poly) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let mut acc = Poly::constant(c.clone());
            for (a, e) in &m.0 {
                let factor = match a {
                    Atom::Dep(d) if *d == self.old => (self.power)(e)?,
                    Atom::Jet(j) if j.dep == self.old => {
                        let mut v = self.phi.clone();
                        for _ in 0..j.t {
                            v = total(&v, Indep::T)?;
                        }
                        for _ in 0..j.x {
                            v = total(&v, Indep::X)?;
                        }
                        v.pow(&self.other_exponent(e)?)?
                    }
                    Atom::Func(f) if f.depends_on(Coord::Dep(self.old)) => {
                        if !f.is_underived() {
                            return Err(Error::Unsupported(format!(
                                "derivative `{f}` under a change of dependent variable"
                            )));
                        }
                        let args = f
                            .args()
                            .iter()
                            .map(|&c| if c == Coord::Dep(self.old) { Coord::Dep(self.new) } else { c })
                            .collect();
                        Poly::func(FuncSym::new(f.name(), args)?).pow(&self.other_exponent(e)?)?
                    }
                    Atom::Param(q)
                        if self.eliminated.as_ref().is_some_and(|(s, _)| q.exponent_symbol() == Some(*s)) =>
                    {
                        let (_, v) = self.eliminated.as_ref().expect("checked");
                        v.pow(&self.other_exponent(e)?)?
                    }
                    Atom::Exp(arg) => Poly::exp(&self.apply(arg)?)?,
                    Atom::Ln(arg) => Poly::ln(&self.apply(arg)?)?.pow(&self.other_exponent(e)?)?,
                    Atom::Radical(arg) => self.apply(arg)?.pow(&self.other_exponent(e)?)?,
                    _ => Poly::atom(a.clone()).pow(&self.other_exponent(e)?)?,
                };
                acc = acc.mul(&factor)?;
            }
            out.add_assign(&acc);
        }
        Ok(out)
    }

    fn other_exponent(&self, e: &AffineExponent) -> Result<AffineExponent> {
        match &self.eliminated {
            Some((s, _)) if !e.coeff(*s).is_zero() => Err(Error::Unsupported(format!(
                "exponent {e} of an atom other than {} involves {}",
                self.old.name(),
                s.name()
            ))),
            _ => Ok(e.clone()),
        }
    }
}

fn dep_poly(d: Dep) -> Poly {
    Poly::dep(d)
}

fn exponent_poly(e: &AffineExponent) -> Poly {
    Poly::from_exponent(e)
}

/// Apply a transform to an equation and solve for the transformed lead jet.
pub fn apply_point_transform(eq: &Equation, t: &PointTransform) -> Result<Equation> {
    let lead = eq.lead()?;
    let residual = to_poly(&eq.residual())?;
    let (mapped, target) = match t {
        PointTransform::Galilean { c } => (galilean(&residual, c)?, lead),
        _ => {
            let (old, new) = deps(t);
            if lead.dep != old {
                return Err(Error::InapplicableTransform(format!(
                    "{} expects an equation in {}",
                    t.name(),
                    old.name()
                )));
            }
            let target = match t {
                PointTransform::Power { .. } | PointTransform::Log => Jet { dep: new, t: 0, x: 2 },
                PointTransform::PowerInverse { .. } | PointTransform::LogInverse => Jet { dep: new, t: 1, x: 0 },
                _ => Jet { dep: new, ..lead },
            };
            (change(&residual, t)?, target)
        }
    };
    let rhs = solve_for(&mapped, target)?;
    Ok(Equation::new(Expr::Jet(target), Expr::from_poly(&rhs)))
}

/// Operator coefficients `(xi, eta)` (unit `d/dt` coefficient) under a transform.
pub fn transform_operator(xi: &Expr, eta: &Expr, t: &PointTransform) -> Result<(Expr, Expr)> {
    let xi = to_poly(xi)?;
    let eta = to_poly(eta)?;
    match t {
        PointTransform::Galilean { c } => {
            let cp = to_poly(c)?;
            let nx = galilean(&xi, c)?.add(&cp);
            let ne = galilean(&eta, c)?;
            Ok((Expr::from_poly(&nx.canonical()?), Expr::from_poly(&ne.canonical()?)))
        }
        _ => {
            let (_, new) = deps(t);
            let nx = change(&xi, t)?;
            let ne = change(&eta, t)?;
            // eta_new = eta_old / phi'(new)
            let phi = change(&dep_poly(deps(t).0), t)?;
            let dphi = partial(&phi, Coord::Dep(new))?;
            let ne = ne.mul(&dphi.powi(-1)?)?;
            let ne = finish(ne, t)?;
            Ok((Expr::from_poly(&finish(nx, t)?.canonical()?), Expr::from_poly(&ne.canonical()?)))
        }
    }
}

/// Rename the dependent variable `from` (and its jets) to `to`.
pub fn rename_dep(e: &Expr, from: Dep, to: Dep) -> Result<Expr> {
    let f = |a: &Atom| -> Result<Option<Poly>> {
        Ok(match a {
            Atom::Dep(d) if *d == from => Some(Poly::dep(to)),
            Atom::Jet(j) if j.dep == from => Some(Poly::jet(Jet { dep: to, ..*j })),
            Atom::Func(g) if g.depends_on(Coord::Dep(from)) => {
                return Err(Error::Unsupported(format!("renaming the argument of `{g}`")));
            }
            _ => None,
        })
    };
    Ok(Expr::from_poly(&to_poly(e)?.map_atoms(&f)?.canonical()?))
}

fn deps(t: &PointTransform) -> (Dep, Dep) {
    match t {
        PointTransform::Power { .. } | PointTransform::Log => (Dep::U, Dep::V),
        PointTransform::PowerInverse { .. } | PointTransform::LogInverse => (Dep::V, Dep::U),
        PointTransform::AffineShift { .. } => (Dep::U, Dep::W),
        PointTransform::AffineShiftInverse { .. } => (Dep::W, Dep::U),
        PointTransform::Galilean { .. } => (Dep::V, Dep::V),
    }
}

/// Binds concrete exponent values left symbolic during a power change.
fn finish(p: Poly, t: &PointTransform) -> Result<Poly> {
    match t {
        PointTransform::Power { m: Some(m) } => bind_param(&p, "n", Poly::constant(n_of_m(m)?)),
        PointTransform::PowerInverse { m: Some(m) } => {
            n_of_m(m)?;
            bind_param(&p, "m", Poly::constant(m.clone()))
        }
        _ => Ok(p),
    }
}

fn change(p: &Poly, t: &PointTransform) -> Result<Poly> {
    match t {
        PointTransform::Power { m } => {
            let mut input = p.clone();
            if let Some(m) = m {
                n_of_m(m)?;
                input = bind_param(&input, "m", Poly::constant(m.clone()))?;
            }
            // U = V^(n+1), m = -n/(n+1); U^(a m + b) = V^(-a n + b (n+1)).
            let np1 = AffineExponent::n_plus(1);
            let power = |e: &AffineExponent| -> Result<Poly> {
                if !e.n_coeff.is_zero() {
                    return Err(Error::Unsupported(format!("U-form exponent {e} involves n")));
                }
                let ne = AffineExponent {
                    n_coeff: -e.m_coeff.clone() + &e.constant,
                    m_coeff: Rational::zero(),
                    constant: e.constant.clone(),
                };
                Poly::dep(Dep::V).pow(&ne)
            };
            let n = exponent_poly(&AffineExponent::n_plus(0));
            let m_val = n.neg().mul(&exponent_poly(&np1).powi(-1)?)?;
            let dc = DepChange {
                old: Dep::U,
                new: Dep::V,
                phi: Poly::dep(Dep::V).pow(&np1)?,
                power: &power,
                eliminated: Some((ExponentSymbol::M, m_val)),
            };
            let out = dc.apply(&input)?;
            match m {
                Some(_) => finish(out, t),
                None => Ok(out),
            }
        }
        PointTransform::PowerInverse { m } => {
            let mut input = p.clone();
            if let Some(m) = m {
                input = bind_param(&input, "n", Poly::constant(n_of_m(m)?))?;
            }
            // V = U^(m+1); V^(a n + b) = U^(-a m + b (m+1)).
            let mp1 = AffineExponent::m_plus(1);
            let power = |e: &AffineExponent| -> Result<Poly> {
                if !e.m_coeff.is_zero() {
                    return Err(Error::Unsupported(format!("V-form exponent {e} involves m")));
                }
                let ne = AffineExponent {
                    n_coeff: Rational::zero(),
                    m_coeff: -e.n_coeff.clone() + &e.constant,
                    constant: e.constant.clone(),
                };
                Poly::dep(Dep::U).pow(&ne)
            };
            let mpoly = exponent_poly(&AffineExponent::m_plus(0));
            let n_val = mpoly.neg().mul(&exponent_poly(&mp1).powi(-1)?)?;
            let dc = DepChange {
                old: Dep::V,
                new: Dep::U,
                phi: Poly::dep(Dep::U).pow(&mp1)?,
                power: &power,
                eliminated: Some((ExponentSymbol::N, n_val)),
            };
            let out = dc.apply(&input)?;
            match m {
                Some(_) => finish(out, t),
                None => Ok(out),
            }
        }
        PointTransform::Log => {
            let input = bind_param(p, "m", Poly::constant(-Rational::one()))?;
            let phi = Poly::exp(&Poly::dep(Dep::V))?;
            let power = |e: &AffineExponent| -> Result<Poly> {
                let c = e
                    .as_constant()
                    .ok_or_else(|| Error::Unsupported(format!("symbolic exponent {e} under the log substitution")))?;
                Poly::exp(&Poly::dep(Dep::V).scale(c))
            };
            DepChange { old: Dep::U, new: Dep::V, phi, power: &power, eliminated: None }.apply(&input)
        }
        PointTransform::LogInverse => {
            let phi = Poly::ln(&Poly::dep(Dep::U))?;
            let power = |e: &AffineExponent| -> Result<Poly> { Poly::ln(&Poly::dep(Dep::U))?.pow(e) };
            DepChange { old: Dep::V, new: Dep::U, phi, power: &power, eliminated: None }.apply(p)
        }
        PointTransform::AffineShift { k } | PointTransform::AffineShiftInverse { k } => {
            let (old, new) = deps(t);
            let kp = to_poly(k)?;
            if kp.contains(&|a| matches!(a, Atom::Dep(_) | Atom::Jet(_) | Atom::Indep(_))) {
                return Err(Error::InapplicableTransform("shift must be a constant".into()));
            }
            let phi = match t {
                PointTransform::AffineShift { .. } => Poly::dep(new).add(&kp),
                _ => Poly::dep(new).sub(&kp),
            };
            let ph = phi.clone();
            let power = move |e: &AffineExponent| -> Result<Poly> { ph.pow(e) };
            DepChange { old, new, phi, power: &power, eliminated: None }.apply(p)
        }
        PointTransform::Galilean { c } => galilean(p, c),
    }
}

/// `y = x + c t`: old `d/dt = d/dt + c d/dy`, old `d/dx = d/dy`, `x = y - c t`.
fn galilean(p: &Poly, c: &Expr) -> Result<Poly> {
    let cp = to_poly(c)?;
    if cp.depends_on_coord(Coord::T) || cp.depends_on_coord(Coord::X) || cp.contains_jets() {
        return Err(Error::InapplicableTransform("galilean speed must be constant".into()));
    }
    let xsub = Poly::indep(Indep::X).sub(&cp.mul(&Poly::indep(Indep::T))?);
    let f = |a: &Atom| -> Result<Option<Poly>> {
        Ok(match a {
            Atom::Indep(Indep::X) => Some(xsub.clone()),
            Atom::Jet(j) => {
                let mut out = Poly::zero();
                let mut binom = Rational::one();
                for k in 0..=j.t {
                    if k > 0 {
                        binom = binom * Rational::from_integer((j.t - k + 1).into()) / Rational::from_integer(k.into());
                    }
                    let jet = Jet { dep: j.dep, t: j.t - k, x: j.x + k };
                    let term = Poly::jet(jet).mul(&cp.powi(k as i64)?)?.scale(&binom);
                    out.add_assign(&term);
                }
                Some(out)
            }
            Atom::Func(f) if f.depends_on(Coord::X) => {
                return Err(Error::Unsupported(format!("`{f}` under a galilean change of x")));
            }
            _ => None,
        })
    };
    p.map_atoms(&f)
}

/// Solve `residual = 0` for a jet appearing linearly.
fn solve_for(residual: &Poly, j: Jet) -> Result<Poly> {
    let atom = Atom::Jet(j);
    let by = residual.collect_atom(&atom);
    let mut a = Poly::zero();
    let mut b = Poly::zero();
    for (e, c) in by {
        if e.is_zero() {
            b = c;
        } else if e.is_one() {
            a = c;
        } else {
            return Err(Error::Unsupported(format!("{j} appears with exponent {e}")));
        }
    }
    if a.canonical()?.is_zero() {
        return Err(Error::Unsupported(format!("transformed equation does not contain {j}")));
    }
    if a.contains_jets() {
        return Err(Error::Unsupported(format!("coefficient of {j} contains jet symbols")));
    }
    b.neg().mul(&a.powi(-1)?)?.canonical()
}
