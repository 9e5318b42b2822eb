use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{One, Zero};

use super::exponent::AffineExponent;
use super::poly::{Atom, Poly};
use super::symbols::{Coord, Dep, FuncSym, Indep, Jet, Param};
use super::Rational;

/// Immutable symbolic expression tree.
///
/// Trees built with the arithmetic operators are *raw*; [`super::normalize`]
/// turns them into the canonical shape (a flat `Sum` of `Product`s with
/// exact rational coefficients, sorted by a fixed total order).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expr {
    Const(Rational),
    Param(Param),
    Indep(Indep),
    Dep(Dep),
    Jet(Jet),
    Func(FuncSym),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, AffineExponent),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
}

impl Expr {
    pub fn int(i: i64) -> Expr {
        Expr::Const(Rational::from_integer(i.into()))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::Const(Rational::new(p.into(), q.into()))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    /// Parameter by name. Panics on names that are not parameter spellings;
    /// use [`Param::new`] for untrusted input.
    pub fn param(name: &str) -> Expr {
        Expr::Param(Param::new(name).expect("valid parameter name"))
    }

    pub fn t() -> Expr {
        Expr::Indep(Indep::T)
    }

    pub fn x() -> Expr {
        Expr::Indep(Indep::X)
    }

    pub fn u() -> Expr {
        Expr::Dep(Dep::U)
    }

    pub fn v() -> Expr {
        Expr::Dep(Dep::V)
    }

    pub fn jet(j: Jet) -> Expr {
        Expr::Jet(j)
    }

    /// Formal function with its default signature, e.g. `F(V)`, `xi(t,x,V)`.
    pub fn func(name: &str) -> Expr {
        Expr::Func(FuncSym::standard(name).expect("known function name"))
    }

    pub fn func_of(name: &str, args: Vec<Coord>) -> Expr {
        Expr::Func(FuncSym::new(name, args).expect("valid function signature"))
    }

    pub fn pow(self, e: AffineExponent) -> Expr {
        if e.is_one() {
            return self;
        }
        Expr::Power(Box::new(self), e)
    }

    pub fn powi(self, k: i64) -> Expr {
        self.pow(AffineExponent::int(k))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    /// Structural zero (only meaningful on normalized expressions).
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub(crate) fn from_atom(a: &Atom) -> Expr {
        match a {
            Atom::Param(p) => Expr::Param(p.clone()),
            Atom::Indep(i) => Expr::Indep(*i),
            Atom::Dep(d) => Expr::Dep(*d),
            Atom::Jet(j) => Expr::Jet(*j),
            Atom::Func(f) => Expr::Func(f.clone()),
            Atom::Exp(p) => Expr::Exp(Box::new(Expr::from_poly(p))),
            Atom::Ln(p) => Expr::Ln(Box::new(Expr::from_poly(p))),
            Atom::Radical(p) => Expr::from_poly(p),
        }
    }

    /// Tree view of a canonical polynomial.
    pub(crate) fn from_poly(p: &Poly) -> Expr {
        let mut terms: Vec<Expr> = Vec::new();
        for (m, c) in p.terms() {
            let mut factors = Vec::new();
            if !c.is_one() || m.is_one() {
                factors.push(Expr::Const(c.clone()));
            }
            for (a, e) in &m.0 {
                factors.push(Expr::from_atom(a).pow(e.clone()));
            }
            terms.push(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) });
        }
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::Sum(terms),
        }
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Expr {
        Expr::int(i)
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Expr {
        Expr::Const(q)
    }
}

impl From<Jet> for Expr {
    fn from(j: Jet) -> Expr {
        Expr::Jet(j)
    }
}

fn flatten_sum(a: Expr, b: Expr) -> Expr {
    let mut items = Vec::new();
    for e in [a, b] {
        match e {
            Expr::Sum(v) => items.extend(v),
            other => items.push(other),
        }
    }
    Expr::Sum(items)
}

fn flatten_product(a: Expr, b: Expr) -> Expr {
    let mut items = Vec::new();
    for e in [a, b] {
        match e {
            Expr::Product(v) => items.extend(v),
            other => items.push(other),
        }
    }
    Expr::Product(items)
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        flatten_sum(self, rhs)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        flatten_sum(self, -rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        flatten_product(self, rhs)
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        flatten_product(self, rhs.powi(-1))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            other => flatten_product(Expr::int(-1), other),
        }
    }
}

macro_rules! ref_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $tr::$m(self.clone(), rhs.clone())
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $tr::$m(self.clone(), rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $tr::$m(self, rhs.clone())
            }
        }
        impl $tr<i64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: i64) -> Expr {
                $tr::$m(self, Expr::int(rhs))
            }
        }
    )*};
}

ref_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

impl Zero for Expr {
    fn zero() -> Expr {
        Expr::zero()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
}
