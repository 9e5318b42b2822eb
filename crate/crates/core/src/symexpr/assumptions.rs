use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use super::exponent::{fmt_rational, AffineExponent, ExponentSymbol};
use super::symbols::Param;
use super::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[allow(clippy::large_enum_variant)]
pub enum Inequation {
    /// `exponent != value`, stored with leading symbolic coefficient one.
    Exponent(AffineExponent, Rational),
    /// `param != 0`
    Nonzero(Param),
}

impl fmt::Display for Inequation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inequation::Exponent(e, v) => write!(f, "{e} != {}", fmt_rational(v)),
            Inequation::Nonzero(p) => write!(f, "{p} != 0"),
        }
    }
}

/// Ledger of inequations (and optional branch equalities) the engine may
/// rely on when separating exponent classes or choosing evaluation points.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assumptions {
    inequations: Vec<Inequation>,
    branch: BTreeMap<ExponentSymbol, Rational>,
}

fn normalized(e: &AffineExponent, v: &Rational) -> (AffineExponent, Rational) {
    let lead = if !e.n_coeff.is_zero() {
        e.n_coeff.clone()
    } else if !e.m_coeff.is_zero() {
        e.m_coeff.clone()
    } else {
        return (AffineExponent::zero(), v - &e.constant);
    };
    let inv = Rational::one() / lead;
    let shifted = AffineExponent { constant: Rational::zero(), ..e.clone() };
    (shifted.scale(&inv), (v - &e.constant) * inv)
}

impl Assumptions {
    pub fn new() -> Self {
        Self::default()
    }

    /// `{n != 0, n != -1}`: the ledger every power-family computation carries
    /// (`n = 0` is linear diffusion, `n = -1` the excluded `m = -1` case).
    pub fn power_family() -> Self {
        Self::new()
            .with_exponent_ne(AffineExponent::n_plus(0), Rational::zero())
            .and_then(|a| a.with_exponent_ne(AffineExponent::n_plus(0), -Rational::one()))
            .expect("consistent")
    }

    /// Adds `e != value`. Rejects an inequation that is false as written or
    /// contradicts the branch.
    pub fn with_exponent_ne(mut self, e: AffineExponent, value: Rational) -> Result<Self> {
        let (lhs, rhs) = normalized(&self.apply_branch(&e), &value);
        if lhs.is_zero() {
            if rhs.is_zero() {
                return Err(Error::ConstraintViolation(format!(
                    "contradictory assumption {e} != {}",
                    fmt_rational(&value)
                )));
            }
            return Ok(self);
        }
        let ineq = Inequation::Exponent(lhs, rhs);
        if !self.inequations.contains(&ineq) {
            self.inequations.push(ineq);
        }
        Ok(self)
    }

    pub fn with_nonzero(mut self, p: Param) -> Self {
        let ineq = Inequation::Nonzero(p);
        if !self.inequations.contains(&ineq) {
            self.inequations.push(ineq);
        }
        self
    }

    /// Restrict to the branch `sym = value`.
    pub fn with_branch(mut self, sym: ExponentSymbol, value: Rational) -> Result<Self> {
        for ineq in &self.inequations {
            if let Inequation::Exponent(e, v) = ineq {
                let bound = e.bind(sym, &value);
                if bound.is_constant() && bound.constant == *v {
                    return Err(Error::ConstraintViolation(format!(
                        "branch {} = {} contradicts {ineq}",
                        sym.name(),
                        fmt_rational(&value)
                    )));
                }
            }
        }
        self.branch.insert(sym, value);
        Ok(self)
    }

    pub fn inequations(&self) -> &[Inequation] {
        &self.inequations
    }

    pub fn branch(&self) -> &BTreeMap<ExponentSymbol, Rational> {
        &self.branch
    }

    pub fn apply_branch(&self, e: &AffineExponent) -> AffineExponent {
        let mut out = e.clone();
        for (s, v) in &self.branch {
            out = out.bind(*s, v);
        }
        out
    }

    /// Does the ledger guarantee `e != 0`?
    pub fn exponent_nonzero(&self, e: &AffineExponent) -> bool {
        let e = self.apply_branch(e);
        if e.is_constant() {
            return !e.constant.is_zero();
        }
        let key = normalized(&e, &Rational::zero());
        self.inequations.iter().any(|i| matches!(i, Inequation::Exponent(l, r) if *l == key.0 && *r == key.1))
    }

    /// Does the ledger guarantee `a != b`?
    pub fn exponents_distinct(&self, a: &AffineExponent, b: &AffineExponent) -> bool {
        self.exponent_nonzero(&(a - b))
    }

    pub fn param_nonzero(&self, p: &Param) -> bool {
        if let Some(sym) = p.exponent_symbol() {
            let e = AffineExponent::symbolic(sym, Rational::one(), Rational::zero());
            return self.exponent_nonzero(&e);
        }
        self.inequations.iter().any(|i| matches!(i, Inequation::Nonzero(q) if q == p))
    }

    /// Does a concrete assignment of `n`, `m` and parameters violate the ledger?
    pub fn admits(&self, n: &Rational, m: &Rational, param: &dyn Fn(&Param) -> Option<Rational>) -> bool {
        for (s, v) in &self.branch {
            let actual = match s {
                ExponentSymbol::N => n,
                ExponentSymbol::M => m,
            };
            if actual != v {
                return false;
            }
        }
        self.inequations.iter().all(|i| match i {
            Inequation::Exponent(e, v) => e.evaluate(n, m) != *v,
            Inequation::Nonzero(p) => param(p).is_none_or(|x| !x.is_zero()),
        })
    }

    pub fn merged(&self, other: &Assumptions) -> Result<Assumptions> {
        let mut out = self.clone();
        for (s, v) in &other.branch {
            out = out.with_branch(*s, v.clone())?;
        }
        for i in &other.inequations {
            out = match i {
                Inequation::Exponent(e, v) => out.with_exponent_ne(e.clone(), v.clone())?,
                Inequation::Nonzero(p) => out.with_nonzero(p.clone()),
            };
        }
        Ok(out)
    }
}

impl fmt::Display for Assumptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> =
            self.branch.iter().map(|(s, v)| format!("{} = {}", s.name(), fmt_rational(v))).collect();
        parts.extend(self.inequations.iter().map(|i| i.to_string()));
        write!(f, "{{{}}}", parts.join(", "))
    }
}
