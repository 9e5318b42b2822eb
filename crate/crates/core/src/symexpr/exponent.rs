use std::fmt;
use std::ops::{Add, Neg, Sub};

use num::{One, Signed, ToPrimitive, Zero};

use super::Rational;

/// Exponent of the form `a*n + b*m + c` with exact rational coefficients.
///
/// `n` and `m` are the formal exponent symbols of the canonical V-form and
/// the original U-form respectively. Anything non-affine (for instance
/// `n^2`) cannot be represented and is rejected where it would arise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineExponent {
    pub n_coeff: Rational,
    pub m_coeff: Rational,
    pub constant: Rational,
}

/// Formal symbol an exponent can be affine in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExponentSymbol {
    N,
    M,
}

impl ExponentSymbol {
    pub fn name(self) -> &'static str {
        match self {
            ExponentSymbol::N => "n",
            ExponentSymbol::M => "m",
        }
    }
}

impl AffineExponent {
    pub fn constant(c: Rational) -> Self {
        AffineExponent { n_coeff: Rational::zero(), m_coeff: Rational::zero(), constant: c }
    }

    pub fn int(i: i64) -> Self {
        Self::constant(Rational::from_integer(i.into()))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Self::constant(Rational::new(p.into(), q.into()))
    }

    /// `coeff * sym + c`
    pub fn symbolic(sym: ExponentSymbol, coeff: Rational, c: Rational) -> Self {
        let mut e = Self::constant(c);
        match sym {
            ExponentSymbol::N => e.n_coeff = coeff,
            ExponentSymbol::M => e.m_coeff = coeff,
        }
        e
    }

    /// `n + c`
    pub fn n_plus(c: i64) -> Self {
        Self::symbolic(ExponentSymbol::N, Rational::one(), Rational::from_integer(c.into()))
    }

    /// `m + c`
    pub fn m_plus(c: i64) -> Self {
        Self::symbolic(ExponentSymbol::M, Rational::one(), Rational::from_integer(c.into()))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.n_coeff.is_zero() && self.m_coeff.is_zero() && self.constant.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.constant.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.n_coeff.is_zero() && self.m_coeff.is_zero()
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        self.is_constant().then_some(&self.constant)
    }

    pub fn as_integer(&self) -> Option<i64> {
        let c = self.as_constant()?;
        if c.is_integer() {
            c.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn is_positive_integer(&self) -> bool {
        self.as_integer().is_some_and(|k| k > 0)
    }

    pub fn is_negative_integer(&self) -> bool {
        self.as_integer().is_some_and(|k| k < 0)
    }

    /// Symbols with a nonzero coefficient.
    pub fn symbols(&self) -> Vec<ExponentSymbol> {
        let mut out = Vec::new();
        if !self.n_coeff.is_zero() {
            out.push(ExponentSymbol::N);
        }
        if !self.m_coeff.is_zero() {
            out.push(ExponentSymbol::M);
        }
        out
    }

    pub fn coeff(&self, sym: ExponentSymbol) -> &Rational {
        match sym {
            ExponentSymbol::N => &self.n_coeff,
            ExponentSymbol::M => &self.m_coeff,
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        AffineExponent { n_coeff: &self.n_coeff * k, m_coeff: &self.m_coeff * k, constant: &self.constant * k }
    }

    /// Product of two exponents; `None` when the result would not be affine.
    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), _) => Some(other.scale(a)),
            (_, Some(b)) => Some(self.scale(b)),
            _ => None,
        }
    }

    /// Value with the formal symbols replaced by rationals.
    pub fn evaluate(&self, n: &Rational, m: &Rational) -> Rational {
        &self.n_coeff * n + &self.m_coeff * m + &self.constant
    }

    /// Partial evaluation: bind one symbol to a rational value.
    pub fn bind(&self, sym: ExponentSymbol, value: &Rational) -> Self {
        let mut out = self.clone();
        match sym {
            ExponentSymbol::N => {
                out.constant += &out.n_coeff * value;
                out.n_coeff = Rational::zero();
            }
            ExponentSymbol::M => {
                out.constant += &out.m_coeff * value;
                out.m_coeff = Rational::zero();
            }
        }
        out
    }
}

impl Add for &AffineExponent {
    type Output = AffineExponent;
    fn add(self, rhs: &AffineExponent) -> AffineExponent {
        AffineExponent {
            n_coeff: &self.n_coeff + &rhs.n_coeff,
            m_coeff: &self.m_coeff + &rhs.m_coeff,
            constant: &self.constant + &rhs.constant,
        }
    }
}

impl Sub for &AffineExponent {
    type Output = AffineExponent;
    fn sub(self, rhs: &AffineExponent) -> AffineExponent {
        AffineExponent {
            n_coeff: &self.n_coeff - &rhs.n_coeff,
            m_coeff: &self.m_coeff - &rhs.m_coeff,
            constant: &self.constant - &rhs.constant,
        }
    }
}

impl Neg for &AffineExponent {
    type Output = AffineExponent;
    fn neg(self) -> AffineExponent {
        self.scale(&-Rational::one())
    }
}

pub(crate) fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for AffineExponent {
    /// Renders in the parser grammar, e.g. `n-1`, `2*n+3`, `-1/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for sym in [ExponentSymbol::N, ExponentSymbol::M] {
            let c = self.coeff(sym);
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body =
                if mag.is_one() { sym.name().to_string() } else { format!("{}*{}", fmt_rational(&mag), sym.name()) };
            parts.push((c.is_negative(), body));
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push((self.constant.is_negative(), fmt_rational(&self.constant.abs())));
        }
        for (i, (neg, body)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, "+{body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_componentwise() {
        let a = AffineExponent::n_plus(-1);
        let b = AffineExponent::n_plus(2);
        assert_eq!(&b - &a, AffineExponent::int(3));
        assert_eq!((&a + &b).to_string(), "2*n+1");
        assert_eq!(AffineExponent::ratio(-1, 2).to_string(), "-1/2");
        assert_eq!(AffineExponent::n_plus(-1).to_string(), "n-1");
    }

    #[test]
    fn non_affine_products_are_rejected() {
        let a = AffineExponent::n_plus(1);
        assert!(a.checked_mul(&a).is_none());
        assert_eq!(a.checked_mul(&AffineExponent::int(2)).unwrap().to_string(), "2*n+2");
    }

    #[test]
    fn binding_folds_into_constant() {
        let e = AffineExponent::symbolic(ExponentSymbol::N, Rational::from_integer(2.into()), Rational::one());
        let b = e.bind(ExponentSymbol::N, &Rational::new((-1).into(), 2.into()));
        assert!(b.is_zero());
    }
}
