use num::{BigInt, Signed, ToPrimitive, Zero};

use crate::symexpr::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum QuadraticRoots {
    /// Distinct rational roots, or one repeated root.
    Rational(Vec<Rational>),
    /// Real but irrational; floating-point approximations.
    Irrational([f64; 2]),
    Complex,
}

fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let root = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(Rational::new(root(q.numer())?, root(q.denom())?))
}

/// Roots of `a p^2 + b p + c` with `a != 0`, smallest first.
pub fn quadratic_roots(a: &Rational, b: &Rational, c: &Rational) -> QuadraticRoots {
    assert!(!a.is_zero(), "leading coefficient must be nonzero");
    let disc = b * b - Rational::from_integer(4.into()) * a * c;
    if disc.is_negative() {
        return QuadraticRoots::Complex;
    }
    let two_a = Rational::from_integer(2.into()) * a;
    match exact_sqrt(&disc) {
        Some(s) => {
            let mut roots = vec![(-b - &s) / &two_a, (-b + &s) / &two_a];
            roots.sort();
            roots.dedup();
            QuadraticRoots::Rational(roots)
        }
        None => {
            let f = |q: &Rational| q.to_f64().unwrap_or(f64::NAN);
            let (af, bf, df) = (f(a), f(b), f(&disc).sqrt());
            // Avoid cancellation: q = -(b + sign(b) sqrt(disc))/2.
            let sign = if bf >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (bf + sign * df);
            let (r1, r2) = (q / af, f(c) / q);
            QuadraticRoots::Irrational(if r1 <= r2 { [r1, r2] } else { [r2, r1] })
        }
    }
}
