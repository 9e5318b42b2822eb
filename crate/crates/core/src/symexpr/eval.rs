//! Point evaluation and the equality decision with its randomized monitor.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assumptions::Assumptions;
use super::diff::partial;
use super::exponent::ExponentSymbol;
use super::poly::{rational_pow, Poly};
use super::symbols::{Coord, FuncSym, Jet, Param};
use super::{normalize, Expr, Rational};
use crate::error::{Error, Result};

const POINTS: usize = 8;
const MAX_ATTEMPTS: usize = 200;
const FUNC_DEGREE: usize = 6;
const FLOAT_RTOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum EvalValue {
    Exact(Rational),
    Float(f64),
}

impl EvalValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            EvalValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            EvalValue::Float(x) => *x,
        }
    }

    fn exact(&self) -> Option<&Rational> {
        match self {
            EvalValue::Exact(q) => Some(q),
            EvalValue::Float(_) => None,
        }
    }

    fn combine(
        a: EvalValue,
        b: EvalValue,
        exact: impl Fn(&Rational, &Rational) -> Rational,
        float: impl Fn(f64, f64) -> f64,
    ) -> EvalValue {
        match (&a, &b) {
            (EvalValue::Exact(x), EvalValue::Exact(y)) => EvalValue::Exact(exact(x, y)),
            _ => EvalValue::Float(float(a.to_f64(), b.to_f64())),
        }
    }
}

/// Values for every symbol an expression may mention. Formal functions are
/// interpreted as polynomials in their declared arguments, so derivatives
/// are exact.
#[derive(Clone, Debug, Default)]
pub struct EvalPoint {
    pub params: BTreeMap<Param, Rational>,
    pub coords: BTreeMap<Coord, Rational>,
    pub jets: BTreeMap<Jet, Rational>,
    pub functions: BTreeMap<(String, Vec<Coord>), Poly>,
}

impl EvalPoint {
    fn exponent_value(&self, sym: ExponentSymbol) -> Rational {
        self.params.get(&Param::of_exponent(sym)).cloned().unwrap_or_else(Rational::zero)
    }

    fn function(&self, f: &FuncSym) -> Result<Poly> {
        let key = (f.name().to_string(), f.args().to_vec());
        let mut p = self
            .functions
            .get(&key)
            .cloned()
            .ok_or_else(|| Error::Malformed(format!("no interpretation for `{f}`")))?;
        for (arg, &k) in f.args().iter().zip(f.derivs()) {
            for _ in 0..k {
                p = partial(&p, *arg)?;
            }
        }
        Ok(p)
    }
}

/// Symbols mentioned by an expression tree.
#[derive(Default)]
struct Symbols {
    params: BTreeSet<Param>,
    coords: BTreeSet<Coord>,
    jets: BTreeSet<Jet>,
    functions: BTreeSet<(String, Vec<Coord>)>,
}

fn scan(e: &Expr, out: &mut Symbols) {
    match e {
        Expr::Const(_) => {}
        Expr::Param(p) => {
            out.params.insert(p.clone());
        }
        Expr::Indep(i) => {
            out.coords.insert(Coord::Indep(*i));
        }
        Expr::Dep(d) => {
            out.coords.insert(Coord::Dep(*d));
        }
        Expr::Jet(j) => {
            out.jets.insert(*j);
        }
        Expr::Func(f) => {
            out.functions.insert((f.name().to_string(), f.args().to_vec()));
            out.coords.extend(f.args().iter().copied());
        }
        Expr::Sum(v) | Expr::Product(v) => v.iter().for_each(|x| scan(x, out)),
        Expr::Power(b, ex) => {
            scan(b, out);
            for s in ex.symbols() {
                out.params.insert(Param::of_exponent(s));
            }
        }
        Expr::Exp(a) | Expr::Ln(a) => scan(a, out),
    }
}

fn random_rational(rng: &mut impl Rng, nonzero: bool) -> Rational {
    loop {
        let p: i64 = rng.gen_range(-97..=97);
        let q: i64 = rng.gen_range(1..=97);
        if !nonzero || p != 0 {
            return Rational::new(p.into(), q.into());
        }
    }
}

fn random_positive(rng: &mut impl Rng) -> Rational {
    let p: i64 = rng.gen_range(1..=97);
    let q: i64 = rng.gen_range(1..=97);
    Rational::new(p.into(), q.into())
}

/// Random polynomial of degree `FUNC_DEGREE` in the given arguments.
fn random_function(rng: &mut impl Rng, args: &[Coord]) -> Poly {
    fn coord_poly(c: Coord) -> Poly {
        match c {
            Coord::Indep(i) => Poly::indep(i),
            Coord::Dep(d) => Poly::dep(d),
        }
    }
    let mut out = Poly::zero();
    let mut exps = vec![0usize; args.len()];
    loop {
        if exps.iter().sum::<usize>() <= FUNC_DEGREE {
            let mut term =
                Poly::constant(Rational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into()));
            for (c, &k) in args.iter().zip(&exps) {
                term = term.mul(&coord_poly(*c).powi(k as i64).expect("natural power")).expect("small");
            }
            out.add_assign(&term);
        }
        // odometer over exponent tuples
        let mut i = 0;
        loop {
            if i == exps.len() {
                return out;
            }
            exps[i] += 1;
            if exps[i] <= FUNC_DEGREE {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

impl EvalPoint {
    /// Random point for the symbols of `exprs`, admissible under `ass`.
    /// Dependent variables are positive so fractional powers stay real;
    /// `n` and `m` are integers.
    pub fn random(rng: &mut impl Rng, exprs: &[&Expr], ass: &Assumptions) -> Result<EvalPoint> {
        let mut syms = Symbols::default();
        for e in exprs {
            scan(e, &mut syms);
        }
        for _ in 0..MAX_ATTEMPTS {
            let mut pt = EvalPoint::default();
            for p in &syms.params {
                let v = match p.exponent_symbol() {
                    Some(sym) => match ass.branch().get(&sym) {
                        Some(v) => v.clone(),
                        None => Rational::from_integer(rng.gen_range(-6i64..=6).into()),
                    },
                    None => random_rational(rng, ass.param_nonzero(p)),
                };
                pt.params.insert(p.clone(), v);
            }
            for sym in [ExponentSymbol::N, ExponentSymbol::M] {
                let key = Param::of_exponent(sym);
                if let std::collections::btree_map::Entry::Vacant(slot) = pt.params.entry(key) {
                    slot.insert(match ass.branch().get(&sym) {
                        Some(v) => v.clone(),
                        None => Rational::from_integer(rng.gen_range(-6i64..=6).into()),
                    });
                }
            }
            let n = pt.exponent_value(ExponentSymbol::N);
            let m = pt.exponent_value(ExponentSymbol::M);
            if !ass.admits(&n, &m, &|p| pt.params.get(p).cloned()) {
                continue;
            }
            for c in &syms.coords {
                let v = match c {
                    Coord::Dep(_) => random_positive(rng),
                    Coord::Indep(_) => random_rational(rng, false),
                };
                pt.coords.insert(*c, v);
            }
            for j in &syms.jets {
                pt.jets.insert(*j, random_rational(rng, false));
            }
            for (name, args) in &syms.functions {
                pt.functions.insert((name.clone(), args.clone()), random_function(rng, args));
            }
            return Ok(pt);
        }
        Err(Error::Soundness("no admissible evaluation point under the assumptions".into()))
    }
}

/// Evaluates an expression tree. `Ok(None)` signals a pole (division by zero,
/// logarithm of a non-positive value, non-real power).
pub fn evaluate(e: &Expr, pt: &EvalPoint) -> Result<Option<EvalValue>> {
    Ok(match e {
        Expr::Const(c) => Some(EvalValue::Exact(c.clone())),
        Expr::Param(p) => Some(EvalValue::Exact(
            pt.params.get(p).cloned().ok_or_else(|| Error::Malformed(format!("no value for `{p}`")))?,
        )),
        Expr::Indep(i) => Some(EvalValue::Exact(coord(pt, Coord::Indep(*i))?)),
        Expr::Dep(d) => Some(EvalValue::Exact(coord(pt, Coord::Dep(*d))?)),
        Expr::Jet(j) => Some(EvalValue::Exact(
            pt.jets.get(j).cloned().ok_or_else(|| Error::Malformed(format!("no value for `{j}`")))?,
        )),
        Expr::Func(f) => evaluate(&Expr::from_poly(&pt.function(f)?), pt)?,
        Expr::Sum(items) => {
            let mut acc = EvalValue::Exact(Rational::zero());
            for it in items {
                let Some(v) = evaluate(it, pt)? else { return Ok(None) };
                acc = EvalValue::combine(acc, v, |a, b| a + b, |a, b| a + b);
            }
            Some(acc)
        }
        Expr::Product(items) => {
            let mut acc = EvalValue::Exact(Rational::one());
            for it in items {
                let Some(v) = evaluate(it, pt)? else { return Ok(None) };
                acc = EvalValue::combine(acc, v, |a, b| a * b, |a, b| a * b);
            }
            Some(acc)
        }
        Expr::Power(b, ex) => {
            let Some(base) = evaluate(b, pt)? else { return Ok(None) };
            let r = ex.evaluate(&pt.exponent_value(ExponentSymbol::N), &pt.exponent_value(ExponentSymbol::M));
            power(base, &r)
        }
        Expr::Exp(a) => {
            let Some(v) = evaluate(a, pt)? else { return Ok(None) };
            match v.exact() {
                Some(q) if q.is_zero() => Some(EvalValue::Exact(Rational::one())),
                _ => finite(v.to_f64().exp()),
            }
        }
        Expr::Ln(a) => {
            let Some(v) = evaluate(a, pt)? else { return Ok(None) };
            match v.exact() {
                Some(q) if q.is_one() => Some(EvalValue::Exact(Rational::zero())),
                _ if v.to_f64() <= 0.0 => None,
                _ => finite(v.to_f64().ln()),
            }
        }
    })
}

fn coord(pt: &EvalPoint, c: Coord) -> Result<Rational> {
    pt.coords.get(&c).cloned().ok_or_else(|| Error::Malformed(format!("no value for `{}`", c.name())))
}

fn finite(x: f64) -> Option<EvalValue> {
    x.is_finite().then_some(EvalValue::Float(x))
}

fn power(base: EvalValue, r: &Rational) -> Option<EvalValue> {
    if let EvalValue::Exact(b) = &base {
        if b.is_zero() {
            return if r.is_positive() { Some(EvalValue::Exact(Rational::zero())) } else { None };
        }
        let e = super::exponent::AffineExponent::constant(r.clone());
        // Keep exact arithmetic for modest integer powers and perfect roots.
        if r.numer().abs() <= 64.into() {
            if let Some(v) = rational_pow(b, &e) {
                return Some(EvalValue::Exact(v));
            }
        }
    }
    let x = base.to_f64();
    let p = r.to_f64()?;
    if x == 0.0 && p <= 0.0 {
        return None;
    }
    if x < 0.0 && !r.is_integer() {
        return None;
    }
    finite(x.powf(p))
}

/// Result of [`equal_with`]: the structural verdict plus what the monitor saw.
#[derive(Clone, Debug)]
pub struct EqualityCheck {
    pub equal: bool,
    pub points: usize,
    pub exact_points: usize,
}

fn agree(a: &EvalValue, b: &EvalValue) -> bool {
    match (a, b) {
        (EvalValue::Exact(x), EvalValue::Exact(y)) => x == y,
        _ => {
            let (x, y) = (a.to_f64(), b.to_f64());
            (x - y).abs() <= FLOAT_RTOL * (1.0 + x.abs().max(y.abs()))
        }
    }
}

/// Seed for the randomized monitor: `CONDSYM_SEED` if set, else 0.
pub fn default_seed() -> u64 {
    std::env::var("CONDSYM_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// `a == b` over the ledger, decided on normal forms.
pub fn equal(a: &Expr, b: &Expr, ass: &Assumptions) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(default_seed());
    Ok(equal_with(a, b, ass, &mut rng)?.equal)
}

/// Structural decision with the randomized soundness monitor.
pub fn equal_with(a: &Expr, b: &Expr, ass: &Assumptions, rng: &mut impl Rng) -> Result<EqualityCheck> {
    let verdict = normalize(&(a.clone() - b.clone()))?.is_zero();
    let mut points = 0;
    let mut exact_points = 0;
    let mut all_agree = true;
    let mut attempts = 0;
    while points < POINTS {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::Soundness("evaluation points keep hitting poles".into()));
        }
        let pt = EvalPoint::random(rng, &[a, b], ass)?;
        let (Some(va), Some(vb)) = (evaluate(a, &pt)?, evaluate(b, &pt)?) else { continue };
        if !va.to_f64().is_finite() && va.exact().is_none() {
            continue;
        }
        points += 1;
        if va.exact().is_some() && vb.exact().is_some() {
            exact_points += 1;
        }
        let same = agree(&va, &vb);
        if verdict && !same {
            return Err(Error::Soundness(format!(
                "normal forms agree but values differ at a sample point ({} vs {})",
                va.to_f64(),
                vb.to_f64()
            )));
        }
        all_agree &= same && va.exact().is_some() && vb.exact().is_some();
    }
    if !verdict && all_agree {
        return Err(Error::Soundness(
            "normal forms differ but every exact sample agrees; canonical form missed an identity".into(),
        ));
    }
    Ok(EqualityCheck { equal: verdict, points, exact_points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{AffineExponent, Indep};

    #[test]
    fn exp_product() {
        let a = Expr::v().exp() * Expr::v().exp();
        let b = (Expr::int(2) * Expr::v()).exp();
        assert!(equal(&a, &b, &Assumptions::new()).unwrap());
    }

    #[test]
    fn affine_exponents_combine() {
        let a = Expr::v().pow(AffineExponent::n_plus(0)) * Expr::v().powi(-1);
        let b = Expr::v().pow(AffineExponent::n_plus(-1));
        assert!(equal(&a, &b, &Assumptions::new()).unwrap());
    }

    #[test]
    fn distinct_powers_under_ledger() {
        let ass = Assumptions::new().with_exponent_ne(AffineExponent::n_plus(0), Rational::one()).unwrap();
        let a = Expr::v().pow(AffineExponent::n_plus(0));
        assert!(!equal(&a, &Expr::v(), &ass).unwrap());
    }

    #[test]
    fn rational_function_identity() {
        // (V^2 - 1)/(V - 1) == V + 1
        let a = (Expr::v().powi(2) - 1) / (Expr::v() - 1);
        assert!(equal(&a, &(Expr::v() + 1), &Assumptions::new()).unwrap());
    }

    #[test]
    fn functions_are_interpreted_consistently() {
        let f = Expr::func("f");
        let fx = crate::symexpr::differentiate(&f, crate::symexpr::Var::Indep(Indep::X)).unwrap();
        assert!(!equal(&fx, &f, &Assumptions::new()).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chk = equal_with(&(fx.clone() * 2), &(fx.clone() + fx), &Assumptions::new(), &mut rng).unwrap();
        assert!(chk.equal);
        assert_eq!(chk.exact_points, 8);
    }
}
