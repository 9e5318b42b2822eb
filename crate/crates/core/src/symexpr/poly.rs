//! Canonical form: an expanded sum of monomials over atoms.
//!
//! Atoms are parameters, coordinates, jet symbols, formal functions,
//! `exp(..)`, `ln(..)` and "radicals" (a non-monomial polynomial raised to a
//! non-natural exponent). A monomial carries at most one `exp` atom, always
//! with exponent one. Radicals never carry a positive integer exponent; those
//! are expanded. `canonical()` additionally brings every term over a common
//! denominator, which makes zero-recognition complete for expressions that
//! are rational in their atoms.

use std::collections::BTreeMap;

use num::{One, Signed, ToPrimitive, Zero};

use super::exponent::AffineExponent;
use super::symbols::{Coord, Dep, FuncSym, Indep, Jet, Param};
use super::Rational;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_TERMS: usize = 100_000;

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_terms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_terms: DEFAULT_MAX_TERMS }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    Param(Param),
    Indep(Indep),
    Dep(Dep),
    Jet(Jet),
    Func(FuncSym),
    Exp(Poly),
    Ln(Poly),
    Radical(Poly),
}

impl Atom {
    /// True if the atom (or anything nested inside it) satisfies `pred`.
    pub fn contains(&self, pred: &dyn Fn(&Atom) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Atom::Exp(p) | Atom::Ln(p) | Atom::Radical(p) => p.contains(pred),
            _ => false,
        }
    }

    /// Does this atom vary with the coordinate `c` (as a jet-space coordinate)?
    pub fn depends_on_coord(&self, c: Coord) -> bool {
        self.contains(&|a| match (a, c) {
            (Atom::Indep(i), Coord::Indep(j)) => *i == j,
            (Atom::Dep(d), Coord::Dep(e)) => *d == e,
            (Atom::Func(f), _) => f.depends_on(c),
            _ => false,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial(pub BTreeMap<Atom, AffineExponent>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent_of(&self, a: &Atom) -> AffineExponent {
        self.0.get(a).cloned().unwrap_or_else(AffineExponent::zero)
    }

    fn exp_atom(&self) -> Option<&Poly> {
        self.0.keys().find_map(|k| match k {
            Atom::Exp(p) => Some(p),
            _ => None,
        })
    }

    /// Raw product: exponents added, `exp` arguments merged; radicals are not
    /// settled here.
    fn raw_mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        let mut exp_arg: Option<Poly> = None;
        if let Some(p) = self.exp_atom() {
            exp_arg = Some(p.clone());
            out.remove(&Atom::Exp(p.clone()));
        }
        for (a, e) in &other.0 {
            if let Atom::Exp(p) = a {
                exp_arg = Some(match exp_arg {
                    Some(q) => q.add(p),
                    None => p.clone(),
                });
                continue;
            }
            let sum = match out.get(a) {
                Some(f) => f + e,
                None => e.clone(),
            };
            if sum.is_zero() {
                out.remove(a);
            } else {
                out.insert(a.clone(), sum);
            }
        }
        if let Some(arg) = exp_arg {
            if !arg.is_zero() {
                out.insert(Atom::Exp(arg), AffineExponent::one());
            }
        }
        Monomial(out)
    }

    pub fn contains(&self, pred: &dyn Fn(&Atom) -> bool) -> bool {
        self.0.keys().any(|a| a.contains(pred))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn int(i: i64) -> Poly {
        Poly::constant(Rational::from_integer(i.into()))
    }

    pub fn term(c: Rational, m: Monomial) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// A plain atom. `Exp`/`Ln`/`Radical` atoms should be built through
    /// [`Poly::exp`], [`Poly::ln`] and [`Poly::pow`].
    pub fn atom(a: Atom) -> Poly {
        let mut m = BTreeMap::new();
        m.insert(a, AffineExponent::one());
        Poly::term(Rational::one(), Monomial(m))
    }

    pub fn param(p: Param) -> Poly {
        Poly::atom(Atom::Param(p))
    }

    pub fn dep(d: Dep) -> Poly {
        Poly::atom(Atom::Dep(d))
    }

    pub fn indep(i: Indep) -> Poly {
        Poly::atom(Atom::Indep(i))
    }

    pub fn jet(j: Jet) -> Poly {
        Poly::atom(Atom::Jet(j))
    }

    pub fn func(f: FuncSym) -> Poly {
        Poly::atom(Atom::Func(f))
    }

    /// The exponent `a*n + b*m + c` as a polynomial in the parameters `n`, `m`.
    pub fn from_exponent(e: &AffineExponent) -> Poly {
        let mut p = Poly::constant(e.constant.clone());
        for sym in e.symbols() {
            p = p.add(&Poly::param(Param::of_exponent(sym)).scale(e.coeff(sym)));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.mul_with(other, &Limits::default())
    }

    pub fn mul_with(&self, other: &Poly, lim: &Limits) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.raw_mul(m2);
                let c = c1 * c2;
                if has_unsettled(&m) {
                    out.add_assign(&settle(m, c, lim)?);
                } else {
                    out.add_term(m, c);
                }
            }
            if out.terms.len() > lim.max_terms {
                return Err(Error::SizeLimit { limit: lim.max_terms });
            }
        }
        Ok(out)
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Result<Poly> {
        self.mul(&Poly::term(Rational::one(), m.clone()))
    }

    pub fn pow(&self, e: &AffineExponent) -> Result<Poly> {
        self.pow_with(e, &Limits::default())
    }

    pub fn powi(&self, k: i64) -> Result<Poly> {
        self.pow(&AffineExponent::int(k))
    }

    pub fn pow_with(&self, e: &AffineExponent, lim: &Limits) -> Result<Poly> {
        if e.is_zero() {
            return Ok(Poly::one());
        }
        if self.is_zero() {
            return match e.as_constant() {
                Some(c) if c.is_positive() => Ok(Poly::zero()),
                _ => Err(Error::DivisionByZero),
            };
        }
        if let Some((m, c)) = self.single_term() {
            return monomial_pow(m, c, e, lim);
        }
        if let Some(k) = e.as_integer().filter(|&k| k > 0) {
            let mut acc = Poly::one();
            let mut base = self.clone();
            let mut k = k as u64;
            while k > 0 {
                if k & 1 == 1 {
                    acc = acc.mul_with(&base, lim)?;
                }
                k >>= 1;
                if k > 0 {
                    base = base.mul_with(&base, lim)?;
                }
            }
            return Ok(acc);
        }
        // Non-natural power of a sum: pull out content, keep the rest as a radical.
        let (content_c, content_m, prim) = self.primitive_part(e)?;
        let mut out = monomial_pow(&content_m, &content_c, e, lim)?;
        if let Some((m, c)) = prim.single_term() {
            return out.mul_with(&monomial_pow(m, c, e, lim)?, lim);
        }
        let mut rm = BTreeMap::new();
        rm.insert(Atom::Radical(prim), e.clone());
        out = out.mul_with(&Poly::term(Rational::one(), Monomial(rm)), lim)?;
        Ok(out)
    }

    /// Split `self = c * mu * P'` where `c` is the first coefficient (when
    /// `c^e` stays rational) and `mu` the monomial gcd over integer exponents.
    fn primitive_part(&self, e: &AffineExponent) -> Result<(Rational, Monomial, Poly)> {
        let first = self.terms.values().next().cloned().unwrap_or_else(Rational::one);
        let c = if rational_pow(&first, e).is_some() { first } else { Rational::one() };
        let mut mins: BTreeMap<Atom, i64> = BTreeMap::new();
        let mut candidates: Vec<Atom> = Vec::new();
        for m in self.terms.keys() {
            for (a, ex) in &m.0 {
                if !matches!(a, Atom::Exp(_)) && ex.as_integer().is_some() && !candidates.contains(a) {
                    candidates.push(a.clone());
                }
            }
        }
        'atoms: for a in candidates {
            let mut lo = i64::MAX;
            for m in self.terms.keys() {
                let ex = m.exponent_of(&a);
                match ex.as_integer() {
                    Some(k) => lo = lo.min(k),
                    None => continue 'atoms,
                }
            }
            if lo != 0 {
                mins.insert(a, lo);
            }
        }
        let mu = Monomial(mins.iter().map(|(a, k)| (a.clone(), AffineExponent::int(*k))).collect());
        let inv = Monomial(mins.iter().map(|(a, k)| (a.clone(), AffineExponent::int(-*k))).collect());
        let inv_c = Rational::one() / &c;
        let mut prim = Poly::zero();
        for (m, coef) in &self.terms {
            prim.add_term(m.raw_mul(&inv), coef * &inv_c);
        }
        Ok((c, mu, prim))
    }

    pub fn exp(arg: &Poly) -> Result<Poly> {
        // exp(c*ln(a) + rest) = a^c * exp(rest)
        let mut rest = Poly::zero();
        let mut out = Poly::one();
        for (m, c) in &arg.terms {
            if m.0.len() == 1 {
                let (a, e) = m.0.iter().next().unwrap();
                if let (Atom::Ln(inner), true) = (a, e.is_one()) {
                    out = out.mul(&inner.pow(&AffineExponent::constant(c.clone()))?)?;
                    continue;
                }
            }
            rest.add_term(m.clone(), c.clone());
        }
        if !rest.is_zero() {
            out = out.mul(&Poly::atom(Atom::Exp(rest)))?;
        }
        Ok(out)
    }

    pub fn ln(arg: &Poly) -> Result<Poly> {
        if arg.is_zero() {
            return Err(Error::Unsupported("logarithm of zero".into()));
        }
        if let Some((m, c)) = arg.single_term() {
            if c.is_one() {
                let mut out = Poly::zero();
                for (a, e) in &m.0 {
                    match a {
                        Atom::Exp(inner) => out = out.add(inner),
                        _ => {
                            let l = Poly::atom(Atom::Ln(Poly::atom(a.clone())));
                            out = out.add(&Poly::from_exponent(e).mul(&l)?);
                        }
                    }
                }
                return Ok(out);
            }
        }
        Ok(Poly::atom(Atom::Ln(arg.clone())))
    }

    /// True if some atom (recursively) satisfies `pred`.
    pub fn contains(&self, pred: &dyn Fn(&Atom) -> bool) -> bool {
        self.terms.keys().any(|m| m.contains(pred))
    }

    pub fn depends_on_coord(&self, c: Coord) -> bool {
        self.terms.keys().any(|m| m.0.keys().any(|a| a.depends_on_coord(c)))
    }

    pub fn contains_jets(&self) -> bool {
        self.contains(&|a| matches!(a, Atom::Jet(_)))
    }

    /// Group terms by the exponent of `atom`, removing the atom.
    pub fn collect_atom(&self, atom: &Atom) -> BTreeMap<AffineExponent, Poly> {
        let mut out: BTreeMap<AffineExponent, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = rest.0.remove(atom).unwrap_or_else(AffineExponent::zero);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Replace atoms: `f` returns the replacement of an atom (to be raised to
    /// the atom's exponent) or `None` to keep it. Nested arguments of `exp`,
    /// `ln` and radicals are rewritten first.
    pub fn map_atoms(&self, f: &dyn Fn(&Atom) -> Result<Option<Poly>>) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            let mut keep = Monomial::one();
            for (a, e) in &m.0 {
                let rebuilt = match a {
                    Atom::Exp(p) => {
                        let np = p.map_atoms(f)?;
                        Some(Poly::exp(&np)?)
                    }
                    Atom::Ln(p) => {
                        let np = p.map_atoms(f)?;
                        Some(Poly::ln(&np)?)
                    }
                    Atom::Radical(p) => {
                        let np = p.map_atoms(f)?;
                        Some(np)
                    }
                    _ => f(a)?,
                };
                match rebuilt {
                    Some(r) => {
                        let r = if let Atom::Exp(_) = a { r } else { r.pow(e)? };
                        acc = acc.mul(&r)?;
                    }
                    None => {
                        keep = keep.raw_mul(&Monomial([(a.clone(), e.clone())].into_iter().collect()));
                    }
                }
            }
            out.add_assign(&acc.mul(&Poly::term(Rational::one(), keep))?);
        }
        Ok(out)
    }

    /// Rewrite every exponent (recursively, including inside `exp`, `ln` and
    /// radical arguments) and rebuild the canonical form.
    pub fn map_exponents(&self, f: &dyn Fn(&AffineExponent) -> Result<AffineExponent>) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            for (a, e) in &m.0 {
                let factor = match a {
                    Atom::Exp(p) => Poly::exp(&p.map_exponents(f)?)?,
                    Atom::Ln(p) => Poly::ln(&p.map_exponents(f)?)?.pow(&f(e)?)?,
                    Atom::Radical(p) => p.map_exponents(f)?.pow(&f(e)?)?,
                    _ => Poly::atom(a.clone()).pow(&f(e)?)?,
                };
                acc = acc.mul(&factor)?;
            }
            out.add_assign(&acc);
        }
        Ok(out)
    }

    /// Bring all terms over a common denominator built from radicals with
    /// negative integer exponents, cancelling denominator factors that divide
    /// the numerator exactly.
    pub fn canonical(&self) -> Result<Poly> {
        let mut denoms: BTreeMap<Poly, i64> = BTreeMap::new();
        for m in self.terms.keys() {
            for (a, e) in &m.0 {
                if let (Atom::Radical(p), Some(k)) = (a, e.as_integer()) {
                    if k < 0 {
                        let entry = denoms.entry(p.clone()).or_insert(0);
                        *entry = (*entry).max(-k);
                    }
                }
            }
        }
        if denoms.is_empty() {
            return Ok(self.clone());
        }
        let clear = Monomial(denoms.iter().map(|(p, k)| (Atom::Radical(p.clone()), AffineExponent::int(*k))).collect());
        let mut numer = Poly::zero();
        for (m, c) in &self.terms {
            let raw = m.raw_mul(&clear);
            numer.add_assign(&settle(raw, c.clone(), &Limits::default())?);
        }
        if numer.is_zero() {
            return Ok(Poly::zero());
        }
        for (p, k) in denoms.iter_mut() {
            while *k > 0 {
                match numer.div_exact(p) {
                    Some(q) => {
                        numer = q;
                        *k -= 1;
                    }
                    None => break,
                }
            }
        }
        let remaining = Monomial(
            denoms
                .iter()
                .filter(|(_, k)| **k > 0)
                .map(|(p, k)| (Atom::Radical(p.clone()), AffineExponent::int(-*k)))
                .collect(),
        );
        let mut out = Poly::zero();
        for (m, c) in &numer.terms {
            out.add_term(m.raw_mul(&remaining), c.clone());
        }
        Ok(out)
    }

    /// Exact quotient `self / divisor` in the Laurent ring, if it exists.
    ///
    /// Uses univariate division in a main atom of `divisor` whose leading
    /// coefficient is a single monomial; returns `None` when no such atom
    /// exists or the remainder is nonzero.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some((m, c)) = divisor.single_term() {
            let inv = invert_monomial(m)?;
            let ic = Rational::one() / c;
            let mut out = Poly::zero();
            for (tm, tc) in &self.terms {
                out.add_term(tm.raw_mul(&inv), tc * &ic);
            }
            return Some(out);
        }
        let (main, deg, lc) = divisor.division_main_atom()?;
        let (lc_m, lc_c) = lc.single_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let lc_inv = invert_monomial(&lc_m)?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        for _ in 0..10_000 {
            if rem.is_zero() {
                return Some(quot);
            }
            let by_deg = rem.collect_atom(&main);
            let (top_e, top) = by_deg.iter().next_back()?;
            let top_deg = top_e.as_integer().filter(|&k| k >= 0)?;
            if by_deg.keys().any(|e| e.as_integer().is_none_or(|k| k < 0)) || top_deg < deg {
                return None;
            }
            let mut shift = lc_inv.clone();
            if top_deg > deg {
                shift = shift
                    .raw_mul(&Monomial([(main.clone(), AffineExponent::int(top_deg - deg))].into_iter().collect()));
            }
            let mut q = Poly::zero();
            for (m, c) in &top.terms {
                q.add_term(m.raw_mul(&shift), c / &lc_c);
            }
            rem = rem.sub(&q.mul(divisor).ok()?);
            quot.add_assign(&q);
        }
        None
    }

    fn division_main_atom(&self) -> Option<(Atom, i64, Poly)> {
        let mut atoms: Vec<Atom> = Vec::new();
        for m in self.terms.keys() {
            for a in m.0.keys() {
                if !atoms.contains(a) {
                    atoms.push(a.clone());
                }
            }
        }
        for a in atoms {
            let by_deg = self.collect_atom(&a);
            if by_deg.keys().any(|e| e.as_integer().is_none_or(|k| k < 0)) {
                continue;
            }
            let (top_e, top) = by_deg.iter().next_back()?;
            let d = top_e.as_integer()?;
            if d >= 1 && top.len() == 1 {
                return Some((a, d, top.clone()));
            }
        }
        None
    }

    /// Is the expression identically zero (after common-denominator form)?
    pub fn is_identically_zero(&self) -> Result<bool> {
        Ok(self.canonical()?.is_zero())
    }

    /// First term in the canonical order, used as the normalizing term when
    /// comparing expressions up to a constant factor.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next()
    }
}

fn has_unsettled(m: &Monomial) -> bool {
    m.0.iter().any(|(a, e)| matches!(a, Atom::Radical(_)) && e.is_positive_integer())
}

/// Expand radicals that ended up with a positive integer exponent.
fn settle(m: Monomial, c: Rational, lim: &Limits) -> Result<Poly> {
    let mut keep = BTreeMap::new();
    let mut expand: Vec<(Poly, i64)> = Vec::new();
    for (a, e) in m.0 {
        match (&a, e.as_integer()) {
            (Atom::Radical(p), Some(k)) if k > 0 => expand.push((p.clone(), k)),
            _ => {
                keep.insert(a, e);
            }
        }
    }
    let mut out = Poly::term(c, Monomial(keep));
    for (p, k) in expand {
        out = out.mul_with(&p.pow_with(&AffineExponent::int(k), lim)?, lim)?;
    }
    Ok(out)
}

fn invert_monomial(m: &Monomial) -> Option<Monomial> {
    let mut out = BTreeMap::new();
    for (a, e) in &m.0 {
        match a {
            Atom::Exp(p) => {
                out.insert(Atom::Exp(p.neg()), AffineExponent::one());
            }
            _ => {
                out.insert(a.clone(), -e);
            }
        }
    }
    Some(Monomial(out))
}

/// `c^e` as an exact rational, when it exists.
pub fn rational_pow(c: &Rational, e: &AffineExponent) -> Option<Rational> {
    if c.is_one() {
        return Some(Rational::one());
    }
    let q = e.as_constant()?;
    if c.is_zero() {
        return q.is_positive().then(Rational::zero);
    }
    let num = q.numer().to_i64()?;
    let den = q.denom().to_i64()?;
    let root = if den == 1 { c.clone() } else { rational_root(c, den)? };
    let k = i32::try_from(num).ok()?;
    Some(num::pow::Pow::pow(&root, k))
}

fn rational_root(c: &Rational, k: i64) -> Option<Rational> {
    if c.is_negative() {
        if k % 2 == 0 {
            return None;
        }
        return rational_root(&-c.clone(), k).map(|r| -r);
    }
    let k = u32::try_from(k).ok()?;
    let n = c.numer().nth_root(k);
    let d = c.denom().nth_root(k);
    let cand = Rational::new(n, d);
    (num::pow::Pow::pow(&cand, k) == *c).then_some(cand)
}

fn monomial_pow(m: &Monomial, c: &Rational, e: &AffineExponent, lim: &Limits) -> Result<Poly> {
    let coeff = if e.is_constant() || c.is_one() {
        rational_pow(c, e).ok_or_else(|| {
            if c.is_zero() {
                Error::DivisionByZero
            } else {
                Error::Unsupported(format!("{} raised to {} is not rational", super::exponent::fmt_rational(c), e))
            }
        })?
    } else {
        return Err(Error::Unsupported(format!(
            "constant {} raised to symbolic exponent {}",
            super::exponent::fmt_rational(c),
            e
        )));
    };
    let mut out = BTreeMap::new();
    let mut extra = Poly::one();
    for (a, f) in &m.0 {
        match a {
            Atom::Exp(arg) => {
                let scaled = arg.mul(&Poly::from_exponent(e))?;
                extra = extra.mul_with(&Poly::exp(&scaled)?, lim)?;
            }
            _ => {
                let ne = f
                    .checked_mul(e)
                    .ok_or_else(|| Error::Unsupported(format!("exponent ({f})*({e}) is not affine")))?;
                if !ne.is_zero() {
                    out.insert(a.clone(), ne);
                }
            }
        }
    }
    let mono = Monomial(out);
    let base = if has_unsettled(&mono) { settle(mono, coeff, lim)? } else { Poly::term(coeff, mono) };
    base.mul_with(&extra, lim)
}
