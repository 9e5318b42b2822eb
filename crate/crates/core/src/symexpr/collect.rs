use std::collections::BTreeMap;
use std::fmt;

use super::assumptions::Assumptions;
use super::exponent::AffineExponent;
use super::poly::{Atom, Monomial, Poly};
use super::subst::{substitute_poly, Bindings, SymbolKey};
use super::symbols::{Coord, Dep, Param};
use super::{to_poly, Expr};
use crate::error::{Error, Result};

/// A functionally independent atom `base^power * exp(exp_arg)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AtomClass {
    pub power: AffineExponent,
    /// The base-dependent part of an `exp` factor, if any.
    pub exp_arg: Option<Expr>,
}

impl AtomClass {
    pub fn atom(&self, base: Dep) -> Expr {
        let p = Expr::Dep(base).pow(self.power.clone());
        let p = if self.power.is_zero() { Expr::one() } else { p };
        match &self.exp_arg {
            Some(a) => p * a.clone().exp(),
            None => p,
        }
    }
}

impl fmt::Display for AtomClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pow = if self.power.is_zero() {
            None
        } else if self.power.is_one() {
            Some("V".to_string())
        } else {
            Some(format!("V^({})", self.power))
        };
        let ex = self.exp_arg.as_ref().map(|a| format!("exp({})", super::render::plain(a)));
        match (pow, ex) {
            (None, None) => write!(f, "1"),
            (Some(p), None) => write!(f, "{p}"),
            (None, Some(e)) => write!(f, "{e}"),
            (Some(p), Some(e)) => write!(f, "{p}*{e}"),
        }
    }
}

/// Coefficients per atom class, plus a note for every merge the ledger forced.
#[derive(Clone, Debug, Default)]
pub struct Collected {
    pub classes: Vec<(AtomClass, Expr)>,
    pub merges: Vec<String>,
}

impl Collected {
    pub fn coefficient(&self, power: &AffineExponent) -> Option<&Expr> {
        self.classes.iter().find(|(c, _)| c.exp_arg.is_none() && c.power == *power).map(|(_, e)| e)
    }
}

struct Key {
    power: AffineExponent,
    exp_arg: Poly,
}

/// Split `e` by powers of `base` (and `exp` factors depending on it).
pub fn collect_powers(e: &Expr, base: Dep, ass: &Assumptions) -> Result<Collected> {
    let mut p = to_poly(e)?;
    if !ass.branch().is_empty() {
        let b: Bindings = ass
            .branch()
            .iter()
            .map(|(s, v)| (SymbolKey::Param(Param::of_exponent(*s)), Expr::Const(v.clone())))
            .collect();
        p = substitute_poly(&p, &b)?;
    }
    let p = p.canonical()?;
    let coord = Coord::Dep(base);

    let mut groups: Vec<(Key, Poly)> = Vec::new();
    for (m, c) in p.terms() {
        let mut rest = BTreeMap::new();
        let mut power = AffineExponent::zero();
        let mut exp_base = Poly::zero();
        for (a, ex) in &m.0 {
            match a {
                Atom::Dep(d) if *d == base => power = ex.clone(),
                Atom::Exp(arg) => {
                    let mut free = Poly::zero();
                    for (am, ac) in arg.terms() {
                        let t = Poly::term(ac.clone(), am.clone());
                        if am.0.keys().any(|x| x.depends_on_coord(coord)) {
                            exp_base.add_assign(&t);
                        } else {
                            free.add_assign(&t);
                        }
                    }
                    if !free.is_zero() {
                        let fe = Poly::exp(&free)?;
                        let (fm, _) = fe.single_term().expect("exp is a single atom");
                        for (fa, fx) in &fm.0 {
                            rest.insert(fa.clone(), fx.clone());
                        }
                    }
                }
                _ if a.depends_on_coord(coord) => {
                    return Err(Error::NotSplittable(format!(
                        "{} (through {})",
                        base.name(),
                        super::render::plain(&Expr::from_atom(a))
                    )));
                }
                _ => {
                    rest.insert(a.clone(), ex.clone());
                }
            }
        }
        let term = Poly::term(c.clone(), Monomial(rest));
        match groups.iter_mut().find(|(k, _)| k.power == power && k.exp_arg == exp_base) {
            Some((_, acc)) => acc.add_assign(&term),
            None => groups.push((Key { power, exp_arg: exp_base }, term)),
        }
    }
    groups.retain(|(_, c)| !c.is_zero());

    // Union-find over classes the ledger cannot separate.
    let n = groups.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    let mut merges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if separable(&groups[i].0, &groups[j].0, ass) {
                continue;
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[rj] = ri;
                merges.push(format!(
                    "{} and {} merged: the assumptions do not separate them",
                    class_of(&groups[i].0, base),
                    class_of(&groups[j].0, base)
                ));
            }
        }
    }

    let mut out: BTreeMap<AtomClass, Poly> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let rep = class_of(&groups[r].0, base);
        let coeff = if r == i {
            groups[i].1.clone()
        } else {
            // Re-express relative to the representative atom.
            let shift = &groups[i].0.power - &groups[r].0.power;
            let rel = Poly::dep(base).pow(&shift)?;
            let ediff = groups[i].0.exp_arg.sub(&groups[r].0.exp_arg);
            let rel = if ediff.is_zero() { rel } else { rel.mul(&Poly::exp(&ediff)?)? };
            groups[i].1.mul(&rel)?
        };
        out.entry(rep).or_default().add_assign(&coeff);
    }
    let mut classes = Vec::new();
    for (k, c) in out {
        let c = c.canonical()?;
        if !c.is_zero() {
            classes.push((k, Expr::from_poly(&c)));
        }
    }
    Ok(Collected { classes, merges })
}

fn class_of(k: &Key, _base: Dep) -> AtomClass {
    AtomClass { power: k.power.clone(), exp_arg: (!k.exp_arg.is_zero()).then(|| Expr::from_poly(&k.exp_arg)) }
}

/// Can the two atoms be told apart as functions of the base?
fn separable(a: &Key, b: &Key, ass: &Assumptions) -> bool {
    let ediff = a.exp_arg.sub(&b.exp_arg);
    if ediff.is_zero() {
        return ass.exponents_distinct(&a.power, &b.power);
    }
    // exp(c*V) with rational c != 0 is independent of every power of V.
    match ediff.single_term() {
        Some((m, _)) => m.0.len() == 1 && m.0.iter().all(|(a, e)| matches!(a, Atom::Dep(_)) && e.is_one()),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{normalize, ExponentSymbol, Rational};
    use num::One;

    fn f(name: &str) -> Expr {
        Expr::func(name)
    }

    fn n_ledger() -> Assumptions {
        Assumptions::power_family().with_exponent_ne(AffineExponent::n_plus(0), Rational::one()).unwrap()
    }

    #[test]
    fn splits_by_symbolic_powers() {
        // V^n (a) + V^(n-1) (b) + c
        let e = Expr::v().pow(AffineExponent::n_plus(0)) * f("f")
            + Expr::v().pow(AffineExponent::n_plus(-1)) * f("g")
            + f("h");
        let c = collect_powers(&e, Dep::V, &n_ledger()).unwrap();
        assert_eq!(c.classes.len(), 3);
        assert!(c.merges.is_empty());
        // Without n != 1 the classes n-1 and 0 cannot be separated.
        let weak = collect_powers(&e, Dep::V, &Assumptions::power_family()).unwrap();
        assert_eq!(weak.classes.len(), 2);
        assert_eq!(weak.merges.len(), 1);
    }

    #[test]
    fn branch_collapses_exponents() {
        let e = Expr::v().pow(AffineExponent::n_plus(0)) * f("f")
            + Expr::v().pow(AffineExponent::n_plus(-1)) * f("g")
            + f("h");
        let ass = Assumptions::new().with_branch(ExponentSymbol::N, Rational::one()).unwrap();
        let c = collect_powers(&e, Dep::V, &ass).unwrap();
        assert_eq!(c.classes.len(), 2);
    }

    #[test]
    fn exp_classes() {
        let ev = Expr::v().exp();
        let e = ev.clone() * f("f") + Expr::v() * ev * f("g") + f("h");
        let c = collect_powers(&e, Dep::V, &Assumptions::new()).unwrap();
        assert_eq!(c.classes.len(), 3);
    }

    #[test]
    fn coefficient_with_base_is_rejected() {
        let e = (Expr::v() + 1).powi(-1) * f("f");
        assert!(matches!(collect_powers(&e, Dep::V, &Assumptions::new()), Err(Error::NotSplittable(_))));
        let e = f("F") * f("f");
        assert!(matches!(collect_powers(&e, Dep::V, &Assumptions::new()), Err(Error::NotSplittable(_))));
    }

    #[test]
    fn classes_sum_back_to_input() {
        let e = Expr::v().pow(AffineExponent::n_plus(2)) * Expr::param("lam")
            + Expr::v().powi(3) * f("g")
            + Expr::v().exp() * Expr::t();
        let c = collect_powers(&e, Dep::V, &Assumptions::power_family()).unwrap();
        let mut sum = Expr::zero();
        for (k, coef) in &c.classes {
            sum = sum + k.atom(Dep::V) * coef.clone();
        }
        assert_eq!(normalize(&sum).unwrap(), normalize(&e).unwrap());
    }
}
