use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::Zero;

use super::diff::partial;
use super::exponent::{AffineExponent, ExponentSymbol};
use super::poly::{Atom, Poly};
use super::symbols::{Coord, Dep, Indep, Jet, Param, FUNCTION_NAMES};
use super::{to_poly, Expr};
use crate::error::{Error, Result};

/// Something a binding can replace.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SymbolKey {
    Param(Param),
    Indep(Indep),
    Dep(Dep),
    Jet(Jet),
    /// A function name; its derivatives are replaced by derivatives of the
    /// bound expression.
    Func(String),
}

impl SymbolKey {
    pub fn from_name(name: &str) -> Option<SymbolKey> {
        if FUNCTION_NAMES.contains(&name) {
            return Some(SymbolKey::Func(name.to_string()));
        }
        if let Some(c) = Coord::from_name(name) {
            return Some(match c {
                Coord::Indep(i) => SymbolKey::Indep(i),
                Coord::Dep(d) => SymbolKey::Dep(d),
            });
        }
        if let Some(j) = parse_jet(name) {
            return Some(SymbolKey::Jet(j));
        }
        Param::new(name).ok().map(SymbolKey::Param)
    }

    fn matches(&self, a: &Atom) -> bool {
        match (self, a) {
            (SymbolKey::Param(p), Atom::Param(q)) => p == q,
            (SymbolKey::Indep(i), Atom::Indep(j)) => i == j,
            (SymbolKey::Dep(d), Atom::Dep(e)) => d == e,
            (SymbolKey::Jet(j), Atom::Jet(k)) => j == k,
            (SymbolKey::Func(n), Atom::Func(f)) => f.name() == n,
            _ => false,
        }
    }
}

impl fmt::Display for SymbolKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKey::Param(p) => write!(f, "{p}"),
            SymbolKey::Indep(i) => f.write_str(i.name()),
            SymbolKey::Dep(d) => f.write_str(d.name()),
            SymbolKey::Jet(j) => write!(f, "{j}"),
            SymbolKey::Func(n) => f.write_str(n),
        }
    }
}

/// Jet names such as `Vt`, `Uxx`, `Vtx`.
pub(crate) fn parse_jet(name: &str) -> Option<Jet> {
    let mut chars = name.chars();
    let dep = match chars.next()? {
        'U' => Dep::U,
        'V' => Dep::V,
        'W' => Dep::W,
        _ => return None,
    };
    let rest = chars.as_str();
    let t = rest.chars().take_while(|&c| c == 't').count();
    let x_part = &rest[t..];
    if !x_part.chars().all(|c| c == 'x') || t + x_part.len() == 0 || t + x_part.len() > 8 {
        return None;
    }
    Some(Jet { dep, t: t as u8, x: x_part.len() as u8 })
}

pub type Bindings = BTreeMap<SymbolKey, Expr>;

/// Simultaneous substitution followed by normalization.
pub fn substitute(e: &Expr, bindings: &Bindings) -> Result<Expr> {
    let p = substitute_poly(&to_poly(e)?, bindings)?;
    Ok(Expr::from_poly(&p.canonical()?))
}

pub(crate) fn substitute_poly(p: &Poly, bindings: &Bindings) -> Result<Poly> {
    let mut values: BTreeMap<SymbolKey, Poly> = BTreeMap::new();
    for (k, v) in bindings {
        values.insert(k.clone(), to_poly(v)?);
    }
    check_bindings(&values)?;

    let mut exps: Vec<(ExponentSymbol, AffineExponent)> = Vec::new();
    for (k, v) in &values {
        if let SymbolKey::Param(param) = k {
            if let Some(sym) = param.exponent_symbol() {
                let e = poly_to_exponent(v).ok_or_else(|| {
                    Error::Unsupported(format!("binding for exponent symbol `{param}` is not affine in n, m"))
                })?;
                exps.push((sym, e));
            }
        }
    }
    let stage = if exps.is_empty() {
        p.clone()
    } else {
        p.map_exponents(&|e| {
            let mut out = AffineExponent::constant(e.constant.clone());
            let mut untouched = e.clone();
            untouched.constant = num::zero();
            for (sym, val) in &exps {
                let c = e.coeff(*sym).clone();
                out = &out + &val.scale(&c);
                untouched = untouched.bind(*sym, &num::zero());
            }
            Ok(&out + &untouched)
        })?
    };

    let replace = |a: &Atom| -> Result<Option<Poly>> {
        if let Atom::Func(f) = a {
            if let Some(v) = values.get(&SymbolKey::Func(f.name().to_string())) {
                let mut d = v.clone();
                for (arg, &k) in f.args().iter().zip(f.derivs()) {
                    for _ in 0..k {
                        d = partial(&d, *arg)?;
                    }
                }
                return Ok(Some(d));
            }
            for &arg in f.args() {
                let key = match arg {
                    Coord::Indep(i) => SymbolKey::Indep(i),
                    Coord::Dep(d) => SymbolKey::Dep(d),
                };
                if values.contains_key(&key) {
                    return Err(Error::Unsupported(format!("`{f}` depends on the substituted coordinate `{key}`")));
                }
            }
            return Ok(None);
        }
        Ok(values.iter().find(|(k, _)| k.matches(a)).map(|(_, v)| v.clone()))
    };
    stage.map_atoms(&replace)
}

/// Rejects bindings whose value mentions their own key, and cycles among
/// bound keys.
fn check_bindings(values: &BTreeMap<SymbolKey, Poly>) -> Result<()> {
    let keys: Vec<&SymbolKey> = values.keys().collect();
    let mut edges: BTreeMap<&SymbolKey, BTreeSet<&SymbolKey>> = BTreeMap::new();
    for (k, v) in values {
        let mut out = BTreeSet::new();
        for other in &keys {
            let mentions = v.contains(&|a| other.matches(a))
                || matches!(other, SymbolKey::Param(p) if p.exponent_symbol().is_some() && mentions_exponent(v, p));
            if mentions {
                if *other == k {
                    return Err(Error::SelfReferentialBinding(k.to_string()));
                }
                out.insert(*other);
            }
        }
        edges.insert(k, out);
    }
    // Depth-first search for a cycle.
    fn visit<'a>(
        k: &'a SymbolKey,
        edges: &BTreeMap<&'a SymbolKey, BTreeSet<&'a SymbolKey>>,
        state: &mut BTreeMap<&'a SymbolKey, u8>,
    ) -> Result<()> {
        match state.get(k) {
            Some(1) => return Err(Error::CyclicBinding(k.to_string())),
            Some(2) => return Ok(()),
            _ => {}
        }
        state.insert(k, 1);
        if let Some(next) = edges.get(k) {
            for n in next {
                visit(n, edges, state)?;
            }
        }
        state.insert(k, 2);
        Ok(())
    }
    let mut state = BTreeMap::new();
    for k in &keys {
        visit(k, &edges, &mut state)?;
    }
    Ok(())
}

fn mentions_exponent(p: &Poly, param: &Param) -> bool {
    let Some(sym) = param.exponent_symbol() else {
        return false;
    };
    fn walk(p: &Poly, sym: ExponentSymbol) -> bool {
        p.terms().any(|(m, _)| {
            m.0.iter().any(|(a, e)| {
                !e.coeff(sym).is_zero()
                    || match a {
                        Atom::Exp(q) | Atom::Ln(q) | Atom::Radical(q) => walk(q, sym),
                        _ => false,
                    }
            })
        })
    }
    walk(p, sym)
}

/// `a*n + b*m + c` read back from a polynomial, if it has that shape.
pub(crate) fn poly_to_exponent(p: &Poly) -> Option<AffineExponent> {
    let mut out = AffineExponent::zero();
    for (m, c) in p.terms() {
        if m.is_one() {
            out.constant += c;
            continue;
        }
        let (a, e) = m.0.iter().next().filter(|_| m.0.len() == 1)?;
        if !e.is_one() {
            return None;
        }
        match a {
            Atom::Param(q) => match q.exponent_symbol()? {
                ExponentSymbol::N => out.n_coeff += c,
                ExponentSymbol::M => out.m_coeff += c,
            },
            _ => return None,
        }
    }
    Some(out)
}
