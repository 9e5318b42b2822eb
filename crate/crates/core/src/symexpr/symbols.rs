use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::exponent::ExponentSymbol;

/// Independent variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Indep {
    T,
    X,
}

impl Indep {
    pub fn name(self) -> &'static str {
        match self {
            Indep::T => "t",
            Indep::X => "x",
        }
    }
}

/// Dependent variable. `U` is the original unknown, `V` the canonical one and
/// `W` the shifted unknown of the affine substitution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dep {
    U,
    V,
    W,
}

impl Dep {
    pub fn name(self) -> &'static str {
        match self {
            Dep::U => "U",
            Dep::V => "V",
            Dep::W => "W",
        }
    }
}

/// Jet coordinate `dep_{t^t x^x}` (total order at least one).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jet {
    pub dep: Dep,
    pub t: u8,
    pub x: u8,
}

impl Jet {
    pub fn new(dep: Dep, t: u8, x: u8) -> Result<Jet> {
        if t == 0 && x == 0 {
            return Err(Error::Malformed("jet symbol of order zero".into()));
        }
        Ok(Jet { dep, t, x })
    }

    pub fn vt() -> Jet {
        Jet { dep: Dep::V, t: 1, x: 0 }
    }
    pub fn vx() -> Jet {
        Jet { dep: Dep::V, t: 0, x: 1 }
    }
    pub fn vxx() -> Jet {
        Jet { dep: Dep::V, t: 0, x: 2 }
    }
    pub fn vtx() -> Jet {
        Jet { dep: Dep::V, t: 1, x: 1 }
    }
    pub fn vtt() -> Jet {
        Jet { dep: Dep::V, t: 2, x: 0 }
    }

    pub fn order(&self) -> u8 {
        self.t + self.x
    }

    pub fn bump(&self, by: Indep) -> Jet {
        match by {
            Indep::T => Jet { t: self.t + 1, ..*self },
            Indep::X => Jet { x: self.x + 1, ..*self },
        }
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.dep.name())?;
        for _ in 0..self.t {
            write!(f, "t")?;
        }
        for _ in 0..self.x {
            write!(f, "x")?;
        }
        Ok(())
    }
}

/// A free constant such as `lam`, `lam1s` (starred), `n`, `delta` or `c0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param(Arc<str>);

impl Param {
    pub fn new(name: &str) -> Result<Param> {
        if is_parameter_name(name) {
            Ok(Param(Arc::from(name)))
        } else {
            Err(Error::Malformed(format!("`{name}` is not a parameter name")))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The exponent symbol this parameter doubles as, if any.
    pub fn exponent_symbol(&self) -> Option<ExponentSymbol> {
        match &*self.0 {
            "n" => Some(ExponentSymbol::N),
            "m" => Some(ExponentSymbol::M),
            _ => None,
        }
    }

    pub fn of_exponent(sym: ExponentSymbol) -> Param {
        Param(Arc::from(sym.name()))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

const PARAM_WORDS: &[&str] = &["lam", "m", "n", "delta", "gamma", "p", "k", "s", "mu", "kappa"];

/// Accepted parameter spellings: the fixed words above, `lam<d>`, `lam<d>s`
/// (starred constants) and `<letter><digits>` such as `c0`, `b0`, `q1`.
pub fn is_parameter_name(name: &str) -> bool {
    if PARAM_WORDS.contains(&name) {
        return true;
    }
    if let Some(rest) = name.strip_prefix("lam") {
        let digits = rest.strip_suffix('s').unwrap_or(rest);
        return !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit());
    }
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {
            let rest: String = chars.collect();
            !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
        }
        _ => false,
    }
}

/// Argument slot of a formal function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    Indep(Indep),
    Dep(Dep),
}

impl Coord {
    pub const T: Coord = Coord::Indep(Indep::T);
    pub const X: Coord = Coord::Indep(Indep::X);
    pub const U: Coord = Coord::Dep(Dep::U);
    pub const V: Coord = Coord::Dep(Dep::V);

    pub fn name(self) -> &'static str {
        match self {
            Coord::Indep(i) => i.name(),
            Coord::Dep(d) => d.name(),
        }
    }

    pub fn from_name(s: &str) -> Option<Coord> {
        Some(match s {
            "t" => Coord::T,
            "x" => Coord::X,
            "U" => Coord::U,
            "V" => Coord::V,
            "W" => Coord::Dep(Dep::W),
            _ => return None,
        })
    }
}

/// Formal function symbol with its declared argument signature and a
/// derivative multi-index (one order per argument).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncSym {
    name: Arc<str>,
    args: Arc<[Coord]>,
    derivs: Arc<[u8]>,
}

pub const FUNCTION_NAMES: &[&str] = &["F", "C", "xi", "eta", "f", "g", "h", "a", "b", "q", "M", "phi"];

/// Signature used when a function name appears without explicit arguments.
pub fn default_signature(name: &str) -> Option<Vec<Coord>> {
    Some(match name {
        "F" => vec![Coord::V],
        "C" => vec![Coord::U],
        "xi" | "eta" | "M" => vec![Coord::T, Coord::X, Coord::V],
        "f" | "g" | "h" | "a" | "b" | "q" => vec![Coord::T, Coord::X],
        "phi" => vec![Coord::T],
        _ => return None,
    })
}

impl FuncSym {
    pub fn new(name: &str, args: Vec<Coord>) -> Result<FuncSym> {
        let derivs = vec![0; args.len()];
        Self::with_derivs(name, args, derivs)
    }

    pub fn with_derivs(name: &str, args: Vec<Coord>, derivs: Vec<u8>) -> Result<FuncSym> {
        if !FUNCTION_NAMES.contains(&name) {
            return Err(Error::Malformed(format!("`{name}` is not a function symbol")));
        }
        if derivs.len() != args.len() {
            return Err(Error::Malformed(format!(
                "derivative multi-index of `{name}` has {} slots for {} arguments",
                derivs.len(),
                args.len()
            )));
        }
        for (i, a) in args.iter().enumerate() {
            if args[..i].contains(a) {
                return Err(Error::Malformed(format!("repeated argument `{}` of `{name}`", a.name())));
            }
        }
        Ok(FuncSym { name: Arc::from(name), args: args.into(), derivs: derivs.into() })
    }

    /// Function with its default signature and no derivatives.
    pub fn standard(name: &str) -> Result<FuncSym> {
        let sig =
            default_signature(name).ok_or_else(|| Error::Malformed(format!("`{name}` is not a function symbol")))?;
        Self::new(name, sig)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn args(&self) -> &[Coord] {
        &self.args
    }

    pub fn derivs(&self) -> &[u8] {
        &self.derivs
    }

    pub fn is_underived(&self) -> bool {
        self.derivs.iter().all(|&d| d == 0)
    }

    /// Same function without derivatives.
    pub fn base(&self) -> FuncSym {
        FuncSym { name: self.name.clone(), args: self.args.clone(), derivs: vec![0; self.args.len()].into() }
    }

    /// Same name and signature, ignoring derivatives.
    pub fn same_function(&self, other: &FuncSym) -> bool {
        self.name == other.name && self.args == other.args
    }

    pub fn depends_on(&self, c: Coord) -> bool {
        self.args.contains(&c)
    }

    /// Derivative with respect to one declared argument; `None` if the function
    /// does not depend on it.
    pub fn derived(&self, c: Coord) -> Option<FuncSym> {
        let i = self.args.iter().position(|&a| a == c)?;
        let mut d = self.derivs.to_vec();
        d[i] += 1;
        Some(FuncSym { name: self.name.clone(), args: self.args.clone(), derivs: d.into() })
    }
}

impl fmt::Display for FuncSym {
    /// Subscript notation `xi_xV` for default signatures; explicit signatures
    /// render derivatives through the `D` operator, e.g. `D(h(x),x,2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let default = default_signature(&self.name);
        if default.as_deref() == Some(&self.args[..]) {
            f.write_str(&self.name)?;
            if !self.is_underived() {
                write!(f, "_")?;
                for (a, &d) in self.args.iter().zip(self.derivs.iter()) {
                    for _ in 0..d {
                        f.write_str(a.name())?;
                    }
                }
            }
            return Ok(());
        }
        let mut head = format!("{}(", self.name);
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                head.push(',');
            }
            head.push_str(a.name());
        }
        head.push(')');
        for (a, &d) in self.args.iter().zip(self.derivs.iter()) {
            match d {
                0 => {}
                1 => head = format!("D({head},{})", a.name()),
                _ => head = format!("D({head},{},{d})", a.name()),
            }
        }
        f.write_str(&head)
    }
}
