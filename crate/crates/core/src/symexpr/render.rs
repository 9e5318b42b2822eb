//! Text rendering: `plain` re-parses to an equal expression, `latex` is for
//! reports.

use num::{One, Signed};

use super::exponent::{fmt_rational, AffineExponent};
use super::symbols::{FuncSym, Jet, Param};
use super::{Expr, Rational};

pub fn plain(e: &Expr) -> String {
    Plain.sum(e)
}

pub fn latex(e: &Expr) -> String {
    Latex.sum(e)
}

/// Split a product into its sign, rational coefficient and remaining factors.
fn split_coeff(e: &Expr) -> (Rational, Vec<&Expr>) {
    match e {
        Expr::Const(c) => (c.clone(), vec![]),
        Expr::Product(fs) => {
            let mut c = Rational::one();
            let mut rest = Vec::new();
            for f in fs {
                match f {
                    Expr::Const(k) => c *= k,
                    _ => rest.push(f),
                }
            }
            (c, rest)
        }
        _ => (Rational::one(), vec![e]),
    }
}

trait Style {
    fn rational(&self, q: &Rational) -> String;
    fn param(&self, p: &Param) -> String;
    fn jet(&self, j: &Jet) -> String;
    fn func(&self, f: &FuncSym) -> String;
    fn name(&self, s: &str) -> String;
    fn times(&self) -> &'static str;
    fn power(&self, base: String, e: &AffineExponent) -> String;
    fn call(&self, head: &str, arg: String) -> String;
    fn exponent(&self, e: &AffineExponent) -> String;

    fn sum(&self, e: &Expr) -> String {
        let terms: Vec<&Expr> = match e {
            Expr::Sum(ts) => ts.iter().collect(),
            _ => vec![e],
        };
        let mut out = String::new();
        for (i, t) in terms.iter().enumerate() {
            let (c, rest) = split_coeff(t);
            let neg = c.is_negative();
            let mag = c.abs();
            if neg {
                out.push('-');
            } else if i > 0 {
                out.push('+');
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || rest.is_empty() {
                factors.push(self.rational(&mag));
            }
            for f in rest {
                factors.push(self.factor(f));
            }
            out.push_str(&factors.join(self.times()));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// A factor inside a product, parenthesized when needed.
    fn factor(&self, e: &Expr) -> String {
        match e {
            Expr::Sum(_) => format!("({})", self.sum(e)),
            Expr::Product(_) => self.sum(e),
            _ => self.atom(e),
        }
    }

    fn atom(&self, e: &Expr) -> String {
        match e {
            Expr::Const(c) if c.is_negative() || !c.is_integer() => format!("({})", self.rational(c)),
            Expr::Const(c) => self.rational(c),
            Expr::Param(p) => self.param(p),
            Expr::Indep(i) => self.name(i.name()),
            Expr::Dep(d) => self.name(d.name()),
            Expr::Jet(j) => self.jet(j),
            Expr::Func(f) => self.func(f),
            Expr::Sum(_) | Expr::Product(_) => format!("({})", self.sum(e)),
            Expr::Power(b, ex) => {
                let base = match &**b {
                    Expr::Sum(_) | Expr::Product(_) | Expr::Power(..) | Expr::Const(_) => format!("({})", self.sum(b)),
                    other => self.atom(other),
                };
                self.power(base, ex)
            }
            Expr::Exp(a) => self.call("exp", self.sum(a)),
            Expr::Ln(a) => self.call("ln", self.sum(a)),
        }
    }
}

struct Plain;

impl Style for Plain {
    fn rational(&self, q: &Rational) -> String {
        fmt_rational(q)
    }
    fn param(&self, p: &Param) -> String {
        p.to_string()
    }
    fn jet(&self, j: &Jet) -> String {
        j.to_string()
    }
    fn func(&self, f: &FuncSym) -> String {
        f.to_string()
    }
    fn name(&self, s: &str) -> String {
        s.to_string()
    }
    fn times(&self) -> &'static str {
        "*"
    }
    fn power(&self, base: String, e: &AffineExponent) -> String {
        format!("{base}^{}", self.exponent(e))
    }
    fn call(&self, head: &str, arg: String) -> String {
        format!("{head}({arg})")
    }
    fn exponent(&self, e: &AffineExponent) -> String {
        match e.as_integer() {
            Some(k) if k >= 0 => k.to_string(),
            _ => format!("({e})"),
        }
    }
}

struct Latex;

fn greek(word: &str) -> Option<&'static str> {
    Some(match word {
        "lam" => "\\lambda",
        "delta" => "\\delta",
        "gamma" => "\\gamma",
        "mu" => "\\mu",
        "kappa" => "\\kappa",
        "xi" => "\\xi",
        "eta" => "\\eta",
        "phi" => "\\varphi",
        _ => return None,
    })
}

impl Style for Latex {
    fn rational(&self, q: &Rational) -> String {
        if q.is_integer() {
            q.numer().to_string()
        } else {
            format!("\\frac{{{}}}{{{}}}", q.numer(), q.denom())
        }
    }
    fn param(&self, p: &Param) -> String {
        let name = p.name();
        if let Some(rest) = name.strip_prefix("lam") {
            let (digits, star) = match rest.strip_suffix('s') {
                Some(d) => (d, "^{*}"),
                None => (rest, ""),
            };
            if digits.is_empty() {
                return "\\lambda".into();
            }
            return format!("\\lambda_{{{digits}}}{star}");
        }
        if let Some(g) = greek(name) {
            return g.into();
        }
        match name.char_indices().find(|(_, c)| c.is_ascii_digit()) {
            Some((i, _)) => format!("{}_{{{}}}", &name[..i], &name[i..]),
            None => name.into(),
        }
    }
    fn jet(&self, j: &Jet) -> String {
        let s = j.to_string();
        format!("{}_{{{}}}", &s[..1], &s[1..])
    }
    fn func(&self, f: &FuncSym) -> String {
        let head = greek(f.name()).map(str::to_string).unwrap_or_else(|| f.name().to_string());
        let mut sub = String::new();
        for (a, &d) in f.args().iter().zip(f.derivs()) {
            for _ in 0..d {
                sub.push_str(a.name());
            }
        }
        if sub.is_empty() {
            head
        } else {
            format!("{head}_{{{sub}}}")
        }
    }
    fn name(&self, s: &str) -> String {
        s.to_string()
    }
    fn times(&self) -> &'static str {
        " "
    }
    fn power(&self, base: String, e: &AffineExponent) -> String {
        let base = base.replacen('(', "\\left(", 1);
        let base = match base.rfind(')') {
            Some(i) if base.starts_with("\\left(") => format!("{}\\right){}", &base[..i], &base[i + 1..]),
            _ => base,
        };
        format!("{base}^{{{}}}", self.exponent(e))
    }
    fn call(&self, head: &str, arg: String) -> String {
        match head {
            "exp" => format!("e^{{{arg}}}"),
            _ => format!("\\{head}\\left({arg}\\right)"),
        }
    }
    fn exponent(&self, e: &AffineExponent) -> String {
        let s = e.to_string().replace('*', "");
        match e.as_constant() {
            Some(c) if !c.is_integer() => {
                let sign = if c.is_negative() { "-" } else { "" };
                format!("{sign}{}", self.rational(&c.abs()))
            }
            _ => s,
        }
    }
}
