//! Surface syntax for expressions, equations, operators and bindings.
//!
//! ```text
//! expr     := term (("+"|"-") term)*
//! term     := factor (("*"|"/") factor)*
//! factor   := atom ("^" exponent)? | "-" factor
//! atom     := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
//! exponent := atom | "(" expr ")"
//! ```

mod lexer;

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed};

use crate::error::{Error, Result};
use crate::invariance::{EvolutionPDE, Origin, SymmetryOperator};
use crate::symexpr::poly::{Atom, Poly};
use crate::symexpr::{
    self, apply_point_transform, is_parameter_name, normalize, partial, total, AffineExponent, Coord, Dep, Equation,
    Expr, FuncSym, Indep, Jet, Param, PointTransform, Rational, SymbolKey, FUNCTION_NAMES,
};
use lexer::{lex, Tok};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }

    fn join(self, other: SourceSpan) -> SourceSpan {
        SourceSpan::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic { span, message: message.into(), severity: Severity::Error }
    }

    pub fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic { span, message: message.into(), severity: Severity::Warning }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at {}..{}: {}", self.span.start, self.span.end, self.message)
    }
}

fn fail<T>(span: SourceSpan, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(vec![ParseDiagnostic::error(span, msg)]))
}

#[derive(Clone, Debug)]
enum Node {
    Num(Rational),
    Ident(String),
    Call(String, Vec<Spanned>),
    Neg(Box<Spanned>),
    Add(Box<Spanned>, Box<Spanned>),
    Sub(Box<Spanned>, Box<Spanned>),
    Mul(Box<Spanned>, Box<Spanned>),
    Div(Box<Spanned>, Box<Spanned>),
    Pow(Box<Spanned>, Box<Spanned>),
}

#[derive(Clone, Debug)]
struct Spanned {
    node: Node,
    span: SourceSpan,
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        let toks = lex(src).map_err(|d| Error::Parse(vec![d]))?;
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, ctx: &str) -> Result<SourceSpan> {
        if *self.peek() == want {
            return Ok(self.bump().1);
        }
        fail(self.span(), format!("expected {} {ctx}, found {}", want.describe(), self.peek().describe()))
    }

    fn expr(&mut self) -> Result<Spanned> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => Node::Add,
                Tok::Minus => Node::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = lhs.span.join(rhs.span);
            lhs = Spanned { node: op(Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn term(&mut self) -> Result<Spanned> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => Node::Mul,
                Tok::Slash => Node::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            let span = lhs.span.join(rhs.span);
            lhs = Spanned { node: op(Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn factor(&mut self) -> Result<Spanned> {
        if *self.peek() == Tok::Minus {
            let s = self.bump().1;
            let inner = self.factor()?;
            let span = s.join(inner.span);
            return Ok(Spanned { node: Node::Neg(Box::new(inner)), span });
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            // Right-associative; a leading minus is accepted in exponents.
            let ex = self.factor()?;
            let span = base.span.join(ex.span);
            return Ok(Spanned { node: Node::Pow(Box::new(base), Box::new(ex)), span });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Spanned> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Num(q) => Ok(Spanned { node: Node::Num(q), span }),
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    return Ok(Spanned { node: Node::Ident(name), span });
                }
                self.bump();
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                let close = self.expect(Tok::RParen, &format!("to close the arguments of `{name}`"))?;
                Ok(Spanned { node: Node::Call(name, args), span: span.join(close) })
            }
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    let at = self.span();
                    return Err(Error::Parse(vec![
                        ParseDiagnostic::error(
                            at,
                            format!("unbalanced parentheses: expected `)`, found {}", self.peek().describe()),
                        ),
                        ParseDiagnostic::warning(span, "opening parenthesis is here"),
                    ]));
                }
                let close = self.bump().1;
                Ok(Spanned { node: inner.node, span: span.join(close) })
            }
            Tok::RParen => fail(span, "unbalanced parentheses: unexpected `)`"),
            other => fail(span, format!("expected an operand, found {}", other.describe())),
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            Tok::End => Ok(()),
            Tok::RParen => fail(self.span(), "unbalanced parentheses: unexpected `)`"),
            t => fail(self.span(), format!("unexpected {} after the end of the expression", t.describe())),
        }
    }
}

/// Which extra identifiers the resolver accepts.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Expr,
    Operator,
}

const OPERATOR_WORDS: &[&str] = &["Dt", "Dx", "DU", "DV"];

fn resolve(s: &Spanned, mode: Mode) -> Result<Expr> {
    Ok(match &s.node {
        Node::Num(q) => Expr::Const(q.clone()),
        Node::Ident(name) => resolve_ident(name, s.span, mode)?,
        Node::Neg(a) => -resolve(a, mode)?,
        Node::Add(a, b) => resolve(a, mode)? + resolve(b, mode)?,
        Node::Sub(a, b) => resolve(a, mode)? - resolve(b, mode)?,
        Node::Mul(a, b) => resolve(a, mode)? * resolve(b, mode)?,
        Node::Div(a, b) => {
            let den = resolve(b, mode)?;
            if normalize(&den)?.is_zero() {
                return fail(b.span, "division by zero");
            }
            resolve(a, mode)? * den.powi(-1)
        }
        Node::Pow(a, b) => {
            let base = resolve(a, mode)?;
            let ex = resolve(b, Mode::Expr)?;
            let poly = symexpr::to_poly(&ex)?;
            match symexpr::poly_to_exponent(&poly.canonical()?) {
                Some(e) => base.pow(e),
                None => return fail(b.span, "malformed exponent: must be affine in n and m"),
            }
        }
        Node::Call(name, args) => resolve_call(name, args, s.span, mode)?,
    })
}

fn resolve_ident(name: &str, span: SourceSpan, mode: Mode) -> Result<Expr> {
    if let Some(c) = Coord::from_name(name) {
        return Ok(match c {
            Coord::Indep(i) => Expr::Indep(i),
            Coord::Dep(d) => Expr::Dep(d),
        });
    }
    if let Some(j) = symexpr::parse_jet(name) {
        return Ok(Expr::Jet(j));
    }
    if FUNCTION_NAMES.contains(&name) {
        return Ok(Expr::Func(FuncSym::standard(name)?));
    }
    if let Some((head, sub)) = name.split_once('_') {
        if FUNCTION_NAMES.contains(&head) {
            let mut f = FuncSym::standard(head)?;
            for ch in sub.chars() {
                let c = Coord::from_name(&ch.to_string());
                f = match c.and_then(|c| f.derived(c)) {
                    Some(d) => d,
                    None => return fail(span, format!("`{head}` has no argument `{ch}`")),
                };
            }
            return Ok(Expr::Func(f));
        }
    }
    if OPERATOR_WORDS.contains(&name) {
        if mode == Mode::Operator {
            // Placeholder atoms, picked apart by `parse_operator`.
            return Ok(Expr::Param(Param::new(&format!("z{}", operator_slot(name)))?));
        }
        return fail(span, format!("operator symbol `{name}` outside an operator"));
    }
    if matches!(name, "exp" | "ln" | "D") {
        return fail(span, format!("`{name}` needs arguments"));
    }
    if is_parameter_name(name) && !name.starts_with('z') {
        return Ok(Expr::param(name));
    }
    fail(span, format!("unknown identifier `{name}`"))
}

fn operator_slot(name: &str) -> usize {
    OPERATOR_WORDS.iter().position(|w| *w == name).expect("operator word")
}

fn coord_arg(s: &Spanned) -> Result<Coord> {
    match &s.node {
        Node::Ident(n) => match Coord::from_name(n) {
            Some(c) => Ok(c),
            None => fail(s.span, format!("expected a variable (t, x, U or V), found `{n}`")),
        },
        _ => fail(s.span, "expected a variable (t, x, U or V)"),
    }
}

fn resolve_call(name: &str, args: &[Spanned], span: SourceSpan, mode: Mode) -> Result<Expr> {
    let arity = |n: std::ops::RangeInclusive<usize>| -> Result<()> {
        if n.contains(&args.len()) {
            Ok(())
        } else {
            fail(span, format!("`{name}` takes {} argument(s), got {}", n.start(), args.len()))
        }
    };
    match name {
        "exp" => {
            arity(1..=1)?;
            Ok(resolve(&args[0], mode)?.exp())
        }
        "ln" => {
            arity(1..=1)?;
            Ok(resolve(&args[0], mode)?.ln())
        }
        "D" => {
            arity(2..=3)?;
            let inner = symexpr::to_poly(&resolve(&args[0], mode)?)?;
            let var = coord_arg(&args[1])?;
            let order = match args.get(2) {
                None => 1,
                Some(Spanned { node: Node::Num(q), .. })
                    if q.is_integer() && q.is_positive() && *q <= Rational::from_integer(8.into()) =>
                {
                    q.to_integer().try_into().expect("small")
                }
                Some(s) => return fail(s.span, "derivative order must be an integer between 1 and 8"),
            };
            let mut p = inner;
            for _ in 0..order {
                p = match var {
                    Coord::Indep(i) => total(&p, i)?,
                    Coord::Dep(_) => partial(&p, var)?,
                };
            }
            Ok(Expr::from_poly(&p.canonical()?))
        }
        _ if FUNCTION_NAMES.contains(&name) => {
            let coords = args.iter().map(coord_arg).collect::<Result<Vec<_>>>()?;
            FuncSym::new(name, coords).map(Expr::Func).or_else(|e| fail(span, e.to_string()))
        }
        _ => fail(span, format!("unknown function `{name}`")),
    }
}

/// Parse a single expression.
pub fn parse_expression(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let tree = p.expr()?;
    p.finish()?;
    let e = resolve(&tree, Mode::Expr)?;
    normalize(&e)
}

fn split_eq(text: &str) -> Result<(&str, &str, usize)> {
    let mut parts = text.splitn(2, '=');
    let lhs = parts.next().unwrap_or("");
    match parts.next() {
        Some(rhs) => Ok((lhs, rhs, lhs.len() + 1)),
        None => fail(SourceSpan::new(0, text.len()), "expected `=`"),
    }
}

/// Re-base diagnostics of a sub-parse onto the full input.
fn shifted<T>(r: Result<T>, by: usize) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(ds) => Error::Parse(
            ds.into_iter()
                .map(|mut d| {
                    d.span = SourceSpan::new(d.span.start + by, d.span.end + by);
                    d
                })
                .collect(),
        ),
        other => other,
    })
}

/// Parse `Vxx = ...` (canonical form) or `Ut = ...` (converted to V-form).
pub fn parse_equation(text: &str) -> Result<EvolutionPDE> {
    let (lhs_text, _, off) = split_eq(text)?;
    let eq = parse_equation_raw(text)?;
    dispatch(&eq, SourceSpan::new(0, lhs_text.len()), SourceSpan::new(off, text.len()))
}

/// Both sides of `lhs = rhs`, without conversion.
pub fn parse_equation_raw(text: &str) -> Result<Equation> {
    let (lhs_text, rhs_text, off) = split_eq(text)?;
    let lhs = parse_expression(lhs_text)?;
    let rhs = shifted(parse_expression(rhs_text), off)?;
    Ok(Equation::new(lhs, rhs))
}

/// Canonical form of an equation built in code (`Vxx = ...` or `Ut = ...`).
pub fn pde_from_equation(eq: &Equation) -> Result<EvolutionPDE> {
    let none = SourceSpan::new(0, 0);
    dispatch(eq, none, none)
}

fn dispatch(eq: &Equation, lhs_span: SourceSpan, rhs_span: SourceSpan) -> Result<EvolutionPDE> {
    match &eq.lhs {
        Expr::Jet(j) if *j == Jet::vxx() => v_form(&eq.rhs, rhs_span),
        Expr::Jet(Jet { dep: Dep::U, t: 1, x: 0 }) => u_form(&eq.rhs, rhs_span),
        _ => fail(lhs_span, "left side must be `Vxx` or `Ut`"),
    }
}

fn v_form(rhs: &Expr, span: SourceSpan) -> Result<EvolutionPDE> {
    let p = symexpr::to_poly(rhs)?;
    let mut f0 = Poly::zero();
    let mut f1 = Poly::zero();
    let mut f2 = Poly::zero();
    for (m, c) in p.terms() {
        let mut jets = m.0.iter().filter(|(a, _)| matches!(a, Atom::Jet(_)));
        let term = Poly::term(c.clone(), m.clone());
        match (jets.next(), jets.next()) {
            (None, _) => f2.add_assign(&term),
            (Some((Atom::Jet(j), e)), None) if e.is_one() && (*j == Jet::vt() || *j == Jet::vx()) => {
                let rest = term.mul(&Poly::jet(*j).powi(-1)?)?;
                if *j == Jet::vt() {
                    f0.add_assign(&rest);
                } else {
                    f1.add_assign(&rest);
                }
            }
            (Some((Atom::Jet(j), _)), _) if *j == Jet::vxx() => return fail(span, "right side contains `Vxx`"),
            _ => return fail(span, "right side must be linear in Vt and Vx with coefficients depending on V only"),
        }
    }
    if p.contains(&|a| matches!(a, Atom::Dep(Dep::U) | Atom::Dep(Dep::W) | Atom::Jet(Jet { dep: Dep::U | Dep::W, .. })))
    {
        return fail(span, "canonical form must be written in V");
    }
    let back = |q: Poly| -> Result<Expr> { Ok(Expr::from_poly(&q.canonical()?)) };
    EvolutionPDE::new(back(f0)?, back(f1)?, back(f2)?).or_else(|e| fail(span, e.to_string()))
}

fn u_form(rhs: &Expr, span: SourceSpan) -> Result<EvolutionPDE> {
    let p = symexpr::to_poly(rhs)?;
    let uxx = Jet { dep: Dep::U, t: 0, x: 2 };
    let ux = Jet { dep: Dep::U, t: 0, x: 1 };
    if p.contains(&|a| matches!(a, Atom::Jet(j) if j.t > 0 || j.x > 2)) {
        return fail(span, "right side may only contain Ux and Uxx");
    }
    let by = p.collect_atom(&Atom::Jet(uxx));
    let diff = match (by.len(), by.get(&AffineExponent::one())) {
        (1, Some(c)) | (2, Some(c)) if by.len() == 1 || by.contains_key(&AffineExponent::zero()) => c.clone(),
        _ => return fail(span, "diffusion term must be linear in Uxx"),
    };
    // Diffusivity must be k U^e with a constant k.
    let (coefficient, exponent) = match diff.single_term() {
        Some((m, c)) if m.0.len() == 1 => match m.0.iter().next() {
            Some((Atom::Dep(Dep::U), e)) => (c.clone(), e.clone()),
            _ => return fail(span, "non-power diffusivity: expected D(U^m*Ux,x)"),
        },
        Some((m, c)) if m.is_one() => (c.clone(), AffineExponent::zero()),
        _ => return fail(span, "non-power diffusivity: expected D(U^m*Ux,x)"),
    };
    let transform = if exponent == AffineExponent::m_plus(0) {
        PointTransform::Power { m: None }
    } else if let Some(c) = exponent.as_constant() {
        if *c == -Rational::one() {
            PointTransform::Log
        } else {
            PointTransform::Power { m: Some(c.clone()) }
        }
    } else {
        return fail(span, format!("diffusivity exponent `{exponent}` is neither a constant nor m"));
    };

    // Split off convection B(U) Ux and reaction C(U).
    let flux = Poly::dep(Dep::U).pow(&exponent)?.mul(&Poly::jet(ux))?.scale(&coefficient);
    let rest = p.sub(&total(&flux, Indep::X)?).canonical()?;
    let by_ux = rest.collect_atom(&Atom::Jet(ux));
    let mut convection = Poly::zero();
    let mut reaction = Poly::zero();
    for (e, c) in by_ux {
        if e.is_zero() {
            reaction = c;
        } else if e.is_one() {
            convection = c;
        } else {
            return fail(span, "convection must be linear in Ux");
        }
    }
    if convection.contains_jets() || reaction.contains_jets() {
        return fail(span, "right side must be D(U^m*Ux,x) + B(U)*Ux + C(U)");
    }

    let u_eq = Equation::new(Expr::Jet(Jet { dep: Dep::U, t: 1, x: 0 }), rhs.clone());
    let v_eq = apply_point_transform(&u_eq, &transform).or_else(|e| fail(span, e.to_string()))?;
    let mut pde = v_form(&v_eq.rhs, span)?;
    pde.origin = Some(Origin {
        diffusion_exponent: exponent,
        diffusion_coefficient: coefficient,
        convection: Expr::from_poly(&convection),
        reaction: Expr::from_poly(&reaction),
        transform,
        u_equation: u_eq,
    });
    Ok(pde)
}

/// Parse `Q = tau*Dt + xi*Dx + eta*DU` (or `DV`); the result is divided by
/// `tau` and `tau` is recorded as the multiplier when it is not one.
pub fn parse_operator(text: &str) -> Result<SymmetryOperator> {
    let (tau, xi, eta, dep) = parse_operator_raw(text)?;
    SymmetryOperator::from_raw(&tau, &xi, &eta, dep)
}

/// Coefficients `(tau, xi, eta)` as written, and the dependent variable.
pub fn parse_operator_raw(text: &str) -> Result<(Expr, Expr, Expr, Dep)> {
    let (lhs, rhs, off) = split_eq(text)?;
    if lhs.trim() != "Q" {
        return fail(SourceSpan::new(0, lhs.len()), "operator must start with `Q =`");
    }
    let mut p = shifted(Parser::new(rhs), off)?;
    let tree = shifted(p.expr().and_then(|t| p.finish().map(|_| t)), off)?;
    let e = shifted(resolve(&tree, Mode::Operator), off)?;
    let span = SourceSpan::new(off, text.len());
    let poly = symexpr::to_poly(&e)?;
    let slot = |i: usize| Atom::Param(Param::new(&format!("z{i}")).expect("placeholder"));
    let mut coeffs = [Poly::zero(), Poly::zero(), Poly::zero(), Poly::zero()];
    for (m, c) in poly.terms() {
        let found: Vec<usize> = (0..4).filter(|&i| m.0.contains_key(&slot(i))).collect();
        match found.as_slice() {
            [i] if m.0[&slot(*i)].is_one() => {
                let mut rest = m.clone();
                rest.0.remove(&slot(*i));
                coeffs[*i].add_assign(&Poly::term(c.clone(), rest));
            }
            [] => return fail(span, "every term must multiply exactly one of Dt, Dx, DU"),
            _ => return fail(span, "a term multiplies more than one operator symbol"),
        }
    }
    let [tau, xi, du, dv] = coeffs.map(|c| c.canonical());
    let (tau, xi, du, dv) = (tau?, xi?, du?, dv?);
    if !du.is_zero() && !dv.is_zero() {
        return fail(span, "operator mixes DU and DV");
    }
    if tau.is_zero() {
        return fail(span, "zero Dt coefficient: operators led by Dx are not supported");
    }
    let (eta, dep) = if !dv.is_zero() {
        (dv, Dep::V)
    } else if !du.is_zero() || tau.depends_on_coord(Coord::Dep(Dep::U)) || xi.depends_on_coord(Coord::Dep(Dep::U)) {
        (du, Dep::U)
    } else {
        (du, Dep::V)
    };
    Ok((Expr::from_poly(&tau), Expr::from_poly(&xi), Expr::from_poly(&eta), dep))
}

/// `name=expr` pairs separated by `;` (or `,` when unambiguous).
pub fn parse_bindings(text: &str) -> Result<Vec<(SymbolKey, Expr)>> {
    let mut out = Vec::new();
    let mut off = 0;
    for part in text.split(';') {
        let here = off;
        off += part.len() + 1;
        if part.trim().is_empty() {
            continue;
        }
        let (k, v, eq) = shifted(split_eq(part), here)?;
        let name = k.trim();
        let key = match SymbolKey::from_name(name) {
            Some(k) => k,
            None => return fail(SourceSpan::new(here, here + k.len()), format!("cannot bind `{name}`")),
        };
        let value = shifted(parse_expression(v), here + eq)?;
        out.push((key, value));
    }
    Ok(out)
}

/// `k=v,k=v` with `v` an integer, ratio `p/q` or decimal (converted exactly).
pub fn parse_params(text: &str) -> Result<BTreeMap<String, Rational>> {
    let mut out = BTreeMap::new();
    let mut off = 0;
    for part in text.split([',', ';']) {
        let here = off;
        off += part.len() + 1;
        if part.trim().is_empty() {
            continue;
        }
        let span = SourceSpan::new(here, here + part.len());
        let Some((k, v)) = part.split_once('=') else {
            return fail(span, format!("expected `name=value`, found `{}`", part.trim()));
        };
        let name = k.trim();
        if !is_parameter_name(name) {
            return fail(span, format!("unknown parameter `{name}`"));
        }
        let value = shifted(parse_expression(v), here + k.len() + 1)?;
        match value.as_constant() {
            Some(q) => {
                out.insert(name.to_string(), q.clone());
            }
            None => return fail(span, format!("value of `{name}` must be a number")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::render;

    fn diag(r: Result<impl fmt::Debug>) -> ParseDiagnostic {
        match r {
            Err(Error::Parse(ds)) => ds[0].clone(),
            other => panic!("expected a diagnostic, got {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse_expression("-V^2").unwrap(), normalize(&-(Expr::v().powi(2))).unwrap());
        assert_eq!(parse_expression("2^3^2").unwrap(), Expr::int(512));
        assert_eq!(parse_expression("1/2*V").unwrap(), normalize(&(Expr::ratio(1, 2) * Expr::v())).unwrap());
        assert_eq!(parse_expression("6/3/2").unwrap(), Expr::int(1));
    }

    #[test]
    fn reaction_term() {
        let e = parse_expression("(lam1*V+lam2)*(lam3 - V^n)").unwrap();
        let want = (Expr::param("lam1") * Expr::v() + Expr::param("lam2"))
            * (Expr::param("lam3") - Expr::v().pow(AffineExponent::n_plus(0)));
        assert_eq!(e, normalize(&want).unwrap());
    }

    #[test]
    fn derivative_operator() {
        let e = parse_expression("D(h,x,2) + lam*D(h,x) + (lam2/2)*h - h^2").unwrap();
        assert_eq!(render::plain(&e).matches("h_").count(), 2, "{}", render::plain(&e));
        let flux = parse_expression("D(U^m*Ux,x)").unwrap();
        let want = parse_expression("U^m*Uxx + m*U^(m-1)*Ux^2").unwrap();
        assert_eq!(flux, want);
        assert_eq!(parse_expression("D(F,V,2)").unwrap(), parse_expression("F_VV").unwrap());
    }

    #[test]
    fn diagnostics_carry_spans() {
        let d = diag(parse_expression("lam1*foo"));
        assert_eq!((d.span.start, d.span.end), (5, 8));
        let d = diag(parse_expression("(V+1"));
        assert!(d.message.contains("unbalanced"));
        let d = diag(parse_expression("V)"));
        assert!(d.message.contains("unbalanced"));
        let d = diag(parse_expression("V^(n^2)"));
        assert!(d.message.contains("malformed exponent"));
        diag(parse_expression("V^(V)"));
        diag(parse_expression(""));
        diag(parse_expression("V/0"));
        diag(parse_expression("exp"));
        diag(parse_expression("D(h,y)"));
        diag(parse_expression("Dt"));
    }

    #[test]
    fn canonical_equation() {
        let pde = parse_equation("Vxx = V^n*Vt - lam*Vx + F(V)").unwrap();
        assert_eq!(pde.f0, Expr::v().pow(AffineExponent::n_plus(0)));
        assert_eq!(pde.f1, -Expr::param("lam"));
        assert_eq!(pde.f2, Expr::func("F"));
        let d = diag(parse_equation("Vxx = Vxx + Vt"));
        assert!(d.message.contains("Vxx"));
    }

    #[test]
    fn u_form_is_converted() {
        let pde = parse_equation("Ut = D(U*Ux,x) + lam*U*Ux + U*(1-U)").unwrap();
        // m = 1: Vxx = V^(-1/2) Vt - lam Vx - 2 (V^(1/2) - V)
        let want = parse_equation("Vxx = V^(-1/2)*Vt - lam*Vx - 2*V^(1/2) + 2*V").unwrap();
        assert_eq!(pde.f0, want.f0);
        assert_eq!(pde.f1, want.f1);
        assert_eq!(pde.f2, want.f2);
        let o = pde.origin.unwrap();
        assert_eq!(o.convection, parse_expression("lam*U").unwrap());
        assert_eq!(o.reaction, parse_expression("U - U^2").unwrap());
        let d = diag(parse_equation("Ut = exp(U)*Uxx"));
        assert!(d.message.contains("non-power"));
    }

    #[test]
    fn exp_form() {
        let pde = parse_equation("Vxx = exp(V)*Vt - lam*Vx + F(V)").unwrap();
        assert_eq!(pde.f0, Expr::v().exp());
    }

    #[test]
    fn operators() {
        let q = parse_operator("Q = Dt + (lam1*U + lam2*U^(-m))*DU").unwrap();
        assert!(q.xi.is_zero());
        assert_eq!(q.dep, Dep::U);
        let q = parse_operator("Q = Dt - lam*U^(m+1)*Dx + (lam1*U+lam2*U^(-m))*DU").unwrap();
        assert_eq!(q.xi, parse_expression("-lam*U^(m+1)").unwrap());
        let q = parse_operator("Q = 2*Dt + 2*f*Dx").unwrap();
        assert_eq!(q.xi, Expr::func("f"));
        assert_eq!(q.multiplier, Some(Expr::int(2)));
        let d = diag(parse_operator("Q = Dx + U*DU"));
        assert!(d.message.contains("zero Dt"));
        diag(parse_operator("Q = Dt*Dx"));
        diag(parse_operator("Q = Dt + U"));
    }

    #[test]
    fn bindings_and_params() {
        let b = parse_bindings("f=0;g=0;h=lam2/2").unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b[2].1, normalize(&(Expr::ratio(1, 2) * Expr::param("lam2"))).unwrap());
        let p = parse_params("m=1,lam=0.5,lam3=-2/9").unwrap();
        assert_eq!(p["lam"], Rational::new(1.into(), 2.into()));
        assert_eq!(p["lam3"], Rational::new((-2).into(), 9.into()));
        diag(parse_params("foo=1"));
        diag(parse_params("lam=V"));
    }
}
