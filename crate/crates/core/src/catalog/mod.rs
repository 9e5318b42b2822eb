//! Machine-readable catalog of conditional symmetry operators.
//!
//! The catalog ships as a versioned TOML file embedded in the library. Every
//! entry carries a U-form and a V-form transcription; instantiation binds the
//! parameters in both and refuses to proceed if they disagree.

mod data;
mod equivalence;
mod roots;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use num::Zero;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::invariance::{EvolutionPDE, RawOperator, Status, SymmetryOperator};
use crate::parser::{
    parse_bindings, parse_equation_raw, parse_expression, parse_operator_raw, parse_params, pde_from_equation,
};
use crate::symexpr::poly::Atom;
use crate::symexpr::render::plain;
use crate::symexpr::{
    equal, normalize, substitute, to_poly, AffineExponent, Assumptions, Bindings, Equation, Expr, Param, Rational,
    SymbolKey,
};

pub use equivalence::{apply_equivalence, Equivalence, Transformed};
pub use roots::{quadratic_roots, QuadraticRoots};

pub const FORMAT_VERSION: u32 = 1;

const BUILTIN: &str = include_str!("../../data/catalog-v1.toml");

/// A parsed template together with its source text.
#[derive(Clone, Debug)]
pub struct Template<T> {
    pub text: String,
    pub value: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Ne,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    const ALL: [(&'static str, CmpOp); 6] = [
        ("!=", CmpOp::Ne),
        ("==", CmpOp::Eq),
        ("<=", CmpOp::Le),
        (">=", CmpOp::Ge),
        ("<", CmpOp::Lt),
        (">", CmpOp::Gt),
    ];

    fn symbol(self) -> &'static str {
        Self::ALL.iter().find(|(_, o)| *o == self).map(|(s, _)| *s).expect("listed")
    }

    fn holds(self, a: &Rational, b: &Rational) -> bool {
        match self {
            CmpOp::Ne => a != b,
            CmpOp::Eq => a == b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// `param op value`, e.g. `lam2 != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub param: String,
    pub op: CmpOp,
    pub value: Rational,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.param, self.op.symbol(), plain(&Expr::Const(self.value.clone())))
    }
}

impl Constraint {
    fn parse(text: &str) -> std::result::Result<Constraint, String> {
        let (sym, op) = CmpOp::ALL
            .iter()
            .find(|(s, _)| text.contains(s))
            .ok_or_else(|| format!("constraint `{text}` has no comparison operator"))?;
        let (lhs, rhs) = text.split_once(sym).expect("found");
        let param = lhs.trim().to_string();
        if !crate::symexpr::is_parameter_name(&param) {
            return Err(format!("`{param}` is not a parameter name"));
        }
        let value = parse_expression(rhs)
            .ok()
            .and_then(|e| e.as_constant().cloned())
            .ok_or_else(|| format!("constraint value `{}` is not a rational constant", rhs.trim()))?;
        Ok(Constraint { param, op: *op, value })
    }
}

/// System of PDEs whose solutions feed an operator template.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub id: String,
    pub title: String,
    pub unknowns: Vec<String>,
    pub params: Vec<String>,
    pub derived: Vec<(String, Expr)>,
    pub equations: Vec<Template<Expr>>,
    pub provenance: String,
}

#[derive(Clone, Debug)]
pub struct RootSpec {
    pub name: String,
    pub poly: Template<Expr>,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub params_text: String,
    pub params: BTreeMap<String, Rational>,
    pub candidate_text: Option<String>,
    pub candidate: Option<Bindings>,
    /// Overrides the entry status for this parameter point.
    pub status: Option<Status>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: String,
    pub title: String,
    pub alias_of: Option<String>,
    pub params: Vec<String>,
    pub derived: Vec<(String, Expr)>,
    pub constraints: Vec<Constraint>,
    pub fixed: BTreeMap<String, Rational>,
    pub flags: Vec<String>,
    pub roots: Option<RootSpec>,
    pub u_equation: Option<Template<Equation>>,
    pub u_operators: Vec<Template<RawOperator>>,
    pub v_equation: Option<Template<Equation>>,
    pub v_operators: Vec<Template<RawOperator>>,
    pub system: Option<String>,
    pub status: Option<Status>,
    pub fixtures: Vec<Fixture>,
    pub mutations: Vec<Template<RawOperator>>,
    pub cross_refs: Vec<String>,
    pub notes: String,
    pub provenance: String,
}

impl CatalogEntry {
    pub fn is_alias(&self) -> bool {
        self.alias_of.is_some()
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn summary(&self) -> EntrySummary {
        EntrySummary {
            id: self.id.clone(),
            title: self.title.clone(),
            status: self.status,
            system: self.system.clone(),
            alias_of: self.alias_of.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntrySummary {
    pub id: String,
    pub title: String,
    pub status: Option<Status>,
    pub system: Option<String>,
    pub alias_of: Option<String>,
}

/// One operator of an instantiated entry.
#[derive(Clone, Debug)]
pub struct InstanceOperator {
    /// Root label such as `p = 1` when the entry has several operators.
    pub label: Option<String>,
    /// In the canonical variable V.
    pub operator: SymmetryOperator,
    /// As written in the U-form, when there is one.
    pub u_operator: Option<SymmetryOperator>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    /// Bound parameters, including fixed and derived ones.
    pub params: BTreeMap<String, Rational>,
    pub bindings: Bindings,
    pub pde: EvolutionPDE,
    pub u_equation: Option<Equation>,
    pub operators: Vec<InstanceOperator>,
    /// Mutated operators in V, for negative controls.
    pub mutants: Vec<SymmetryOperator>,
    pub assumptions: Assumptions,
    pub expected: Status,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub version: u32,
    entries: Vec<CatalogEntry>,
    systems: Vec<ConstraintSystem>,
}

/// The catalog shipped with the library.
pub fn builtin() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| Catalog::parse(BUILTIN).unwrap_or_else(|e| panic!("shipped catalog is invalid: {e}")))
}

pub fn list_entries() -> Vec<EntrySummary> {
    builtin().entries().iter().map(CatalogEntry::summary).collect()
}

pub fn instantiate(id: &str, params: &BTreeMap<String, Rational>, candidate: Option<&Bindings>) -> Result<Instance> {
    builtin().instantiate(id, params, candidate)
}

pub fn constraint_residual(
    system_id: &str,
    params: &BTreeMap<String, Rational>,
    candidate: &Bindings,
) -> Result<Vec<Expr>> {
    builtin().constraint_residual(system_id, params, candidate)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Loader<'a> {
    text: &'a str,
}

impl Loader<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        Error::CatalogData { line: line_of(self.text, span.start), message: message.into() }
    }

    fn wrap<T>(&self, s: &Spanned<String>, r: Result<T>) -> Result<T> {
        r.map_err(|e| self.err(s.span(), format!("`{}`: {e}", s.get_ref())))
    }

    fn expr(&self, s: &Spanned<String>) -> Result<Template<Expr>> {
        let value = self.wrap(s, parse_expression(s.get_ref()))?;
        Ok(Template { text: s.get_ref().clone(), value })
    }

    fn equation(&self, s: &Spanned<String>) -> Result<Template<Equation>> {
        let value = self.wrap(s, parse_equation_raw(s.get_ref()))?;
        // The template must already be a well-formed evolution equation.
        self.wrap(s, pde_from_equation(&value))?;
        Ok(Template { text: s.get_ref().clone(), value })
    }

    fn operator(&self, s: &Spanned<String>) -> Result<Template<RawOperator>> {
        let (tau, xi, eta, dep) = self.wrap(s, parse_operator_raw(s.get_ref()))?;
        Ok(Template { text: s.get_ref().clone(), value: RawOperator::new(tau, xi, eta, dep) })
    }

    fn derived(&self, list: &[Spanned<String>]) -> Result<Vec<(String, Expr)>> {
        list.iter()
            .map(|s| {
                let (name, rhs) = s
                    .get_ref()
                    .split_once('=')
                    .ok_or_else(|| self.err(s.span(), "derived parameter needs `name = expr`"))?;
                let name = name.trim();
                if !crate::symexpr::is_parameter_name(name) {
                    return Err(self.err(s.span(), format!("`{name}` is not a parameter name")));
                }
                Ok((name.to_string(), self.wrap(s, parse_expression(rhs))?))
            })
            .collect()
    }

    fn status(&self, span: Range<usize>, s: &str) -> Result<Status> {
        match s {
            "conditional" => Ok(Status::ConditionalSymmetry),
            "lie" => Ok(Status::LieSymmetry),
            other => Err(self.err(span, format!("unknown status `{other}`"))),
        }
    }

    /// Templates may only mention declared parameters.
    fn check_symbols(&self, span: Range<usize>, e: &Expr, allowed: &BTreeSet<String>) -> Result<()> {
        let p = to_poly(e).map_err(|err| self.err(span.clone(), err.to_string()))?;
        let stray = p.contains(&|a| matches!(a, Atom::Param(q) if !allowed.contains(q.name())));
        if stray {
            return Err(self.err(span, "template mentions an undeclared parameter"));
        }
        Ok(())
    }
}

impl Catalog {
    /// Parse and validate catalog text.
    pub fn parse(text: &str) -> Result<Catalog> {
        let ld = Loader { text };
        let file: data::File = toml::from_str(text).map_err(|e| Error::CatalogData {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        if file.format != "condsym-catalog" {
            return Err(Error::CatalogData { line: 1, message: format!("unknown format `{}`", file.format) });
        }
        if *file.version.get_ref() != FORMAT_VERSION {
            return Err(ld.err(
                file.version.span(),
                format!("unsupported version {} (expected {FORMAT_VERSION})", file.version.get_ref()),
            ));
        }

        let mut ids = BTreeSet::new();
        let mut systems = Vec::new();
        for rec in &file.system {
            let span = rec.span();
            let s = rec.get_ref();
            if !ids.insert(s.id.clone()) {
                return Err(ld.err(span, format!("duplicate id `{}`", s.id)));
            }
            let derived = ld.derived(&s.derived)?;
            let mut allowed: BTreeSet<String> = s.params.iter().cloned().collect();
            allowed.extend(derived.iter().map(|(n, _)| n.clone()));
            let mut equations = Vec::new();
            for q in &s.equations {
                let t = ld.expr(q)?;
                ld.check_symbols(q.span(), &t.value, &allowed)?;
                equations.push(t);
            }
            systems.push(ConstraintSystem {
                id: s.id.clone(),
                title: s.title.clone(),
                unknowns: s.unknowns.clone(),
                params: s.params.clone(),
                derived,
                equations,
                provenance: s.provenance.clone(),
            });
        }

        let mut entries = Vec::new();
        for rec in &file.entry {
            let span = rec.span();
            let e = rec.get_ref();
            if !ids.insert(e.id.clone()) {
                return Err(ld.err(span, format!("duplicate id `{}`", e.id)));
            }
            entries.push(Self::load_entry(&ld, span, e)?);
        }

        // Cross references.
        for (rec, e) in file.entry.iter().zip(&entries) {
            let span = rec.span();
            if let Some(sys) = &e.system {
                if !systems.iter().any(|s| &s.id == sys) {
                    return Err(ld.err(span, format!("`{}` refers to unknown system `{sys}`", e.id)));
                }
            }
            for r in e.cross_refs.iter().chain(&e.alias_of) {
                if !entries.iter().any(|x| &x.id == r) {
                    return Err(ld.err(span.clone(), format!("`{}` refers to unknown entry `{r}`", e.id)));
                }
            }
            if let Some(target) = &e.alias_of {
                if entries.iter().any(|x| &x.id == target && x.is_alias()) {
                    return Err(ld.err(span, format!("`{}` is an alias of another alias", e.id)));
                }
            }
        }
        Ok(Catalog { version: *file.version.get_ref(), entries, systems })
    }

    fn load_entry(ld: &Loader, span: Range<usize>, e: &data::EntryRecord) -> Result<CatalogEntry> {
        for p in &e.params {
            if !crate::symexpr::is_parameter_name(p) {
                return Err(ld.err(span, format!("`{p}` is not a parameter name")));
            }
        }
        let derived = ld.derived(&e.derived)?;
        let constraints = e
            .constraints
            .iter()
            .map(|c| Constraint::parse(c.get_ref()).map_err(|m| ld.err(c.span(), m)))
            .collect::<Result<Vec<_>>>()?;
        let fixed = match &e.fixed {
            Some(f) => ld.wrap(f, parse_params(f.get_ref()))?,
            None => BTreeMap::new(),
        };
        let roots = match &e.roots {
            Some(r) => Some(RootSpec { name: r.name.clone(), poly: ld.expr(&r.poly)? }),
            None => None,
        };

        let mut allowed: BTreeSet<String> = e.params.iter().cloned().collect();
        allowed.extend(derived.iter().map(|(n, _)| n.clone()));
        allowed.extend(fixed.keys().cloned());
        allowed.extend(roots.iter().map(|r| r.name.clone()));

        let equation = |s: &Option<Spanned<String>>| -> Result<Option<Template<Equation>>> {
            match s {
                Some(s) => {
                    let t = ld.equation(s)?;
                    ld.check_symbols(s.span(), &t.value.rhs, &allowed)?;
                    Ok(Some(t))
                }
                None => Ok(None),
            }
        };
        let operators = |list: &[Spanned<String>]| -> Result<Vec<Template<RawOperator>>> {
            list.iter()
                .map(|s| {
                    let t = ld.operator(s)?;
                    for c in [&t.value.tau, &t.value.xi, &t.value.eta] {
                        ld.check_symbols(s.span(), c, &allowed)?;
                    }
                    Ok(t)
                })
                .collect()
        };
        let u_equation = equation(&e.u_equation)?;
        let v_equation = equation(&e.v_equation)?;
        let u_operators = operators(&e.u_operators)?;
        let v_operators = operators(&e.v_operators)?;
        let mutations = operators(&e.mutations)?;

        if e.alias_of.is_none() {
            if v_equation.is_none() || v_operators.is_empty() {
                return Err(ld.err(span, format!("`{}` needs a V-form equation and operator", e.id)));
            }
            if u_equation.is_some() != !u_operators.is_empty()
                || (!u_operators.is_empty() && u_operators.len() != v_operators.len())
            {
                return Err(ld.err(span, format!("`{}`: U-form equation and operators must come together", e.id)));
            }
            if e.status.is_none() {
                return Err(ld.err(span, format!("`{}` has no status", e.id)));
            }
        }
        let status = match &e.status {
            Some(s) => Some(ld.status(span.clone(), s)?),
            None => None,
        };

        let mut fixtures = Vec::new();
        for f in &e.fixtures {
            let params = ld.wrap(&f.params, parse_params(f.params.get_ref()))?;
            let candidate = match &f.candidate {
                Some(c) => Some(ld.wrap(c, parse_bindings(c.get_ref()))?.into_iter().collect()),
                None => None,
            };
            let status = match &f.status {
                Some(s) => Some(ld.status(f.params.span(), s)?),
                None => None,
            };
            fixtures.push(Fixture {
                params_text: f.params.get_ref().clone(),
                params,
                candidate_text: f.candidate.as_ref().map(|c| c.get_ref().clone()),
                candidate,
                status,
            });
        }

        Ok(CatalogEntry {
            id: e.id.clone(),
            title: e.title.clone(),
            alias_of: e.alias_of.clone(),
            params: e.params.clone(),
            derived,
            constraints,
            fixed,
            flags: e.flags.clone(),
            roots,
            u_equation,
            u_operators,
            v_equation,
            v_operators,
            system: e.system.clone(),
            status,
            fixtures,
            mutations,
            cross_refs: e.cross_refs.clone(),
            notes: e.notes.clone().unwrap_or_default(),
            provenance: e.provenance.clone(),
        })
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn systems(&self) -> &[ConstraintSystem] {
        &self.systems
    }

    pub fn entry(&self, id: &str) -> Result<&CatalogEntry> {
        self.entries.iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownEntry(id.to_string()))
    }

    pub fn system(&self, id: &str) -> Result<&ConstraintSystem> {
        self.systems.iter().find(|s| s.id == id).ok_or_else(|| Error::UnknownSystem(id.to_string()))
    }

    /// Each equation of the system with parameters and candidate substituted.
    pub fn constraint_residual(
        &self,
        system_id: &str,
        params: &BTreeMap<String, Rational>,
        candidate: &Bindings,
    ) -> Result<Vec<Expr>> {
        let sys = self.system(system_id)?;
        let declared: Vec<String> = sys.params.clone();
        let scope = Scope::resolve(system_id, &declared, &sys.derived, &BTreeMap::new(), params)?;
        system_residual(sys, &scope.bindings, candidate)
    }

    /// The equations of a system with parameters bound and unknowns left free.
    pub fn bound_equations(&self, system_id: &str, params: &BTreeMap<String, Rational>) -> Result<Vec<Expr>> {
        let sys = self.system(system_id)?;
        let scope = Scope::resolve(system_id, &sys.params, &sys.derived, &BTreeMap::new(), params)?;
        sys.equations.iter().map(|q| normalize(&substitute(&q.value, &scope.bindings)?)).collect()
    }

    /// Bind parameters (and a solution of the constraint system, if the entry
    /// has one) and build the concrete equation and operators.
    pub fn instantiate(
        &self,
        id: &str,
        params: &BTreeMap<String, Rational>,
        candidate: Option<&Bindings>,
    ) -> Result<Instance> {
        let entry = self.entry(id)?;
        if let Some(target) = &entry.alias_of {
            return Err(Error::UnsupportedClass(format!(
                "`{id}` is an alias of `{target}`; the reducing substitution is not given"
            )));
        }
        let mut scope = Scope::resolve(id, &entry.params, &entry.derived, &entry.fixed, params)?;
        let assumptions = scope.check(id, &entry.constraints)?;

        match (&entry.system, candidate) {
            (Some(sys), Some(c)) => {
                let system = self.system(sys)?;
                for k in c.keys() {
                    if !matches!(k, SymbolKey::Func(n) if system.unknowns.contains(n)) {
                        return Err(Error::ConstraintViolation(format!("`{k}` is not an unknown of system `{sys}`")));
                    }
                }
                let res = system_residual(system, &scope.bindings, c)?;
                if let Some((i, r)) = res.iter().enumerate().find(|(_, r)| !r.is_zero()) {
                    return Err(Error::ConstraintViolation(format!(
                        "candidate does not solve system `{sys}`: equation {} leaves {}",
                        i + 1,
                        plain(r)
                    )));
                }
                for (k, v) in c {
                    scope.bindings.insert(k.clone(), substitute(v, &scope.bindings)?);
                }
            }
            (Some(sys), None) => {
                return Err(Error::ConstraintViolation(format!("`{id}` needs a solution of system `{sys}`")));
            }
            (None, Some(_)) => {
                return Err(Error::ConstraintViolation(format!("`{id}` has no constraint system")));
            }
            (None, None) => {}
        }

        let bind_eq = |t: &Template<Equation>, b: &Bindings| -> Result<Equation> {
            Ok(Equation::new(substitute(&t.value.lhs, b)?, substitute(&t.value.rhs, b)?))
        };
        let v_tpl = entry.v_equation.as_ref().expect("validated at load");
        let v_pde = pde_from_equation(&bind_eq(v_tpl, &scope.bindings)?)?;
        let mut ass = assumptions.merged(&v_pde.default_assumptions())?;
        let (pde, u_equation) = match &entry.u_equation {
            Some(t) => {
                let eq = bind_eq(t, &scope.bindings)?;
                let u_pde = pde_from_equation(&eq)?;
                ass = ass.merged(&u_pde.default_assumptions())?;
                for (name, a, b) in
                    [("F0", &u_pde.f0, &v_pde.f0), ("F1", &u_pde.f1, &v_pde.f1), ("F2", &u_pde.f2, &v_pde.f2)]
                {
                    if !same(a, b, &scope.link, &ass)? {
                        return Err(Error::Soundness(format!(
                            "`{id}`: {name} of the U-form is {} but the V-form has {}",
                            plain(a),
                            plain(b)
                        )));
                    }
                }
                (u_pde, Some(eq))
            }
            None => (v_pde, None),
        };

        let root_values = scope.roots(id, entry.roots.as_ref())?;
        let mut operators = Vec::new();
        let mut mutants = Vec::new();
        for (ri, root) in root_values.iter().enumerate() {
            let mut b = scope.bindings.clone();
            let label = root.as_ref().map(|(name, v)| {
                b.insert(SymbolKey::Param(Param::new(name).expect("validated")), Expr::Const(v.clone()));
                format!("{name} = {}", plain(&Expr::Const(v.clone())))
            });
            let written = |t: &Template<RawOperator>| -> Result<SymmetryOperator> {
                let r = &t.value;
                let tau = substitute(&r.tau, &b)?;
                let op = SymmetryOperator::from_raw(&tau, &substitute(&r.xi, &b)?, &substitute(&r.eta, &b)?, r.dep);
                op.map_err(|e| match e {
                    Error::DivisionByZero => Error::ConstraintViolation(format!(
                        "`{id}`: operator coefficient is singular{}",
                        label.as_ref().map(|l| format!(" at {l}")).unwrap_or_default()
                    )),
                    other => other,
                })
            };
            let build = |t: &Template<RawOperator>| written(t)?.in_v(&pde);
            for (k, vt) in entry.v_operators.iter().enumerate() {
                let v_op = build(vt)?;
                // The converted U-form operator is the one handed out: it is
                // written in `n` alone even when `m` stays symbolic.
                let (operator, u_op) = match entry.u_operators.get(k) {
                    Some(ut) => {
                        let conv = build(ut)?;
                        if !same(&conv.xi, &v_op.xi, &scope.link, &ass)?
                            || !same(&conv.eta, &v_op.eta, &scope.link, &ass)?
                        {
                            return Err(Error::Soundness(format!(
                                "`{id}`: U-form operator maps to xi = {}, eta = {} but the V-form has xi = {}, eta = {}",
                                plain(&conv.xi),
                                plain(&conv.eta),
                                plain(&v_op.xi),
                                plain(&v_op.eta)
                            )));
                        }
                        (conv, Some(written(ut)?))
                    }
                    None => (v_op, None),
                };
                operators.push(InstanceOperator { label: label.clone(), operator, u_operator: u_op });
            }
            if ri == 0 {
                for m in &entry.mutations {
                    mutants.push(build(m)?);
                }
            }
        }

        Ok(Instance {
            id: id.to_string(),
            params: scope.values,
            bindings: scope.bindings,
            pde,
            u_equation,
            operators,
            mutants,
            assumptions: ass,
            expected: entry.status.expect("validated at load"),
        })
    }
}

fn same(a: &Expr, b: &Expr, link: &[Bindings], ass: &Assumptions) -> Result<bool> {
    if a == b {
        return Ok(true);
    }
    if !link.is_empty() {
        for pt in link {
            let d = substitute(a, pt)? - substitute(b, pt)?;
            if !normalize(&d)?.is_zero() {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    Ok(normalize(&(a.clone() - b.clone()))?.is_zero() || equal(a, b, ass)?)
}

fn system_residual(sys: &ConstraintSystem, params: &Bindings, candidate: &Bindings) -> Result<Vec<Expr>> {
    let mut b = params.clone();
    for (k, v) in candidate {
        b.insert(k.clone(), substitute(v, params)?);
    }
    sys.equations.iter().map(|q| normalize(&substitute(&q.value, &b)?)).collect()
}

fn param_key(name: &str) -> SymbolKey {
    SymbolKey::Param(Param::new(name).expect("validated parameter name"))
}

/// Parameter values and the substitution built from them.
struct Scope {
    values: BTreeMap<String, Rational>,
    bindings: Bindings,
    /// Sample points `(m, n = -m/(m+1))` when both exponents stay symbolic.
    /// V-form templates are written in `m` and `n`, converted U-forms in `n`
    /// only, so they are compared along the curve.
    link: Vec<Bindings>,
}

impl Scope {
    fn resolve(
        id: &str,
        declared: &[String],
        derived: &[(String, Expr)],
        fixed: &BTreeMap<String, Rational>,
        given: &BTreeMap<String, Rational>,
    ) -> Result<Scope> {
        let mut values = fixed.clone();
        for (k, v) in given {
            if !declared.contains(k) {
                return Err(Error::ConstraintViolation(format!("`{id}` has no parameter `{k}`")));
            }
            values.insert(k.clone(), v.clone());
        }
        let mut bindings: Bindings = values.iter().map(|(k, v)| (param_key(k), Expr::Const(v.clone()))).collect();
        let mut link = Vec::new();
        for (name, e) in derived {
            let key = param_key(name);
            let v = match substitute(e, &bindings) {
                Ok(v) => v,
                // A derived value may be undefined at excluded points; the
                // constraint check reports those.
                Err(Error::DivisionByZero) => continue,
                Err(err) => return Err(err),
            };
            if let Some(c) = v.as_constant() {
                values.insert(name.clone(), c.clone());
                bindings.insert(key, v);
            } else if Param::new(name).expect("validated").exponent_symbol().is_none() {
                bindings.insert(key, v);
            } else if name == "n" && v == normalize(&parse_expression("-m/(m+1)")?)? {
                for (p, d) in [(2, 1), (1, 3), (-1, 2), (3, 2), (-3, 1)] {
                    let m = Rational::new(p.into(), d.into());
                    let n = -&m / (&m + Rational::from_integer(1.into()));
                    link.push(Bindings::from([(param_key("m"), Expr::Const(m)), (param_key("n"), Expr::Const(n))]));
                }
            } else {
                return Err(Error::UnsupportedClass(format!("`{id}`: cannot leave `{name}` symbolic")));
            }
        }
        Ok(Scope { values, bindings, link })
    }

    /// Check constraints on bound parameters; unbound ones become assumptions.
    fn check(&self, id: &str, constraints: &[Constraint]) -> Result<Assumptions> {
        let mut ass = Assumptions::new();
        for c in constraints {
            match self.values.get(&c.param) {
                Some(v) if !c.op.holds(v, &c.value) => {
                    return Err(Error::ConstraintViolation(format!(
                        "`{id}` requires {c}, got {} = {}",
                        c.param,
                        plain(&Expr::Const(v.clone()))
                    )));
                }
                Some(_) => {}
                None if c.op == CmpOp::Ne => {
                    let p = Param::new(&c.param).expect("validated");
                    ass = match p.exponent_symbol() {
                        Some(sym) => ass.with_exponent_ne(
                            AffineExponent::symbolic(sym, Rational::from_integer(1.into()), Rational::zero()),
                            c.value.clone(),
                        )?,
                        None if c.value.is_zero() => ass.with_nonzero(p),
                        None => ass,
                    };
                }
                None => {}
            }
        }
        Ok(ass)
    }

    /// Values of the root parameter, or a single `None` without one.
    fn roots(&self, id: &str, spec: Option<&RootSpec>) -> Result<Vec<Option<(String, Rational)>>> {
        let Some(spec) = spec else { return Ok(vec![None]) };
        let poly = to_poly(&substitute(&spec.poly.value, &self.bindings)?)?.canonical()?;
        let atom = Atom::Param(Param::new(&spec.name).expect("validated"));
        let by = poly.collect_atom(&atom);
        let mut coeff = [Rational::zero(), Rational::zero(), Rational::zero()];
        for (e, c) in &by {
            let k = e.as_integer().filter(|k| (0..=2).contains(k));
            match (k, c.as_constant()) {
                (Some(k), Some(v)) => coeff[k as usize] = v,
                _ => {
                    return Err(Error::UnsupportedClass(format!(
                        "`{id}`: roots of {} need concrete parameter values",
                        spec.poly.text
                    )))
                }
            }
        }
        if coeff[2].is_zero() {
            return Err(Error::ConstraintViolation(format!("`{id}`: {} is not quadratic", spec.poly.text)));
        }
        match quadratic_roots(&coeff[2], &coeff[1], &coeff[0]) {
            QuadraticRoots::Rational(rs) => Ok(rs.into_iter().map(|r| Some((spec.name.clone(), r))).collect()),
            QuadraticRoots::Irrational([a, b]) => Err(Error::UnsupportedClass(format!(
                "`{id}`: irrational roots {} = {a:.12}, {b:.12}; exact verification needs rational roots",
                spec.name
            ))),
            QuadraticRoots::Complex => {
                Err(Error::ConstraintViolation(format!("`{id}`: {} has no real roots", spec.poly.text)))
            }
        }
    }
}

impl Instance {
    /// The expected status at a fixture, honoring per-fixture overrides.
    pub fn expected_at(&self, fixture: &Fixture) -> Status {
        fixture.status.unwrap_or(self.expected)
    }
}
