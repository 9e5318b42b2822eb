//! Equivalence transformations applied to instantiated entries.

use std::collections::BTreeMap;

use num::Zero;

use super::{builtin, Instance};
use crate::error::{Error, Result};
use crate::invariance::{EvolutionPDE, SymmetryOperator};
use crate::parser::{parse_expression, pde_from_equation};
use crate::symexpr::poly::{Atom, Poly};
use crate::symexpr::{
    apply_point_transform, normalize, rename_dep, substitute, to_poly, transform_operator, AffineExponent, Bindings,
    Dep, Equation, Expr, PointTransform, Rational,
};

#[derive(Clone, Debug, PartialEq)]
pub enum Equivalence {
    /// `W = U - k`, `y = x + lam k t`, with `k` the mean root of a cubic reaction.
    DepressCubic,
    /// `y = x + c t`
    Galilean(Expr),
    /// The same entry at `lam = 0`.
    LambdaZero,
    /// Every operator multiplied by `M`.
    Multiplier(Expr),
}

impl Equivalence {
    pub const IDS: [&'static str; 4] = ["depress-cubic", "galilean", "lambda-zero", "multiplier"];

    /// `galilean` defaults to `c = lam`; `multiplier` needs an argument.
    pub fn parse(id: &str, arg: Option<&str>) -> Result<Equivalence> {
        match (id, arg) {
            ("depress-cubic", None) => Ok(Equivalence::DepressCubic),
            ("lambda-zero", None) => Ok(Equivalence::LambdaZero),
            ("galilean", a) => Ok(Equivalence::Galilean(parse_expression(a.unwrap_or("lam"))?)),
            ("multiplier", Some(a)) => Ok(Equivalence::Multiplier(parse_expression(a)?)),
            ("multiplier", None) => Err(Error::InapplicableTransform("multiplier needs an expression".into())),
            (id, Some(_)) if Self::IDS.contains(&id) => {
                Err(Error::InapplicableTransform(format!("{id} takes no argument")))
            }
            (other, _) => Err(Error::InapplicableTransform(format!("unknown transform `{other}`"))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Equivalence::DepressCubic => "depress-cubic",
            Equivalence::Galilean(_) => "galilean",
            Equivalence::LambdaZero => "lambda-zero",
            Equivalence::Multiplier(_) => "multiplier",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Transformed {
    pub transform: &'static str,
    /// In the variables of the input form (U if the entry has a U-form).
    pub equation: Equation,
    pub pde: EvolutionPDE,
    /// In the canonical variable, ready for `verify`.
    pub operators: Vec<SymmetryOperator>,
    /// In the variable of `equation`.
    pub written: Vec<SymmetryOperator>,
    /// Coefficients of the new equation, where the transform defines them.
    pub params: BTreeMap<String, Rational>,
}

pub fn apply_equivalence(
    id: &str,
    params: &BTreeMap<String, Rational>,
    candidate: Option<&Bindings>,
    t: &Equivalence,
) -> Result<Transformed> {
    let inst = builtin().instantiate(id, params, candidate)?;
    match t {
        Equivalence::LambdaZero => lambda_zero(id, params, candidate),
        Equivalence::Multiplier(m) => multiplier(&inst, m),
        Equivalence::Galilean(c) => {
            let c = normalize(&substitute(c, &inst.bindings)?)?;
            let (eq, ops) = written(&inst);
            let eq = apply_point_transform(&eq, &PointTransform::Galilean { c: c.clone() })?;
            let ops = ops
                .iter()
                .map(|op| {
                    let (xi, eta) = transform_operator(&op.xi, &op.eta, &PointTransform::Galilean { c: c.clone() })?;
                    SymmetryOperator::with_dep(xi, eta, op.dep)
                })
                .collect::<Result<Vec<_>>>()?;
            finish("galilean", eq, ops, BTreeMap::new())
        }
        Equivalence::DepressCubic => depress_cubic(&inst),
    }
}

/// The equation and operators in the variable the entry is written in.
fn written(inst: &Instance) -> (Equation, Vec<SymmetryOperator>) {
    match &inst.u_equation {
        Some(eq) => {
            (eq.clone(), inst.operators.iter().map(|o| o.u_operator.clone().expect("U-form operators")).collect())
        }
        None => (inst.pde.equation(), inst.operators.iter().map(|o| o.operator.clone()).collect()),
    }
}

fn finish(
    transform: &'static str,
    equation: Equation,
    written: Vec<SymmetryOperator>,
    params: BTreeMap<String, Rational>,
) -> Result<Transformed> {
    let pde = pde_from_equation(&equation)?;
    let operators = written.iter().map(|o| o.in_v(&pde)).collect::<Result<Vec<_>>>()?;
    Ok(Transformed { transform, equation, pde, operators, written, params })
}

fn lambda_zero(id: &str, params: &BTreeMap<String, Rational>, candidate: Option<&Bindings>) -> Result<Transformed> {
    let entry = builtin().entry(id)?;
    if !entry.params.iter().any(|p| p == "lam") {
        return Err(Error::InapplicableTransform(format!("lambda-zero: `{id}` has no free parameter lam")));
    }
    let mut p = params.clone();
    p.insert("lam".into(), Rational::zero());
    let inst = builtin().instantiate(id, &p, candidate).map_err(|e| match e {
        Error::ConstraintViolation(m) => Error::InapplicableTransform(format!("lambda-zero: {m}")),
        other => other,
    })?;
    let (eq, ops) = written(&inst);
    finish("lambda-zero", eq, ops, inst.params)
}

fn multiplier(inst: &Instance, m: &Expr) -> Result<Transformed> {
    let m = normalize(&substitute(m, &inst.bindings)?)?;
    if m.is_zero() {
        return Err(Error::InapplicableTransform("multiplier: M is identically zero".into()));
    }
    let (eq, ops) = written(inst);
    let scaled = ops
        .iter()
        .map(|op| {
            let r = op.raw().scaled(&m)?;
            SymmetryOperator::from_raw(&r.tau, &r.xi, &r.eta, r.dep)
        })
        .collect::<Result<Vec<_>>>()?;
    finish("multiplier", eq, scaled, BTreeMap::new())
}

/// Coefficients of `p` in powers of `U`, all of them rational constants.
fn constant_coefficients(p: &Poly, what: &str) -> Result<BTreeMap<i64, Rational>> {
    let mut out = BTreeMap::new();
    for (e, c) in p.collect_atom(&Atom::Dep(Dep::U)) {
        match (e.as_integer(), c.as_constant()) {
            (Some(k), Some(v)) if k >= 0 => {
                out.insert(k, v);
            }
            _ => {
                return Err(Error::InapplicableTransform(format!(
                    "depress-cubic: {what} is not a polynomial in U with constant coefficients"
                )))
            }
        }
    }
    Ok(out)
}

fn depress_cubic(inst: &Instance) -> Result<Transformed> {
    let not = |why: &str| Error::InapplicableTransform(format!("depress-cubic: {why}"));
    let (Some(origin), Some(u_eq)) = (&inst.pde.origin, &inst.u_equation) else {
        return Err(not("needs a U-form equation"));
    };
    if origin.diffusion_exponent != AffineExponent::zero()
        || origin.diffusion_coefficient != Rational::from_integer(1.into())
    {
        return Err(not("needs linear diffusion Uxx"));
    }
    let conv = constant_coefficients(&to_poly(&origin.convection)?.canonical()?, "the convection")?;
    let lam = match (conv.len(), conv.get(&1)) {
        (0, _) => Rational::zero(),
        (1, Some(l)) => l.clone(),
        _ => return Err(not("convection must be lam*U*Ux")),
    };
    let reac = constant_coefficients(&to_poly(&origin.reaction)?.canonical()?, "the reaction")?;
    let a3 = reac.get(&3).cloned().unwrap_or_default();
    if a3.is_zero() || reac.keys().any(|k| *k > 3) {
        return Err(not("reaction must be a cubic polynomial in U"));
    }
    let a2 = reac.get(&2).cloned().unwrap_or_default();
    let k = -a2 / (Rational::from_integer(3.into()) * &a3);
    let c = &lam * &k;

    let shift = PointTransform::AffineShift { k: Expr::Const(k.clone()) };
    let gal = PointTransform::Galilean { c: Expr::Const(c) };
    let eq = apply_point_transform(&apply_point_transform(u_eq, &shift)?, &gal)?;
    let eq = Equation::new(rename_dep(&eq.lhs, Dep::W, Dep::U)?, rename_dep(&eq.rhs, Dep::W, Dep::U)?);

    let mut ops = Vec::new();
    for o in &inst.operators {
        let u = o.u_operator.as_ref().expect("U-form operators");
        let (xi, eta) = transform_operator(&u.xi, &u.eta, &shift)?;
        let (xi, eta) = transform_operator(&xi, &eta, &gal)?;
        ops.push(SymmetryOperator::with_dep(
            rename_dep(&xi, Dep::W, Dep::U)?,
            rename_dep(&eta, Dep::W, Dep::U)?,
            Dep::U,
        )?);
    }
    let t = finish("depress-cubic", eq, ops, BTreeMap::new())?;
    let new = t.pde.origin.as_ref().expect("U-form");
    let coeffs = constant_coefficients(&to_poly(&new.reaction)?.canonical()?, "the reaction")?;
    if coeffs.get(&2).is_some_and(|v| !v.is_zero()) {
        return Err(Error::Soundness("depress-cubic left a quadratic term".into()));
    }
    let mut params = BTreeMap::new();
    params.insert("lam".to_string(), lam);
    for (k, name) in [(0, "lam0"), (1, "lam1"), (3, "lam3")] {
        params.insert(name.to_string(), coeffs.get(&k).cloned().unwrap_or_default());
    }
    params.insert("k".to_string(), k);
    Ok(Transformed { params, ..t })
}
