use std::collections::BTreeMap;

use crate::catalog::builtin;
use crate::error::{NumericError, Result};
use crate::invariance::EvolutionPDE;
use crate::symexpr::{Bindings, Coord, Expr, FuncSym, Jet, Rational, SymbolKey};

use super::tape::{Slot, Tape};
use super::Grid1D;

/// Solution values on a space grid at equally spaced time levels.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid1D,
    pub t0: f64,
    pub dt: f64,
    /// `values[k][j]` at `t0 + k dt`, `grid.point(j)`.
    pub values: Vec<Vec<f64>>,
}

/// Max of `|Vxx - F0 Vt - F1 Vx - F2|` over interior nodes, with central
/// differences in `x` and `t`.
pub fn pde_residual(pde: &EvolutionPDE, field: &Field) -> Result<f64> {
    if field.values.len() < 3 || field.grid.n < 5 {
        return Err(NumericError::GridTooSmall(format!(
            "{} time levels and {} points; need at least 3 and 5",
            field.values.len(),
            field.grid.n
        ))
        .into());
    }
    if field.values.iter().any(|row| row.len() != field.grid.n) {
        return Err(NumericError::Precondition("field rows must match the grid".into()).into());
    }
    let slots = [Slot::t(), Slot::x(), Slot::v(), Slot::Jet(Jet::vt()), Slot::Jet(Jet::vx()), Slot::Jet(Jet::vxx())];
    let tape = Tape::compile(&(Expr::jet(Jet::vxx()) - pde.rhs()), &slots)?;
    let (h, dt) = (field.grid.h(), field.dt);
    let mut regs = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 1..field.values.len() - 1 {
        let (prev, row, next) = (&field.values[k - 1], &field.values[k], &field.values[k + 1]);
        let t = field.t0 + k as f64 * dt;
        for j in 1..field.grid.n - 1 {
            let vt = (next[j] - prev[j]) / (2.0 * dt);
            let vx = (row[j + 1] - row[j - 1]) / (2.0 * h);
            let vxx = (row[j + 1] - 2.0 * row[j] + row[j - 1]) / (h * h);
            let r = tape.eval_with(&[t, field.grid.point(j), row[j], vt, vx, vxx], &mut regs);
            worst = worst.max(if r.is_nan() { f64::INFINITY } else { r.abs() });
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintCheck {
    /// Max residual on the given grid.
    pub max_residual: f64,
    /// Per equation, on the given grid.
    pub per_equation: Vec<f64>,
    /// Max residual on the grid with halved spacing, at the nodes of `grid`.
    pub refined_residual: f64,
    /// `max_residual / refined_residual`; `None` when both are at rounding level.
    pub refinement_ratio: Option<f64>,
    /// Richardson combination `(4 R(h/2) - R(h)) / 3` at the common nodes.
    pub extrapolated_residual: f64,
}

fn func_atoms(e: &Expr, out: &mut Vec<FuncSym>) {
    match e {
        Expr::Func(f) => {
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
        Expr::Sum(v) | Expr::Product(v) => v.iter().for_each(|i| func_atoms(i, out)),
        Expr::Power(b, _) | Expr::Exp(b) | Expr::Ln(b) => func_atoms(b, out),
        _ => {}
    }
}

fn has_param(e: &Expr) -> bool {
    match e {
        Expr::Param(_) => true,
        Expr::Sum(v) | Expr::Product(v) => v.iter().any(has_param),
        Expr::Power(b, ex) => !ex.is_constant() || has_param(b),
        Expr::Exp(b) | Expr::Ln(b) => has_param(b),
        _ => false,
    }
}

fn order(f: &FuncSym, c: Coord) -> u8 {
    f.args().iter().position(|a| *a == c).map(|i| f.derivs()[i]).unwrap_or(0)
}

/// Second-order central x-derivative of order `d` at node `j`.
fn dx(row: &[f64], j: usize, d: u8, h: f64) -> f64 {
    match d {
        0 => row[j],
        1 => (row[j + 1] - row[j - 1]) / (2.0 * h),
        2 => (row[j + 1] - 2.0 * row[j] + row[j - 1]) / (h * h),
        _ => (row[j + 2] - 2.0 * row[j + 1] + 2.0 * row[j - 1] - row[j - 2]) / (2.0 * h * h * h),
    }
}

/// Residual of every equation at interior nodes `2..n-2` of `grid`.
/// `None` marks an equation that vanishes identically on the candidate.
fn residuals(eqs: &[Option<Expr>], candidate: &Bindings, grid: &Grid1D, t: f64) -> Result<Vec<Vec<f64>>> {
    let h = grid.h();
    let xs = grid.points();
    let mut samples: BTreeMap<String, [Vec<f64>; 3]> = BTreeMap::new();
    for (key, e) in candidate {
        let SymbolKey::Func(name) = key else {
            return Err(NumericError::Precondition("candidate keys must be function names".into()).into());
        };
        let tape = Tape::compile(e, &[Slot::t(), Slot::x()])?;
        let mut regs = Vec::new();
        let mut level = |tt: f64| -> Result<Vec<f64>> {
            xs.iter()
                .map(|&x| {
                    let v = tape.eval_with(&[tt, x], &mut regs);
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(NumericError::Pole { at: x }.into())
                    }
                })
                .collect()
        };
        samples.insert(name.clone(), [level(t - h)?, level(t)?, level(t + h)?]);
    }
    let mut out = Vec::new();
    for eq in eqs {
        let Some(eq) = eq else {
            out.push(vec![0.0; grid.n - 4]);
            continue;
        };
        let mut atoms = Vec::new();
        func_atoms(eq, &mut atoms);
        for f in &atoms {
            if !samples.contains_key(f.name()) {
                return Err(NumericError::UnboundSymbol(f.name().to_string()).into());
            }
            if order(f, Coord::T) > 1 || order(f, Coord::X) > 3 {
                return Err(NumericError::Precondition(format!("no stencil for derivative of `{}`", f.name())).into());
            }
        }
        let mut slots = vec![Slot::t(), Slot::x()];
        slots.extend(atoms.iter().cloned().map(Slot::Func));
        let tape = Tape::compile(eq, &slots)?;
        let mut regs = Vec::new();
        let mut inputs = vec![0.0; slots.len()];
        let mut row = Vec::new();
        for j in 2..grid.n - 2 {
            inputs[0] = t;
            inputs[1] = grid.point(j);
            for (slot, f) in inputs[2..].iter_mut().zip(&atoms) {
                let s = &samples[f.name()];
                let d = order(f, Coord::X);
                *slot = if order(f, Coord::T) == 1 {
                    (dx(&s[2], j, d, h) - dx(&s[0], j, d, h)) / (2.0 * h)
                } else {
                    dx(&s[1], j, d, h)
                };
            }
            row.push(tape.eval_with(&inputs, &mut regs));
        }
        out.push(row);
    }
    Ok(out)
}

fn max_abs(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().fold(0.0, |m, r| m.max(if r.is_nan() { f64::INFINITY } else { r.abs() }))
}

/// Evaluate a catalog constraint system on a candidate sampled at time `t`,
/// with second-order central differences in `x` and `t` (step `grid.h()`).
/// Parameters left unbound are allowed in equations that vanish identically
/// on the candidate.
pub fn ode_constraint_check(
    system_id: &str,
    params: &BTreeMap<String, Rational>,
    candidate: &Bindings,
    grid: &Grid1D,
    t: f64,
) -> Result<ConstraintCheck> {
    let bound = builtin().bound_equations(system_id, params)?;
    let mut eqs = Vec::new();
    for (i, eq) in bound.into_iter().enumerate() {
        if !has_param(&eq) {
            eqs.push(Some(eq));
            continue;
        }
        if !builtin().constraint_residual(system_id, params, candidate)?[i].is_zero() {
            return Err(NumericError::Precondition(format!(
                "equation {} of `{system_id}` needs parameters that were not given",
                i + 1
            ))
            .into());
        }
        eqs.push(None);
    }
    let coarse = residuals(&eqs, candidate, grid, t)?;
    let fine = residuals(&eqs, candidate, &grid.refined(), t)?;
    // Coarse node j (row index j-2) is fine node 2j (row index 2j-2).
    let common: Vec<Vec<f64>> =
        coarse.iter().zip(&fine).map(|(c, f)| (0..c.len()).map(|i| f[2 * i + 2]).collect()).collect();
    let (max_residual, refined_residual) = (max_abs(&coarse), max_abs(&common));
    let mut extrapolated: f64 = 0.0;
    for (c, f) in coarse.iter().zip(&common) {
        for (rc, rf) in c.iter().zip(f) {
            extrapolated = extrapolated.max(((4.0 * rf - rc) / 3.0).abs());
        }
    }
    let scale = f64::EPSILON.sqrt() * 1e-4;
    Ok(ConstraintCheck {
        max_residual,
        per_equation: coarse.iter().map(|r| max_abs(std::slice::from_ref(r))).collect(),
        refined_residual,
        refinement_ratio: (max_residual > scale && refined_residual > 0.0).then(|| max_residual / refined_residual),
        extrapolated_residual: extrapolated,
    })
}
