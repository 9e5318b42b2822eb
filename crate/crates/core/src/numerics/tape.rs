//! Flat evaluation tapes compiled from symbolic expressions.

use std::collections::HashMap;

use num::ToPrimitive;

use crate::error::{NumericError, Result};
use crate::symexpr::{Dep, Expr, FuncSym, Indep, Jet, Rational};

/// An input of a compiled tape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Indep(Indep),
    Dep(Dep),
    Jet(Jet),
    Func(FuncSym),
}

impl Slot {
    pub fn t() -> Slot {
        Slot::Indep(Indep::T)
    }

    pub fn x() -> Slot {
        Slot::Indep(Indep::X)
    }

    pub fn v() -> Slot {
        Slot::Dep(Dep::V)
    }

    fn matches(&self, e: &Expr) -> bool {
        match (self, e) {
            (Slot::Indep(a), Expr::Indep(b)) => a == b,
            (Slot::Dep(a), Expr::Dep(b)) => a == b,
            (Slot::Jet(a), Expr::Jet(b)) => a == b,
            (Slot::Func(a), Expr::Func(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Const(f64),
    Input(usize),
    Add(usize, usize),
    Mul(usize, usize),
    Powi(usize, i32),
    /// `x^(p/q)`, real for negative `x` when `q` is odd.
    Root(usize, i32, i32),
    Exp(usize),
    Ln(usize),
}

impl Op {
    fn key(&self) -> (u8, u64, u64, u64) {
        match *self {
            Op::Const(c) => (0, c.to_bits(), 0, 0),
            Op::Input(i) => (1, i as u64, 0, 0),
            Op::Add(a, b) => (2, a.min(b) as u64, a.max(b) as u64, 0),
            Op::Mul(a, b) => (3, a.min(b) as u64, a.max(b) as u64, 0),
            Op::Powi(a, k) => (4, a as u64, k as u64, 0),
            Op::Root(a, p, q) => (5, a as u64, p as u64, q as u64),
            Op::Exp(a) => (6, a as u64, 0, 0),
            Op::Ln(a) => (7, a as u64, 0, 0),
        }
    }
}

fn root(x: f64, p: i32, q: i32) -> f64 {
    if x < 0.0 && q % 2 == 1 {
        let r = (-x).powf(p as f64 / q as f64);
        if p % 2 == 0 {
            r
        } else {
            -r
        }
    } else {
        x.powf(p as f64 / q as f64)
    }
}

/// Straight-line program; every instruction writes the register with its own
/// index and the last register is the result.
#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    inputs: usize,
}

struct Builder<'a> {
    slots: &'a [Slot],
    ops: Vec<Op>,
    seen: HashMap<(u8, u64, u64, u64), usize>,
}

impl Builder<'_> {
    fn push(&mut self, op: Op) -> usize {
        let folded = match op {
            Op::Add(a, b) => self.fold2(a, b, |x, y| x + y),
            Op::Mul(a, b) => match (self.constant(a), self.constant(b)) {
                (Some(x), Some(y)) => Some(x * y),
                (Some(0.0), _) | (_, Some(0.0)) => Some(0.0),
                (Some(1.0), _) => return b,
                (_, Some(1.0)) => return a,
                _ => None,
            },
            Op::Powi(a, k) => self.constant(a).map(|x| x.powi(k)),
            Op::Root(a, p, q) => self.constant(a).map(|x| root(x, p, q)),
            Op::Exp(a) => self.constant(a).map(f64::exp),
            Op::Ln(a) => self.constant(a).map(f64::ln),
            _ => None,
        };
        let op = folded.map(Op::Const).unwrap_or(op);
        if let Op::Add(a, b) = op {
            if self.constant(a) == Some(0.0) {
                return b;
            }
            if self.constant(b) == Some(0.0) {
                return a;
            }
        }
        *self.seen.entry(op.key()).or_insert_with(|| {
            self.ops.push(op);
            self.ops.len() - 1
        })
    }

    fn fold2(&self, a: usize, b: usize, f: impl Fn(f64, f64) -> f64) -> Option<f64> {
        Some(f(self.constant(a)?, self.constant(b)?))
    }

    fn constant(&self, i: usize) -> Option<f64> {
        match self.ops[i] {
            Op::Const(c) => Some(c),
            _ => None,
        }
    }

    fn rational(&mut self, q: &Rational) -> usize {
        self.push(Op::Const(q.to_f64().unwrap_or(f64::NAN)))
    }

    fn emit(&mut self, e: &Expr) -> Result<usize> {
        if let Some(i) = self.slots.iter().position(|s| s.matches(e)) {
            return Ok(self.push(Op::Input(i)));
        }
        Ok(match e {
            Expr::Const(c) => self.rational(c),
            Expr::Param(p) => return Err(NumericError::UnboundSymbol(p.name().to_string()).into()),
            Expr::Indep(i) => return Err(NumericError::UnboundSymbol(i.name().to_string()).into()),
            Expr::Dep(d) => return Err(NumericError::UnboundSymbol(d.name().to_string()).into()),
            Expr::Jet(j) => return Err(NumericError::UnboundSymbol(format!("{j:?}")).into()),
            Expr::Func(f) => return Err(NumericError::UnboundSymbol(f.name().to_string()).into()),
            Expr::Sum(items) => {
                let mut acc = self.push(Op::Const(0.0));
                for it in items {
                    let r = self.emit(it)?;
                    acc = self.push(Op::Add(acc, r));
                }
                acc
            }
            Expr::Product(items) => {
                let mut acc = self.push(Op::Const(1.0));
                for it in items {
                    let r = self.emit(it)?;
                    acc = self.push(Op::Mul(acc, r));
                }
                acc
            }
            Expr::Power(b, ex) => {
                let q = ex.as_constant().ok_or_else(|| {
                    let sym = ex.symbols().first().map(|s| s.name()).unwrap_or("?");
                    NumericError::UnboundSymbol(sym.to_string())
                })?;
                let base = self.emit(b)?;
                match q.to_integer().to_i32() {
                    Some(k) if q.is_integer() => self.push(Op::Powi(base, k)),
                    _ => {
                        let (p, d) = (q.numer().to_i32(), q.denom().to_i32());
                        match (p, d) {
                            (Some(p), Some(d)) => self.push(Op::Root(base, p, d)),
                            _ => {
                                return Err(
                                    NumericError::Precondition(format!("exponent {q} too large to compile")).into()
                                )
                            }
                        }
                    }
                }
            }
            Expr::Exp(a) => {
                let r = self.emit(a)?;
                self.push(Op::Exp(r))
            }
            Expr::Ln(a) => {
                let r = self.emit(a)?;
                self.push(Op::Ln(r))
            }
        })
    }
}

impl Tape {
    /// Compile `e`; every symbol other than the listed slots must already be
    /// bound to a constant.
    pub fn compile(e: &Expr, slots: &[Slot]) -> Result<Tape> {
        let mut b = Builder { slots, ops: Vec::new(), seen: HashMap::new() };
        let out = b.emit(e)?;
        let mut t = Tape { ops: b.ops, inputs: slots.len() };
        t.finish(out);
        Ok(t)
    }

    fn finish(&mut self, out: usize) {
        if out + 1 == self.ops.len() {
            return;
        }
        if let Op::Const(c) = self.ops[out] {
            self.ops.push(Op::Const(c));
        } else {
            // Copy the result to the end as `out * 1`.
            self.ops.push(Op::Const(1.0));
            let one = self.ops.len() - 1;
            self.ops.push(Op::Mul(out, one));
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// The value if the tape does not depend on its inputs.
    pub fn as_constant(&self) -> Option<f64> {
        // Folding turns every input-free result into a constant.
        match self.ops.last() {
            Some(Op::Const(c)) => Some(*c),
            _ => None,
        }
    }

    pub fn eval_with(&self, inputs: &[f64], regs: &mut Vec<f64>) -> f64 {
        debug_assert_eq!(inputs.len(), self.inputs);
        regs.clear();
        for op in &self.ops {
            let r = match *op {
                Op::Const(c) => c,
                Op::Input(i) => inputs[i],
                Op::Add(a, b) => regs[a] + regs[b],
                Op::Mul(a, b) => regs[a] * regs[b],
                Op::Powi(a, k) => regs[a].powi(k),
                Op::Root(a, p, q) => root(regs[a], p, q),
                Op::Exp(a) => regs[a].exp(),
                Op::Ln(a) => regs[a].ln(),
            };
            regs.push(r);
        }
        *regs.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, inputs: &[f64]) -> f64 {
        self.eval_with(inputs, &mut Vec::with_capacity(self.ops.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;

    fn tape(src: &str, slots: &[Slot]) -> Tape {
        Tape::compile(&parse_expression(src).unwrap(), slots).unwrap()
    }

    #[test]
    fn evaluates_polynomial() {
        let t = tape("3*V^2 - 2*V + 1/2", &[Slot::v()]);
        assert_eq!(t.eval(&[2.0]), 8.5);
    }

    #[test]
    fn constant_folding() {
        let t = tape("2*3 + exp(0)", &[Slot::v()]);
        assert_eq!(t.as_constant(), Some(7.0));
    }

    #[test]
    fn shared_subexpressions() {
        let once = tape("exp(V^2)", &[Slot::v()]);
        let twice = tape("exp(V^2) + exp(V^2)", &[Slot::v()]);
        assert!(twice.len() <= once.len() + 3);
        assert!((twice.eval(&[0.5]) - 2.0 * 0.25f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn odd_roots_of_negatives() {
        let t = tape("V^(1/3)", &[Slot::v()]);
        assert!((t.eval(&[-8.0]) + 2.0).abs() < 1e-12);
        assert!(tape("V^(1/2)", &[Slot::v()]).eval(&[-1.0]).is_nan());
    }

    #[test]
    fn result_not_last() {
        // The sum reuses a register created earlier.
        let t = tape("V*x + V*x - V*x", &[Slot::v(), Slot::x()]);
        assert!((t.eval(&[2.0, 3.0]) - 6.0).abs() < 1e-15);
        let t = tape("x", &[Slot::v(), Slot::x()]);
        assert_eq!(t.eval(&[2.0, 3.0]), 3.0);
    }

    #[test]
    fn unbound_parameter() {
        let e = parse_expression("lam*V").unwrap();
        assert!(Tape::compile(&e, &[Slot::v()]).is_err());
    }
}
