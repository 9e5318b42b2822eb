//! Fixed-step RK4 on h'' = h^2 against the closed form h = 6/x^2, halving the
//! step three times.

use condsym::numerics::{integrate_ode, steps_for, OdeSystem, Slot, Tape};
use condsym::parser::parse_expression;
use condsym::symexpr::{Coord, FuncSym};

fn main() -> condsym::Result<()> {
    let h = FuncSym::standard("h")?;
    let slots = [Slot::x(), Slot::Func(h.clone()), Slot::Func(h.derived(Coord::X).expect("h has an x derivative"))];
    let rhs = |s: &str| Tape::compile(&parse_expression(s)?, &slots);
    let sys = OdeSystem::new(vec![rhs("h_x")?, rhs("h^2")?])?;

    let mut prev: Option<f64> = None;
    for k in 0..4 {
        let step = 0.1 / f64::from(1 << k);
        let tr = integrate_ode(&sys, &[6.0, -12.0], 1.0, 2.0, steps_for(1.0, 2.0, step))?;
        let err = tr.abscissae.iter().zip(&tr.states).map(|(x, s)| (s[0] - 6.0 / (x * x)).abs()).fold(0.0, f64::max);
        match prev {
            Some(p) => println!("step {step:<8} error {err:.3e}  order {:.3}", (p / err).log2()),
            None => println!("step {step:<8} error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
