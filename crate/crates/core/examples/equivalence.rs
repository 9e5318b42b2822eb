//! Operators equal up to a multiplier, and catalog entries carried through
//! equivalence transformations.

use condsym::catalog::{apply_equivalence, Equivalence};
use condsym::invariance::{equivalent_up_to_multiplier, verify, RawOperator};
use condsym::parser::{parse_operator_raw, parse_params};
use condsym::symexpr::render::plain;

fn raw(text: &str) -> condsym::Result<RawOperator> {
    let (tau, xi, eta, dep) = parse_operator_raw(text)?;
    Ok(RawOperator::new(tau, xi, eta, dep))
}

fn main() -> condsym::Result<()> {
    let a = raw("Q = Dt + V*Dx + V^2*DV")?;
    let b = raw("Q = x*Dt + x*V*Dx + x*V^2*DV")?;
    match equivalent_up_to_multiplier(&a, &b)? {
        Some(m) => println!("multiplier {}", plain(&m)),
        None => println!("not equivalent"),
    }

    let params = parse_params("lam=1, lam0=0, lam2=-1")?;
    for t in [Equivalence::parse("galilean", Some("2"))?, Equivalence::parse("multiplier", Some("x"))?] {
        let tr = apply_equivalence("thm2.iv", &params, None, &t)?;
        println!("{}: {} = {}", t.id(), plain(&tr.equation.lhs), plain(&tr.equation.rhs));
        for op in &tr.operators {
            println!("  {}", verify(&tr.pde, op, &tr.pde.default_assumptions())?.status.as_str());
        }
    }
    Ok(())
}
