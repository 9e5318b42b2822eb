//! Check a hand-written operator against a hand-written equation, then let a
//! catalog entry supply both.
//!
//! ```bash
//! cargo run --example verify_operator
//! ```

use condsym::catalog::instantiate;
use condsym::invariance::verify;
use condsym::parser::{parse_equation, parse_operator, parse_params};
use condsym::symexpr::render::plain;

fn main() -> condsym::Result<()> {
    // Fisher-type equation with Burgers convection.
    let pde = parse_equation("Ut = Uxx + U*Ux + U - U^2")?;
    for text in ["Q = Dt - (U + 1)*Dx + U*(1 - U)*DU", "Q = Dt + U*(1 - U)*DU"] {
        let op = parse_operator(text)?.in_v(&pde)?;
        let v = verify(&pde, &op, &pde.default_assumptions())?;
        print!("{text:<40} {}", v.status.as_str());
        if let Some(w) = &v.witness {
            print!("  (Vx^{} coefficient {})", v.witness_degree.unwrap_or(0), plain(w));
        }
        println!();
    }

    let params = parse_params("m=1, lam=1, lam1=1, lam2=1, lam3=0")?;
    let inst = instantiate("thm1.i", &params, None)?;
    for o in &inst.operators {
        let v = verify(&inst.pde, &o.operator, &inst.assumptions)?;
        println!("thm1.i: xi = {}, eta = {} -> {}", plain(&o.operator.xi), plain(&o.operator.eta), v.status.as_str());
    }
    for m in &inst.mutants {
        let v = verify(&inst.pde, m, &inst.assumptions)?;
        println!("mutant: xi = {}, eta = {} -> {}", plain(&m.xi), plain(&m.eta), v.status.as_str());
    }
    Ok(())
}
