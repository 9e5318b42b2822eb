//! Finite-difference check of candidate solutions of constraint systems,
//! with grid refinement and Richardson extrapolation.

use condsym::numerics::{ode_constraint_check, Grid1D};
use condsym::parser::{parse_bindings, parse_params};

fn main() -> condsym::Result<()> {
    let grid = Grid1D::new(1.0, 2.0, 1001)?;
    let cases = [
        ("ode10", "lam=0, lam2=0", "h=6*x^(-2)"),
        ("ode10", "lam=0, lam2=0", "h=5*x^(-2)"),
        ("sys9", "lam1=0, lam2=2", "f=0; g=0; h=1"),
        ("sys8ad", "lam=1", "a=0; b=0; q=x/(2*t)"),
    ];
    for (sys, params, cand) in cases {
        let cand = parse_bindings(cand)?.into_iter().collect();
        let c = ode_constraint_check(sys, &parse_params(params)?, &cand, &grid, 1.0)?;
        println!(
            "{sys:<7} {params:<16} residual {:.3e}  ratio {}  extrapolated {:.3e}",
            c.max_residual,
            c.refinement_ratio.map_or("n/a".into(), |r| format!("{r:.3}")),
            c.extrapolated_residual
        );
    }
    Ok(())
}
