//! Evolve initial data along the invariant surface condition and compare with
//! a method-of-lines solution of the PDE on three grids. A deliberately wrong
//! operator serves as the negative control.

use condsym::numerics::{invariant_flow_check, FlowCheckOptions, Grid1D};
use condsym::parser::{parse_operator, parse_params};

fn report(label: &str, r: &condsym::numerics::FlowCheckReport) {
    println!("{label}");
    for l in &r.levels {
        println!("  N = {:>4}  deviation {:.3e}  residual {:.3e}", l.n, l.max_flow_deviation, l.max_pde_residual);
    }
    println!("  ratios {:?}  passes(1e-4) = {}", r.refinement_ratios, r.passes(1e-4));
}

fn main() -> condsym::Result<()> {
    let params = parse_params("lam=1, lam0=0, lam2=-1")?;
    let mut opts = FlowCheckOptions::new(Grid1D::new(0.0, 1.0, 101)?, 0.5);
    opts.profile = [1.0, 0.1];
    report("thm2.iv", &invariant_flow_check("thm2.iv", &params, &opts)?);

    let params = parse_params("m=1, lam=1, lam1=-1/2, lam2=1/2, lam3=1")?;
    let mut opts = FlowCheckOptions::new(Grid1D::new(0.0, 1.0, 101)?, 0.5);
    opts.operator = Some(parse_operator("Q = Dt + (0*V + 1)*DV")?);
    report("thm1.i, wrong operator", &invariant_flow_check("thm1.i", &params, &opts)?);
    Ok(())
}
