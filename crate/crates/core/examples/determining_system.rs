//! Determining systems of the four canonical families, and the split of the
//! power family under the ansatz xi = f(t,x), eta = g(t,x) V + h(t,x).

use condsym::invariance::{generate_determining_system, split_determining, Family, SymmetryOperator};
use condsym::parser::parse_bindings;
use condsym::symexpr::render::plain;
use condsym::symexpr::{AffineExponent, Assumptions, Rational};

fn main() -> condsym::Result<()> {
    for fam in [Family::PowerPlain, Family::PowerConvective, Family::ExpPlain, Family::ExpConvective] {
        let sys = generate_determining_system(&fam.pde(), &SymmetryOperator::formal())?;
        println!("{}:", fam.name());
        for e in &sys.equations {
            println!("  {} = 0", plain(e));
        }
    }

    let sys = generate_determining_system(&Family::PowerPlain.pde(), &SymmetryOperator::formal())?;
    let ansatz = parse_bindings("xi=f; eta=g*V+h")?.into_iter().collect();
    let n_ne_1 = Assumptions::new().with_exponent_ne(AffineExponent::n_plus(0), Rational::from_integer(1.into()))?;
    let split = split_determining(&sys, &ansatz, &n_ne_1)?;
    println!("power-plain, linear ansatz, n != 1:");
    for e in &split.equations {
        println!("  {} = 0", plain(e));
    }
    Ok(())
}
