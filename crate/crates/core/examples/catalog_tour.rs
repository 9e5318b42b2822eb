//! Walk the built-in catalog: list entries, then instantiate the cubic entry
//! whose operators come from the roots of a quadratic.

use condsym::catalog::{self, instantiate, quadratic_roots, QuadraticRoots};
use condsym::parser::parse_params;
use condsym::symexpr::render::plain;
use condsym::symexpr::Rational;

fn main() -> condsym::Result<()> {
    for s in catalog::list_entries() {
        println!("{:<24} {}", s.id, s.title);
    }

    // The root quadratic at lam = 1, lam3 = -2/9 is 2p^2 + p - 3.
    let q = |n: i64| Rational::from_integer(n.into());
    match quadratic_roots(&q(2), &q(1), &q(-3)) {
        QuadraticRoots::Rational(r) => {
            println!("roots: {}", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
        }
        other => println!("roots: {other:?}"),
    }

    let inst = instantiate("thm2.v.quadratic", &parse_params("lam=1, lam3=-2/9")?, None)?;
    for o in &inst.operators {
        println!(
            "[{}] xi = {}, eta = {}",
            o.label.as_deref().unwrap_or("-"),
            plain(&o.operator.xi),
            plain(&o.operator.eta)
        );
    }
    Ok(())
}
