use crate::error::{Error, Result};
use crate::symexpr::poly::Atom;
use crate::symexpr::{
    normalize, to_poly, transform_operator, AffineExponent, Assumptions, Coord, Dep, Equation, Expr, FuncSym, Jet,
    PointTransform, Rational,
};

/// How a canonical equation was obtained from `Ut = D(k U^m Ux, x) + B(U) Ux + C(U)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Origin {
    pub diffusion_exponent: AffineExponent,
    pub diffusion_coefficient: Rational,
    pub convection: Expr,
    pub reaction: Expr,
    pub transform: PointTransform,
    pub u_equation: Equation,
}

/// `Vxx = F0(V) Vt + F1(V) Vx + F2(V)`
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionPDE {
    pub f0: Expr,
    pub f1: Expr,
    pub f2: Expr,
    pub origin: Option<Origin>,
}

impl EvolutionPDE {
    pub fn new(f0: Expr, f1: Expr, f2: Expr) -> Result<Self> {
        let (f0, f1, f2) = (normalize(&f0)?, normalize(&f1)?, normalize(&f2)?);
        for (name, f) in [("F0", &f0), ("F1", &f1), ("F2", &f2)] {
            if to_poly(f)?.contains_jets() {
                return Err(Error::UnsupportedClass(format!("{name} contains jet symbols")));
            }
        }
        if f0.is_zero() {
            return Err(Error::UnsupportedClass("F0 is identically zero: not an evolution equation".into()));
        }
        Ok(EvolutionPDE { f0, f1, f2, origin: None })
    }

    /// `F0 Vt + F1 Vx + F2`
    pub fn rhs(&self) -> Expr {
        self.f0.clone() * Expr::jet(Jet::vt()) + self.f1.clone() * Expr::jet(Jet::vx()) + self.f2.clone()
    }

    /// `Vxx - F0 Vt - F1 Vx - F2`
    pub fn delta(&self) -> Expr {
        Expr::jet(Jet::vxx()) - self.rhs()
    }

    pub fn equation(&self) -> Equation {
        Equation::new(Expr::jet(Jet::vxx()), self.rhs())
    }

    /// Does the equation involve the symbolic exponent `n`?
    pub fn is_symbolic_power(&self) -> bool {
        [&self.f0, &self.f1, &self.f2].iter().any(|f| {
            to_poly(f).is_ok_and(|p| {
                p.contains(&|a| matches!(a, Atom::Param(q) if q.exponent_symbol().is_some()))
                    || p.terms().any(|(m, _)| m.0.values().any(|e| !e.is_constant()))
            })
        })
    }

    /// Ledger the equation needs by default: `{n != 0, n != -1}` for
    /// symbolic power families, empty otherwise.
    pub fn default_assumptions(&self) -> Assumptions {
        if self.is_symbolic_power() {
            Assumptions::power_family()
        } else {
            Assumptions::new()
        }
    }
}

/// `Q = d/dt + xi d/dx + eta d/dDep` with unit `d/dt` coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryOperator {
    pub xi: Expr,
    pub eta: Expr,
    pub dep: Dep,
    /// The `d/dt` coefficient divided out when the operator was normalized.
    pub multiplier: Option<Expr>,
}

/// Operator coefficients as written, `tau d/dt + xi d/dx + eta d/dDep`.
#[derive(Clone, Debug, PartialEq)]
pub struct RawOperator {
    pub tau: Expr,
    pub xi: Expr,
    pub eta: Expr,
    pub dep: Dep,
}

impl RawOperator {
    pub fn new(tau: Expr, xi: Expr, eta: Expr, dep: Dep) -> Self {
        RawOperator { tau, xi, eta, dep }
    }

    pub fn scaled(&self, m: &Expr) -> Result<RawOperator> {
        Ok(RawOperator {
            tau: normalize(&(m.clone() * self.tau.clone()))?,
            xi: normalize(&(m.clone() * self.xi.clone()))?,
            eta: normalize(&(m.clone() * self.eta.clone()))?,
            dep: self.dep,
        })
    }
}

impl SymmetryOperator {
    pub fn new(xi: Expr, eta: Expr) -> Result<Self> {
        Self::with_dep(xi, eta, Dep::V)
    }

    pub fn with_dep(xi: Expr, eta: Expr, dep: Dep) -> Result<Self> {
        Ok(SymmetryOperator { xi: normalize(&xi)?, eta: normalize(&eta)?, dep, multiplier: None })
    }

    /// Formal ansatz `xi(t,x,V)`, `eta(t,x,V)`.
    pub fn formal() -> Self {
        let f = |n: &str| Expr::Func(FuncSym::standard(n).expect("reserved name"));
        SymmetryOperator { xi: f("xi"), eta: f("eta"), dep: Dep::V, multiplier: None }
    }

    /// Divide `(tau, xi, eta)` by `tau`.
    pub fn from_raw(tau: &Expr, xi: &Expr, eta: &Expr, dep: Dep) -> Result<Self> {
        let tau = normalize(tau)?;
        if tau.is_zero() {
            return Err(Error::UnsupportedClass("zero d/dt coefficient".into()));
        }
        let inv = tau.clone().powi(-1);
        let mut op = Self::with_dep(xi.clone() * inv.clone(), eta.clone() * inv, dep)?;
        if tau != Expr::one() {
            op.multiplier = Some(tau);
        }
        Ok(op)
    }

    pub fn raw(&self) -> RawOperator {
        RawOperator::new(Expr::one(), self.xi.clone(), self.eta.clone(), self.dep)
    }

    /// The operator in the canonical variable of `pde`.
    pub fn in_v(&self, pde: &EvolutionPDE) -> Result<SymmetryOperator> {
        match self.dep {
            Dep::V => Ok(self.clone()),
            Dep::U => {
                let origin = pde.origin.as_ref().ok_or_else(|| {
                    Error::UnsupportedClass("operator acts on U but the equation was given in V-form".into())
                })?;
                let (xi, eta) = transform_operator(&self.xi, &self.eta, &origin.transform)?;
                Ok(SymmetryOperator { xi, eta, dep: Dep::V, multiplier: self.multiplier.clone() })
            }
            Dep::W => Err(Error::UnsupportedClass("operators in W are not supported".into())),
        }
    }

    /// The operator may only depend on `t`, `x` and its own dependent variable.
    pub fn check_variables(&self) -> Result<()> {
        for e in [&self.xi, &self.eta] {
            let p = to_poly(e)?;
            let other = [Dep::U, Dep::V, Dep::W].into_iter().filter(|d| *d != self.dep);
            for d in other {
                if p.depends_on_coord(Coord::Dep(d)) {
                    return Err(Error::UnsupportedClass(format!(
                        "operator acts on {} but its coefficients involve {}",
                        self.dep.name(),
                        d.name()
                    )));
                }
            }
            if p.contains_jets() {
                return Err(Error::UnsupportedClass("operator coefficients contain jet symbols".into()));
            }
        }
        Ok(())
    }
}

/// `V^n`
pub(crate) fn v_pow_n(shift: i64) -> Expr {
    Expr::v().pow(AffineExponent::n_plus(shift))
}
