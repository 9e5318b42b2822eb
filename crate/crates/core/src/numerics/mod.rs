//! Deterministic numeric checks: ODE integration, finite-difference
//! residuals and the invariant-flow test.

mod fd;
mod flow;
mod ode;
mod tape;

pub use fd::{ode_constraint_check, pde_residual, ConstraintCheck, Field};
pub use flow::{flow_check, invariant_flow_check, FlowCheckOptions, FlowCheckReport, FlowLevel};
pub use ode::{integrate_ode, steps_for, OdeSystem, Trajectory};
pub use tape::{Slot, Tape};

use crate::error::{NumericError, Result};

/// Uniform grid of `n` points on `[x0, x1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub x0: f64,
    pub x1: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x0: f64, x1: f64, n: usize) -> Result<Grid1D> {
        if !(x0.is_finite() && x1.is_finite()) || x1 <= x0 {
            return Err(NumericError::InvalidGrid(format!("need x0 < x1, got [{x0}, {x1}]")).into());
        }
        if n < 8 {
            return Err(NumericError::GridTooSmall(format!("{n} points, at least 8 required")).into());
        }
        Ok(Grid1D { x0, x1, n })
    }

    pub fn h(&self) -> f64 {
        (self.x1 - self.x0) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x1
        } else {
            self.x0 + i as f64 * self.h()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> Grid1D {
        Grid1D { n: 2 * self.n - 1, ..*self }
    }

    /// Same interval with the spacing doubled, if the point count allows it.
    pub fn coarsened(&self) -> Option<Grid1D> {
        ((self.n - 1).is_multiple_of(2) && (self.n - 1) / 2 + 1 >= 8)
            .then(|| Grid1D { n: (self.n - 1) / 2 + 1, ..*self })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 1.0, 7).is_err());
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        let g = Grid1D::new(1.0, 2.0, 1001).unwrap();
        assert_eq!(g.h(), 1e-3);
        assert_eq!(g.point(1000), 2.0);
        assert_eq!(g.refined().n, 2001);
        assert_eq!(g.coarsened().unwrap().n, 501);
        assert!(Grid1D::new(0.0, 1.0, 10).unwrap().coarsened().is_none());
    }
}
