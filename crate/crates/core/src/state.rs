use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

/// Density and velocity at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub rho: ScalarField,
    pub u: VectorField,
}

impl State {
    pub fn new(t: f64, rho: ScalarField, u: VectorField) -> Result<Self> {
        if rho.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        rho.check_finite()?;
        u.check_finite()?;
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time {t} is not finite")));
        }
        let s = State { t, rho, u };
        let m = s.rho.min();
        if m <= 0.0 {
            return Err(Error::Positivity { t, min_rho: m, floor: 0.0 });
        }
        Ok(s)
    }

    /// Uniform density 1 at rest.
    pub fn equilibrium(grid: Grid) -> Self {
        State { t: 0.0, rho: ScalarField::constant(grid, 1.0), u: VectorField::zeros(grid) }
    }

    pub fn grid(&self) -> Grid {
        self.rho.grid()
    }

    pub fn mass(&self) -> f64 {
        self.rho.integral()
    }
}
