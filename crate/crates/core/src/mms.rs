//! Manufactured smooth solution with its exact forcing.
//!
//! rho = exp(l), l = kappa s(t) (cos kx + cos ky + cos kz), s = 1 + sin(t)/4;
//! u = w(t) V(x), w = w0 (1 + sin(2t)/2),
//! V = (sin ky + beta sin kx, sin kz, sin kx).
//! The density is not band-limited, so the spatial error decays spectrally.

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::params::PulseParams;
use crate::solver::Forcing;
use crate::state::State;
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Manufactured {
    /// Wavenumber in periods per box.
    pub periods: f64,
    pub kappa: f64,
    pub w0: f64,
    pub beta: f64,
    pub params: PulseParams,
}

impl Manufactured {
    fn s(&self, t: f64) -> (f64, f64) {
        (1.0 + 0.25 * t.sin(), 0.25 * t.cos())
    }

    fn w(&self, t: f64) -> (f64, f64) {
        (self.w0 * (1.0 + 0.5 * (2.0 * t).sin()), self.w0 * (2.0 * t).cos())
    }

    fn k(&self, grid: Grid) -> f64 {
        TAU * self.periods / grid.length()
    }

    /// Pointwise fields and rates at (x, t):
    /// (rho, u, d rho/dt, du/dt, forcing_rho, forcing_u).
    fn point(&self, k: f64, t: f64, x: [f64; 3]) -> (f64, [f64; 3], f64, [f64; 3], f64, [f64; 3]) {
        let PulseParams { gamma, mu, lambda, .. } = self.params;
        let (sn, cs) = (x.map(|v| (k * v).sin()), x.map(|v| (k * v).cos()));
        let (s, ds) = self.s(t);
        let (w, dw) = self.w(t);
        let p = cs[0] + cs[1] + cs[2];
        let l = self.kappa * s * p;
        let rho = l.exp();
        let dl_dt = self.kappa * ds * p;
        let gl = sn.map(|v| -self.kappa * s * k * v);
        let v = [sn[1] + self.beta * sn[0], sn[2], sn[0]];
        let div_v = self.beta * k * cs[0];
        let grad_div_v = [-self.beta * k * k * sn[0], 0.0, 0.0];
        let adv = [v[0] * self.beta * k * cs[0] + v[1] * k * cs[1], v[2] * k * cs[2], v[0] * k * cs[0]];
        let u = v.map(|c| w * c);
        let u_gl: f64 = (0..3).map(|i| u[i] * gl[i]).sum();
        let f_rho = rho * (dl_dt + u_gl + w * div_v);
        let pressure = gamma * rho.powf(gamma - 1.0);
        let mut f_u = [0.0; 3];
        for i in 0..3 {
            let visc = w * (-mu * k * k * v[i] + lambda * grad_div_v[i]);
            f_u[i] = dw * v[i] + w * w * adv[i] + pressure * gl[i] - visc / rho;
        }
        (rho, u, rho * dl_dt, v.map(|c| dw * c), f_rho, f_u)
    }

    pub fn exact(&self, grid: Grid, t: f64) -> State {
        let k = self.k(grid);
        State {
            t,
            rho: ScalarField::from_fn(grid, |x, y, z| self.point(k, t, [x, y, z]).0),
            u: VectorField::from_fn(grid, |x, y, z| self.point(k, t, [x, y, z]).1),
        }
    }

    /// Exact (d rho/dt, du/dt).
    pub fn rate(&self, grid: Grid, t: f64) -> (ScalarField, VectorField) {
        let k = self.k(grid);
        (
            ScalarField::from_fn(grid, |x, y, z| self.point(k, t, [x, y, z]).2),
            VectorField::from_fn(grid, |x, y, z| self.point(k, t, [x, y, z]).3),
        )
    }
}

impl Forcing for Manufactured {
    fn eval(&self, t: f64, grid: Grid) -> (ScalarField, VectorField) {
        let k = self.k(grid);
        (
            ScalarField::from_fn(grid, |x, y, z| self.point(k, t, [x, y, z]).4),
            VectorField::from_fn(grid, |x, y, z| self.point(k, t, [x, y, z]).5),
        )
    }
}

/// Relative L^2 distance between two states over (rho, u1, u2, u3).
pub fn state_distance(a: &State, b: &State) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let pa = std::iter::once(&a.rho).chain(a.u.components().iter());
    let pb = std::iter::once(&b.rho).chain(b.u.components().iter());
    for (x, y) in pa.zip(pb) {
        for (p, q) in x.values().iter().zip(y.values()) {
            num += (p - q) * (p - q);
            den += q * q;
        }
    }
    (num / den).sqrt()
}
