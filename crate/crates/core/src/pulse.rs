//! Short-pulse initial data.
//!
//! With phi(y) = exp(-|y|^2) centered in the box (periodized over the 26
//! neighbouring images so its peak is exactly 1):
//!   rho_0 = (1 + A phi(x/delta))^(1/gamma),  A = phi_amp delta^-alpha,
//!   u_0   = A grad Lap^{-1}[phi(x/delta) - mean] + v_amp delta^(1-alpha/2) v(x/delta),
//! with v(y) = (exp(-|y|^2), 0, 0). Then div u_0 - a_0 = -A mean(phi) + div of the v term.

use crate::diagnostics::{effective_flux, material_derivative, potential_energy, pressure_deviation};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::params::PulseParams;
use crate::spectral::{curl, div, grad, grad_inv_laplacian, l2_sq, l2_sq_vector, lp_norm_scalar, lp_norm_vector};
use crate::state::State;

/// Largest single-Gaussian value allowed at the box boundary.
pub const BOUNDARY_TAIL_LIMIT: f64 = 1e-6;

/// exp(-(L / (2 delta))^2): the profile value at distance L/2 from the center.
pub fn boundary_tail(delta: f64, length: f64) -> f64 {
    (-(0.5 * length / delta).powi(2)).exp()
}

/// Periodized Gaussian profile phi((x - center) / delta), peak 1 at the center.
pub fn profile(grid: Grid, delta: f64) -> ScalarField {
    let n = grid.n();
    let l = grid.length();
    let c = 0.5 * l;
    let line: Vec<f64> = (0..n)
        .map(|i| {
            let x = grid.coord(i) - c;
            (-1..=1).map(|m| (-((x + m as f64 * l) / delta).powi(2)).exp()).sum()
        })
        .collect();
    ScalarField::from_fn(grid, |x, y, z| {
        let idx = |v: f64| ((v / grid.dx()).round() as usize).min(n - 1);
        line[idx(x)] * line[idx(y)] * line[idx(z)]
    })
}

/// Builds (rho_0, u_0) for the pulse family.
pub fn build_pulse(params: &PulseParams, grid: Grid) -> Result<State> {
    params.validate()?;
    let tail = boundary_tail(params.delta, grid.length());
    if tail > BOUNDARY_TAIL_LIMIT {
        return Err(Error::PulseTooWide { tail, limit: BOUNDARY_TAIL_LIMIT });
    }
    let phi = profile(grid, params.delta);
    let amp = params.phi_amp * params.amplitude();
    let gamma = params.gamma;
    let rho = phi.map(|p| (1.0 + amp * p).powf(1.0 / gamma));
    let mean = phi.mean();
    let centered = phi.map(|p| p - mean);
    // grad Lap^{-1} = -grad (-Lap)^{-1}
    let potential = grad_inv_laplacian(&centered).scale(-amp);
    let vs = params.v_amp * params.delta.powf(1.0 - 0.5 * params.alpha);
    let [p0, p1, p2] = potential.into_components();
    let u0 = p0.zip_map(&phi, |a, b| a + vs * b)?;
    State::new(0.0, rho, VectorField::new([u0, p1, p2])?)
}

/// Norms of the initial data and the weighted initial energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitDiagnostics {
    pub a0_linf: f64,
    pub a0_l1: f64,
    pub a0_l2: f64,
    pub a0_l6: f64,
    pub f0_l2: f64,
    pub curl_u0_l2: f64,
    pub div_u0_l2: f64,
    pub h_rho0: f64,
    pub rho_udot0_l2: f64,
    pub e0_scaled: f64,
    pub grad_a0_l2: f64,
    pub grad_a0_l6: f64,
}

/// a_0, F_0, sqrt(rho_0) udot_0 and the weighted sum
/// delta^(alpha-3) (||sqrt(rho) u||^2 + ||curl u||^2 + ||F||^2 + H)
///   + delta^(2 alpha - 1) (||sqrt(rho) udot||^2 + ||div u||^2 + ||a||_6^2).
pub fn derived_initials(state: &State, params: &PulseParams) -> Result<InitDiagnostics> {
    params.validate()?;
    let m = state.rho.min();
    if m <= 0.0 {
        return Err(Error::Positivity { t: state.t, min_rho: m, floor: 0.0 });
    }
    let a = pressure_deviation(&state.rho, params.gamma);
    let f = effective_flux(state, params);
    let udot = material_derivative(state, params)?;
    let sqrt_rho = state.rho.map(f64::sqrt);
    let rho_udot = udot.mul_scalar(&sqrt_rho)?;
    let rho_u = state.u.mul_scalar(&sqrt_rho)?;
    let h = potential_energy(state, params.gamma)?;
    let curl_sq = l2_sq_vector(&curl(&state.u));
    let div_sq = l2_sq(&div(&state.u));
    let f_sq = l2_sq(&f);
    let a6 = lp_norm_scalar(&a, 6.0)?;
    let ru_sq = l2_sq_vector(&rho_udot);
    let ga = grad(&a);
    let d = params.delta;
    let e0 = d.powf(params.alpha - 3.0) * (l2_sq_vector(&rho_u) + curl_sq + f_sq + h)
        + d.powf(2.0 * params.alpha - 1.0) * (ru_sq + div_sq + a6 * a6);
    Ok(InitDiagnostics {
        a0_linf: lp_norm_scalar(&a, f64::INFINITY)?,
        a0_l1: lp_norm_scalar(&a, 1.0)?,
        a0_l2: lp_norm_scalar(&a, 2.0)?,
        a0_l6: a6,
        f0_l2: f_sq.sqrt(),
        curl_u0_l2: curl_sq.sqrt(),
        div_u0_l2: div_sq.sqrt(),
        h_rho0: h,
        rho_udot0_l2: ru_sq.sqrt(),
        e0_scaled: e0,
        grad_a0_l2: lp_norm_vector(&ga, 2.0)?,
        grad_a0_l6: lp_norm_vector(&ga, 6.0)?,
    })
}
