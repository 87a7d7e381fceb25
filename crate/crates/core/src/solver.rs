//! Time integration on the periodic box.
//!
//! The state is advanced in spectral space. Each right-hand side uses the
//! rotational form u.grad u = grad |u|^2/2 - u x curl u, so one evaluation
//! costs nine packed complex transforms: density and velocity (2) out,
//! vorticity and the viscous/pressure force (3) out, then mass flux, the
//! nonlinear force and kinetic energy (4) back, with the pressure of a
//! non-unit gamma taking one of the back slots.

use crate::diagnostics::{self, DiagnosticsOptions, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::fft::{Band, C64};
use crate::fft::Fft3;
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::params::PulseParams;
use crate::spectral::Wavenumbers;
use crate::state::State;
use rayon::prelude::*;
use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ExplicitRk4,
    /// Heun predictor-corrector with Crank-Nicolson viscosity.
    Imex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt_init: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub scheme: Scheme,
    /// 0 disables.
    pub checkpoint_every: usize,
    /// 0 disables (the initial and final rows are still emitted).
    pub diagnostics_every: usize,
    /// Cadence of state snapshots handed to observers; 0 disables.
    pub snapshot_every: usize,
    pub positivity_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt_init: 1e-4,
            cfl_safety: 0.9,
            t_end: 0.1,
            dealias: true,
            scheme: Scheme::ExplicitRk4,
            checkpoint_every: 0,
            diagnostics_every: 100,
            snapshot_every: 0,
            positivity_floor: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init.is_finite() && self.dt_init > 0.0) {
            return Err(Error::InvalidArgument(format!("dt_init = {} must be positive", self.dt_init)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidArgument(format!("t_end = {} must be nonnegative", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidArgument(format!("cfl_safety = {} must lie in (0, 1]", self.cfl_safety)));
        }
        if !(self.positivity_floor >= 0.0) {
            return Err(Error::InvalidArgument("positivity_floor must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Additive source terms (density, velocity) for manufactured solutions.
pub trait Forcing: Sync {
    fn eval(&self, t: f64, grid: Grid) -> (ScalarField, VectorField);
}

/// Cheap per-step energy probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepProbe {
    pub step: u64,
    pub t: f64,
    /// 1/2 ||sqrt(rho) u||^2 + H(rho).
    pub energy: f64,
    /// mu ||grad u||^2 + lambda ||div u||^2.
    pub dissipation: f64,
    /// mu ||grad u||^2 alone.
    pub shear_dissipation: f64,
    pub mass: f64,
    pub min_rho: f64,
    pub max_rho: f64,
}

/// Receives run output. All methods default to doing nothing.
pub trait RunObserver {
    fn on_step(&mut self, _probe: &StepProbe) -> Result<()> {
        Ok(())
    }
    fn on_record(&mut self, _record: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
    fn on_checkpoint(&mut self, _step: u64, _state: &State, _params: &PulseParams) -> Result<()> {
        Ok(())
    }
    fn on_snapshot(&mut self, _step: u64, _state: &State) -> Result<()> {
        Ok(())
    }
}

/// Observer that ignores everything.
pub struct NullObserver;
impl RunObserver for NullObserver {}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: u64,
    pub t_final: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub mass_initial: f64,
    pub max_mass_drift: f64,
    pub records: usize,
    pub wall_time: Duration,
    pub final_state: State,
}

#[derive(Clone, Debug)]
pub(crate) struct Spec4 {
    pub rho: Vec<C64>,
    pub u: [Vec<C64>; 3],
}

impl Spec4 {
    fn zeros(len: usize) -> Self {
        let z = || vec![C64::new(0.0, 0.0); len];
        Spec4 { rho: z(), u: [z(), z(), z()] }
    }

    fn parts(&self) -> [&Vec<C64>; 4] {
        [&self.rho, &self.u[0], &self.u[1], &self.u[2]]
    }

    fn parts_mut(&mut self) -> [&mut Vec<C64>; 4] {
        let [a, b, c] = &mut self.u;
        [&mut self.rho, a, b, c]
    }

    /// self + h * d
    fn axpy(&self, h: f64, d: &Spec4) -> Spec4 {
        let mut out = self.clone();
        out.accumulate(h, d);
        out
    }

    fn accumulate(&mut self, h: f64, d: &Spec4) {
        for (o, x) in self.parts_mut().into_iter().zip(d.parts()) {
            o.iter_mut().zip(x).for_each(|(a, b)| *a += b * h);
        }
    }
}

pub(crate) struct Eval {
    pub d: Spec4,
    pub rho: Vec<f64>,
    pub u: [Vec<f64>; 3],
    pub min_rho: f64,
    pub max_rho: f64,
    pub max_speed: f64,
    pub max_sound: f64,
}

#[inline]
fn times_i(z: C64, s: f64) -> C64 {
    C64::new(-z.im * s, z.re * s)
}

fn zeros_c(m: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); m]
}

/// Right-hand side on a fixed grid. Spectral arrays hold only the retained
/// modes (the 2/3-rule ball, or every mode without dealiasing).
pub(crate) struct Kernel<'a> {
    pub grid: Grid,
    pub params: PulseParams,
    pub band: Band,
    fft: Arc<Fft3>,
    /// Flat FFT index of each retained mode.
    idx: Vec<usize>,
    /// Position of the mode -k.
    mirror: Vec<usize>,
    /// Frequencies for odd derivatives.
    kv: Vec<[f64; 3]>,
    /// |xi|^2 for the Laplacian.
    q: Vec<f64>,
    floor: f64,
    forcing: Option<&'a dyn Forcing>,
}

impl<'a> Kernel<'a> {
    pub fn new(grid: Grid, params: PulseParams, dealias: bool, floor: f64, forcing: Option<&'a dyn Forcing>) -> Self {
        let n = grid.n();
        let wk = Wavenumbers::new(grid);
        let keep = |i: usize| !dealias || 9 * grid.k_sq(i) <= (n * n) as i64;
        let idx: Vec<usize> = (0..grid.len()).filter(|&i| keep(i)).collect();
        let mut pos = vec![usize::MAX; grid.len()];
        for (c, &i) in idx.iter().enumerate() {
            pos[i] = c;
        }
        let mirror = idx
            .iter()
            .map(|&i| {
                let (a, b, c) = wk.split(i);
                pos[grid.index(grid.mirror(a), grid.mirror(b), grid.mirror(c))]
            })
            .collect();
        let kv = idx.iter().map(|&i| wk.odd3(i)).collect();
        let q = idx.iter().map(|&i| wk.xi_sq(i)).collect();
        let band = if dealias { Band::Cube(grid.dealias_cutoff()) } else { Band::Full };
        Kernel { grid, params, band, fft: Fft3::cached(n), idx, mirror, kv, q, floor, forcing }
    }

    /// Inverse transform of one or two retained-mode spectra.
    fn inverse2(&self, a: &[C64], b: Option<&[C64]>) -> (Vec<f64>, Vec<f64>) {
        let mut buf = zeros_c(self.grid.len());
        match b {
            Some(b) => {
                for (c, &i) in self.idx.iter().enumerate() {
                    buf[i] = C64::new(a[c].re - b[c].im, a[c].im + b[c].re);
                }
            }
            None => {
                for (c, &i) in self.idx.iter().enumerate() {
                    buf[i] = a[c];
                }
            }
        }
        self.fft.inverse(&mut buf, self.band);
        match b {
            Some(_) => buf.par_iter().map(|z| (z.re, z.im)).unzip(),
            None => (buf.par_iter().map(|z| z.re).collect(), Vec::new()),
        }
    }

    /// Forward transform of one or two real arrays onto the retained modes.
    fn forward2(&self, fa: &[f64], fb: Option<&[f64]>) -> (Vec<C64>, Vec<C64>) {
        let mut buf: Vec<C64> = match fb {
            Some(fb) => fa.par_iter().zip(fb).map(|(&x, &y)| C64::new(x, y)).collect(),
            None => fa.par_iter().map(|&x| C64::new(x, 0.0)).collect(),
        };
        self.fft.forward_unscaled(&mut buf, self.band);
        let s = 1.0 / self.grid.len() as f64;
        let m = self.idx.len();
        let (mut a, mut b) = (zeros_c(m), zeros_c(if fb.is_some() { m } else { 0 }));
        for c in 0..m {
            let z = buf[self.idx[c]] * s;
            let zm = buf[self.idx[self.mirror[c]]].conj() * s;
            a[c] = (z + zm) * 0.5;
            if fb.is_some() {
                let d = z - zm;
                b[c] = C64::new(d.im * 0.5, -d.re * 0.5);
            }
        }
        (a, b)
    }

    pub fn to_spectral(&self, s: &State) -> Spec4 {
        let [u0, u1, u2] = s.u.components();
        let (r, a) = self.forward2(s.rho.values(), Some(u0.values()));
        let (b, c) = self.forward2(u1.values(), Some(u2.values()));
        Spec4 { rho: r, u: [a, b, c] }
    }

    pub fn to_physical(&self, s: &Spec4, t: f64) -> State {
        let (r, a) = self.inverse2(&s.rho, Some(&s.u[0]));
        let (b, c) = self.inverse2(&s.u[1], Some(&s.u[2]));
        self.state_from(t, r, [a, b, c])
    }

    fn state_from(&self, t: f64, rho: Vec<f64>, u: [Vec<f64>; 3]) -> State {
        let g = self.grid;
        let [a, b, c] = u;
        State {
            t,
            rho: ScalarField::from_values_unchecked(g, rho),
            u: VectorField::new([
                ScalarField::from_values_unchecked(g, a),
                ScalarField::from_values_unchecked(g, b),
                ScalarField::from_values_unchecked(g, c),
            ])
            .unwrap(),
        }
    }

    pub fn eval(&self, s: &Spec4, t: f64) -> Result<Eval> {
        let len = self.grid.len();
        let m = self.idx.len();
        let PulseParams { gamma, mu, lambda, .. } = self.params;
        let (rho, u0) = self.inverse2(&s.rho, Some(&s.u[0]));
        let (u1, u2) = self.inverse2(&s.u[1], Some(&s.u[2]));

        let (min_rho, max_rho, max_speed_sq, finite) = (0..len)
            .into_par_iter()
            .map(|i| {
                let sp = u0[i] * u0[i] + u1[i] * u1[i] + u2[i] * u2[i];
                (rho[i], rho[i], sp, rho[i].is_finite() && sp.is_finite())
            })
            .reduce(
                || (f64::INFINITY, f64::NEG_INFINITY, 0.0, true),
                |a, b| (a.0.min(b.0), a.1.max(b.1), a.2.max(b.2), a.3 && b.3),
            );
        if !finite {
            return Err(Error::Blowup { t });
        }
        if min_rho <= self.floor {
            return Err(Error::Positivity { t, min_rho, floor: self.floor });
        }
        let max_sound = if gamma == 1.0 {
            1.0
        } else {
            (gamma * min_rho.powf(gamma - 1.0)).sqrt().max((gamma * max_rho.powf(gamma - 1.0)).sqrt())
        };

        let kin: Vec<f64> = (0..len).into_par_iter().map(|i| 0.5 * (u0[i] * u0[i] + u1[i] * u1[i] + u2[i] * u2[i])).collect();
        let (p_hat, k_hat_early) = if gamma == 1.0 {
            (None, None)
        } else {
            let p: Vec<f64> = rho.par_iter().map(|&r| r.powf(gamma)).collect();
            let (ph, kh) = self.forward2(&p, Some(&kin));
            (Some(ph), Some(kh))
        };
        let p_ref: &[C64] = p_hat.as_deref().unwrap_or(&s.rho);

        // vorticity and G = mu lap u + lambda grad div u - grad p
        let mut w = [zeros_c(m), zeros_c(m), zeros_c(m)];
        let mut gf = [zeros_c(m), zeros_c(m), zeros_c(m)];
        {
            let [a, b, c] = &s.u;
            for i in 0..m {
                let k = self.kv[i];
                let q = self.q[i];
                w[0][i] = times_i(c[i], k[1]) - times_i(b[i], k[2]);
                w[1][i] = times_i(a[i], k[2]) - times_i(c[i], k[0]);
                w[2][i] = times_i(b[i], k[0]) - times_i(a[i], k[1]);
                let kd = a[i] * k[0] + b[i] * k[1] + c[i] * k[2];
                let p = p_ref[i];
                gf[0][i] = a[i] * (-mu * q) - kd * (lambda * k[0]) - times_i(p, k[0]);
                gf[1][i] = b[i] * (-mu * q) - kd * (lambda * k[1]) - times_i(p, k[1]);
                gf[2][i] = c[i] * (-mu * q) - kd * (lambda * k[2]) - times_i(p, k[2]);
            }
        }
        let (w0, w1) = self.inverse2(&w[0], Some(&w[1]));
        let (w2, g0) = self.inverse2(&w[2], Some(&gf[0]));
        let (g1, g2) = self.inverse2(&gf[1], Some(&gf[2]));

        let mut mm = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        let mut nl = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        {
            let [m0, m1, m2] = &mut mm;
            let [n0, n1, n2] = &mut nl;
            m0.par_iter_mut()
                .zip(m1.par_iter_mut())
                .zip(m2.par_iter_mut())
                .zip(n0.par_iter_mut().zip(n1.par_iter_mut()).zip(n2.par_iter_mut()))
                .enumerate()
                .for_each(|(i, (((a0, a1), a2), ((b0, b1), b2)))| {
                    let r = rho[i];
                    let inv = 1.0 / r;
                    *a0 = r * u0[i];
                    *a1 = r * u1[i];
                    *a2 = r * u2[i];
                    *b0 = g0[i] * inv + u1[i] * w2[i] - u2[i] * w1[i];
                    *b1 = g1[i] * inv + u2[i] * w0[i] - u0[i] * w2[i];
                    *b2 = g2[i] * inv + u0[i] * w1[i] - u1[i] * w0[i];
                });
        }
        let (mh0, mh1) = self.forward2(&mm[0], Some(&mm[1]));
        let (mh2, nh0) = self.forward2(&mm[2], Some(&nl[0]));
        let (nh1, nh2) = self.forward2(&nl[1], Some(&nl[2]));
        let kh = match k_hat_early {
            Some(k) => k,
            None => self.forward2(&kin, None).0,
        };

        let mut d = Spec4::zeros(m);
        for i in 0..m {
            let k = self.kv[i];
            d.rho[i] = -(times_i(mh0[i], k[0]) + times_i(mh1[i], k[1]) + times_i(mh2[i], k[2]));
            d.u[0][i] = nh0[i] - times_i(kh[i], k[0]);
            d.u[1][i] = nh1[i] - times_i(kh[i], k[1]);
            d.u[2][i] = nh2[i] - times_i(kh[i], k[2]);
        }
        if let Some(f) = self.forcing {
            let (fr, fu) = f.eval(t, self.grid);
            let [f0, f1, f2] = fu.components();
            let (a, b) = self.forward2(fr.values(), Some(f0.values()));
            let (c, e) = self.forward2(f1.values(), Some(f2.values()));
            d.accumulate(1.0, &Spec4 { rho: a, u: [b, c, e] });
        }
        Ok(Eval { d, rho, u: [u0, u1, u2], min_rho, max_rho, max_speed: max_speed_sq.sqrt(), max_sound })
    }

    /// Energy and dissipation at the evaluation point.
    pub fn probe(&self, s: &Spec4, ev: &Eval, step: u64, t: f64) -> StepProbe {
        let g = self.grid;
        let gamma = self.params.gamma;
        let mut energy = 0.0;
        let mut mass = 0.0;
        for i in 0..g.len() {
            let r = ev.rho[i];
            let sp = ev.u[0][i] * ev.u[0][i] + ev.u[1][i] * ev.u[1][i] + ev.u[2][i] * ev.u[2][i];
            energy += 0.5 * r * sp + diagnostics::potential_density(r, gamma);
            mass += r;
        }
        let mut grad_sq = 0.0;
        let mut div_sq = 0.0;
        for (i, k) in self.kv.iter().enumerate() {
            let q = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let (a, b, c) = (s.u[0][i], s.u[1][i], s.u[2][i]);
            grad_sq += q * (a.norm_sqr() + b.norm_sqr() + c.norm_sqr());
            div_sq += (a * k[0] + b * k[1] + c * k[2]).norm_sqr();
        }
        let vol = g.volume();
        let shear = self.params.mu * grad_sq * vol;
        StepProbe {
            step,
            t,
            energy: energy * g.cell_volume(),
            dissipation: shear + self.params.lambda * div_sq * vol,
            shear_dissipation: shear,
            mass: mass * g.cell_volume(),
            min_rho: ev.min_rho,
            max_rho: ev.max_rho,
        }
    }

    fn cfl(&self, ev: &Eval, config: &SolverConfig) -> f64 {
        cfl_formula(self.grid.dx(), ev.max_speed, ev.max_sound, ev.min_rho, &self.params, config)
    }

    /// One step given the tendency at the current state.
    fn advance(&self, s: &Spec4, ev: &Eval, t: f64, dt: f64, scheme: Scheme) -> Result<Spec4> {
        match scheme {
            Scheme::ExplicitRk4 => {
                let k1 = &ev.d;
                let k2 = self.eval(&s.axpy(0.5 * dt, k1), t + 0.5 * dt)?.d;
                let k3 = self.eval(&s.axpy(0.5 * dt, &k2), t + 0.5 * dt)?.d;
                let k4 = self.eval(&s.axpy(dt, &k3), t + dt)?.d;
                let mut out = s.clone();
                out.accumulate(dt / 6.0, k1);
                out.accumulate(dt / 3.0, &k2);
                out.accumulate(dt / 3.0, &k3);
                out.accumulate(dt / 6.0, &k4);
                Ok(out)
            }
            Scheme::Imex => {
                let c_mu = self.params.mu / ev.min_rho;
                let c_la = self.params.lambda / ev.min_rho;
                let e1 = self.explicit_part(s, &ev.d, c_mu, c_la);
                let rhs1 = self.with_half_implicit(s, &s.axpy(dt, &e1), dt, c_mu, c_la);
                let pred = self.solve_implicit(rhs1, dt, c_mu, c_la);
                let ev2 = self.eval(&pred, t + dt)?;
                let e2 = self.explicit_part(&pred, &ev2.d, c_mu, c_la);
                let mut avg = s.axpy(0.5 * dt, &e1);
                avg.accumulate(0.5 * dt, &e2);
                let rhs2 = self.with_half_implicit(s, &avg, dt, c_mu, c_la);
                Ok(self.solve_implicit(rhs2, dt, c_mu, c_la))
            }
        }
    }

    /// Frozen-coefficient viscous operator applied to the velocity of s.
    fn viscous(&self, s: &Spec4, c_mu: f64, c_la: f64) -> [Vec<C64>; 3] {
        let m = self.idx.len();
        let mut out = [zeros_c(m), zeros_c(m), zeros_c(m)];
        for i in 0..m {
            let k = self.kv[i];
            let kd = s.u[0][i] * k[0] + s.u[1][i] * k[1] + s.u[2][i] * k[2];
            for d in 0..3 {
                out[d][i] = s.u[d][i] * (-c_mu * self.q[i]) - kd * (c_la * k[d]);
            }
        }
        out
    }

    fn explicit_part(&self, s: &Spec4, full: &Spec4, c_mu: f64, c_la: f64) -> Spec4 {
        let lin = self.viscous(s, c_mu, c_la);
        let mut e = full.clone();
        for d in 0..3 {
            e.u[d].iter_mut().zip(&lin[d]).for_each(|(a, b)| *a -= b);
        }
        e
    }

    fn with_half_implicit(&self, s: &Spec4, base: &Spec4, dt: f64, c_mu: f64, c_la: f64) -> Spec4 {
        let lin = self.viscous(s, c_mu, c_la);
        let mut out = base.clone();
        for d in 0..3 {
            out.u[d].iter_mut().zip(&lin[d]).for_each(|(a, b)| *a += b * (0.5 * dt));
        }
        out
    }

    /// Solves (I - dt/2 L) x = rhs mode by mode.
    fn solve_implicit(&self, mut rhs: Spec4, dt: f64, c_mu: f64, c_la: f64) -> Spec4 {
        let h = 0.5 * dt;
        for i in 0..self.idx.len() {
            let k = self.kv[i];
            let ko = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let v = [rhs.u[0][i], rhs.u[1][i], rhs.u[2][i]];
            let perp = 1.0 / (1.0 + h * c_mu * self.q[i]);
            if ko == 0.0 {
                for d in 0..3 {
                    rhs.u[d][i] = v[d] * perp;
                }
                continue;
            }
            let par = 1.0 / (1.0 + h * c_mu * self.q[i] + h * c_la * ko);
            let kd = (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]) / ko;
            for d in 0..3 {
                let along = kd * k[d];
                rhs.u[d][i] = (v[d] - along) * perp + along * par;
            }
        }
        rhs
    }
}

fn cfl_formula(dx: f64, max_speed: f64, max_sound: f64, min_rho: f64, p: &PulseParams, config: &SolverConfig) -> f64 {
    let adv = dx / (max_speed + max_sound);
    let visc = match config.scheme {
        Scheme::ExplicitRk4 => dx * dx / (6.0 * p.nu() / min_rho),
        Scheme::Imex => f64::INFINITY,
    };
    config.cfl_safety * adv.min(visc)
}

/// cfl_safety * min(dx / (max|u| + c_max), dx^2 / (6 mu_eff)) with
/// c_max = max sqrt(gamma rho^(gamma-1)) and mu_eff = (mu + lambda) / min rho.
/// The IMEX scheme drops the viscous bound.
pub fn cfl_dt(state: &State, params: &PulseParams, config: &SolverConfig) -> f64 {
    let g = state.grid();
    let speed = state.u.magnitude().max();
    let (lo, hi) = (state.rho.min(), state.rho.max());
    let c = (params.gamma * lo.powf(params.gamma - 1.0)).sqrt().max((params.gamma * hi.powf(params.gamma - 1.0)).sqrt());
    cfl_formula(g.dx(), speed, c, lo, params, config)
}

/// Tendencies (d rho/dt, du/dt) with dealiased products.
pub fn rhs(state: &State, params: &PulseParams) -> Result<(ScalarField, VectorField)> {
    rhs_with(state, params, true, None)
}

pub fn rhs_with(
    state: &State,
    params: &PulseParams,
    dealias: bool,
    forcing: Option<&dyn Forcing>,
) -> Result<(ScalarField, VectorField)> {
    params.validate()?;
    let k = Kernel::new(state.grid(), *params, dealias, 0.0, forcing);
    let s = k.to_spectral(state);
    let ev = k.eval(&s, state.t)?;
    let out = k.to_physical(&ev.d, state.t);
    Ok((out.rho, out.u))
}

/// One step of the configured scheme.
pub fn step(state: &State, dt: f64, params: &PulseParams, config: &SolverConfig) -> Result<State> {
    step_with(state, dt, params, config, None)
}

pub fn step_with(
    state: &State,
    dt: f64,
    params: &PulseParams,
    config: &SolverConfig,
    forcing: Option<&dyn Forcing>,
) -> Result<State> {
    params.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let k = Kernel::new(state.grid(), *params, config.dealias, config.positivity_floor, forcing);
    let s = k.to_spectral(state);
    let ev = k.eval(&s, state.t)?;
    let next = k.advance(&s, &ev, state.t, dt, config.scheme)?;
    let out = k.to_physical(&next, state.t + dt);
    out.rho.check_finite().map_err(|_| Error::Blowup { t: state.t + dt })?;
    out.u.check_finite().map_err(|_| Error::Blowup { t: state.t + dt })?;
    Ok(out)
}

/// Time-centered energy balance residual between two probes, relative to
/// the shear dissipation at the midpoint.
pub fn balance_residual(prev: &StepProbe, cur: &StepProbe) -> f64 {
    let dt = cur.t - prev.t;
    let lhs = (cur.energy - prev.energy) / dt + 0.5 * (cur.dissipation + prev.dissipation);
    lhs.abs() / (0.5 * (cur.shear_dissipation + prev.shear_dissipation))
}

/// Integrates to t_end, streaming probes, records, checkpoints and snapshots.
pub fn run(
    initial: &State,
    params: &PulseParams,
    config: &SolverConfig,
    diag: &DiagnosticsOptions,
    observer: &mut dyn RunObserver,
) -> Result<RunSummary> {
    run_with(initial, params, config, diag, observer, None)
}

pub fn run_with(
    initial: &State,
    params: &PulseParams,
    config: &SolverConfig,
    diag: &DiagnosticsOptions,
    observer: &mut dyn RunObserver,
    forcing: Option<&dyn Forcing>,
) -> Result<RunSummary> {
    params.validate()?;
    config.validate()?;
    let start = Instant::now();
    let k = Kernel::new(initial.grid(), *params, config.dealias, config.positivity_floor, forcing);
    let mut s = k.to_spectral(initial);
    let mut t = initial.t;
    let t_end = initial.t + config.t_end;
    let tol = 1e-12 * t_end.abs().max(1.0);
    let mut step: u64 = 0;
    let mut prev_probe: Option<StepProbe> = None;
    let mut records = 0usize;
    let mut mass_initial = f64::NAN;
    let (mut min_rho, mut max_rho, mut drift) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    let due = |every: usize, step: u64| every > 0 && step.is_multiple_of(every as u64);

    loop {
        let ev = k.eval(&s, t)?;
        let probe = k.probe(&s, &ev, step, t);
        if step == 0 {
            mass_initial = probe.mass;
        }
        drift = drift.max((probe.mass - mass_initial).abs() / mass_initial.abs());
        min_rho = min_rho.min(ev.min_rho);
        max_rho = max_rho.max(ev.max_rho);
        let residual = prev_probe.as_ref().map(|p| balance_residual(p, &probe)).unwrap_or(f64::NAN);
        observer.on_step(&probe)?;
        prev_probe = Some(probe);
        let last = t >= t_end - tol;

        let want_record = step == 0 || last || due(config.diagnostics_every, step);
        let want_ckpt = due(config.checkpoint_every, step) || (last && config.checkpoint_every > 0);
        let want_snap = due(config.snapshot_every, step);
        if want_record || want_ckpt || want_snap || last {
            let state = k.state_from(t, ev.rho.clone(), ev.u.clone());
            if want_record {
                let mut rec = diagnostics::record(&state, params, diag)?;
                rec.energy_balance_residual = residual;
                observer.on_record(&rec)?;
                records += 1;
            }
            if want_ckpt {
                observer.on_checkpoint(step, &state, params)?;
            }
            if want_snap {
                observer.on_snapshot(step, &state)?;
            }
            if last {
                return Ok(RunSummary {
                    steps: step,
                    t_final: t,
                    min_rho,
                    max_rho,
                    mass_initial,
                    max_mass_drift: drift,
                    records,
                    wall_time: start.elapsed(),
                    final_state: state,
                });
            }
        }

        let mut dt = config.dt_init.min(k.cfl(&ev, config));
        if t + dt > t_end - tol {
            dt = t_end - t;
        }
        s = k.advance(&s, &ev, t, dt, config.scheme)?;
        t = if dt == t_end - t { t_end } else { t + dt };
        step += 1;
    }
}
