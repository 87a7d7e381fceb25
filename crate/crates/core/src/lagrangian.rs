//! Particle tracking through a sequence of equally spaced snapshots.
//!
//! Velocities are evaluated off-grid with the trigonometric interpolant of
//! each snapshot. Particles advance with classical RK4 over two snapshot
//! intervals at a time (stages at snapshots k, k+1, k+1, k+2), so a stored
//! sample exists at every second snapshot.

use crate::csv::{parse_rows, write_rows, TRAJECTORY_COLUMNS};
use crate::diagnostics::pressure_deviation;
use crate::error::{Error, Result};
use crate::fft::{Band, C64};
use crate::field::{forward_pair, ScalarField};
use crate::grid::Grid;
use crate::params::PulseParams;
use crate::state::State;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: [f64; 3],
    pub rho: f64,
    pub a: f64,
    pub f: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub seed: [f64; 3],
    pub tau: f64,
    /// mu + lambda of the run, so that a/nu + F = div u.
    pub nu: f64,
    pub samples: Vec<Sample>,
}

/// Trigonometric interpolant of several real fields sharing a grid,
/// optionally restricted to the cube |k_i| <= kc.
pub struct Interpolant {
    grid: Grid,
    /// Retained axis indices and their wavenumbers.
    axis: Vec<(usize, f64, bool)>,
    /// One dense m^3 coefficient block per field.
    coeffs: Vec<Vec<C64>>,
}

impl Interpolant {
    pub fn new(fields: &[&ScalarField], band: Band) -> Result<Self> {
        let grid = fields.first().ok_or_else(|| Error::InvalidArgument("no fields".into()))?.grid();
        if fields.iter().any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        let n = grid.n();
        let axis: Vec<(usize, f64, bool)> = (0..n)
            .filter(|&i| match band {
                Band::Full => true,
                Band::Cube(kc) => grid.wavenumber(i).unsigned_abs() as usize <= kc,
            })
            .map(|i| (i, grid.xi(i), grid.is_nyquist(i)))
            .collect();
        let m = axis.len();
        let mut coeffs = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let (a, b) = forward_pair(pair[0].values(), pair.get(1).map(|f| f.values()), grid, band);
            for full in std::iter::once(a).chain(pair.get(1).map(|_| b)) {
                let mut c = Vec::with_capacity(m * m * m);
                for &(i0, _, _) in &axis {
                    for &(i1, _, _) in &axis {
                        for &(i2, _, _) in &axis {
                            c.push(full[grid.index(i0, i1, i2)]);
                        }
                    }
                }
                coeffs.push(c);
            }
        }
        Ok(Interpolant { grid, axis, coeffs })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn phases(&self, x: f64) -> Vec<C64> {
        self.axis
            .iter()
            .map(|&(_, xi, nyq)| if nyq { C64::new((xi * x).cos(), 0.0) } else { C64::from_polar(1.0, xi * x) })
            .collect()
    }

    /// Values of every field at the point x.
    pub fn eval(&self, x: [f64; 3]) -> Vec<f64> {
        self.eval_first(x, self.coeffs.len())
    }

    /// Values of the first `count` fields at x.
    pub fn eval_first(&self, x: [f64; 3], count: usize) -> Vec<f64> {
        let (e0, e1, e2) = (self.phases(x[0]), self.phases(x[1]), self.phases(x[2]));
        let m = self.axis.len();
        self.coeffs[..count]
            .iter()
            .map(|c| {
                let mut total = C64::new(0.0, 0.0);
                for (a, p0) in e0.iter().enumerate() {
                    let mut s1 = C64::new(0.0, 0.0);
                    for (b, p1) in e1.iter().enumerate() {
                        let row = &c[(a * m + b) * m..(a * m + b + 1) * m];
                        let s2: C64 = row.iter().zip(&e2).map(|(c, p)| c * p).sum();
                        s1 += s2 * p1;
                    }
                    total += s1 * p0;
                }
                total.re
            })
            .collect()
    }
}

fn wrap(x: [f64; 3], l: f64) -> [f64; 3] {
    // rem_euclid can round up to l itself
    x.map(|v| {
        let w = v.rem_euclid(l);
        if w >= l { 0.0 } else { w }
    })
}

/// Interpolants of one snapshot: (u1, u2, u3, rho, a, F).
struct Frame {
    t: f64,
    fields: Interpolant,
}

fn frame(state: &State, params: &PulseParams, band: Band) -> Result<Frame> {
    let a = pressure_deviation(&state.rho, params.gamma);
    let f = crate::diagnostics::effective_flux(state, params);
    let [u0, u1, u2] = state.u.components();
    Ok(Frame { t: state.t, fields: Interpolant::new(&[u0, u1, u2, &state.rho, &a, &f], band)? })
}

/// Streaming tracker: feed snapshots in time order with [`Tracker::push`].
pub struct Tracker {
    tau: f64,
    params: PulseParams,
    band: Band,
    length: f64,
    positions: Vec<[f64; 3]>,
    trajectories: Vec<Trajectory>,
    frames: Vec<Frame>,
    spacing: Option<f64>,
    last_t: Option<f64>,
}

impl Tracker {
    pub fn new(seeds: &[[f64; 3]], tau: f64, params: &PulseParams, band: Band) -> Result<Self> {
        if !tau.is_finite() || seeds.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("seeds and release time must be finite".into()));
        }
        Ok(Tracker {
            tau,
            params: *params,
            band,
            length: f64::NAN,
            positions: seeds.to_vec(),
            trajectories: seeds
                .iter()
                .map(|&s| Trajectory { seed: s, tau, nu: params.nu(), samples: Vec::new() })
                .collect(),
            frames: Vec::new(),
            spacing: None,
            last_t: None,
        })
    }

    fn tol(&self) -> f64 {
        1e-9 * self.tau.abs().max(1.0)
    }

    fn record(&mut self, k: usize) {
        let fr = &self.frames[k];
        let vals: Vec<Vec<f64>> = self.positions.par_iter().map(|&x| fr.fields.eval(x)).collect();
        for ((tr, &x), v) in self.trajectories.iter_mut().zip(&self.positions).zip(vals) {
            tr.samples.push(Sample { t: fr.t, x, rho: v[3], a: v[4], f: v[5] });
        }
    }

    pub fn push(&mut self, state: &State) -> Result<()> {
        let t = state.t;
        if let Some(prev) = self.last_t {
            if t <= prev {
                return Err(Error::InvalidArgument(format!("snapshot at t = {t} is not after {prev}")));
            }
        }
        if self.last_t.is_none() {
            if t < self.tau - self.tol() {
                return Ok(());
            }
            if (t - self.tau).abs() > self.tol() {
                return Err(Error::InvalidArgument(format!(
                    "first snapshot at t = {t} does not match the release time {}",
                    self.tau
                )));
            }
            self.length = state.grid().length();
            let l = self.length;
            for (p, tr) in self.positions.iter_mut().zip(&mut self.trajectories) {
                *p = wrap(*p, l);
                tr.seed = *p;
            }
            self.frames.push(frame(state, &self.params, self.band)?);
            self.last_t = Some(t);
            self.record(0);
            return Ok(());
        }
        let gap = t - self.last_t.unwrap();
        match self.spacing {
            None => self.spacing = Some(gap),
            Some(h) if (gap - h).abs() > 1e-6 * h => {
                return Err(Error::InvalidArgument(format!("snapshot gap {gap:e} differs from the spacing {h:e}")));
            }
            Some(_) => {}
        }
        if state.grid() != self.frames[0].fields.grid() {
            return Err(Error::GridMismatch);
        }
        self.frames.push(frame(state, &self.params, self.band)?);
        self.last_t = Some(t);
        if self.frames.len() == 3 {
            self.advance();
            self.record(2);
            self.frames.drain(..2);
        }
        Ok(())
    }

    fn advance(&mut self) {
        let [f0, f1, f2] = [&self.frames[0], &self.frames[1], &self.frames[2]];
        let h = f2.t - f0.t;
        let l = self.length;
        let vel = |f: &Frame, x: [f64; 3]| {
            let v = f.fields.eval_first(x, 3);
            [v[0], v[1], v[2]]
        };
        self.positions.par_iter_mut().for_each(|p| {
            let x = *p;
            let add = |x: [f64; 3], k: [f64; 3], s: f64| [x[0] + s * k[0], x[1] + s * k[1], x[2] + s * k[2]];
            let k1 = vel(f0, x);
            let k2 = vel(f1, add(x, k1, 0.5 * h));
            let k3 = vel(f1, add(x, k2, 0.5 * h));
            let k4 = vel(f2, add(x, k3, h));
            let mut y = x;
            for d in 0..3 {
                y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
            }
            *p = wrap(y, l);
        });
    }

    /// Trajectories so far. A trailing odd snapshot is not used.
    pub fn finish(self) -> Vec<Trajectory> {
        self.trajectories
    }
}

/// Tracks `seeds` released at `tau` through `snapshots` (time ordered, equally
/// spaced, the first at tau).
pub fn advect(seeds: &[[f64; 3]], tau: f64, snapshots: &[State], params: &PulseParams) -> Result<Vec<Trajectory>> {
    let mut tr = Tracker::new(seeds, tau, params, Band::Full)?;
    for s in snapshots {
        tr.push(s)?;
    }
    Ok(tr.finish())
}

/// Largest relative mismatch between rho(t) and
/// rho(t1) exp(-int_{t1}^t (a/nu + F) ds) over all sample pairs t1 < t,
/// with the integral by the trapezoid rule along the path.
pub fn density_formula_residual(traj: &Trajectory) -> f64 {
    let s = &traj.samples;
    let mut prefix = vec![0.0; s.len()];
    for k in 1..s.len() {
        let g0 = s[k - 1].a / traj.nu + s[k - 1].f;
        let g1 = s[k].a / traj.nu + s[k].f;
        prefix[k] = prefix[k - 1] + 0.5 * (s[k].t - s[k - 1].t) * (g0 + g1);
    }
    let mut worst = 0.0f64;
    for k in 1..s.len() {
        for i in 0..k {
            let pred = s[i].rho * (prefix[i] - prefix[k]).exp();
            worst = worst.max(((s[k].rho - pred) / s[k].rho).abs());
        }
    }
    worst
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    write_rows(
        &TRAJECTORY_COLUMNS,
        traj.samples.iter().map(|s| vec![s.t, s.x[0], s.x[1], s.x[2], s.rho, s.a, s.f]),
    )
}

/// Reads the samples of a trajectory file.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<Sample>> {
    Ok(parse_rows(text, &TRAJECTORY_COLUMNS)?
        .into_iter()
        .map(|r| Sample { t: r[0], x: [r[1], r[2], r[3]], rho: r[4], a: r[5], f: r[6] })
        .collect())
}
