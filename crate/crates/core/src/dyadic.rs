//! Littlewood-Paley blocks on the periodic grid.
//!
//! Profile: `theta` is a smooth step equal to 1 on [0, 3/4] and 0 on
//! [4/3, inf), built as 1 - S((tau - 3/4) / (7/12)) where S is the normalized
//! running integral of exp(-1/(1-t^2)) over [-1, 2s-1]. Then
//! phi(tau) = theta(tau/2) - theta(tau), supported in [3/4, 8/3], and
//! chi = theta. The sum chi(2^-J tau) + sum_{j>=J} phi(2^-j tau) telescopes to 1.

use crate::error::{Error, Result};
use crate::fft::Band;
use crate::field::{forward_pair, inverse_pair, Field, ScalarField};
use crate::grid::Grid;
use crate::quadrature::GaussLegendre;
use crate::spectral::lp_norm_scalar;
use std::f64::consts::PI;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn bump_integral(a: f64, b: f64) -> f64 {
    GaussLegendre::cached(24).integrate_composite(a, b, 12, bump)
}

fn bump_mass() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| bump_integral(-1.0, 1.0))
}

/// Smooth monotone step on [0, 1]: 0 at s <= 0, 1 at s >= 1.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else if s <= 0.5 {
        bump_integral(-1.0, 2.0 * s - 1.0) / bump_mass()
    } else {
        1.0 - bump_integral(2.0 * s - 1.0, 1.0) / bump_mass()
    }
}

/// Low-frequency cutoff: 1 on [0, 3/4], 0 on [4/3, inf).
pub fn theta(tau: f64) -> f64 {
    1.0 - smooth_step((tau - 0.75) / (4.0 / 3.0 - 0.75))
}

/// Annulus profile supported in [3/4, 8/3].
pub fn phi_profile(tau: f64) -> f64 {
    theta(0.5 * tau) - theta(tau)
}

pub fn chi_profile(tau: f64) -> f64 {
    theta(tau)
}

/// Dyadic blocks resolvable on a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicBank {
    j_min: i32,
    j_max: i32,
}

impl DyadicBank {
    /// Blocks between the lowest nonzero frequency 2 pi / L and the grid corner
    /// sqrt(3) pi n / L. The low block chi(2^-j_min |xi|) then holds only the mean.
    pub fn for_grid(grid: Grid) -> Self {
        let lowest = 2.0 * PI / grid.length();
        let j_min = (0.75 * lowest).log2().floor() as i32;
        let corner = 3f64.sqrt() * grid.xi_max();
        let j_max = (4.0 / 3.0 * corner).log2().floor() as i32;
        DyadicBank { j_min, j_max }
    }

    pub fn with_range(j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::InvalidArgument(format!("empty block range [{j_min}, {j_max}]")));
        }
        Ok(DyadicBank { j_min, j_max })
    }

    pub fn j_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn phi(&self, tau: f64) -> f64 {
        phi_profile(tau)
    }

    pub fn chi(&self, tau: f64) -> f64 {
        chi_profile(tau)
    }

    pub fn block_weight(&self, j: i32, xi: f64) -> f64 {
        phi_profile(xi * 2f64.powi(-j))
    }

    pub fn low_weight(&self, xi: f64) -> f64 {
        chi_profile(xi * 2f64.powi(-self.j_min))
    }

    fn check(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::BlockOutOfRange { j, min: self.j_min, max: self.j_max });
        }
        Ok(())
    }

    /// Multiplier values indexed by integer |k|^2 on the grid, cached.
    fn table(&self, grid: Grid, block: Option<i32>) -> Arc<Vec<f64>> {
        type Key = (usize, u64, Option<i32>, i32);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<f64>>>>> = OnceLock::new();
        let key = (grid.n(), grid.length().to_bits(), block, self.j_min);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().unwrap().get(&key) {
            return t.clone();
        }
        let half = grid.n() / 2;
        let max_k2 = 3 * half * half;
        let table: Vec<f64> = (0..=max_k2)
            .into_par_iter()
            .map(|k2| {
                let xi = 2.0 * PI * (k2 as f64).sqrt() / grid.length();
                match block {
                    Some(j) => self.block_weight(j, xi),
                    None => self.low_weight(xi),
                }
            })
            .collect();
        let table = Arc::new(table);
        cache.lock().unwrap().insert(key, table.clone());
        table
    }
}

fn apply_table(spec: &[crate::fft::C64], grid: Grid, table: &[f64]) -> Vec<crate::fft::C64> {
    spec.iter().enumerate().map(|(i, z)| z * table[grid.k_sq(i) as usize]).collect()
}

/// Block j of f: Fourier multiplier phi(2^-j |xi|).
pub fn dyadic_project(f: &ScalarField, j: i32, bank: &DyadicBank) -> Result<ScalarField> {
    f.check_finite()?;
    bank.check(j)?;
    let g = f.grid();
    let spec = forward_pair(f.values(), None, g, Band::Full).0;
    let out = apply_table(&spec, g, &bank.table(g, Some(j)));
    ScalarField::from_values(g, inverse_pair(&out, None, g, Band::Full).0)
}

/// Low block: multiplier chi(2^-j_min |xi|).
pub fn low_project(f: &ScalarField, bank: &DyadicBank) -> Result<ScalarField> {
    f.check_finite()?;
    let g = f.grid();
    let spec = forward_pair(f.values(), None, g, Band::Full).0;
    let out = apply_table(&spec, g, &bank.table(g, None));
    ScalarField::from_values(g, inverse_pair(&out, None, g, Band::Full).0)
}

/// Block norms ||Delta_j f||_{L^p} for every j in the bank range.
pub fn block_norms(f: &Field, p: f64, bank: &DyadicBank) -> Result<Vec<(i32, f64)>> {
    let comps: Vec<&ScalarField> = match f {
        Field::Scalar(s) => vec![s],
        Field::Vector(v) => v.components().iter().collect(),
    };
    for c in &comps {
        c.check_finite()?;
    }
    let g = comps[0].grid();
    let specs: Vec<_> = comps.iter().map(|c| forward_pair(c.values(), None, g, Band::Full).0).collect();
    let (j0, j1) = bank.j_range();
    let mut out = Vec::new();
    for j in j0..=j1 {
        let table = bank.table(g, Some(j));
        let blocks: Vec<Vec<f64>> =
            specs.iter().map(|s| inverse_pair(&apply_table(s, g, &table), None, g, Band::Full).0).collect();
        let mag: Vec<f64> = if blocks.len() == 1 {
            blocks[0].clone()
        } else {
            (0..g.len()).map(|i| blocks.iter().map(|b| b[i] * b[i]).sum::<f64>().sqrt()).collect()
        };
        out.push((j, lp_norm_scalar(&ScalarField::from_values_unchecked(g, mag), p)?));
    }
    Ok(out)
}

/// Homogeneous Besov norm over the resolvable blocks:
/// l^r over j of 2^{js} ||Delta_j f||_{L^p}.
pub fn besov_norm(f: &Field, s: f64, p: f64, r: f64, bank: &DyadicBank) -> Result<f64> {
    if p.is_nan() || r.is_nan() || p < 1.0 || r < 1.0 {
        return Err(Error::InvalidArgument(format!("Besov indices p = {p}, r = {r} must be >= 1")));
    }
    let terms: Vec<f64> = block_norms(f, p, bank)?.into_iter().map(|(j, v)| 2f64.powf(j as f64 * s) * v).collect();
    Ok(if r.is_infinite() {
        terms.iter().fold(0.0, |m, &t| m.max(t))
    } else {
        terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    /// (xi xi^T / |xi|^2) phi(|xi|), measured with the pointwise operator norm.
    Projector,
    /// phi(|xi|) itself.
    Identity,
}

#[inline]
fn sphj0_d1_over_z(z: f64) -> f64 {
    // j0'(z) / z
    if z < 1e-2 {
        let z2 = z * z;
        -1.0 / 3.0 + z2 / 30.0 - z2 * z2 / 840.0
    } else {
        (z * z.cos() - z.sin()) / (z * z * z)
    }
}

#[inline]
fn sphj0_d2(z: f64) -> f64 {
    if z < 1e-2 {
        let z2 = z * z;
        -1.0 / 3.0 + z2 / 10.0 - z2 * z2 / 168.0
    } else {
        ((2.0 - z * z) * z.sin() - 2.0 * z * z.cos()) / (z * z * z)
    }
}

#[inline]
fn sphj0(z: f64) -> f64 {
    if z < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Weighted nodes of a composite rule across [3/4, 8/3] fine enough to
/// resolve j0(rho r) for r up to `r_max`; weights include phi / (2 pi^2).
fn radial_nodes(r_max: f64) -> Vec<(f64, f64)> {
    let (a, b) = (0.75, 8.0 / 3.0);
    let panels = ((r_max * (b - a) / PI).ceil() as usize).max(1) + 4;
    let gl = GaussLegendre::cached(8);
    let w = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * 8);
    for p in 0..panels {
        let (lo, h) = (a + p as f64 * w, 0.5 * w);
        for (&x, &wt) in gl.nodes.iter().zip(&gl.weights) {
            let rho = lo + h + h * x;
            out.push((rho, wt * h * phi_profile(rho) / (2.0 * PI * PI)));
        }
    }
    out
}

/// L^1 norm of the inverse Fourier transform of a radial symbol built on phi.
/// The radial integral runs to r = 4 quad_n on panels of width 1/4.
pub fn inverse_transform_l1(symbol: Symbol, quad_n: usize) -> f64 {
    let r_max = 4.0 * quad_n as f64;
    let nodes = radial_nodes(r_max);
    let rule = GaussLegendre::cached(8);
    rule.integrate_composite(0.0, r_max, 16 * quad_n, |r| {
        let (mut g2, mut g1r) = (0.0, 0.0);
        for &(rho, w) in &nodes {
            let z = rho * r;
            g2 += w * rho * rho * sphj0_d2(z);
            g1r += w * rho * rho * sphj0_d1_over_z(z);
        }
        let pointwise = match symbol {
            Symbol::Projector => g2.abs().max(g1r.abs()),
            // -Delta G = -(G'' + 2 G'/r)
            Symbol::Identity => (g2 + 2.0 * g1r).abs(),
        };
        4.0 * PI * r * r * pointwise
    })
}

/// Oracle for the identity symbol: direct radial transform of phi, with an
/// Simpson rule on a uniform r grid.
pub fn identity_l1_direct(quad_n: usize) -> f64 {
    let r_max = 4.0 * quad_n as f64;
    let nodes = radial_nodes(r_max);
    let m = 64 * quad_n;
    let h = r_max / m as f64;
    let f = |r: f64| {
        let g: f64 = nodes.iter().map(|&(rho, w)| w * rho * rho * sphj0(rho * r)).sum();
        4.0 * PI * r * r * g.abs()
    };
    let mut acc = f(0.0) + f(r_max);
    for i in 1..m {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Result of the c-bar-star refinement study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CbarStar {
    pub coarse: f64,
    pub fine: f64,
    pub relative_change: f64,
}

/// L^1 norm of F^{-1}[(xi xi^T/|xi|^2) phi(|xi|)] with quad_n and 2 quad_n nodes.
/// More than 1% change between the two is reported as unconverged.
pub fn cbar_star(_bank: &DyadicBank, quad_n: usize) -> Result<CbarStar> {
    if quad_n < 4 {
        return Err(Error::InvalidArgument("quad_n must be at least 4".into()));
    }
    let coarse = inverse_transform_l1(Symbol::Projector, quad_n);
    let fine = inverse_transform_l1(Symbol::Projector, 2 * quad_n);
    let relative_change = (fine - coarse).abs() / fine.abs();
    if !(relative_change <= 0.01) {
        return Err(Error::Unconverged(format!("c-bar-star changed by {relative_change:.3e} ({coarse} -> {fine})")));
    }
    Ok(CbarStar { coarse, fine, relative_change })
}
