//! Spectral differential operators and L^p norms.
//!
//! Odd-order derivatives annihilate the Nyquist mode (the derivative of the
//! interpolant cos(pi n x / L) vanishes at every node); even-order ones keep it.

use crate::error::{Error, Result};
use crate::fft::{Band, C64};
use crate::field::{forward_pair, inverse_pair, Field, ScalarField, VectorField};
use crate::grid::Grid;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeKind {
    Grad,
    Div,
    Curl,
    Laplacian,
    /// (-Delta)^{-1} on the mean-free part.
    InvLaplacian,
    /// grad (-Delta)^{-1} on the mean-free part.
    GradInvLaplacian,
}

/// Per-axis frequency tables for one grid.
#[derive(Clone, Debug)]
pub struct Wavenumbers {
    pub n: usize,
    /// Frequency for odd derivatives (Nyquist zeroed).
    pub odd: Vec<f64>,
    /// Frequency for even derivatives.
    pub even: Vec<f64>,
}

impl Wavenumbers {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let even: Vec<f64> = (0..n).map(|i| grid.xi(i)).collect();
        let odd = (0..n).map(|i| if grid.is_nyquist(i) { 0.0 } else { grid.xi(i) }).collect();
        Wavenumbers { n, odd, even }
    }

    #[inline]
    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    #[inline]
    pub fn odd3(&self, idx: usize) -> [f64; 3] {
        let (a, b, c) = self.split(idx);
        [self.odd[a], self.odd[b], self.odd[c]]
    }

    #[inline]
    pub fn xi_sq(&self, idx: usize) -> f64 {
        let (a, b, c) = self.split(idx);
        self.even[a] * self.even[a] + self.even[b] * self.even[b] + self.even[c] * self.even[c]
    }
}

#[inline]
fn times_i(z: C64, s: f64) -> C64 {
    C64::new(-z.im * s, z.re * s)
}

fn spectra_of(v: &VectorField) -> [Vec<C64>; 3] {
    let g = v.grid();
    let [a, b, c] = v.components();
    let (sa, sb) = forward_pair(a.values(), Some(b.values()), g, Band::Full);
    let (sc, _) = forward_pair(c.values(), None, g, Band::Full);
    [sa, sb, sc]
}

fn scalar_spectrum(f: &ScalarField) -> Vec<C64> {
    forward_pair(f.values(), None, f.grid(), Band::Full).0
}

fn fields_of(grid: Grid, s: [Vec<C64>; 3]) -> VectorField {
    let [a, b, c] = s;
    let (fa, fb) = inverse_pair(&a, Some(&b), grid, Band::Full);
    let (fc, _) = inverse_pair(&c, None, grid, Band::Full);
    VectorField::new([
        ScalarField::from_values_unchecked(grid, fa),
        ScalarField::from_values_unchecked(grid, fb),
        ScalarField::from_values_unchecked(grid, fc),
    ])
    .unwrap()
}

fn field_of(grid: Grid, s: &[C64]) -> ScalarField {
    ScalarField::from_values_unchecked(grid, inverse_pair(s, None, grid, Band::Full).0)
}

pub fn grad(f: &ScalarField) -> VectorField {
    let g = f.grid();
    let wk = Wavenumbers::new(g);
    let s = scalar_spectrum(f);
    let mut out = [s.clone(), s.clone(), s];
    for (d, comp) in out.iter_mut().enumerate() {
        comp.par_iter_mut().enumerate().for_each(|(i, z)| *z = times_i(*z, wk.odd3(i)[d]));
    }
    fields_of(g, out)
}

pub fn div(v: &VectorField) -> ScalarField {
    let g = v.grid();
    let wk = Wavenumbers::new(g);
    let [a, b, c] = spectra_of(v);
    let s: Vec<C64> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let k = wk.odd3(i);
            times_i(a[i], k[0]) + times_i(b[i], k[1]) + times_i(c[i], k[2])
        })
        .collect();
    field_of(g, &s)
}

pub fn curl(v: &VectorField) -> VectorField {
    let g = v.grid();
    let wk = Wavenumbers::new(g);
    let [a, b, c] = spectra_of(v);
    let mut out = [vec![C64::new(0.0, 0.0); g.len()], vec![C64::new(0.0, 0.0); g.len()], vec![C64::new(0.0, 0.0); g.len()]];
    for (d, comp) in out.iter_mut().enumerate() {
        comp.par_iter_mut().enumerate().for_each(|(i, z)| {
            let k = wk.odd3(i);
            *z = match d {
                0 => times_i(c[i], k[1]) - times_i(b[i], k[2]),
                1 => times_i(a[i], k[2]) - times_i(c[i], k[0]),
                _ => times_i(b[i], k[0]) - times_i(a[i], k[1]),
            };
        });
    }
    fields_of(g, out)
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let wk = Wavenumbers::new(g);
    let mut s = scalar_spectrum(f);
    s.par_iter_mut().enumerate().for_each(|(i, z)| *z *= -wk.xi_sq(i));
    field_of(g, &s)
}

pub fn vector_laplacian(v: &VectorField) -> VectorField {
    let [a, b, c] = v.components();
    VectorField::new([laplacian(a), laplacian(b), laplacian(c)]).unwrap()
}

pub fn inv_laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let wk = Wavenumbers::new(g);
    let mut s = scalar_spectrum(f);
    s.par_iter_mut().enumerate().for_each(|(i, z)| {
        let q = wk.xi_sq(i);
        *z = if q == 0.0 { C64::new(0.0, 0.0) } else { *z / q };
    });
    field_of(g, &s)
}

pub fn grad_inv_laplacian(f: &ScalarField) -> VectorField {
    let g = f.grid();
    let wk = Wavenumbers::new(g);
    let mut s = scalar_spectrum(f);
    s.par_iter_mut().enumerate().for_each(|(i, z)| {
        let q = wk.xi_sq(i);
        *z = if q == 0.0 { C64::new(0.0, 0.0) } else { *z / q };
    });
    let mut out = [s.clone(), s.clone(), s];
    for (d, comp) in out.iter_mut().enumerate() {
        comp.par_iter_mut().enumerate().for_each(|(i, z)| *z = times_i(*z, wk.odd3(i)[d]));
    }
    fields_of(g, out)
}

/// Velocity gradient as rows (d/dx_j u_i), i = component.
pub fn grad_vector(v: &VectorField) -> [VectorField; 3] {
    let [a, b, c] = v.components();
    [grad(a), grad(b), grad(c)]
}

/// Applies a spectral differential operator, validating the input first.
pub fn spectral_derivative(f: &Field, kind: DerivativeKind) -> Result<Field> {
    match f {
        Field::Scalar(s) => s.check_finite()?,
        Field::Vector(v) => v.check_finite()?,
    }
    let bad = |k: &str| Err(Error::InvalidArgument(format!("{kind:?} is not defined on a {k} field")));
    match (f, kind) {
        (Field::Scalar(s), DerivativeKind::Grad) => Ok(grad(s).into()),
        (Field::Scalar(s), DerivativeKind::Laplacian) => Ok(laplacian(s).into()),
        (Field::Scalar(s), DerivativeKind::InvLaplacian) => Ok(inv_laplacian(s).into()),
        (Field::Scalar(s), DerivativeKind::GradInvLaplacian) => Ok(grad_inv_laplacian(s).into()),
        (Field::Vector(v), DerivativeKind::Div) => Ok(div(v).into()),
        (Field::Vector(v), DerivativeKind::Curl) => Ok(curl(v).into()),
        (Field::Vector(v), DerivativeKind::Laplacian) => Ok(vector_laplacian(v).into()),
        (Field::Vector(v), DerivativeKind::InvLaplacian) => {
            let [a, b, c] = v.components();
            Ok(VectorField::new([inv_laplacian(a), inv_laplacian(b), inv_laplacian(c)])?.into())
        }
        (Field::Scalar(_), _) => bad("scalar"),
        (Field::Vector(_), _) => bad("vector"),
    }
}

fn power_sum(values: &[f64], p: f64) -> f64 {
    let ip = p as i32;
    if ip as f64 == p && (1..=8).contains(&ip) {
        values.iter().map(|v| v.abs().powi(ip)).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    }
}

/// (sum |f|^p dx^3)^{1/p}, or max |f| for p = infinity.
pub fn lp_norm_scalar(f: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must be >= 1")));
    }
    if p.is_infinite() {
        return Ok(f.values().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok((power_sum(f.values(), p) * f.grid().cell_volume()).powf(1.0 / p))
}

/// L^p norm; vector fields use the pointwise Euclidean magnitude.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    match f {
        Field::Scalar(s) => lp_norm_scalar(s, p),
        Field::Vector(v) => lp_norm_scalar(&v.magnitude(), p),
    }
}

pub fn lp_norm_vector(v: &VectorField, p: f64) -> Result<f64> {
    lp_norm_scalar(&v.magnitude(), p)
}

/// L^p norm of a matrix field with pointwise Frobenius magnitude.
pub fn lp_norm_matrix(m: &[VectorField; 3], p: f64) -> Result<f64> {
    let mags: Vec<ScalarField> = m.iter().map(|r| r.magnitude()).collect();
    let g = mags[0].grid();
    let vals = (0..g.len())
        .map(|i| (mags[0].values()[i].powi(2) + mags[1].values()[i].powi(2) + mags[2].values()[i].powi(2)).sqrt())
        .collect();
    lp_norm_scalar(&ScalarField::from_values_unchecked(g, vals), p)
}

/// Squared L^2 norm.
pub fn l2_sq(f: &ScalarField) -> f64 {
    f.values().iter().map(|v| v * v).sum::<f64>() * f.grid().cell_volume()
}

pub fn l2_sq_vector(v: &VectorField) -> f64 {
    v.components().iter().map(l2_sq).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn smooth_vector(g: Grid) -> VectorField {
        VectorField::from_fn(g, |x, y, z| {
            let t = 2.0 * PI;
            [
                (t * x).sin() * (t * 2.0 * y).cos() + (t * z).cos(),
                (t * 3.0 * z).sin() * (t * x).sin(),
                (t * (x + y)).cos() + 0.5 * (t * 2.0 * z).sin(),
            ]
        })
    }

    #[test]
    fn laplacian_of_sine() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        let l = laplacian(&f);
        let k2 = (2.0 * PI).powi(2);
        for (a, b) in l.values().iter().zip(f.values()) {
            assert!((a + k2 * b).abs() < 1e-10);
        }
    }

    #[test]
    fn div_curl_vanishes() {
        let g = Grid::new(16, 1.0).unwrap();
        let d = div(&curl(&smooth_vector(g)));
        assert!(lp_norm_scalar(&d, f64::INFINITY).unwrap() < 1e-12);
    }

    #[test]
    fn curl_grad_vanishes() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y, z| (2.0 * PI * x).sin() * (4.0 * PI * y).cos() + z * 0.0);
        let c = curl(&grad(&f));
        assert!(lp_norm_vector(&c, f64::INFINITY).unwrap() < 1e-12);
    }

    #[test]
    fn inverse_laplacian_pair() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y, z| (2.0 * PI * x).cos() * (2.0 * PI * y).sin() + (6.0 * PI * z).sin());
        let back = laplacian(&inv_laplacian(&f));
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn grad_inv_laplacian_matches_composition() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y, _| (2.0 * PI * x).cos() * (2.0 * PI * y).sin());
        let a = grad_inv_laplacian(&f);
        let b = grad(&inv_laplacian(&f));
        assert!(lp_norm_vector(&a.sub(&b).unwrap(), f64::INFINITY).unwrap() < 1e-13);
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = Grid::new(64, 1.0).unwrap();
        let s = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        assert!((lp_norm_scalar(&s, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let g2 = Grid::new(8, 2.0).unwrap();
        let c = ScalarField::constant(g2, -3.0);
        assert!((lp_norm_scalar(&c, 2.0).unwrap() - 3.0 * 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(lp_norm_scalar(&c, f64::INFINITY).unwrap(), 3.0);
        assert!(lp_norm_scalar(&c, 0.5).is_err());
    }

    #[test]
    fn derivative_dispatch_rejects_mismatch() {
        let g = Grid::new(8, 1.0).unwrap();
        let f: Field = ScalarField::zeros(g).into();
        assert!(spectral_derivative(&f, DerivativeKind::Curl).is_err());
        let mut v = vec![0.0; g.len()];
        v[3] = f64::INFINITY;
        let bad: Field = ScalarField::from_values_unchecked(g, v).into();
        assert!(spectral_derivative(&bad, DerivativeKind::Grad).is_err());
    }
}
