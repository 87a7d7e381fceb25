use crate::error::{Error, Result};
use crate::fft::{Band, Fft3, C64};
use crate::grid::Grid;
use rayon::prelude::*;

/// Real samples at the nodes of a grid, row-major (x slowest, z fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.len()] }
    }

    /// Wraps samples after checking length and finiteness.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        let f = ScalarField { grid, values };
        f.check_finite()?;
        Ok(f)
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    /// Samples `f(x, y, z)` at the grid nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let n = grid.n();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (i0, i1, i2) = (idx / (n * n), (idx / n) % n, idx % n);
                f(grid.coord(i0), grid.coord(i1), grid.coord(i2))
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sum of samples times the cell volume.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> ScalarField {
        let values = self.values.par_iter().map(|&v| f(v)).collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.par_iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }
}

/// Three scalar components on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        let g = components[0].grid;
        if components[1].grid != g || components[2].grid != g {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField { components: [ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3] + Sync) -> Self {
        let c0 = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[0]);
        let c1 = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[1]);
        let c2 = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[2]);
        VectorField { components: [c0, c1, c2] }
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField; 3] {
        &mut self.components
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.components
    }

    pub fn check_finite(&self) -> Result<()> {
        for c in &self.components {
            c.check_finite()?;
        }
        Ok(())
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let [a, b, c] = &self.components;
        let values = (0..a.values.len())
            .into_par_iter()
            .map(|i| (a.values[i] * a.values[i] + b.values[i] * b.values[i] + c.values[i] * c.values[i]).sqrt())
            .collect();
        ScalarField { grid: a.grid, values }
    }

    pub fn scale(&self, s: f64) -> VectorField {
        let [a, b, c] = &self.components;
        VectorField { components: [a.scale(s), b.scale(s), c.scale(s)] }
    }

    /// Multiplies every component by a scalar field pointwise.
    pub fn mul_scalar(&self, s: &ScalarField) -> Result<VectorField> {
        let [a, b, c] = &self.components;
        Ok(VectorField {
            components: [a.zip_map(s, |x, y| x * y)?, b.zip_map(s, |x, y| x * y)?, c.zip_map(s, |x, y| x * y)?],
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        let mut out = Vec::with_capacity(3);
        for d in 0..3 {
            out.push(self.components[d].zip_map(&other.components[d], |x, y| x - y)?);
        }
        let [a, b, c]: [ScalarField; 3] = out.try_into().unwrap();
        Ok(VectorField { components: [a, b, c] })
    }
}

/// Either kind of field, for operations accepting both.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Field {
    pub fn grid(&self) -> Grid {
        match self {
            Field::Scalar(f) => f.grid(),
            Field::Vector(v) => v.grid(),
        }
    }

    pub fn into_scalar(self) -> Option<ScalarField> {
        match self {
            Field::Scalar(f) => Some(f),
            Field::Vector(_) => None,
        }
    }

    pub fn into_vector(self) -> Option<VectorField> {
        match self {
            Field::Vector(v) => Some(v),
            Field::Scalar(_) => None,
        }
    }
}

impl From<ScalarField> for Field {
    fn from(f: ScalarField) -> Self {
        Field::Scalar(f)
    }
}

impl From<VectorField> for Field {
    fn from(v: VectorField) -> Self {
        Field::Vector(v)
    }
}

/// Fourier coefficients of a real field, forward-normalized by 1/n^3.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<C64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid) -> Self {
        Spectrum { grid, coeffs: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: coeffs.len() });
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn of(f: &ScalarField) -> Spectrum {
        let (a, _) = forward_pair(f.values(), None, f.grid(), Band::Full);
        Spectrum { grid: f.grid(), coeffs: a }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Real part of the inverse transform.
    pub fn to_field(&self) -> ScalarField {
        let (a, _) = inverse_pair(&self.coeffs, None, self.grid, Band::Full);
        ScalarField::from_values_unchecked(self.grid, a)
    }

    /// L^2 norm squared via Parseval: L^3 * sum |c_k|^2.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.volume()
    }
}

/// Transforms one or two real arrays with a single complex FFT.
pub fn forward_pair(a: &[f64], b: Option<&[f64]>, grid: Grid, band: Band) -> (Vec<C64>, Vec<C64>) {
    let fft = Fft3::cached(grid.n());
    let mut z: Vec<C64> = match b {
        Some(b) => a.par_iter().zip(b).map(|(&x, &y)| C64::new(x, y)).collect(),
        None => a.par_iter().map(|&x| C64::new(x, 0.0)).collect(),
    };
    fft.forward(&mut z, band);
    match b {
        None => (z, Vec::new()),
        Some(_) => split_packed(&z, grid),
    }
}

/// Splits Z = F + iG (both Hermitian) into F and G.
pub fn split_packed(z: &[C64], grid: Grid) -> (Vec<C64>, Vec<C64>) {
    let n = grid.n();
    let mut fa = vec![C64::new(0.0, 0.0); z.len()];
    let mut fb = vec![C64::new(0.0, 0.0); z.len()];
    fa.par_chunks_mut(n * n).zip(fb.par_chunks_mut(n * n)).enumerate().for_each(|(i0, (sa, sb))| {
        let m0 = grid.mirror(i0);
        for i1 in 0..n {
            let m1 = grid.mirror(i1);
            for i2 in 0..n {
                let zk = z[(i0 * n + i1) * n + i2];
                let zm = z[(m0 * n + m1) * n + grid.mirror(i2)].conj();
                let local = i1 * n + i2;
                sa[local] = (zk + zm) * 0.5;
                let d = zk - zm;
                sb[local] = C64::new(d.im * 0.5, -d.re * 0.5);
            }
        }
    });
    (fa, fb)
}

/// Inverse transform of one or two Hermitian spectra, returning real arrays.
pub fn inverse_pair(a: &[C64], b: Option<&[C64]>, grid: Grid, band: Band) -> (Vec<f64>, Vec<f64>) {
    let fft = Fft3::cached(grid.n());
    let mut z: Vec<C64> = match b {
        Some(b) => a.par_iter().zip(b).map(|(&x, &y)| C64::new(x.re - y.im, x.im + y.re)).collect(),
        None => a.to_vec(),
    };
    fft.inverse(&mut z, band);
    match b {
        Some(_) => z.par_iter().map(|c| (c.re, c.im)).unzip(),
        None => (z.par_iter().map(|c| c.re).collect(), Vec::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn packed_pair_matches_single_transforms() {
        let g = Grid::new(8, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y, z| (2.0 * PI * x).sin() + (4.0 * PI * y).cos() * z);
        let h = ScalarField::from_fn(g, |x, y, z| (x - 0.3).powi(2) + (2.0 * PI * z).cos() * y);
        let (a, b) = forward_pair(f.values(), Some(h.values()), g, Band::Full);
        let sa = Spectrum::of(&f);
        let sb = Spectrum::of(&h);
        for i in 0..g.len() {
            assert!((a[i] - sa.coeffs()[i]).norm() < 1e-14);
            assert!((b[i] - sb.coeffs()[i]).norm() < 1e-14);
        }
        let (ra, rb) = inverse_pair(&a, Some(&b), g, Band::Full);
        for i in 0..g.len() {
            assert!((ra[i] - f.values()[i]).abs() < 1e-13);
            assert!((rb[i] - h.values()[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn parseval() {
        let g = Grid::new(16, 2.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y, z| (x * y).sin() + z.exp());
        let direct: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        let spec = Spectrum::of(&f).energy();
        assert!((direct - spec).abs() / direct < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(8, 1.0).unwrap();
        let mut v = vec![0.0; g.len()];
        v[17] = f64::NAN;
        assert_eq!(ScalarField::from_values(g, v), Err(Error::NonFinite { index: 17 }));
    }
}
