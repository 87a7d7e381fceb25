use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Uniform periodic grid on the cube [0, L)^3 with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two >= 8")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("L = {length} must be positive")));
        }
        Ok(Grid { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of nodes, n^3.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        let dx = self.dx();
        dx * dx * dx
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Signed integer frequency stored at FFT index `i`. The Nyquist index maps to +n/2.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Physical frequency 2 pi k / L at FFT index `i`.
    pub fn xi(&self, i: usize) -> f64 {
        2.0 * PI * self.wavenumber(i) as f64 / self.length
    }

    /// Nyquist frequency pi n / L.
    pub fn xi_max(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Largest integer frequency kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    #[inline]
    pub fn index(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    /// Index of the mirrored frequency -k along one axis.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Squared integer radius |k|^2 at flat index `idx`.
    pub fn k_sq(&self, idx: usize) -> i64 {
        let n = self.n;
        let (i0, i1, i2) = (idx / (n * n), (idx / n) % n, idx % n);
        let (a, b, c) = (self.wavenumber(i0), self.wavenumber(i1), self.wavenumber(i2));
        a * a + b * b + c * c
    }
}
