//! Three-dimensional complex FFT on n^3 row-major arrays.
//!
//! The forward transform carries the 1/n^3 factor, so coefficients are the
//! Fourier-series amplitudes of the trigonometric interpolant. Strided axes
//! are processed by gathering a batch of lines into a contiguous buffer.
//! `Band::Cube(kc)` skips lines whose spectrum is known to vanish outside
//! |k_i| <= kc.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub type C64 = Complex64;

const BATCH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    Full,
    /// Only integer frequencies with |k_i| <= kc along every axis are populated.
    Cube(usize),
}

pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

#[derive(Clone, Copy)]
struct SharedPtr(*mut C64);
unsafe impl Send for SharedPtr {}
unsafe impl Sync for SharedPtr {}
impl SharedPtr {
    fn get(self) -> *mut C64 {
        self.0
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Fft3 { n, fwd, inv, scratch_len }
    }

    /// Shared plan for size n, built on first use.
    pub fn cached(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry(n).or_insert_with(|| Arc::new(Fft3::new(n))).clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// FFT indices kept along one axis.
    pub fn kept(&self, band: Band) -> Vec<usize> {
        let n = self.n;
        match band {
            Band::Cube(kc) if 2 * kc + 1 < n => (0..=kc).chain(n - kc..n).collect(),
            _ => (0..n).collect(),
        }
    }

    /// Unscaled forward transform. With a cube band only coefficients inside
    /// the cube are valid; the rest hold partial sums.
    pub fn forward_unscaled(&self, data: &mut [C64], band: Band) {
        assert_eq!(data.len(), self.n * self.n * self.n);
        let kept = self.kept(band);
        self.contiguous(data, &self.fwd);
        self.axis1(data, &kept, &self.fwd);
        self.axis0(data, &kept, &kept, &self.fwd);
    }

    /// Physical samples to coefficients, scaled by 1/n^3. With a cube band,
    /// coefficients outside the cube are set to zero.
    pub fn forward(&self, data: &mut [C64], band: Band) {
        let n = self.n;
        let kept = self.kept(band);
        self.forward_unscaled(data, band);
        let scale = 1.0 / (n * n * n) as f64;
        if kept.len() == n {
            data.par_iter_mut().for_each(|z| *z *= scale);
        } else {
            let mut mask = vec![false; n];
            for &k in &kept {
                mask[k] = true;
            }
            data.par_chunks_mut(n * n).enumerate().for_each(|(i0, slab)| {
                for i1 in 0..n {
                    let row = &mut slab[i1 * n..(i1 + 1) * n];
                    for (i2, z) in row.iter_mut().enumerate() {
                        if mask[i0] && mask[i1] && mask[i2] {
                            *z *= scale;
                        } else {
                            *z = C64::new(0.0, 0.0);
                        }
                    }
                }
            });
        }
    }

    /// Coefficients to physical samples (no scaling). With a cube band the
    /// input must vanish outside the cube.
    pub fn inverse(&self, data: &mut [C64], band: Band) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        let kept = self.kept(band);
        self.axis0(data, &kept, &kept, &self.inv);
        self.axis1(data, &kept, &self.inv);
        self.contiguous(data, &self.inv);
    }

    fn contiguous(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        data.par_chunks_mut(n * n).for_each_init(
            || vec![C64::new(0.0, 0.0); self.scratch_len],
            |scratch, slab| plan.process_with_scratch(slab, scratch),
        );
    }

    /// Transform along the middle axis for the given last-axis indices.
    fn axis1(&self, data: &mut [C64], lines: &[usize], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        data.par_chunks_mut(n * n).for_each_init(
            || (vec![C64::new(0.0, 0.0); n * BATCH], vec![C64::new(0.0, 0.0); self.scratch_len]),
            |(buf, scratch), slab| {
                for group in lines.chunks(BATCH) {
                    let m = group.len();
                    for (b, &i2) in group.iter().enumerate() {
                        let line = &mut buf[b * n..(b + 1) * n];
                        for (i1, z) in line.iter_mut().enumerate() {
                            *z = slab[i1 * n + i2];
                        }
                    }
                    plan.process_with_scratch(&mut buf[..m * n], scratch);
                    for (b, &i2) in group.iter().enumerate() {
                        let line = &buf[b * n..(b + 1) * n];
                        for (i1, z) in line.iter().enumerate() {
                            slab[i1 * n + i2] = *z;
                        }
                    }
                }
            },
        );
    }

    /// Transform along the slowest axis for lines (i1, i2) in lines1 x lines2.
    fn axis0(&self, data: &mut [C64], lines1: &[usize], lines2: &[usize], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let nn = n * n;
        let ptr = SharedPtr(data.as_mut_ptr());
        lines1.par_iter().for_each_init(
            || (vec![C64::new(0.0, 0.0); n * BATCH], vec![C64::new(0.0, 0.0); self.scratch_len]),
            |(buf, scratch), &i1| {
                let base = ptr.get();
                for group in lines2.chunks(BATCH) {
                    let m = group.len();
                    for (b, &i2) in group.iter().enumerate() {
                        let line = &mut buf[b * n..(b + 1) * n];
                        for (i0, z) in line.iter_mut().enumerate() {
                            // SAFETY: each task owns the column set with its own i1.
                            *z = unsafe { *base.add(i0 * nn + i1 * n + i2) };
                        }
                    }
                    plan.process_with_scratch(&mut buf[..m * n], scratch);
                    for (b, &i2) in group.iter().enumerate() {
                        let line = &buf[b * n..(b + 1) * n];
                        for (i0, z) in line.iter().enumerate() {
                            unsafe { *base.add(i0 * nn + i1 * n + i2) = *z };
                        }
                    }
                }
            },
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(data: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n * n * n];
        for k0 in 0..n {
            for k1 in 0..n {
                for k2 in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for x0 in 0..n {
                        for x1 in 0..n {
                            for x2 in 0..n {
                                let ph = -2.0 * PI * ((k0 * x0 + k1 * x1 + k2 * x2) % n) as f64 / n as f64;
                                acc += data[(x0 * n + x1) * n + x2] * C64::from_polar(1.0, ph);
                            }
                        }
                    }
                    out[(k0 * n + k1) * n + k2] = acc / (n * n * n) as f64;
                }
            }
        }
        out
    }

    fn sample(n: usize) -> Vec<C64> {
        (0..n * n * n)
            .map(|i| C64::new(((i * 37 % 101) as f64).sin(), ((i * 13 % 29) as f64).cos()))
            .collect()
    }

    #[test]
    fn forward_matches_direct_sum() {
        let n = 8;
        let x = sample(n);
        let want = naive_dft(&x, n);
        let mut got = x.clone();
        Fft3::new(n).forward(&mut got, Band::Full);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn round_trip() {
        let n = 16;
        let x = sample(n);
        let f = Fft3::new(n);
        let mut y = x.clone();
        f.forward(&mut y, Band::Full);
        f.inverse(&mut y, Band::Full);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pruned_matches_full_inside_band() {
        let n = 16;
        let f = Fft3::new(n);
        let kc = 5;
        let kept = f.kept(Band::Cube(kc));
        let mut spec = vec![C64::new(0.0, 0.0); n * n * n];
        for &a in &kept {
            for &b in &kept {
                for &c in &kept {
                    let i = (a * n + b) * n + c;
                    spec[i] = C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
                }
            }
        }
        let mut full = spec.clone();
        f.inverse(&mut full, Band::Full);
        let mut pruned = spec.clone();
        f.inverse(&mut pruned, Band::Cube(kc));
        for (a, b) in full.iter().zip(&pruned) {
            assert!((a - b).norm() < 1e-12);
        }
        let mut back_full = full.clone();
        f.forward(&mut back_full, Band::Full);
        let mut back = full;
        f.forward(&mut back, Band::Cube(kc));
        for (i, (a, b)) in back_full.iter().zip(&back).enumerate() {
            if spec[i].norm() > 0.0 {
                assert!((a - b).norm() < 1e-12);
            } else {
                assert_eq!(b.norm(), 0.0);
            }
        }
    }
}
