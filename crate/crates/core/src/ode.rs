//! Adaptive Dormand-Prince 5(4) integrator for small ODE systems.

use crate::error::{Error, Result};

// Butcher tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-12, atol: 1e-14, max_steps: 1_000_000 }
    }
}

/// Integrates y' = f(t, y) from (t0, y0) and returns y at each output time.
/// Output times must be nondecreasing and not before t0; steps are clipped
/// to land on them exactly.
pub fn integrate<F>(f: F, t0: f64, y0: &[f64], outputs: &[f64], tol: Tolerances) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let m = y0.len();
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidArgument("output times must be sorted and not precede t0".into()));
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; m]; 7];
    let mut tmp = vec![0.0; m];
    let mut y5 = vec![0.0; m];
    let mut h = f64::NAN;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(outputs.len());
    f(t, &y, &mut k[0]);

    for &target in outputs {
        if h.is_nan() {
            let span = (target - t).abs().max(1e-300);
            h = (span * 1e-3).max(1e-12 * span);
        }
        while t < target {
            if steps >= tol.max_steps {
                return Err(Error::Unconverged(format!("step limit reached at t = {t}")));
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..m {
                    let mut acc = y[i];
                    for (r, kr) in k.iter().enumerate().take(s) {
                        acc += step * A[s][r] * kr[i];
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * step, &tmp, &mut k[s]);
            }
            let mut err = 0.0f64;
            for i in 0..m {
                let mut hi = y[i];
                let mut lo = y[i];
                for s in 0..7 {
                    hi += step * B5[s] * k[s][i];
                    lo += step * B4[s] * k[s][i];
                }
                y5[i] = hi;
                let sc = tol.atol + tol.rtol * y[i].abs().max(hi.abs());
                err = err.max(((hi - lo) / sc).abs());
            }
            steps += 1;
            if !err.is_finite() {
                return Err(Error::Blowup { t });
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y5);
                // first-same-as-last: stage 7 was evaluated at the new point
                k.swap(0, 6);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                h = step * factor;
            }
            if h.abs() < 1e-15 * t.abs().max(1e-300) {
                return Err(Error::Unconverged(format!("step size underflow at t = {t}")));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let ts: Vec<f64> = (1..=10).map(|i| i as f64 * 0.3).collect();
        let ys = integrate(|_, y, d| d[0] = -2.0 * y[0], 0.0, &[1.0], &ts, Tolerances::default()).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - (-2.0 * t).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn harmonic_oscillator_keeps_phase() {
        let ys = integrate(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            &[std::f64::consts::TAU],
            Tolerances::default(),
        )
        .unwrap();
        assert!((ys[0][0] - 1.0).abs() < 1e-10 && ys[0][1].abs() < 1e-10);
    }

    #[test]
    fn output_at_start_returns_initial_value() {
        let ys = integrate(|_, _, d| d[0] = 1.0, 2.0, &[3.0], &[2.0, 2.0], Tolerances::default()).unwrap();
        assert_eq!(ys, vec![vec![3.0], vec![3.0]]);
    }

    #[test]
    fn rejects_unsorted_outputs() {
        assert!(integrate(|_, _, d| d[0] = 1.0, 0.0, &[0.0], &[1.0, 0.5], Tolerances::default()).is_err());
    }
}
