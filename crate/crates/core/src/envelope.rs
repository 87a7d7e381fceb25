//! Toy collapse model and the dyadic envelope schedule for ||a(t)||_inf.

use crate::error::{Error, Result};
use crate::ode::{self, Tolerances};
use crate::quadrature::GaussLegendre;

/// Plateau bound after the collapse phase.
pub const PLATEAU: f64 = 4e4;

/// Closed form of f' + gamma f^2 = 0 with f(0) = delta^-alpha.
pub fn toy_model(delta: f64, alpha: f64, gamma: f64, t: f64) -> f64 {
    1.0 / (delta.powf(alpha) + gamma * t)
}

/// The same initial value problem solved numerically, at each time in `times`
/// (sorted, nonnegative).
pub fn toy_model_ode(delta: f64, alpha: f64, gamma: f64, times: &[f64]) -> Result<Vec<f64>> {
    let f0 = delta.powf(-alpha);
    // integrate ln f to keep the relative error control uniform: (ln f)' = -gamma f
    let ys = ode::integrate(
        |_, y, d| d[0] = -gamma * y[0].exp(),
        0.0,
        &[f0.ln()],
        times,
        Tolerances { rtol: 1e-14, atol: 1e-15, max_steps: 10_000_000 },
    )?;
    Ok(ys.into_iter().map(|y| y[0].exp()).collect())
}

/// Thresholds and dyadic times of the collapse envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSchedule {
    pub delta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// delta^-alpha in [2^n0, 2^(n0+1)).
    pub n0: i32,
    /// t_0 = 0, t_1, ..., t_{n0-14}; only t_0 when n0 < 15.
    pub t: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub beta: f64,
    /// delta < 2^(-15/alpha).
    pub in_regime: bool,
}

/// Floor of log2(delta^-alpha), snapping values within 1e-12 of an integer.
fn dyadic_exponent(delta: f64, alpha: f64) -> i32 {
    let e = alpha * (-delta.log2());
    let r = e.round();
    if (e - r).abs() < 1e-12 * r.abs().max(1.0) {
        r as i32
    } else {
        e.floor() as i32
    }
}

pub fn envelope_schedule(delta: f64, alpha: f64, gamma: f64, epsilon: f64) -> Result<EnvelopeSchedule> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} outside (0, 1]")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) || !(gamma >= 1.0 && gamma.is_finite()) || !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("alpha > 0, gamma >= 1 and epsilon > 0 required".into()));
    }
    let n0 = dyadic_exponent(delta, alpha);
    let c = 7.0 / (8.0 * gamma);
    let mut t = vec![0.0];
    let mut acc = 0.0;
    for j in 1..=(n0 - 14).max(0) {
        acc += (-(n0 + 1 - j) as f64).exp2();
        t.push(c * acc);
    }
    let t0 = if n0 >= 15 { c * ((-14.0f64).exp2() - (-n0 as f64).exp2()) } else { 0.0 };
    let small = epsilon * delta.powf(1.0 - 0.75 * alpha);
    Ok(EnvelopeSchedule {
        delta,
        alpha,
        gamma,
        epsilon,
        n0,
        t,
        t0,
        t1: 2.0 / gamma * (1.0 / small).ln(),
        t2: small.powi(-2),
        beta: 1.0 - 0.75 * alpha * (1.0 + 1.0 / gamma),
        in_regime: alpha * (-delta.log2()) > 15.0,
    })
}

impl EnvelopeSchedule {
    /// Number of collapse intervals, n0 - 14 (zero below the regime).
    pub fn intervals(&self) -> usize {
        self.t.len() - 1
    }

    /// Time at which the L^6 norm takes over from L^inf in the decay analysis.
    pub fn l6_switch_time(&self) -> f64 {
        6.0 * (2.0 + self.alpha) * (1.0 / self.delta).ln()
    }

    /// Value of the envelope at the start of interval j (1-based).
    pub fn interval_start_value(&self, j: usize) -> f64 {
        4.0 * (1.0 + ((self.n0 + 1 - j as i32) as f64).exp2())
    }

    /// C (e^{-gamma t/2} + eps delta^(1-3 alpha/4)): shape between T0 and T1,
    /// with an unspecified constant.
    pub fn decay_shape(&self, c: f64, t: f64) -> f64 {
        c * ((-0.5 * self.gamma * t).exp() + self.epsilon * self.delta.powf(1.0 - 0.75 * self.alpha))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Inside [t_{j-1}, t_j].
    Collapse(usize),
    /// After T0, below T1.
    Plateau,
    /// At or after T1.
    SmallAmplitude,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeValue {
    pub value: f64,
    pub phase: Phase,
}

/// Piecewise bound on ||a(t)||_inf. Each collapse interval is closed on the
/// left; the last one also contains T0, so the plateau starts after T0.
pub fn envelope_value(s: &EnvelopeSchedule, t: f64) -> EnvelopeValue {
    let m = s.intervals();
    if m > 0 && t <= s.t0 {
        let t = t.max(0.0);
        let j = (1..=m).find(|&j| t < s.t[j]).unwrap_or(m);
        let v = 1.0 / (1.0 / s.interval_start_value(j) + s.gamma * (t - s.t[j - 1]));
        return EnvelopeValue { value: v, phase: Phase::Collapse(j) };
    }
    let phase = if t >= s.t1 { Phase::SmallAmplitude } else { Phase::Plateau };
    EnvelopeValue { value: PLATEAU, phase }
}

/// Per-interval integral of the envelope: quadrature and the closed form
/// (1/gamma) ln(1 + gamma (t_j - t_{j-1}) v_j).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalBudget {
    pub j: usize,
    pub quadrature: f64,
    pub analytic: f64,
}

pub fn interval_budgets(s: &EnvelopeSchedule) -> Vec<IntervalBudget> {
    let gl = GaussLegendre::cached(24);
    (1..=s.intervals())
        .map(|j| {
            let (a, b) = (s.t[j - 1], s.t[j]);
            let v = s.interval_start_value(j);
            // the reciprocal varies by a factor ~4.5 over the interval
            let quadrature = gl.integrate_composite(a, b, 8, |t| 1.0 / (1.0 / v + s.gamma * (t - a)));
            IntervalBudget { j, quadrature, analytic: (s.gamma * (b - a) * v).ln_1p() / s.gamma }
        })
        .collect()
}

/// Integral of the envelope over [0, T0] by quadrature.
pub fn envelope_l1(s: &EnvelopeSchedule) -> f64 {
    interval_budgets(s).iter().map(|b| b.quadrature).sum()
}

/// 3 alpha ln(1/delta) / gamma.
pub fn l1_bound(s: &EnvelopeSchedule) -> f64 {
    3.0 * s.alpha * (1.0 / s.delta).ln() / s.gamma
}

/// 2 (n0 - 14) / gamma.
pub fn budget_sum_bound(s: &EnvelopeSchedule) -> f64 {
    2.0 * s.intervals() as f64 / s.gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta_for(exponent: f64, alpha: f64) -> f64 {
        (-exponent / alpha).exp2()
    }

    #[test]
    fn toy_closed_form_points() {
        assert_eq!(toy_model(0.5, 1.0, 1.0, 0.0), 2.0);
        assert!((toy_model(0.1, 1.0, 2.0, 0.45) - 1.0).abs() < 1e-15);
        assert!((toy_model(0.5, 1.0, 1.0, 1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn n15_schedule() {
        let s = envelope_schedule(delta_for(15.0, 1.0), 1.0, 1.0, 0.1).unwrap();
        assert_eq!(s.n0, 15);
        assert_eq!(s.intervals(), 1);
        assert!((s.t0 - 7.0 * (-18.0f64).exp2()).abs() < 1e-15);
        assert_eq!(s.t[1], s.t0);
        assert!(!s.in_regime);
        let v0 = envelope_value(&s, 0.0);
        assert_eq!(v0.value, 131076.0);
        assert_eq!(v0.phase, Phase::Collapse(1));
        let at_t0 = envelope_value(&s, s.t0).value;
        assert!(at_t0 <= 0.9 * 32768.0, "{at_t0}");
        assert_eq!(envelope_value(&s, s.t0 * 1.0001).phase, Phase::Plateau);
    }

    #[test]
    fn thresholds_arithmetic() {
        // delta^(1 - 3 alpha/4) = 0.5 with alpha = 1
        let s = envelope_schedule(1.0 / 16.0, 1.0, 1.0, 0.1).unwrap();
        assert!((s.t1 - 2.0 * 20f64.ln()).abs() < 1e-12);
        assert!((s.t2 - 400.0).abs() < 1e-9);
    }

    #[test]
    fn budgets_match_closed_form() {
        let s = envelope_schedule(delta_for(22.5, 1.5), 1.5, 1.4, 0.1).unwrap();
        assert_eq!(s.n0, 22);
        for b in interval_budgets(&s) {
            assert!((b.quadrature - b.analytic).abs() < 1e-12 * b.analytic, "{b:?}");
        }
        assert!(envelope_l1(&s) <= l1_bound(&s));
        assert!(envelope_l1(&s) <= budget_sum_bound(&s));
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(envelope_schedule(0.0, 1.0, 1.0, 0.1).is_err());
        assert!(envelope_schedule(1.5, 1.0, 1.0, 0.1).is_err());
    }
}
