//! Envelope comparison and threshold tables for observed ||a(t)|| series.

use crate::diagnostics::DiagnosticsRecord;
use crate::envelope::{envelope_value, EnvelopeSchedule, Phase};
use crate::error::{Error, Result};
use crate::fit::{fit_decay, DecayModel, FitResult};

/// Worst margin (envelope - observed) / envelope inside one phase.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMargin {
    /// Collapse interval index; 0 for the plateau.
    pub j: usize,
    pub worst_margin: f64,
    pub worst_t: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeReport {
    pub in_regime: bool,
    pub intervals: Vec<IntervalMargin>,
    /// First sample above the envelope: (t, observed, envelope).
    pub violation: Option<(f64, f64, f64)>,
    /// Reciprocal fit used outside the regime.
    pub fit: Option<FitResult>,
    pub passed: bool,
}

/// Early window used by the out-of-regime surrogate: [0, 0.1 / gamma].
pub fn surrogate_window(s: &EnvelopeSchedule) -> (f64, f64) {
    (0.0, 0.1 / s.gamma)
}

/// Compares ||a(t)||_inf samples with the envelope. In the regime any sample
/// above the bound fails; outside it the early series must follow the
/// reciprocal law with r^2 >= 0.95.
pub fn envelope_check(series: &[(f64, f64)], s: &EnvelopeSchedule) -> Result<EnvelopeReport> {
    let first = series.first().ok_or_else(|| Error::InvalidArgument("empty series".into()))?;
    if first.0.abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("series starts at t = {}, not 0", first.0)));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument("series times must increase".into()));
    }
    let mut intervals: Vec<IntervalMargin> = Vec::new();
    let mut violation = None;
    for &(t, obs) in series {
        let ev = envelope_value(s, t);
        let j = match ev.phase {
            Phase::Collapse(j) => j,
            Phase::Plateau | Phase::SmallAmplitude => 0,
        };
        let margin = (ev.value - obs) / ev.value;
        if margin < 0.0 && violation.is_none() {
            violation = Some((t, obs, ev.value));
        }
        match intervals.iter_mut().find(|m| m.j == j) {
            Some(m) => {
                m.samples += 1;
                if margin < m.worst_margin {
                    m.worst_margin = margin;
                    m.worst_t = t;
                }
            }
            None => intervals.push(IntervalMargin { j, worst_margin: margin, worst_t: t, samples: 1 }),
        }
    }
    if s.in_regime {
        let passed = violation.is_none();
        return Ok(EnvelopeReport { in_regime: true, intervals, violation, fit: None, passed });
    }
    let fit = fit_decay(series, surrogate_window(s), DecayModel::Reciprocal)?;
    let passed = fit.r_squared >= 0.95;
    Ok(EnvelopeReport { in_regime: false, intervals, violation, fit: Some(fit), passed })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdRow {
    pub name: &'static str,
    pub time: f64,
    /// False when the series ends before the threshold.
    pub reached: bool,
    pub linf_a: f64,
    pub l6_a: f64,
    pub l2_a: f64,
    /// Observed ||a||_inf over the shape C (e^{-gamma t/2} + eps delta^(1-3a/4)) with C = 1.
    pub shape_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdsReport {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub beta: f64,
    pub rows: Vec<ThresholdRow>,
}

fn interpolate(records: &[DiagnosticsRecord], t: f64, get: impl Fn(&DiagnosticsRecord) -> f64) -> Option<f64> {
    let k = records.iter().position(|r| r.t >= t)?;
    if k == 0 {
        return (records[0].t == t).then(|| get(&records[0]));
    }
    let (a, b) = (&records[k - 1], &records[k]);
    let w = (t - a.t) / (b.t - a.t);
    Some((1.0 - w) * get(a) + w * get(b))
}

/// Observed a-norms at T0, T1 and the L^6 switch time, by linear interpolation
/// of the record series.
pub fn thresholds_report(s: &EnvelopeSchedule, records: &[DiagnosticsRecord]) -> ThresholdsReport {
    let rows = [("T0", s.t0), ("T1", s.t1), ("L6_switch", s.l6_switch_time())]
        .into_iter()
        .map(|(name, time)| {
            let li = interpolate(records, time, |r| r.linf_a);
            ThresholdRow {
                name,
                time,
                reached: li.is_some(),
                linf_a: li.unwrap_or(f64::NAN),
                l6_a: interpolate(records, time, |r| r.l6_a).unwrap_or(f64::NAN),
                l2_a: interpolate(records, time, |r| r.l2_a).unwrap_or(f64::NAN),
                shape_ratio: li.map_or(f64::NAN, |v| v / s.decay_shape(1.0, time)),
            }
        })
        .collect();
    ThresholdsReport { t0: s.t0, t1: s.t1, t2: s.t2, beta: s.beta, rows }
}

impl std::fmt::Display for ThresholdsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "T0 = {:.6e}  T1 = {:.6e}  T2 = {:.6e}  beta = {:.6}", self.t0, self.t1, self.t2, self.beta)?;
        writeln!(f, "{:<10} {:>14} {:>14} {:>14} {:>14} {:>12}", "threshold", "t", "Linf_a", "L6_a", "L2_a", "Linf/shape")?;
        for r in &self.rows {
            if r.reached {
                writeln!(
                    f,
                    "{:<10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>12.4e}",
                    r.name, r.time, r.linf_a, r.l6_a, r.l2_a, r.shape_ratio
                )?;
            } else {
                writeln!(f, "{:<10} {:>14.6e} {:>14}", r.name, r.time, "truncated")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::envelope_schedule;

    fn regime_schedule() -> EnvelopeSchedule {
        let s = envelope_schedule((-17.5f64).exp2(), 1.0, 1.0, 0.1).unwrap();
        assert!(s.in_regime && s.n0 == 17);
        s
    }

    #[test]
    fn half_envelope_passes_with_margin_half() {
        let s = regime_schedule();
        let series: Vec<(f64, f64)> =
            (0..400).map(|i| i as f64 * s.t0 / 300.0).map(|t| (t, 0.5 * envelope_value(&s, t).value)).collect();
        let r = envelope_check(&series, &s).unwrap();
        assert!(r.passed && r.violation.is_none());
        assert_eq!(r.intervals.len(), 4);
        for m in &r.intervals {
            assert!((m.worst_margin - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn single_excess_is_reported() {
        let s = regime_schedule();
        let mut series: Vec<(f64, f64)> =
            (0..100).map(|i| i as f64 * s.t0 / 99.0).map(|t| (t, 0.9 * envelope_value(&s, t).value)).collect();
        series[40].1 *= 1.2;
        let r = envelope_check(&series, &s).unwrap();
        assert!(!r.passed);
        assert_eq!(r.violation.unwrap().0, series[40].0);
    }

    #[test]
    fn out_of_regime_uses_reciprocal_fit() {
        let s = envelope_schedule(0.125, 1.9924, 1.0, 0.1).unwrap();
        assert!(!s.in_regime);
        let series: Vec<(f64, f64)> = (0..50).map(|i| i as f64 * 0.002).map(|t| (t, 1.0 / (1.0 / 63.0 + t))).collect();
        let r = envelope_check(&series, &s).unwrap();
        assert!(r.passed);
        assert!((r.fit.unwrap().exponent - 1.0).abs() < 1e-9);
    }

    #[test]
    fn series_must_start_at_zero() {
        let s = regime_schedule();
        assert!(envelope_check(&[(1e-6, 1.0)], &s).is_err());
    }

    #[test]
    fn equilibrium_thresholds_are_zero() {
        let s = envelope_schedule(0.125, 0.5, 1.0, 0.1).unwrap();
        let recs: Vec<DiagnosticsRecord> = (0..=30)
            .map(|i| {
                let mut v = [0.0; 28];
                v[0] = i as f64;
                DiagnosticsRecord::from_scalars(&v, Vec::new())
            })
            .collect();
        let r = thresholds_report(&s, &recs);
        for row in &r.rows {
            if row.reached {
                assert_eq!((row.linf_a, row.l6_a, row.l2_a), (0.0, 0.0, 0.0));
            }
        }
        assert!(r.rows[0].reached);
    }
}
