//! Least-squares decay fits in linearizing coordinates.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayModel {
    /// ln v = c0 + p ln t.
    Power,
    /// ln v = c0 + p ln <t>, <t> = (1 + t^2)^(1/2).
    PowerBracket,
    /// ln v = c0 + p t.
    Exponential,
    /// 1/v = c0 + c1 t.
    Reciprocal,
}

impl std::str::FromStr for DecayModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(DecayModel::Power),
            "power_bracket" => Ok(DecayModel::PowerBracket),
            "exponential" => Ok(DecayModel::Exponential),
            "reciprocal" => Ok(DecayModel::Reciprocal),
            _ => Err(Error::InvalidArgument(format!("unknown decay model '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub model: DecayModel,
    /// Slope in the model coordinates (c1 for the reciprocal model).
    pub exponent: f64,
    /// Intercept in the model coordinates (c0).
    pub intercept: f64,
    pub r_squared: f64,
    /// Time span of the samples actually used.
    pub window: (f64, f64),
    pub samples: usize,
}

/// Japanese bracket (1 + t^2)^(1/2).
pub fn bracket(t: f64) -> f64 {
    t.hypot(1.0)
}

pub const MIN_SAMPLES: usize = 8;

/// Fits `series` restricted to t in [window.0, window.1].
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64), model: DecayModel) -> Result<FitResult> {
    let (ta, tb) = window;
    if !(ta < tb) {
        return Err(Error::Fit(format!("degenerate window [{ta}, {tb}]")));
    }
    let picked: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= ta && t <= tb).collect();
    if picked.len() < MIN_SAMPLES {
        return Err(Error::Fit(format!("{} samples in window, need {MIN_SAMPLES}", picked.len())));
    }
    if let Some(&(t, v)) = picked.iter().find(|&&(t, v)| !(v > 0.0) || !v.is_finite() || !t.is_finite()) {
        return Err(Error::Fit(format!("value {v} at t = {t} is not positive and finite")));
    }
    let coords: Vec<(f64, f64)> = match model {
        DecayModel::Power => {
            if picked.iter().any(|&(t, _)| t <= 0.0) {
                return Err(Error::Fit("power model needs t > 0".into()));
            }
            picked.iter().map(|&(t, v)| (t.ln(), v.ln())).collect()
        }
        DecayModel::PowerBracket => picked.iter().map(|&(t, v)| (bracket(t).ln(), v.ln())).collect(),
        DecayModel::Exponential => picked.iter().map(|&(t, v)| (t, v.ln())).collect(),
        DecayModel::Reciprocal => picked.iter().map(|&(t, v)| (t, 1.0 / v)).collect(),
    };
    let (slope, intercept, r_squared) = least_squares(&coords)?;
    let lo = picked.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = picked.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult { model, exponent: slope, intercept, r_squared, window: (lo, hi), samples: picked.len() })
}

/// Straight-line fit y = a + b x; returns (b, a, r^2).
fn least_squares(pts: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all samples share one abscissa".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok((b, a, r2.clamp(0.0, 1.0)))
}
