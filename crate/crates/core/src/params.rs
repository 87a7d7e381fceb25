use crate::error::{Error, Result};

/// Parameters of the short-pulse data family and of the fluid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseParams {
    pub delta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub phi_amp: f64,
    pub v_amp: f64,
}

impl Default for PulseParams {
    fn default() -> Self {
        PulseParams { delta: 0.125, alpha: 0.5, gamma: 1.0, mu: 1.0, lambda: 0.0, epsilon: 0.1, phi_amp: 1.0, v_amp: 1.0 }
    }
}

impl PulseParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let all = [self.delta, self.alpha, self.gamma, self.mu, self.lambda, self.epsilon, self.phi_amp, self.v_amp];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("pulse parameters must be finite".into());
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("delta = {} must lie in (0, 1]", self.delta));
        }
        if self.alpha <= 0.0 {
            return bad(format!("alpha = {} must be positive", self.alpha));
        }
        if self.gamma < 1.0 {
            return bad(format!("gamma = {} must be >= 1", self.gamma));
        }
        if self.mu <= 0.0 || self.lambda < 0.0 {
            return bad(format!("viscosities mu = {}, lambda = {} need mu > 0, lambda >= 0", self.mu, self.lambda));
        }
        if self.epsilon <= 0.0 {
            return bad(format!("epsilon = {} must be positive", self.epsilon));
        }
        if self.phi_amp < 0.0 {
            return bad(format!("phi_amp = {} must be nonnegative", self.phi_amp));
        }
        Ok(())
    }

    /// mu + lambda.
    pub fn nu(&self) -> f64 {
        self.mu + self.lambda
    }

    /// alpha <= 2 gamma / (1 + 2 gamma), the range with a global-existence result.
    pub fn in_global_existence_range(&self) -> bool {
        self.alpha <= 2.0 * self.gamma / (1.0 + 2.0 * self.gamma)
    }

    /// delta^-alpha, the nominal peak of rho_0^gamma - 1.
    pub fn amplitude(&self) -> f64 {
        self.delta.powf(-self.alpha)
    }
}
