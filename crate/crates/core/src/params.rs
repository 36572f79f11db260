use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Dimensionless input of the problem: frequency `omega1 = omega / nu` and
/// accommodation coefficient `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    omega1: f64,
    q: f64,
}

impl ProblemParams {
    pub fn new(omega1: f64, q: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega1 > 0.0) {
            return Err(Error::InvalidParameter(format!("omega1 must be positive, got {omega1}")));
        }
        if !(q.is_finite() && q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0, 1], got {q}")));
        }
        Ok(Self { omega1, q })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `z0 = 1 - i omega1`.
    pub fn z0(&self) -> C64 {
        C64::new(1.0, -self.omega1)
    }

    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(self.omega1, q)
    }
}

/// Controls every quadrature in the analytic chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Gauss-Legendre nodes per panel of the spectral tables.
    pub nodes: usize,
    /// Truncation `T` of integrals over `(0, inf)`, in thermal speeds.
    pub cutoff: f64,
    /// Half-width of the strip around the real axis treated as "on the axis".
    pub pv_eps: f64,
    /// Target relative accuracy.
    pub tol: f64,
    /// Excluded half-width around the index transition frequency.
    pub guard_band: f64,
    /// Upper bound on panels in adaptive tables.
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 20,
            cutoff: 7.0,
            pv_eps: 1e-12,
            tol: 1e-12,
            guard_band: 1e-3,
            max_panels: 4000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 4 || self.nodes > 64 {
            return Err(Error::InvalidParameter(format!("nodes must be in 4..=64, got {}", self.nodes)));
        }
        // exp(-36) ~ 2e-16: the Gaussian weight is negligible beyond 6.
        if !(self.cutoff >= 6.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!("cutoff must be >= 6, got {}", self.cutoff)));
        }
        if !(self.tol >= 100.0 * f64::EPSILON && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tol must be in [1e2 eps, 1), got {}", self.tol)));
        }
        if !(self.pv_eps > 0.0 && self.pv_eps < 1e-3) {
            return Err(Error::InvalidParameter(format!("pv_eps must be in (0, 1e-3), got {}", self.pv_eps)));
        }
        if !(self.guard_band > 0.0 && self.guard_band < 0.1) {
            return Err(Error::InvalidParameter(format!(
                "guard_band must be in (0, 0.1), got {}",
                self.guard_band
            )));
        }
        if self.max_panels < 16 {
            return Err(Error::InvalidParameter("max_panels must be at least 16".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z0_is_exact() {
        let p = ProblemParams::new(0.3, 0.5).unwrap();
        assert_eq!(p.z0(), C64::new(1.0, -0.3));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ProblemParams::new(0.0, 1.0).is_err());
        assert!(ProblemParams::new(-1.0, 1.0).is_err());
        assert!(ProblemParams::new(f64::NAN, 1.0).is_err());
        assert!(ProblemParams::new(1.0, 0.0).is_err());
        assert!(ProblemParams::new(1.0, 1.5).is_err());
        assert!(ProblemParams::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn config_bounds() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let short = QuadratureConfig { cutoff: 5.0, ..Default::default() };
        assert!(short.validate().is_err());
        let greedy = QuadratureConfig { tol: 1e-17, ..Default::default() };
        assert!(greedy.validate().is_err());
    }
}
