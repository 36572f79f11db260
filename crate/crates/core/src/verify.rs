//! Self-consistency report for one parameter point.

use serde::Serialize;

use crate::observables::WallObservables;
use crate::oracle::{self, OracleConfig};
use crate::riemann::SpectralData;
use crate::solution::Solution;
use crate::{ProblemParams, QuadratureConfig, Result};

/// Threshold of the exact identities and of boundary-condition reproduction.
pub const IDENTITY_THRESHOLD: f64 = 1e-6;
/// Threshold on `|lambda(eta0)|`.
pub const ROOT_THRESHOLD: f64 = 1e-8;
/// Relative agreement required between oracle and analytic wall values.
pub const ORACLE_THRESHOLD: f64 = 1e-2;
pub const ORACLE_POWER_THRESHOLD: f64 = 1.5e-2;

/// Outgoing directions for the boundary-condition check; those beyond 0.9 of
/// the cutoff are skipped.
pub const BC_PROBES: [f64; 7] = [0.05, 0.3, 0.8, 1.5, 2.5, 4.0, 6.0];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub omega1: f64,
    pub q: f64,
    pub kappa: i32,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, value: f64, threshold: f64) {
        self.checks.push(Check { name: name.to_string(), value, threshold, passed: value <= threshold });
    }

    /// A check whose value must be nonnegative.
    fn push_nonnegative(&mut self, name: &str, value: f64) {
        self.checks.push(Check { name: name.to_string(), value, threshold: 0.0, passed: value >= 0.0 });
    }

    pub fn render(&self) -> String {
        let mut out = format!("verify omega1={} q={} kappa={}\n", self.omega1, self.q, self.kappa);
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<34} {:>12.3e} (threshold {:.1e})\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold
            ));
        }
        out
    }
}

fn rel(a: crate::C64, b: crate::C64) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn run(p: ProblemParams, cfg: &QuadratureConfig, oracle_cfg: Option<&OracleConfig>) -> Result<VerifyReport> {
    let sd = SpectralData::new(p, cfg)?;
    let sol = Solution::new(&sd, 1.0)?;
    let mut report = VerifyReport { omega1: p.omega1(), q: p.q(), kappa: sd.kappa(), checks: Vec::new() };

    let r = sd.identity_residuals();
    report.push("boundary relation X+ = G X-", r.boundary_relation, IDENTITY_THRESHOLD);
    report.push("integral representation of 1/X", r.representation, IDENTITY_THRESHOLD);
    report.push("factorization of lambda", r.factorization, IDENTITY_THRESHOLD);
    report.push("closed form of X(0)", r.x_at_zero, IDENTITY_THRESHOLD);
    if let Some(res) = r.eta0_residual {
        report.push("|lambda(eta0)|", res, ROOT_THRESHOLD);
    }

    let wall = sol.wall_factor()?;
    report.push("wall velocity: expansion vs closed", rel(wall, sol.wall_factor_closed_form()), IDENTITY_THRESHOLD);
    let h_closed = sol.distribution_at_wall(-1.0)?;
    let h_quad = sol.distribution_at_wall_quadrature(-1.0)?;
    report.push("h(0,-1): closed vs expansion", rel(h_quad, h_closed), IDENTITY_THRESHOLD);
    let probes: Vec<f64> = BC_PROBES.iter().copied().filter(|&mu| mu < 0.9 * cfg.cutoff).collect();
    report.push("boundary condition h(0,mu>0) = 2S", sol.boundary_residual(&probes)?, IDENTITY_THRESHOLD);
    report.push("accommodation moment condition", sol.moment_check()?.relative_residual, IDENTITY_THRESHOLD);

    let obs = WallObservables::compute(&sol)?;
    report.push_nonnegative("W/W0 >= 0", obs.dissipation_normalized);

    if let Some(oc) = oracle_cfg {
        let o = oracle::oracle_moments(&oracle::solve_kinetic(&p, 1.0, oc)?);
        report.push("oracle: wall velocity factor", rel(o.u_wall, obs.a_kappa), ORACLE_THRESHOLD);
        report.push("oracle: friction factor", rel(o.friction_factor, obs.friction_factor), ORACLE_THRESHOLD);
        let dw = (o.dissipation_normalized - obs.dissipation_normalized).abs() / obs.dissipation_normalized.abs();
        report.push("oracle: W/W0", dw, ORACLE_POWER_THRESHOLD);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_passes_for_regular_point() {
        let r = run(ProblemParams::new(0.5, 0.5).unwrap(), &QuadratureConfig::default(), None).unwrap();
        assert!(r.passed(), "{}", r.render());
        assert!(r.render().lines().count() > 8);
    }

    #[test]
    fn report_at_smallest_cutoff() {
        let cfg = QuadratureConfig { cutoff: 6.0, ..QuadratureConfig::default() };
        let r = run(ProblemParams::new(0.3, 0.5).unwrap(), &cfg, None).unwrap();
        assert!(r.passed(), "{}", r.render());
    }
}
