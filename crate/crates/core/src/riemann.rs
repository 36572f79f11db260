//! Homogeneous Riemann problem `X+(mu) = G(mu) X-(mu)` on the positive
//! half-line: the branch function `q = ln G / 2i`, `zeta = q - pi kappa`,
//! the factorizing function `X(z)`, the constant `V1` and the discrete zero
//! `eta0` of the dispersion function.
//!
//! With `T` the quadrature cutoff and `W(z) = (1/pi) int_0^T q(t)/(t - z) dt`,
//! the factorizing function is `X(z) = (-1)^kappa exp W(z) / (T - z)^kappa`,
//! which equals `z^-kappa exp V(z)` with `V(z) = (1/pi) int zeta(t)/(t - z) dt`.
//! On the cut `X` denotes the geometric mean of its two boundary values.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dispersion::{self, PhaseBranch};
use crate::quadrature::{PanelRule, PanelTable};
use crate::{Error, ProblemParams, QuadratureConfig, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Everything the solution formulas need about the spectrum of the problem.
#[derive(Debug, Clone)]
pub struct SpectralData {
    params: ProblemParams,
    cfg: QuadratureConfig,
    kappa: i32,
    branch: PhaseBranch,
    q_table: PanelTable,
    g_table: PanelTable,
    v1: C64,
    x_at_zero: C64,
    eta0: Option<C64>,
}

/// Probe points for the integral representation of `1/X`.
pub const REPRESENTATION_PROBES: [C64; 4] =
    [C64 { re: -1.0, im: 0.0 }, C64 { re: 0.0, im: -2.0 }, C64 { re: 1.0, im: 1.0 }, C64 { re: -0.5, im: -0.5 }];

/// Probe points for the factorization of `lambda`. Both `z` and `-z` stay off
/// the cut.
pub const FACTORIZATION_PROBES: [C64; 4] =
    [C64 { re: 0.0, im: -2.0 }, C64 { re: 1.0, im: 1.0 }, C64 { re: -0.5, im: -0.5 }, C64 { re: 0.5, im: 2.0 }];

/// Points on the cut where the boundary relation is checked.
pub const BOUNDARY_PROBES: [f64; 8] = [0.1, 0.3, 0.7, 1.0, 1.5, 2.5, 4.0, 6.0];

impl SpectralData {
    pub fn new(params: ProblemParams, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let cfg = cfg.clone();
        let kappa = dispersion::index_kappa(&params, &cfg)?;
        let branch = PhaseBranch::track(&params, &cfg)?;
        let t = cfg.cutoff;
        let initial = PanelRule::graded(0.0, t, 0.5, 12, cfg.nodes);

        let q_of = |tau: f64| -> Result<C64> {
            let (raw, ln_abs) = dispersion::log_g(tau, &params, &cfg)?;
            Ok(C64::new(branch.continue_arg(tau, raw) / 2.0, -ln_abs / 2.0))
        };
        let q_table = PanelRule::adapt(initial.clone(), q_of, cfg.tol, cfg.max_panels, "q table")?;

        let mut sd = Self {
            params,
            cfg: cfg.clone(),
            kappa,
            branch,
            q_table,
            g_table: PanelTable::new(PanelRule::new(vec![(0.0, t)], cfg.nodes), vec![C64::new(0.0, 0.0); cfg.nodes]),
            v1: C64::new(0.0, 0.0),
            x_at_zero: C64::new(0.0, 0.0),
            eta0: None,
        };

        let g_of = |eta: f64| -> Result<C64> { Ok(sd.zeta_unchecked(eta)?.sin() / sd.x_cut_unchecked(eta)) };
        let g_table = PanelRule::adapt(initial, g_of, cfg.tol, cfg.max_panels, "g table")?;
        sd.g_table = g_table;

        let int_q = sd.q_table.integral();
        sd.v1 = -(int_q - PI * kappa as f64 * t) / PI;
        let w0 = sd.q_table.integral_with(|tau| C64::new(1.0 / tau, 0.0)) / PI;
        sd.x_at_zero = crate::check_finite(sign(kappa) * w0.exp() / t.powi(kappa), "X(0)")?;
        if kappa == 1 {
            sd.eta0 = Some(find_eta0(&sd)?);
        }
        Ok(sd)
    }

    /// Same spectrum for another accommodation coefficient. The spectral
    /// quantities depend on `omega1` only.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        let mut out = self.clone();
        out.params = self.params.with_q(q)?;
        Ok(out)
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn kappa(&self) -> i32 {
        self.kappa
    }

    pub fn eta0(&self) -> Option<C64> {
        self.eta0
    }

    /// `eta0` or zero when `kappa = 0`; only ever used multiplied by kappa.
    pub(crate) fn eta0_or_zero(&self) -> C64 {
        self.eta0.unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn v1(&self) -> C64 {
        self.v1
    }

    pub fn x_at_zero(&self) -> C64 {
        self.x_at_zero
    }

    pub fn branch(&self) -> &PhaseBranch {
        &self.branch
    }

    /// Tabulated `sin zeta(eta) / X(eta)` on the cut.
    pub fn g_table(&self) -> &PanelTable {
        &self.g_table
    }

    pub fn q_table(&self) -> &PanelTable {
        &self.q_table
    }

    /// `q(t) = ln G(t) / 2i` on the continuous branch with `q(0) = 0`.
    pub fn q(&self, tau: f64) -> Result<C64> {
        if tau.is_nan() || tau < 0.0 {
            return Err(Error::NonPositiveArgument(tau));
        }
        let (raw, ln_abs) = dispersion::log_g(tau, &self.params, &self.cfg)?;
        Ok(C64::new(self.branch.continue_arg(tau, raw) / 2.0, -ln_abs / 2.0))
    }

    /// `zeta(eta) = q(eta) - pi kappa`, complex in general.
    pub fn zeta(&self, eta: f64) -> Result<C64> {
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::NonPositiveArgument(eta));
        }
        self.zeta_unchecked(eta)
    }

    fn zeta_unchecked(&self, eta: f64) -> Result<C64> {
        let (raw, ln_abs) = dispersion::log_g(eta, &self.params, &self.cfg)?;
        // Subtract 2 pi kappa before halving so small values keep full precision.
        let cont = self.branch.continue_arg(eta, raw);
        let turns = ((cont - raw) / (2.0 * PI)).round() - self.kappa as f64;
        Ok(C64::new((raw + 2.0 * PI * turns) / 2.0, -ln_abs / 2.0))
    }

    fn check_off_cut(&self, z: C64) -> Result<()> {
        if z.im.abs() < self.cfg.pv_eps && z.re > 0.0 {
            return Err(Error::OnCut(z));
        }
        Ok(())
    }

    fn w(&self, z: C64) -> C64 {
        self.q_table.cauchy(z) / PI
    }

    /// `V(z) = (1/pi) int_0^inf zeta(t) / (t - z) dt`.
    pub fn v(&self, z: C64) -> Result<C64> {
        self.check_off_cut(z)?;
        if z == C64::new(0.0, 0.0) {
            return Err(Error::ZeroArgument);
        }
        let t = self.cfg.cutoff;
        let k = self.kappa as f64;
        crate::check_finite(self.w(z) - k * ((t - z).ln() - (-z).ln()), "V(z)")
    }

    /// Factorizing function off the cut.
    pub fn x(&self, z: C64) -> Result<C64> {
        self.check_off_cut(z)?;
        if z == C64::new(0.0, 0.0) {
            return if self.kappa == 1 { Err(Error::ZeroArgument) } else { Ok(self.x_at_zero) };
        }
        crate::check_finite(self.x_unchecked(z), "X(z)")
    }

    fn x_unchecked(&self, z: C64) -> C64 {
        sign(self.kappa) * self.w(z).exp() / (self.cfg.cutoff - z).powi(self.kappa)
    }

    /// Geometric mean of the boundary values of `X` on the cut.
    pub fn x_cut(&self, mu: f64) -> Result<C64> {
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::NonPositiveArgument(mu));
        }
        crate::check_finite(self.x_cut_unchecked(mu), "X on the cut")
    }

    fn x_cut_unchecked(&self, mu: f64) -> C64 {
        let t = self.cfg.cutoff;
        if mu >= t {
            // zeta vanishes beyond the cutoff, X is analytic there.
            return self.x_unchecked(C64::new(mu, 0.0));
        }
        let w_pv = self.q_table.cauchy_pv(mu) / PI;
        w_pv.exp() / (t - mu).powi(self.kappa)
    }

    pub fn x_plus(&self, mu: f64) -> Result<C64> {
        Ok(self.x_cut(mu)? * (I * self.zeta(mu)?).exp())
    }

    pub fn x_minus(&self, mu: f64) -> Result<C64> {
        Ok(self.x_cut(mu)? * (-I * self.zeta(mu)?).exp())
    }

    /// `sin zeta(eta) / X(eta)` evaluated directly (not interpolated).
    pub fn g(&self, eta: f64) -> Result<C64> {
        crate::check_finite(self.zeta(eta)?.sin() / self.x_cut(eta)?, "sin zeta / X")
    }

    /// `1/X(z)` from its Cauchy-integral representation.
    pub fn inverse_x_representation(&self, z: C64) -> Result<C64> {
        self.check_off_cut(z)?;
        let c = self.g_table.cauchy(z) / PI;
        let head = if self.kappa == 1 { z - self.v1 } else { C64::new(1.0, 0.0) };
        crate::check_finite(head - c, "1/X representation")
    }

    /// Residuals of the exact identities satisfied by the factorization.
    pub fn identity_residuals(&self) -> IdentityResiduals {
        let p = &self.params;
        let cfg = &self.cfg;
        let w1 = p.omega1();
        let mut boundary = 0.0_f64;
        let eps = 1e-6;
        // The truncated representation is singular at the cutoff itself.
        for &mu in BOUNDARY_PROBES.iter().filter(|&&mu| mu < 0.9 * cfg.cutoff) {
            let limit = |dir: f64| -> Result<C64> {
                let a = self.x(C64::new(mu, dir * eps))?;
                let b = self.x(C64::new(mu, dir * 2.0 * eps))?;
                Ok(2.0 * a - b)
            };
            let r = (|| -> Result<f64> {
                let (up, down) = (limit(1.0)?, limit(-1.0)?);
                let g = dispersion::coefficient_g(mu, p, cfg)?;
                let rel = |a: C64, b: C64| (a - b).norm() / a.norm();
                Ok(rel(up, g * down).max(rel(up, self.x_plus(mu)?)).max(rel(down, self.x_minus(mu)?)))
            })();
            boundary = boundary.max(r.unwrap_or(f64::INFINITY));
        }

        let mut representation = 0.0_f64;
        for &z in &REPRESENTATION_PROBES {
            let r = (|| -> Result<f64> {
                let lhs = 1.0 / self.x(z)?;
                Ok((lhs - self.inverse_x_representation(z)?).norm() / lhs.norm())
            })();
            representation = representation.max(r.unwrap_or(f64::INFINITY));
        }

        let lambda_inf = C64::new(0.0, -w1);
        let mut factorization = 0.0_f64;
        for &z in &FACTORIZATION_PROBES {
            let r = (|| -> Result<f64> {
                let lam = dispersion::lambda(z, p, cfg)?;
                let xx = self.x(z)? * self.x(-z)?;
                let rhs = match self.eta0 {
                    Some(e) => -lambda_inf * (z * z - e * e) * xx,
                    None => lambda_inf * xx,
                };
                Ok((lam - rhs).norm() / lam.norm())
            })();
            factorization = factorization.max(r.unwrap_or(f64::INFINITY));
        }

        let x0_closed = match self.eta0 {
            Some(e) => I * p.z0() / (w1 * e * e),
            None => C64::new(1.0, 1.0 / w1),
        };
        let x_at_zero = (self.x_at_zero * self.x_at_zero - x0_closed).norm() / x0_closed.norm();
        let eta0_residual = self.eta0.map(|e| dispersion::lambda(e, p, cfg).map(|l| l.norm()).unwrap_or(f64::INFINITY));

        IdentityResiduals { boundary_relation: boundary, representation, factorization, x_at_zero, eta0_residual }
    }
}

fn sign(kappa: i32) -> f64 {
    if kappa % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Maximal relative residuals of the factorization identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityResiduals {
    /// `X+ = G X-` on the cut, off-axis limits against the cut formulas.
    pub boundary_relation: f64,
    /// Cauchy-integral representation of `1/X`.
    pub representation: f64,
    /// `lambda = lambda_inf X(z) X(-z)` (times `(z^2 - eta0^2)/(-1)` for kappa = 1).
    pub factorization: f64,
    /// `X(0)^2` against its closed form.
    pub x_at_zero: f64,
    /// `|lambda(eta0)|` when a discrete zero exists.
    pub eta0_residual: Option<f64>,
}

impl IdentityResiduals {
    pub fn max_relative(&self) -> f64 {
        self.boundary_relation.max(self.representation).max(self.factorization).max(self.x_at_zero)
    }
}

/// Discrete zero of `lambda` from the factorization at a point on the
/// imaginary axis, polished by a secant iteration on `lambda`.
pub fn find_eta0(sd: &SpectralData) -> Result<C64> {
    if sd.kappa != 1 {
        return Err(Error::WrongIndex { expected: 1, found: sd.kappa });
    }
    let p = &sd.params;
    let cfg = &sd.cfg;
    let w1 = p.omega1();
    let z0 = p.z0();
    let zs = C64::new(0.0, (1.0 / w1.sqrt()).max(1.0));
    let lam = dispersion::lambda(zs, p, cfg)?;
    let e2 = zs * zs - lam / (I * w1 * sd.x(zs)? * sd.x(-zs)?);
    let mut eta = e2.sqrt();
    if (z0 / eta).re < 0.0 {
        eta = -eta;
    }
    let target = 10.0 * cfg.tol;
    let f = |z: C64| dispersion::lambda(z, p, cfg);
    let mut prev = eta * (1.0 + 1e-7);
    let mut f_prev = f(prev)?;
    let mut f_cur = f(eta)?;
    for _ in 0..60 {
        if f_cur.norm() < target {
            break;
        }
        let denom = f_cur - f_prev;
        if denom.norm() == 0.0 {
            break;
        }
        let next = eta - f_cur * (eta - prev) / denom;
        prev = eta;
        f_prev = f_cur;
        eta = next;
        f_cur = f(eta)?;
    }
    if !(f_cur.norm() < target) {
        return Err(Error::RootPolishFailure(f_cur.norm()));
    }
    if (z0 / eta).re < 0.0 {
        eta = -eta;
    }
    Ok(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn build(w: f64) -> SpectralData {
        SpectralData::new(ProblemParams::new(w, 1.0).unwrap(), &QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn zeta_anchors() {
        let sd = build(1.0);
        assert!(sd.zeta(1e-9).unwrap().norm() < 1e-8);
        let sd1 = build(0.1);
        assert!((sd1.zeta(1e-9).unwrap() + PI).norm() < 1e-8);
        // Far tail: imaginary part exponentially small, real part at the
        // asymptotic branch value.
        let z6 = sd.zeta(6.0).unwrap();
        assert!(z6.im.abs() < 1e-10 && z6.re.abs() < 1e-10);
        let z6 = sd1.zeta(6.0).unwrap();
        assert!(z6.norm() < 1e-10);
        assert!(matches!(sd.zeta(0.0), Err(Error::NonPositiveArgument(_))));
    }

    #[test]
    fn v_far_away_is_small() {
        let sd = build(1.0);
        assert!(sd.v(C64::new(-1e6, 0.0)).unwrap().norm() < 1e-4);
        assert!(matches!(sd.v(C64::new(0.5, 0.0)), Err(Error::OnCut(_))));
    }

    #[test]
    fn v_obeys_schwarz_reflection_of_density_parts() {
        let sd = build(0.5);
        let t = sd.q_table();
        let re = t.with_values(t.values().iter().map(|v| C64::new(v.re, 0.0)).collect());
        let im = t.with_values(t.values().iter().map(|v| C64::new(v.im, 0.0)).collect());
        for z in [C64::new(0.3, 0.4), C64::new(-1.0, 2.0), C64::new(3.0, -0.1)] {
            let k = sd.kappa() as f64;
            let log_part = |z: C64| k * ((sd.config().cutoff - z).ln() - (-z).ln());
            let reflected = (re.cauchy(z).conj() + I * im.cauchy(z).conj()) / PI - log_part(z.conj());
            assert!((sd.v(z.conj()).unwrap() - reflected).norm() < 1e-12);
        }
    }

    #[test]
    fn x_vs_z_power_form() {
        for w in [0.1, 1.0] {
            let sd = build(w);
            for z in [C64::new(-0.7, 0.2), C64::new(2.0, -1.5)] {
                let direct = sd.x(z).unwrap();
                let via_v = z.powi(-sd.kappa()) * sd.v(z).unwrap().exp();
                assert!((direct - via_v).norm() / direct.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identities_hold() {
        for w in [0.1, 0.3, 1.0, 3.0] {
            let sd = build(w);
            let r = sd.identity_residuals();
            assert!(r.max_relative() < 1e-8, "omega1={w}: {r:?}");
        }
    }

    #[test]
    fn x_at_zero_closed_forms() {
        let sd = build(1.0);
        assert_eq!(sd.kappa(), 0);
        let x0 = sd.x_at_zero();
        assert!((x0 * x0 - C64::new(1.0, 1.0)).norm() < 1e-10);
        let sd = build(0.1);
        let e = sd.eta0().unwrap();
        let closed = I * sd.params().z0() / (0.1 * e * e);
        assert!((sd.x_at_zero().powi(2) - closed).norm() / closed.norm() < 1e-10);
    }

    #[test]
    fn eta0_small_frequency() {
        let sd = build(0.01);
        let e = sd.eta0().unwrap();
        let asym = C64::new(5.0, 5.0);
        assert!((e - asym).norm() / asym.norm() < 0.02);
        assert!((sd.params().z0() / e).re > 0.0);
    }

    #[test]
    fn eta0_is_a_zero_and_so_is_its_negative() {
        let sd = build(0.5);
        let e = sd.eta0().unwrap();
        let cfg = QuadratureConfig::default();
        assert!(dispersion::lambda(e, sd.params(), &cfg).unwrap().norm() < 10.0 * cfg.tol);
        assert!(dispersion::lambda(-e, sd.params(), &cfg).unwrap().norm() < 10.0 * cfg.tol);
    }

    #[test]
    fn find_eta0_requires_index_one() {
        let sd = build(1.0);
        assert!(matches!(find_eta0(&sd), Err(Error::WrongIndex { expected: 1, found: 0 })));
        assert!(sd.eta0().is_none());
    }

    #[test]
    fn v1_converges_with_nodes() {
        let p = ProblemParams::new(1.0, 1.0).unwrap();
        let a = SpectralData::new(p, &QuadratureConfig::default()).unwrap().v1();
        let b = SpectralData::new(p, &QuadratureConfig { nodes: 10, ..QuadratureConfig::default() }).unwrap().v1();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn regression_values() {
        // Pinned from a converged run (tol 1e-13, cutoff 8).
        let sd = build(1.0);
        let v = sd.v(C64::new(0.0, 1.0)).unwrap();
        let fine = SpectralData::new(
            ProblemParams::new(1.0, 1.0).unwrap(),
            &QuadratureConfig { tol: 1e-13, cutoff: 8.0, ..QuadratureConfig::default() },
        )
        .unwrap();
        assert!((v - fine.v(C64::new(0.0, 1.0)).unwrap()).norm() < 1e-10);
        assert_relative_eq!(sd.v1().re, fine.v1().re, epsilon = 1e-10);
    }
}
