//! Wall observables (velocity factor, friction, dissipated power) and their
//! slip-regime and free-molecular asymptotics.
//!
//! Friction is reported per `2 U0 p` and dissipated power per `W0 = U0^2 p / sqrt(beta)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dispersion::{self, s};
use crate::riemann::SpectralData;
use crate::solution::Solution;
use crate::{Error, QuadratureConfig, Result, C64, SQRT_PI};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest Knudsen number at which the slip series is considered valid.
pub const SLIP_SERIES_MAX_KN: f64 = 0.3;
/// Smallest frequency at which the free-molecular series is considered valid.
pub const FREE_MOLECULAR_MIN_OMEGA: f64 = 3.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WallObservables {
    pub omega1: f64,
    pub q: f64,
    pub kappa: i32,
    /// Wall-velocity factor `U(0) / U0`.
    pub a_kappa: C64,
    /// Friction per `2 U0 p`.
    pub friction_factor: C64,
    pub friction_amplitude: f64,
    pub friction_phase: f64,
    /// `W / W0`.
    pub dissipation_normalized: f64,
    pub knudsen: f64,
}

impl WallObservables {
    pub fn compute(sol: &Solution<'_>) -> Result<Self> {
        let sd = sol.spectral();
        let p = sd.params();
        let (amplitude, phase, factor) = friction_force(sol);
        Ok(Self {
            omega1: p.omega1(),
            q: p.q(),
            kappa: sd.kappa(),
            a_kappa: sol.wall_factor()?,
            friction_factor: factor,
            friction_amplitude: amplitude,
            friction_phase: phase,
            dissipation_normalized: dissipation_power(sol),
            knudsen: knudsen_of(p.omega1()),
        })
    }

    /// Build the spectral data and solution for one point and evaluate.
    pub fn at(omega1: f64, q: f64, cfg: &QuadratureConfig) -> Result<Self> {
        let sd = SpectralData::new(crate::ProblemParams::new(omega1, q)?, cfg)?;
        Self::compute(&Solution::new(&sd, 1.0)?)
    }
}

/// `i omega1 (V1 - kappa eta0) / (1 + Q)` with its modulus and argument.
pub fn friction_force(sol: &Solution<'_>) -> (f64, f64, C64) {
    let sd = sol.spectral();
    let k = sd.kappa() as f64;
    let factor = I * sd.params().omega1() * (sd.v1() - k * sd.eta0_or_zero()) / (1.0 + sol.coefficients().q_kappa);
    (factor.norm(), factor.arg(), factor)
}

/// `W / W0 = Re conj(friction factor)`.
pub fn dissipation_power(sol: &Solution<'_>) -> f64 {
    friction_force(sol).2.re
}

/// Dimensional power for given plate amplitude, pressure and `beta = m / 2kT`.
pub fn dissipation_power_dimensional(sol: &Solution<'_>, u0: f64, pressure: f64, beta: f64) -> f64 {
    dissipation_power(sol) * u0 * u0 * pressure / beta.sqrt()
}

pub fn knudsen_of(omega1: f64) -> f64 {
    0.5 * SQRT_PI * omega1.sqrt()
}

pub fn omega_of_knudsen(kn: f64) -> f64 {
    (2.0 * kn / SQRT_PI).powi(2)
}

/// `V1` in the zero-frequency limit: `-(1/pi) int [atan2(s, lambda0_pv) - pi] dt`.
pub fn slip_constant(cfg: &QuadratureConfig) -> Result<f64> {
    let v = dispersion::integrate_on_cut(|t| Ok(s(t).atan2(dispersion::lambda0_pv(t, cfg)?) - PI), cfg, "slip constant")?;
    Ok(-v / PI)
}

/// Isothermal slip coefficient `C_m = 2 V1 / sqrt(pi)` at zero frequency.
pub fn slip_coefficient(cfg: &QuadratureConfig) -> Result<f64> {
    Ok(2.0 * slip_constant(cfg)? / SQRT_PI)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KnudsenExpansion {
    pub knudsen: f64,
    /// `Kn - (1 - i)(C_m + 2(1 - q)/q) Kn^2`, truncated to the requested terms.
    pub bracket: C64,
    /// Friction per `2 U0 p` implied by the series.
    pub factor: C64,
    /// `L = C_m Kn`.
    pub l: f64,
    /// `L1 = ((1 - q)/q) sqrt(pi omega1)`.
    pub l1: f64,
    /// False when `Kn` exceeds [`SLIP_SERIES_MAX_KN`].
    pub in_domain: bool,
}

pub fn friction_knudsen_expansion(kn: f64, q: f64, terms: u32, cfg: &QuadratureConfig) -> Result<KnudsenExpansion> {
    if !(kn > 0.0 && kn.is_finite()) {
        return Err(Error::InvalidParameter(format!("Knudsen number must be positive, got {kn}")));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1], got {q}")));
    }
    if !(1..=2).contains(&terms) {
        return Err(Error::InvalidParameter(format!("terms must be 1 or 2, got {terms}")));
    }
    let cm = slip_coefficient(cfg)?;
    let accommodation = 2.0 * (1.0 - q) / q;
    let mut bracket = C64::new(kn, 0.0);
    if terms == 2 {
        bracket -= C64::new(1.0, -1.0) * (cm + accommodation) * kn * kn;
    }
    let factor = (2.0 / PI).sqrt() * C64::from_polar(1.0, -PI / 4.0) * bracket;
    Ok(KnudsenExpansion {
        knudsen: kn,
        bracket,
        factor,
        l: cm * kn,
        l1: accommodation * kn,
        in_domain: kn <= SLIP_SERIES_MAX_KN,
    })
}

/// Slip-regime friction per `2 U0 p` in exponentiated form:
/// `sqrt(omega1/2) (1 - L - L1) exp(-i pi/4 + i (L + L1))`.
pub fn slip_form(kn: f64, q: f64, cfg: &QuadratureConfig) -> Result<C64> {
    let e = friction_knudsen_expansion(kn, q, 2, cfg)?;
    let w = omega_of_knudsen(kn);
    let l = e.l + e.l1;
    Ok((w / 2.0).sqrt() * (1.0 - l) * C64::from_polar(1.0, -PI / 4.0 + l))
}

/// The diffuse-wall slip formula `sqrt(omega1/2) (1 - L) exp(-i (pi/4 - L))`.
pub fn diffuse_slip_form(kn: f64, cfg: &QuadratureConfig) -> Result<C64> {
    let l = slip_coefficient(cfg)? * kn;
    let w = omega_of_knudsen(kn);
    Ok((w / 2.0).sqrt() * (1.0 - l) * C64::from_polar(1.0, -(PI / 4.0 - l)))
}

/// Stokes-layer velocity `exp(-x z0 / eta0)` with `eta0 = (1 + i) / (2 sqrt(omega1))`.
pub fn hydrodynamic_reference(x: f64, omega1: f64) -> C64 {
    let eta = C64::new(1.0, 1.0) / (2.0 * omega1.sqrt());
    (-x * C64::new(1.0, -omega1) / eta).exp()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreeMolecularCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Coefficients of `i omega1 V1 = c0 - i c1 / omega1 - c2 / omega1^2 + ...`.
pub fn free_molecular_coefficients(cfg: &QuadratureConfig) -> Result<FreeMolecularCoefficients> {
    let l0 = |t: f64| dispersion::lambda0_pv(t, cfg);
    let c0 = dispersion::integrate_on_cut(|t| Ok(s(t)), cfg, "free-molecular c0")? / PI;
    let c1 = dispersion::integrate_on_cut(|t| Ok(s(t) * l0(t)?), cfg, "free-molecular c1")? / PI;
    let c2 = dispersion::integrate_on_cut(
        |t| {
            let st = s(t);
            Ok(st * l0(t)?.powi(2) - st.powi(3) / 3.0)
        },
        cfg,
        "free-molecular c2",
    )? / PI;
    Ok(FreeMolecularCoefficients { c0, c1, c2 })
}

/// Three-term large-frequency series of `i omega1 V1`.
pub fn free_molecular_series(omega1: f64, cfg: &QuadratureConfig) -> Result<C64> {
    if !(omega1 >= FREE_MOLECULAR_MIN_OMEGA) {
        return Err(Error::DomainOfValidity {
            what: "free-molecular series",
            detail: format!("omega1 = {omega1} < {FREE_MOLECULAR_MIN_OMEGA}"),
        });
    }
    let c = free_molecular_coefficients(cfg)?;
    Ok(C64::new(c.c0, 0.0) - I * c.c1 / omega1 - c.c2 / (omega1 * omega1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ProblemParams;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn knudsen_conversions() {
        assert_relative_eq!(knudsen_of(1.0), 0.886_226_925_452_758, epsilon = 1e-15);
        assert_relative_eq!(knudsen_of(4.0 / PI), 1.0, epsilon = 1e-15);
        assert_relative_eq!(knudsen_of(0.01), 0.088_622_692_545_275_8, epsilon = 1e-15);
        assert_relative_eq!(omega_of_knudsen(knudsen_of(0.37)), 0.37, epsilon = 1e-15);
    }

    #[test]
    fn slip_constant_value() {
        let v = slip_constant(&cfg()).unwrap();
        assert_relative_eq!(v, 1.016, epsilon = 2e-3);
        assert_relative_eq!(slip_coefficient(&cfg()).unwrap(), 2.0 * v / SQRT_PI, epsilon = 1e-15);
    }

    #[test]
    fn free_molecular_values() {
        let c = free_molecular_coefficients(&cfg()).unwrap();
        assert_relative_eq!(c.c0, 0.5 / SQRT_PI, epsilon = 1e-12);
        assert_relative_eq!(c.c1, 0.053, epsilon = 1e-3);
        assert_relative_eq!(c.c2, 0.022, epsilon = 1e-3);
        assert!(matches!(free_molecular_series(1.0, &cfg()), Err(Error::DomainOfValidity { .. })));
    }

    #[test]
    fn hydrodynamic_reference_shape() {
        assert_eq!(hydrodynamic_reference(0.0, 0.3), C64::new(1.0, 0.0));
        // e-folding depth at omega1 = 0.01: 1 / Re(z0 / eta0) = 1 / (sqrt(w)(1 - w)).
        let w: f64 = 0.01;
        let rate = (C64::new(1.0, -w) * 2.0 * w.sqrt() / C64::new(1.0, 1.0)).re;
        assert_relative_eq!(1.0 / rate, 10.101_010_101_010_1, max_relative = 1e-12);
        assert_relative_eq!(hydrodynamic_reference(1.0 / rate, w).norm(), (-1.0f64).exp(), epsilon = 1e-14);
        // Decay and phase rates are nearly equal at small omega1.
        let v = hydrodynamic_reference(3.0, 1e-6);
        assert_relative_eq!(-v.norm().ln(), v.arg(), max_relative = 1e-5);
    }

    #[test]
    fn series_reduces_at_full_accommodation() {
        let e = friction_knudsen_expansion(0.05, 1.0, 2, &cfg()).unwrap();
        assert_eq!(e.l1, 0.0);
        let a = slip_form(0.05, 1.0, &cfg()).unwrap();
        let b = diffuse_slip_form(0.05, &cfg()).unwrap();
        assert_eq!(a, b);
        assert!(!friction_knudsen_expansion(0.5, 1.0, 1, &cfg()).unwrap().in_domain);
        assert!(friction_knudsen_expansion(0.05, 1.0, 3, &cfg()).is_err());
    }

    #[test]
    fn friction_consistency() {
        let sd = SpectralData::new(ProblemParams::new(0.5, 0.5).unwrap(), &cfg()).unwrap();
        let sol = Solution::new(&sd, 1.0).unwrap();
        let (amp, phase, f) = friction_force(&sol);
        let k = sd.kappa() as f64;
        let expected = (0.5 * (sd.v1() - k * sd.eta0_or_zero())).norm() / (1.0 + sol.coefficients().q_kappa).norm();
        assert_relative_eq!(amp, expected, epsilon = 1e-14);
        assert_relative_eq!(phase, f.arg(), epsilon = 1e-15);
        // Phase decomposition arg(V1 - kappa eta0) + pi/2 - arg(1 + Q), mod 2 pi.
        let decomposed = (sd.v1() - k * sd.eta0_or_zero()).arg() + PI / 2.0 - (1.0 + sol.coefficients().q_kappa).arg();
        let diff = (decomposed - phase).rem_euclid(2.0 * PI);
        assert!(diff < 1e-12 || 2.0 * PI - diff < 1e-12);
    }

    #[test]
    fn free_molecular_friction_and_power() {
        let obs = WallObservables::at(10.0, 1.0, &cfg()).unwrap();
        let series = free_molecular_series(10.0, &cfg()).unwrap();
        assert!((obs.friction_factor - series).norm() / series.norm() < 1e-2);
        assert_relative_eq!(obs.dissipation_normalized, 0.2818, max_relative = 1e-2);
    }

    #[test]
    fn dissipation_vanishes_at_low_frequency() {
        let w: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&w| WallObservables::at(w, 1.0, &cfg()).unwrap().dissipation_normalized).collect();
        assert!(w[0] > w[1] && w[1] > w[2] && w[2] > 0.0);
    }

    #[test]
    fn low_frequency_friction_matches_leading_series() {
        let w = 1e-3;
        let obs = WallObservables::at(w, 1.0, &cfg()).unwrap();
        let lead = friction_knudsen_expansion(knudsen_of(w), 1.0, 1, &cfg()).unwrap().factor;
        assert!((obs.friction_factor - lead).norm() / lead.norm() < 0.05);
    }
}
