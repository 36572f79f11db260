//! Expansion of the distribution function over the eigenfunctions of the
//! kinetic equation, the boundary constants and the velocity field.
//!
//! With `S = U0 q + d` and `g(eta) = sin zeta(eta) / X(eta)` the coefficients are
//! `a0 = 2 sqrt(pi) S / (eta0 X(eta0))` (only when kappa = 1) and
//! `a(eta) = 2 S g(eta) / (sqrt(pi) eta (eta - eta0)^kappa)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dispersion;
use crate::quadrature::Tolerance;
use crate::riemann::SpectralData;
use crate::{Error, Result, C64, SQRT_PI};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest `|mu|` at which the distribution function is evaluated; beyond it
/// `exp(mu^2)` leaves the double range.
pub const MU_LIMIT: f64 = 25.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpansionCoefficients {
    /// Discrete-spectrum coefficient, zero when kappa = 0.
    pub a0: C64,
    pub d: C64,
    pub q_kappa: C64,
    /// `U0 q + d`.
    pub s: C64,
    pub u0: f64,
}

impl ExpansionCoefficients {
    pub fn compute(sd: &SpectralData, u0: f64) -> Result<Self> {
        if !(u0.is_finite() && u0 != 0.0) {
            return Err(Error::InvalidParameter(format!("U0 must be finite and nonzero, got {u0}")));
        }
        let p = sd.params();
        let q = p.q();
        if q < 1e-6 {
            return Err(Error::SpecularLimit(q));
        }
        let c = moment_constant(sd);
        let (q_kappa, s, d) = if q == 1.0 {
            (C64::new(0.0, 0.0), C64::new(u0, 0.0), C64::new(0.0, 0.0))
        } else {
            let q_kappa = c * ((1.0 - q) / q);
            let s = u0 / (1.0 + q_kappa);
            (q_kappa, s, s - u0 * q)
        };
        let a0 = match sd.eta0() {
            Some(e) => 2.0 * SQRT_PI * s / (e * sd.x(e)?),
            None => C64::new(0.0, 0.0),
        };
        Ok(Self {
            a0: crate::check_finite(a0, "a0")?,
            d: crate::check_finite(d, "d")?,
            q_kappa: crate::check_finite(q_kappa, "Q")?,
            s: crate::check_finite(s, "U0 q + d")?,
            u0,
        })
    }
}

/// `2 sqrt(pi) i omega1 (V1 - kappa eta0)`: the wall moment per unit `S`.
pub(crate) fn moment_constant(sd: &SpectralData) -> C64 {
    let k = sd.kappa() as f64;
    2.0 * SQRT_PI * I * sd.params().omega1() * (sd.v1() - k * sd.eta0_or_zero())
}

/// Complex velocity amplitudes on a grid of distances from the plate.
#[derive(Debug, Clone, Serialize)]
pub struct VelocityProfile {
    pub x: Vec<f64>,
    pub values: Vec<C64>,
    pub u0: f64,
}

/// Distribution function at a fixed distance from the plate.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionSlice {
    pub x: f64,
    pub mu: Vec<f64>,
    pub values: Vec<C64>,
}

/// Quadrature of the wall moment `int exp(-mu^2) mu h(0, mu) dmu` against the
/// accommodation condition.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentCheck {
    pub integral: C64,
    pub expected: C64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Solution<'a> {
    sd: &'a SpectralData,
    coeffs: ExpansionCoefficients,
    x_eta0: Option<C64>,
}

impl<'a> Solution<'a> {
    pub fn new(sd: &'a SpectralData, u0: f64) -> Result<Self> {
        let coeffs = ExpansionCoefficients::compute(sd, u0)?;
        let x_eta0 = sd.eta0().map(|e| sd.x(e)).transpose()?;
        Ok(Self { sd, coeffs, x_eta0 })
    }

    pub fn spectral(&self) -> &'a SpectralData {
        self.sd
    }

    pub fn coefficients(&self) -> &ExpansionCoefficients {
        &self.coeffs
    }

    fn tolerance(&self) -> Tolerance {
        let tol = self.sd.config().tol;
        Tolerance { abs: tol * 1e-2, rel: tol * 10.0, max_intervals: self.sd.config().max_panels }
    }

    fn pole(&self, eta: f64) -> C64 {
        match self.sd.eta0() {
            Some(e) => eta - e,
            None => C64::new(1.0, 0.0),
        }
    }

    /// `int g(eta) k(eta) / (eta - eta0) d eta` for `k` analytic near `eta0`:
    /// the pole goes into the Cauchy transform of the table, the remainder is smooth.
    fn pole_integral<K: Fn(C64) -> C64>(&self, e: C64, k: K, what: &'static str) -> Result<C64> {
        let table = self.sd.g_table();
        let ke = k(e);
        let breaks: Vec<f64> = [e.re].into_iter().filter(|&b| b > 0.0 && b < self.sd.config().cutoff).collect();
        let smooth =
            table.integrate_adaptive(|eta, g| g * (k(C64::new(eta, 0.0)) - ke) / (eta - e), &breaks, self.tolerance(), what)?;
        Ok(smooth + ke * table.cauchy(e))
    }

    /// `int g(eta) exp(-x z0 / eta) / (eta - mu) d eta`, principal value for `mu` on the cut.
    fn cut_integral(&self, x: f64, mu: f64) -> Result<C64> {
        let z0 = self.sd.params().z0();
        let t = self.sd.config().cutoff;
        let table = self.sd.g_table();
        let decay = |eta: f64| if x == 0.0 { 1.0.into() } else { (-x * z0 / eta).exp() };
        if x == 0.0 {
            return Ok(if mu < 0.0 || mu >= t { table.cauchy(C64::new(mu, 0.0)) } else { table.cauchy_pv(mu) });
        }
        if mu < 0.0 || mu >= t {
            return table.integrate_adaptive(|eta, g| g * decay(eta) / (eta - mu), &[], self.tolerance(), "distribution");
        }
        let f_mu = table.eval(mu) * decay(mu);
        let sub = table.integrate_adaptive(|eta, g| (g * decay(eta) - f_mu) / (eta - mu), &[mu], self.tolerance(), "distribution")?;
        Ok(sub + f_mu * ((t - mu) / mu).ln())
    }

    /// Continuous-spectrum coefficient `a(eta)`.
    pub fn continuous_coefficient(&self, eta: f64) -> Result<C64> {
        let g = self.sd.g(eta)?;
        Ok(2.0 * self.coeffs.s * g / (SQRT_PI * eta * self.pole(eta)))
    }

    /// Discrete-mode term `exp(-x z0 / eta0) / (eta0 X(eta0))`, zero when kappa = 0.
    fn discrete_velocity(&self, x: f64) -> C64 {
        match (self.sd.eta0(), self.x_eta0) {
            (Some(e), Some(xe)) => (-x * self.sd.params().z0() / e).exp() / (e * xe),
            _ => C64::new(0.0, 0.0),
        }
    }

    /// Velocity amplitude `U(x)` (the `exp(-i omega1 t)` factor stripped).
    pub fn velocity(&self, x: f64) -> Result<C64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidParameter(format!("x must be nonnegative, got {x}")));
        }
        let z0 = self.sd.params().z0();
        let table = self.sd.g_table();
        let integral = match self.sd.eta0() {
            Some(e) => self.pole_integral(e, |eta| (-x * z0 / eta).exp() / eta, "velocity")?,
            None if x == 0.0 => table.integral_with(|eta| C64::new(1.0 / eta, 0.0)),
            None => table.integrate_adaptive(|eta, g| g * (-x * z0 / eta).exp() / eta, &[], self.tolerance(), "velocity")?,
        };
        crate::check_finite(z0 * self.coeffs.s * (self.discrete_velocity(x) + integral / PI), "velocity")
    }

    pub fn velocity_profile(&self, xs: &[f64]) -> Result<VelocityProfile> {
        let values = crate::sweep::try_map(xs, |&x| self.velocity(x))?;
        Ok(VelocityProfile { x: xs.to_vec(), values, u0: self.coeffs.u0 })
    }

    /// Wall-velocity factor `U(0) / U0` by quadrature of the expansion.
    pub fn wall_factor(&self) -> Result<C64> {
        Ok(self.velocity(0.0)? / self.coeffs.u0)
    }

    /// Closed form of the wall-velocity factor.
    pub fn wall_factor_closed_form(&self) -> C64 {
        let p = self.sd.params();
        let w = p.omega1();
        let z0 = p.z0();
        let denom = 1.0 + self.coeffs.q_kappa;
        if self.sd.kappa() == 1 {
            (z0 - (w * z0).sqrt() * C64::from_polar(1.0, -PI / 4.0)) / denom
        } else {
            let r = C64::new(w, 1.0).sqrt();
            z0 * (r - w.sqrt()) / (r * denom)
        }
    }

    /// `(|A|, arg A)` of the wall-velocity factor.
    pub fn wall_velocity(&self) -> (f64, f64) {
        let a = self.wall_factor().unwrap_or_else(|_| self.wall_factor_closed_form());
        (a.norm(), a.arg())
    }

    /// Distribution of molecules arriving at the plate (`mu < 0`), closed form.
    pub fn distribution_at_wall(&self, mu: f64) -> Result<C64> {
        if mu.is_nan() || mu >= 0.0 {
            return Err(Error::NonNegativeArgument(mu));
        }
        let x = self.sd.x(C64::new(mu, 0.0))?;
        let bracket = match self.sd.eta0() {
            Some(e) => 1.0 - 1.0 / ((mu - e) * x),
            None => 1.0 - 1.0 / x,
        };
        crate::check_finite(2.0 * self.coeffs.s * bracket, "h(0, mu)")
    }

    /// Same quantity by quadrature of the eigenfunction expansion.
    pub fn distribution_at_wall_quadrature(&self, mu: f64) -> Result<C64> {
        if mu.is_nan() || mu >= 0.0 {
            return Err(Error::NonNegativeArgument(mu));
        }
        self.distribution(0.0, mu)
    }

    /// `h(x, mu)` from the expansion, `0 < |mu| <= MU_LIMIT`.
    pub fn distribution(&self, x: f64, mu: f64) -> Result<C64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidParameter(format!("x must be nonnegative, got {x}")));
        }
        if mu == 0.0 {
            return Err(Error::ZeroArgument);
        }
        if !(mu.abs() <= MU_LIMIT) {
            return Err(Error::InvalidParameter(format!("|mu| must not exceed {MU_LIMIT}, got {mu}")));
        }
        let p = self.sd.params();
        let z0 = p.z0();
        let s = self.coeffs.s;
        let decay = |eta: C64| if x == 0.0 { C64::new(1.0, 0.0) } else { (-x * z0 / eta).exp() };
        let discrete = match (self.sd.eta0(), self.x_eta0) {
            (Some(e), Some(xe)) => (-x * z0 / e).exp() / (xe * (e - mu)),
            _ => C64::new(0.0, 0.0),
        };
        let integral = match self.sd.eta0() {
            Some(e) => (self.pole_integral(e, decay, "distribution")? - self.cut_integral(x, mu)?) / (e - mu),
            None => self.cut_integral(x, mu)?,
        };
        let mut h = 2.0 * s * (discrete + integral / PI);
        if mu > 0.0 {
            // Singular part of the eigenfunction at eta = mu.
            let lam = dispersion::lambda_pv(mu, p, self.sd.config())?;
            let a = self.continuous_coefficient(mu)?;
            h += (-x * z0 / mu + mu * mu).exp() * lam * a;
        }
        crate::check_finite(h, "h(x, mu)")
    }

    pub fn distribution_slice(&self, x: f64, mus: &[f64]) -> Result<DistributionSlice> {
        let values = crate::sweep::try_map(mus, |&mu| self.distribution(x, mu))?;
        Ok(DistributionSlice { x, mu: mus.to_vec(), values })
    }

    /// Largest `|h(0, mu) - 2 S| / |2 S|` over the given outgoing directions.
    pub fn boundary_residual(&self, mus: &[f64]) -> Result<f64> {
        let target = 2.0 * self.coeffs.s;
        let values = crate::sweep::try_map(mus, |&mu| {
            if mu <= 0.0 {
                return Err(Error::NonPositiveArgument(mu));
            }
            self.distribution(0.0, mu)
        })?;
        Ok(values.iter().map(|h| (h - target).norm() / target.norm()).fold(0.0, f64::max))
    }

    /// Wall moment of the reconstructed distribution against the right-hand
    /// side of the accommodation condition, `q (U0 - d / (1 - q))`.
    pub fn moment_check(&self) -> Result<MomentCheck> {
        let t = self.sd.config().cutoff;
        let tol = self.tolerance();
        let outgoing = crate::quadrature::integrate(
            |mu| self.distribution(0.0, mu).map(|h| h * (mu * (-mu * mu).exp())).unwrap_or(C64::new(f64::NAN, 0.0)),
            0.0,
            t,
            tol,
            "wall moment",
        )?;
        let incoming = crate::quadrature::integrate(
            |mu| self.distribution_at_wall(mu).map(|h| h * (mu * (-mu * mu).exp())).unwrap_or(C64::new(f64::NAN, 0.0)),
            -t,
            0.0,
            tol,
            "wall moment",
        )?;
        let integral = outgoing + incoming;
        let q = self.sd.params().q();
        let c = &self.coeffs;
        let expected = if q < 1.0 {
            q * (c.u0 - c.d / (1.0 - q))
        } else {
            // q -> 1 limit of the same expression.
            q * c.u0 * (moment_constant(self.sd) + c.q_kappa) / (1.0 + c.q_kappa)
        };
        let relative_residual = (integral - expected).norm() / expected.norm().max(f64::MIN_POSITIVE);
        Ok(MomentCheck { integral, expected, relative_residual })
    }
}
