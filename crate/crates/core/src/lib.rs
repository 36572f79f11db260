//! Oscillating-plate (second Stokes) problem for a rarefied gas.
//!
//! The gas fills the half-space `x > 0` above a plate oscillating in its own
//! plane as `u0 exp(-i omega t)`. Molecules obey the linearized BGK equation
//! and reflect from the plate with Cercignani's tangential-momentum
//! accommodation condition (coefficient `q`).
//!
//! The crate builds the closed-form solution in stages:
//!
//! * [`dispersion`]: the dispersion function `lambda(z)`, its boundary values
//!   on the real axis, the coefficient `G = lambda+ / lambda-` and the index.
//! * [`riemann`]: the factorizing function `X(z)` of the homogeneous Riemann
//!   problem, the constant `V1` and the discrete zero `eta0`.
//! * [`solution`]: expansion coefficients, the distribution function and the
//!   velocity field.
//! * [`observables`]: friction force, dissipated power and the Knudsen-number
//!   and free-molecular asymptotics.
//!
//! [`oracle`] is an independent discrete-ordinates solver of the same kinetic
//! boundary-value problem used to cross-check the analytic results. It shares
//! nothing with the analytic chain beyond the quadrature primitives.
//!
//! ```no_run
//! use stokes2_kinetic::{ProblemParams, QuadratureConfig, SpectralData, Solution};
//!
//! let cfg = QuadratureConfig::default();
//! let params = ProblemParams::new(0.1, 0.75).unwrap();
//! let spectral = SpectralData::new(params, &cfg).unwrap();
//! let solution = Solution::new(&spectral, 1.0).unwrap();
//! let (amplitude, phase) = solution.wall_velocity();
//! println!("|A| = {amplitude}, phase = {phase}");
//! ```

pub mod dispersion;
mod error;
pub mod figures;
pub mod observables;
pub mod oracle;
mod params;
pub mod quadrature;
pub mod report;
pub mod riemann;
pub mod solution;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use observables::WallObservables;
pub use params::{ProblemParams, QuadratureConfig};
pub use riemann::SpectralData;
pub use solution::{ExpansionCoefficients, Solution};

/// Complex scalar used for every complex-valued quantity in the crate.
pub type C64 = num_complex::Complex64;

/// Version string stamped into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516;

pub(crate) fn check_finite(z: C64, what: &'static str) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}
