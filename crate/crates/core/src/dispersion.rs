//! Dispersion function `lambda(z) = -i omega1 + lambda0(z)` with
//! `lambda0(z) = (1/sqrt(pi)) int exp(-t^2) t / (t - z) dt`, its boundary
//! values on the positive real axis, the coefficient `G = lambda+ / lambda-`
//! and the index of `G`.

use std::f64::consts::PI;

use crate::quadrature::{integrate, integrate_pieces, integrate_real, Tolerance};
use crate::{Error, ProblemParams, QuadratureConfig, Result, C64, SQRT_PI};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `s(mu) = sqrt(pi) mu exp(-mu^2)`, half the jump of `lambda` across the axis.
pub fn s(mu: f64) -> f64 {
    SQRT_PI * mu * (-mu * mu).exp()
}

fn tolerance(cfg: &QuadratureConfig) -> Tolerance {
    Tolerance { abs: cfg.tol * 1e-3, rel: cfg.tol, max_intervals: cfg.max_panels }
}

/// `exp(w) - 1` for complex `w`, accurate for small `|w|`.
fn expm1(w: C64) -> C64 {
    if w.norm() < 1e-3 {
        w * (1.0 + w * (0.5 + w * (1.0 / 6.0 + w / 24.0)))
    } else {
        w.exp() - 1.0
    }
}

/// `lambda0(z)` for `z` off the real axis. `z = 0` returns the common limit 1.
pub fn lambda0(z: C64, cfg: &QuadratureConfig) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        return Ok(C64::new(1.0, 0.0));
    }
    if z.im.abs() < cfg.pv_eps {
        return Err(Error::OnRealAxis(z));
    }
    let z = if z.im < 0.0 { -z } else { z };
    let t = cfg.cutoff;
    let tol = tolerance(cfg);
    if z.im >= 1.0 || z.re.abs() > t + 1.0 {
        // Folded even form: (2/sqrt(pi)) int_0^T exp(-t^2) t^2 / (t^2 - z^2) dt
        let z2 = z * z;
        let v = integrate(|x| (x * x * (-x * x).exp()) / (x * x - z2), 0.0, t, tol, "lambda0")?;
        return crate::check_finite(v * (2.0 / SQRT_PI), "lambda0");
    }
    // Subtraction form for z close to the axis.
    let ez = (-z * z).exp();
    let f = |x: f64| ez * expm1(-(x - z) * (x + z)) / (x - z);
    let breaks: Vec<f64> = [-t, z.re.clamp(-t, t), t].to_vec();
    let core = integrate_pieces(f, &breaks, tol, "lambda0")?;
    let log_term = ez * ((t - z).ln() - (-t - z).ln());
    crate::check_finite(1.0 + z * (core + log_term) / SQRT_PI, "lambda0")
}

/// Principal value of `lambda0` on the real axis (even in `mu`).
pub fn lambda0_pv(mu: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let mu = mu.abs();
    if mu == 0.0 {
        return Ok(1.0);
    }
    let l = cfg.cutoff.max(mu + 3.0);
    let em = (-mu * mu).exp();
    let f = |x: f64| {
        let d = x - mu;
        if d.abs() < 1e-4 {
            // (exp(-x^2) - exp(-mu^2)) / (x - mu) expanded about mu
            em * (-2.0 * mu + d * (2.0 * mu * mu - 1.0) + d * d * (2.0 * mu - 4.0 * mu.powi(3) / 3.0))
        } else {
            ((-x * x).exp() - em) / d
        }
    };
    let tol = tolerance(cfg);
    let core = integrate_pieces(|x| C64::new(f(x), 0.0), &[-l, mu, l], tol, "lambda0_pv")?.re;
    let pvi = (core + em * ((l - mu) / (l + mu)).abs().ln()) / SQRT_PI;
    let v = 1.0 + mu * pvi;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("lambda0_pv"))
    }
}

pub fn lambda(z: C64, p: &ProblemParams, cfg: &QuadratureConfig) -> Result<C64> {
    Ok(lambda0(z, cfg)? - I * p.omega1())
}

/// `(lambda+(mu), lambda-(mu))`, limits from the upper and lower half-planes.
pub fn boundary_values(mu: f64, p: &ProblemParams, cfg: &QuadratureConfig) -> Result<(C64, C64)> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::NonPositiveArgument(mu));
    }
    boundary_values_unchecked(mu, p, cfg)
}

fn boundary_values_unchecked(mu: f64, p: &ProblemParams, cfg: &QuadratureConfig) -> Result<(C64, C64)> {
    let a = C64::new(lambda0_pv(mu, cfg)?, -p.omega1());
    let js = I * s(mu);
    Ok((a + js, a - js))
}

/// Principal-value boundary value `lambda0_pv(mu) - i omega1`.
pub fn lambda_pv(mu: f64, p: &ProblemParams, cfg: &QuadratureConfig) -> Result<C64> {
    Ok(C64::new(lambda0_pv(mu, cfg)?, -p.omega1()))
}

pub fn coefficient_g(mu: f64, p: &ProblemParams, cfg: &QuadratureConfig) -> Result<C64> {
    let (plus, minus) = boundary_values(mu, p, cfg)?;
    if minus.norm() < 1e-14 {
        return Err(Error::ZeroDenominator(mu));
    }
    Ok(plus / minus)
}

/// `(Arg G(mu), ln|G(mu)|)` computed without cancellation, so both stay
/// accurate in relative terms where `G` is exponentially close to 1.
/// Valid for `mu >= 0`.
pub fn log_g(mu: f64, p: &ProblemParams, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let a = C64::new(lambda0_pv(mu, cfg)?, -p.omega1());
    let sm = s(mu);
    // lambda+ conj(lambda-) = |a|^2 - s^2 + 2 i s Re a
    let arg = (2.0 * sm * a.re).atan2(a.norm_sqr() - sm * sm);
    // |a + i s|^2 / |a - i s|^2 = 1 + 4 s Im(a) / |a - i s|^2
    let minus = a - I * sm;
    if minus.norm() < 1e-14 {
        return Err(Error::ZeroDenominator(mu));
    }
    let ln_abs = 0.5 * (4.0 * sm * a.im / minus.norm_sqr()).ln_1p();
    Ok((arg, ln_abs))
}

/// Continuous branch of `arg G(t)` on `[0, cutoff]`, anchored at `arg G(0) = 0`.
///
/// The branch is sampled densely; intervals across which the continued
/// argument moves by more than `pi/8` are bisected. A step above `pi/2` that
/// survives refinement down to round-off is reported as a tracking failure.
#[derive(Debug, Clone)]
pub struct PhaseBranch {
    taus: Vec<f64>,
    args: Vec<f64>,
}

impl PhaseBranch {
    pub fn track(p: &ProblemParams, cfg: &QuadratureConfig) -> Result<Self> {
        let t_max = cfg.cutoff;
        let n0 = (t_max * 100.0).ceil() as usize;
        let grid: Vec<f64> = (0..=n0).map(|k| t_max * k as f64 / n0 as f64).collect();
        let raw: Vec<f64> = crate::sweep::try_map(&grid, |&t| log_g(t, p, cfg).map(|v| v.0))?;
        let mut taus = vec![grid[0]];
        let mut args = vec![raw[0]];
        for k in 1..grid.len() {
            let mut stack = vec![(grid[k], raw[k])];
            while let Some(&(tb, rb)) = stack.last() {
                let (ta, ca) = (*taus.last().unwrap(), *args.last().unwrap());
                let cb = nearest_branch(rb, ca);
                if (cb - ca).abs() <= PI / 8.0 {
                    taus.push(tb);
                    args.push(cb);
                    stack.pop();
                    continue;
                }
                let tm = 0.5 * (ta + tb);
                if tm <= ta || tm >= tb || tb - ta < 1e-13 {
                    if (cb - ca).abs() > PI / 2.0 {
                        return Err(Error::BranchTrackingFailure(tb));
                    }
                    taus.push(tb);
                    args.push(cb);
                    stack.pop();
                    continue;
                }
                stack.push((tm, log_g(tm, p, cfg)?.0));
            }
        }
        Ok(Self { taus, args })
    }

    /// Continuous `arg G(t)` given the principal value `raw = Arg G(t)`.
    pub fn continue_arg(&self, t: f64, raw: f64) -> f64 {
        nearest_branch(raw, self.reference(t))
    }

    fn reference(&self, t: f64) -> f64 {
        let k = self.taus.partition_point(|&x| x < t);
        if k == 0 {
            return self.args[0];
        }
        if k >= self.taus.len() {
            return *self.args.last().unwrap();
        }
        let (t0, t1) = (self.taus[k - 1], self.taus[k]);
        let (a0, a1) = (self.args[k - 1], self.args[k]);
        a0 + (a1 - a0) * (t - t0) / (t1 - t0)
    }

    /// Total change of the continuous argument over `[0, cutoff]`.
    pub fn total(&self) -> f64 {
        self.args.last().unwrap() - self.args[0]
    }

    /// Winding number of `G` along the half-line.
    pub fn winding(&self) -> i32 {
        (self.total() / (2.0 * PI)).round() as i32
    }

    pub fn samples(&self) -> usize {
        self.taus.len()
    }
}

fn nearest_branch(raw: f64, reference: f64) -> f64 {
    raw + 2.0 * PI * ((reference - raw) / (2.0 * PI)).round()
}

/// Zero of `lambda0_pv` on the positive axis: the only point where `lambda+`
/// can cross the imaginary axis.
pub fn lambda0_pv_zero(cfg: &QuadratureConfig) -> Result<f64> {
    let (mut lo, mut hi) = (0.5, 1.5);
    let mut f_lo = lambda0_pv(lo, cfg)?;
    if f_lo <= 0.0 || lambda0_pv(hi, cfg)? >= 0.0 {
        return Err(Error::MaximizationFailure("lambda0_pv zero not bracketed"));
    }
    while hi - lo > 1e-15 {
        let m = 0.5 * (lo + hi);
        let f_m = lambda0_pv(m, cfg)?;
        if (f_m > 0.0) == (f_lo > 0.0) {
            lo = m;
            f_lo = f_m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Frequency at which `lambda+` passes through zero and the index of `G`
/// changes between 1 and 0.
pub fn transition_frequency(cfg: &QuadratureConfig) -> Result<f64> {
    Ok(s(lambda0_pv_zero(cfg)?))
}

/// `max_mu sqrt(s(mu)^2 - lambda0_pv(mu)^2)` over the region where the
/// radicand is nonnegative.
pub fn critical_frequency(cfg: &QuadratureConfig) -> Result<f64> {
    let radicand = |mu: f64| -> Result<f64> {
        let l = lambda0_pv(mu, cfg)?;
        let sm = s(mu);
        Ok(sm * sm - l * l)
    };
    // Coarse scan for a bracket.
    let grid: Vec<f64> = (1..=120).map(|k| 0.025 * k as f64).collect();
    let vals = grid.iter().map(|&m| radicand(m)).collect::<Result<Vec<_>>>()?;
    let (k, &best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::MaximizationFailure("empty scan"))?;
    if best < 0.0 {
        return Err(Error::MaximizationFailure("radicand negative everywhere"));
    }
    if k == 0 || k + 1 == grid.len() {
        return Err(Error::MaximizationFailure("maximum not bracketed"));
    }
    let (mut a, mut b) = (grid[k - 1], grid[k + 1]);
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (radicand(c)?, radicand(d)?);
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = radicand(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = radicand(d)?;
        }
    }
    Ok(radicand(0.5 * (a + b))?.max(0.0).sqrt())
}

/// Guard-band check around the index transition.
pub fn check_guard(p: &ProblemParams, cfg: &QuadratureConfig) -> Result<()> {
    let transition = transition_frequency(cfg)?;
    if (p.omega1() - transition).abs() <= cfg.guard_band {
        return Err(Error::CriticalFrequency { omega1: p.omega1(), transition });
    }
    Ok(())
}

/// Index of `G`: 1 below the transition frequency, 0 above.
pub fn index_kappa(p: &ProblemParams, cfg: &QuadratureConfig) -> Result<i32> {
    check_guard(p, cfg)?;
    Ok(PhaseBranch::track(p, cfg)?.winding())
}

/// `int_0^T f(t) dt` for real integrands built on `lambda0_pv`.
pub(crate) fn integrate_on_cut<F: Fn(f64) -> Result<f64>>(f: F, cfg: &QuadratureConfig, what: &'static str) -> Result<f64> {
    let failure = std::cell::Cell::new(None);
    let v = integrate_real(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        0.0,
        cfg.cutoff,
        tolerance(cfg),
        what,
    )?;
    match failure.take() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    /// Dawson's integral by its Taylor series (small x) or continued fraction.
    fn dawson(x: f64) -> f64 {
        // D(x) = sum_k (-1)^k 2^k x^{2k+1} / (2k+1)!!
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            k += 1.0;
            term *= -2.0 * x * x / (2.0 * k + 1.0);
            sum += term;
            if k > 400.0 {
                break;
            }
        }
        sum
    }

    #[test]
    fn pv_matches_dawson_form() {
        for mu in [0.1, 0.5, 1.0, 2.0] {
            assert_relative_eq!(lambda0_pv(mu, &cfg()).unwrap(), 1.0 - 2.0 * mu * dawson(mu), epsilon = 1e-12);
        }
        // Beyond the series range: 1 - 7 D(3.5), D from a reference implementation.
        assert_relative_eq!(lambda0_pv(3.5, &cfg()).unwrap(), -0.047_351_151_565_295_124, epsilon = 1e-13);
    }

    #[test]
    fn lambda0_examples() {
        assert_eq!(lambda0(C64::new(0.0, 0.0), &cfg()).unwrap(), C64::new(1.0, 0.0));
        let z = C64::new(1.0, 2.0);
        assert!((lambda0(z, &cfg()).unwrap() - lambda0(-z, &cfg()).unwrap()).norm() < 1e-12);
        let z = C64::new(0.0, 10.0);
        let tail = -1.0 / (2.0 * z * z) - 3.0 / (4.0 * z.powi(4));
        assert!((lambda0(z, &cfg()).unwrap() - tail).norm() < 1e-4);
        assert!(matches!(lambda0(C64::new(0.3, 0.0), &cfg()), Err(Error::OnRealAxis(_))));
    }

    #[test]
    fn lambda_examples() {
        let p = ProblemParams::new(0.3, 1.0).unwrap();
        let far = lambda(C64::new(0.0, 50.0), &p, &cfg()).unwrap();
        assert!((far - C64::new(0.0, -0.3)).norm() / 0.3 < 1e-3);
        assert_eq!(lambda(C64::new(0.0, 0.0), &p, &cfg()).unwrap(), C64::new(1.0, -0.3));
    }

    #[test]
    fn forms_agree_across_switch() {
        // Folded and subtraction forms meet at Im z = 1.
        let c = cfg();
        for re in [-2.0, 0.0, 0.7, 3.0] {
            let a = lambda0(C64::new(re, 1.0 - 1e-9), &c).unwrap();
            let b = lambda0(C64::new(re, 1.0 + 1e-9), &c).unwrap();
            assert!((a - b).norm() < 1e-9, "re={re}");
        }
    }

    #[test]
    fn plemelj_limits() {
        let c = cfg();
        let p = ProblemParams::new(0.5, 1.0).unwrap();
        for mu in [0.2, 0.9, 1.7, 3.0] {
            let (plus, minus) = boundary_values(mu, &p, &c).unwrap();
            let up = lambda(C64::new(mu, 1e-7), &p, &c).unwrap();
            let down = lambda(C64::new(mu, -1e-7), &p, &c).unwrap();
            assert!((up - plus).norm() < 1e-6, "mu={mu}");
            assert!((down - minus).norm() < 1e-6, "mu={mu}");
            assert_relative_eq!(((plus - minus) / (2.0 * I)).re, s(mu), epsilon = 1e-15);
        }
        let (plus, minus) = boundary_values(1.0, &p, &c).unwrap();
        assert_relative_eq!((plus - minus).im / 2.0, 0.652_049_332_173_292_2, epsilon = 1e-12);
        assert!(matches!(boundary_values(0.0, &p, &c), Err(Error::NonPositiveArgument(_))));
    }

    #[test]
    fn coefficient_limits() {
        let c = cfg();
        let p = ProblemParams::new(0.1, 1.0).unwrap();
        assert!((coefficient_g(1e-9, &p, &c).unwrap() - 1.0).norm() < 1e-7);
        assert!((coefficient_g(6.0, &p, &c).unwrap() - 1.0).norm() < 1e-12);
        let g = coefficient_g(0.5, &p, &c).unwrap();
        assert!((g - C64::new(-0.141_359_591_878_252, 0.831_346_313_186_721_8)).norm() < 1e-12);
        assert!((g.norm() - 1.0).abs() > 0.1);
        let (arg, ln_abs) = log_g(0.5, &p, &c).unwrap();
        assert_relative_eq!(arg, g.arg(), epsilon = 1e-13);
        assert_relative_eq!(ln_abs, g.norm().ln(), epsilon = 1e-13);
    }

    #[test]
    fn index_examples() {
        let c = cfg();
        assert_eq!(index_kappa(&ProblemParams::new(0.1, 1.0).unwrap(), &c).unwrap(), 1);
        assert_eq!(index_kappa(&ProblemParams::new(1.0, 1.0).unwrap(), &c).unwrap(), 0);
        let t = transition_frequency(&c).unwrap();
        let r = index_kappa(&ProblemParams::new(t + 0.5 * c.guard_band, 1.0).unwrap(), &c);
        assert!(matches!(r, Err(Error::CriticalFrequency { .. })));
    }

    #[test]
    fn transition_and_critical_frequency() {
        let c = cfg();
        assert_relative_eq!(lambda0_pv_zero(&c).unwrap(), 0.924_138_873, epsilon = 1e-8);
        assert_relative_eq!(transition_frequency(&c).unwrap(), 0.697_29, epsilon = 1e-5);
        assert_relative_eq!(critical_frequency(&c).unwrap(), 0.733, epsilon = 1e-3);
        // Radicand is negative at both ends of the axis.
        assert!(s(1e-6).powi(2) - lambda0_pv(1e-6, &c).unwrap().powi(2) < 0.0);
        assert!(s(6.0).powi(2) - lambda0_pv(6.0, &c).unwrap().powi(2) < 0.0);
    }

    #[test]
    fn winding_is_one_just_below_transition() {
        let c = cfg();
        let t = transition_frequency(&c).unwrap();
        let below = ProblemParams::new(t - 2.0 * c.guard_band, 1.0).unwrap();
        let above = ProblemParams::new(t + 2.0 * c.guard_band, 1.0).unwrap();
        assert_eq!(index_kappa(&below, &c).unwrap(), 1);
        assert_eq!(index_kappa(&above, &c).unwrap(), 0);
    }

    #[test]
    fn laurent_tail_constant_is_stable() {
        let fitted = |c: &QuadratureConfig| -> f64 {
            let mut worst = 0.0_f64;
            for arg in [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0] {
                for r in [10.0, 20.0] {
                    let z = C64::from_polar(r, arg);
                    let rem = lambda0(z, c).unwrap() + 1.0 / (2.0 * z * z) + 3.0 / (4.0 * z.powi(4));
                    worst = worst.max(rem.norm() * r.powi(6));
                }
            }
            worst
        };
        let coarse = fitted(&QuadratureConfig::default());
        let fine = fitted(&QuadratureConfig { tol: 1e-13, cutoff: 8.0, ..QuadratureConfig::default() });
        assert!(coarse < 3.0 && (coarse - fine).abs() < 1e-3 * coarse);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn lambda0_is_even(re in -4.0..4.0f64, im in 0.01..5.0f64) {
            let c = cfg();
            let z = C64::new(re, im);
            let d = lambda0(z, &c).unwrap() - lambda0(-z, &c).unwrap();
            prop_assert!(d.norm() < 1e-12);
        }

        #[test]
        fn lambda0_is_schwarz_symmetric(re in -4.0..4.0f64, im in 0.01..5.0f64) {
            let c = cfg();
            let z = C64::new(re, im);
            let d = lambda0(z.conj(), &c).unwrap() - lambda0(z, &c).unwrap().conj();
            prop_assert!(d.norm() < 1e-12);
        }

        #[test]
        fn plemelj_average_is_principal_value(mu in 0.01..6.0f64, w in 0.01..5.0f64) {
            let c = cfg();
            let p = ProblemParams::new(w, 1.0).unwrap();
            let (plus, minus) = boundary_values(mu, &p, &c).unwrap();
            let avg = (plus + minus) * 0.5;
            prop_assert!((avg - lambda_pv(mu, &p, &c).unwrap()).norm() < 1e-15);
        }
    }
}
