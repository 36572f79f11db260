//! Data behind the five standard plots: wall velocity amplitude and phase,
//! friction amplitude and phase, and dissipated power against `omega1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::observables::WallObservables;
use crate::report::{Header, Table};
use crate::riemann::SpectralData;
use crate::solution::Solution;
use crate::{dispersion, Error, ProblemParams, QuadratureConfig, Result};

/// Accommodation coefficients of figures 1 to 4.
pub const Q_VELOCITY: [f64; 3] = [1.0, 0.75, 0.5];
/// Accommodation coefficients of figure 5.
pub const Q_POWER: [f64; 3] = [1.0, 0.5, 0.25];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl Default for Sweep {
    fn default() -> Self {
        Self { start: 0.02, stop: 10.0, count: 60, log: true }
    }
}

impl Sweep {
    pub fn single(omega1: f64) -> Self {
        Self { start: omega1, stop: omega1, count: 1, log: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.stop >= self.start && self.stop.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad sweep bounds {}..{}", self.start, self.stop)));
        }
        if self.count == 0 || (self.count == 1 && self.start != self.stop) {
            return Err(Error::InvalidParameter(format!("bad sweep count {}", self.count)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / n;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }

    /// Points outside the guard band and whether any were dropped.
    pub fn partition(&self, cfg: &QuadratureConfig) -> Result<(Vec<f64>, bool)> {
        self.validate()?;
        let transition = dispersion::transition_frequency(cfg)?;
        let all = self.points();
        let kept: Vec<f64> = all.iter().copied().filter(|w| (w - transition).abs() > cfg.guard_band).collect();
        let dropped = kept.len() != all.len();
        Ok((kept, dropped))
    }
}

/// Observables for every `(omega1, q)` pair, reusing the spectrum across `q`.
pub fn observables_grid(omegas: &[f64], qs: &[f64], cfg: &QuadratureConfig) -> Result<Vec<Vec<WallObservables>>> {
    crate::sweep::try_map(omegas, |&w| {
        let sd = SpectralData::new(ProblemParams::new(w, 1.0)?, cfg)?;
        qs.iter()
            .map(|&q| {
                let sd_q = sd.with_q(q)?;
                WallObservables::compute(&Solution::new(&sd_q, 1.0)?)
            })
            .collect()
    })
}

/// Remove `2 pi` jumps along a sequence of phases.
pub fn unwrap_phase(phases: &mut [f64]) {
    for k in 1..phases.len() {
        let d = phases[k] - phases[k - 1];
        phases[k] -= 2.0 * PI * (d / (2.0 * PI)).round();
    }
}

#[derive(Debug, Clone)]
pub struct FigureSet {
    pub tables: Vec<(String, Table)>,
    pub partitioned: bool,
}

pub fn figures(sweep: &Sweep, cfg: &QuadratureConfig) -> Result<FigureSet> {
    let (omegas, partitioned) = sweep.partition(cfg)?;
    let mut qs: Vec<f64> = Q_VELOCITY.to_vec();
    qs.extend(Q_POWER.iter().filter(|q| !Q_VELOCITY.contains(q)));
    let grid = observables_grid(&omegas, &qs, cfg)?;
    let index = |q: f64| qs.iter().position(|&v| v == q).expect("q in set");

    type Pick = fn(&WallObservables) -> f64;
    let specs: [(&str, &str, &[f64; 3], Pick, bool); 5] = [
        ("fig1_wall_velocity_amplitude", "|A| per U0", &Q_VELOCITY, |o| o.a_kappa.norm(), false),
        ("fig2_wall_velocity_phase", "arg A in radians", &Q_VELOCITY, |o| o.a_kappa.arg(), true),
        ("fig3_friction_amplitude", "|F| per 2 U0 p", &Q_VELOCITY, |o| o.friction_amplitude, false),
        ("fig4_friction_phase", "arg F in radians", &Q_VELOCITY, |o| o.friction_phase, true),
        ("fig5_dissipation", "W per W0 = U0^2 p / sqrt(beta)", &Q_POWER, |o| o.dissipation_normalized, false),
    ];

    let kappas: Vec<String> = grid.iter().map(|row| row[0].kappa.to_string()).collect();
    let kappa_summary = if kappas.iter().all(|k| k == &kappas[0]) {
        kappas.first().cloned().unwrap_or_default()
    } else {
        "1 below the transition, 0 above".to_string()
    };
    let omega_label = format!("{}..{} ({} points, {})", sweep.start, sweep.stop, omegas.len(), if sweep.log { "log" } else { "linear" });

    let mut tables = Vec::new();
    for (name, normalization, q_set, pick, is_phase) in specs {
        let q_label = q_set.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(";");
        let header = Header::new(omega_label.clone(), q_label, kappa_summary.clone(), normalization);
        let mut columns = vec!["omega1".to_string(), "kappa".to_string()];
        columns.extend(q_set.iter().map(|q| format!("q={q}")));
        let mut table = Table::new(header, columns);
        table.partitioned = partitioned;
        let mut curves: Vec<Vec<f64>> = q_set.iter().map(|&q| grid.iter().map(|row| pick(&row[index(q)])).collect()).collect();
        if is_phase {
            curves.iter_mut().for_each(|c| unwrap_phase(c));
        }
        for (k, &w) in omegas.iter().enumerate() {
            let mut row = vec![w, grid[k][0].kappa as f64];
            row.extend(curves.iter().map(|c| c[k]));
            table.push(row);
        }
        tables.push((name.to_string(), table));
    }
    Ok(FigureSet { tables, partitioned })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_points() {
        let p = Sweep::default().points();
        assert_eq!(p.len(), 60);
        assert!((p[0] - 0.02).abs() < 1e-15 && (p[59] - 10.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn guard_band_is_excised() {
        let cfg = QuadratureConfig::default();
        let t = dispersion::transition_frequency(&cfg).unwrap();
        let s = Sweep { start: t - 0.01, stop: t + 0.01, count: 3, log: false };
        let (kept, dropped) = s.partition(&cfg).unwrap();
        assert!(dropped);
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let mut v = vec![3.0, -3.1, 3.05];
        unwrap_phase(&mut v);
        assert!((v[1] - (-3.1 + 2.0 * PI)).abs() < 1e-15);
        assert!((v[2] - 3.05).abs() < 1e-15);
    }

    #[test]
    fn small_figure_set() {
        let cfg = QuadratureConfig::default();
        let set = figures(&Sweep { start: 0.1, stop: 3.0, count: 4, log: true }, &cfg).unwrap();
        assert_eq!(set.tables.len(), 5);
        for (_, t) in &set.tables {
            assert_eq!(t.columns.len(), 5);
            assert_eq!(t.rows.len(), 4);
        }
    }
}
