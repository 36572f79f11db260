use proptest::prelude::*;
use stokes2_kinetic::figures::{self, Sweep};
use stokes2_kinetic::observables::{self, WallObservables};
use stokes2_kinetic::oracle::{self, OracleConfig};
use stokes2_kinetic::{sweep, ProblemParams, QuadratureConfig, Solution, SpectralData, C64};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn dissipation_nonnegative_on_grid() {
    let omegas = Sweep { start: 0.05, stop: 10.0, count: 24, log: true }.partition(&cfg()).unwrap().0;
    let grid = figures::observables_grid(&omegas, &[0.25, 0.5, 0.75, 1.0], &cfg()).unwrap();
    for row in &grid {
        for o in row {
            assert!(o.dissipation_normalized >= 0.0, "omega1={} q={}", o.omega1, o.q);
        }
    }
}

#[test]
fn hydrodynamic_deviation_shrinks() {
    let dev = |w: f64| {
        let sd = SpectralData::new(ProblemParams::new(w, 1.0).unwrap(), &cfg()).unwrap();
        let sol = Solution::new(&sd, 1.0).unwrap();
        (0..40)
            .map(|j| j as f64 * 0.5 / w.sqrt())
            .map(|x| (sol.velocity(x).unwrap() - observables::hydrodynamic_reference(x, w)).norm())
            .fold(0.0, f64::max)
    };
    let d: Vec<f64> = [0.1, 0.03, 0.01].into_iter().map(dev).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn wall_velocity_tends_to_no_slip() {
    let a = |w: f64| WallObservables::at(w, 1.0, &cfg()).unwrap().a_kappa;
    let d: Vec<f64> = [0.1, 0.01, 1e-3].into_iter().map(|w| (a(w) - 1.0).norm()).collect();
    assert!(d[0] > d[1] && d[1] > d[2] && d[2] < 0.05, "{d:?}");
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let omegas = [0.05, 0.2, 1.5, 4.0];
    let f = |&w: &f64| WallObservables::at(w, 0.75, &cfg()).unwrap().friction_factor;
    let a = sweep::map(&omegas, f);
    let b = sweep::map_sequential(&omegas, f);
    assert_eq!(a, b);
}

#[test]
fn oracle_profile_matches_expansion() {
    let p = ProblemParams::new(0.5, 0.75).unwrap();
    let sd = SpectralData::new(p, &cfg()).unwrap();
    let sol = Solution::new(&sd, 1.0).unwrap();
    let o = oracle::solve_kinetic(&p, 1.0, &OracleConfig { n_mu: 64, ..OracleConfig::default() }).unwrap();
    for x in [0.1, 1.0, 5.0] {
        let exact = sol.velocity(x).unwrap();
        let approx = o.velocity_at(x).unwrap();
        assert!((approx - exact).norm() / exact.norm() < 1e-2, "x={x}");
    }
}

#[test]
fn oracle_agrees_across_the_index_transition() {
    for w in [0.6, 0.8] {
        let p = ProblemParams::new(w, 0.5).unwrap();
        let exact = WallObservables::at(w, 0.5, &cfg()).unwrap();
        let o = oracle::oracle_moments(&oracle::solve_kinetic(&p, 1.0, &OracleConfig::default()).unwrap());
        assert!((o.friction_factor - exact.friction_factor).norm() / exact.friction_factor.norm() < 1e-2, "omega1={w}");
    }
}

#[test]
fn figures_are_deterministic() {
    let s = Sweep { start: 0.1, stop: 3.0, count: 6, log: true };
    let a = figures::figures(&s, &cfg()).unwrap();
    let b = figures::figures(&s, &cfg()).unwrap();
    for ((_, ta), (_, tb)) in a.tables.iter().zip(&b.tables) {
        assert_eq!(ta.to_string(stokes2_kinetic::report::Format::Csv), tb.to_string(stokes2_kinetic::report::Format::Csv));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn velocity_linear_in_amplitude(w in 0.05f64..5.0, q in 0.1f64..1.0, u0 in 0.1f64..10.0, x in 0.0f64..8.0) {
        prop_assume!((w - 0.6973).abs() > 2e-3);
        let sd = SpectralData::new(ProblemParams::new(w, q).unwrap(), &cfg()).unwrap();
        let one = Solution::new(&sd, 1.0).unwrap().velocity(x).unwrap();
        let many = Solution::new(&sd, u0).unwrap().velocity(x).unwrap();
        prop_assert!((many - one * u0).norm() <= 1e-10 * u0 * one.norm().max(1e-3));
    }

    #[test]
    fn wall_routes_agree(w in 0.05f64..8.0, q in 0.1f64..1.0) {
        prop_assume!((w - 0.6973).abs() > 2e-3);
        let sd = SpectralData::new(ProblemParams::new(w, q).unwrap(), &cfg()).unwrap();
        let sol = Solution::new(&sd, 1.0).unwrap();
        let a = sol.wall_factor().unwrap();
        let b = sol.wall_factor_closed_form();
        prop_assert!((a - b).norm() < 1e-8 * b.norm());
    }

    #[test]
    fn boundary_condition_holds(w in 0.05f64..8.0, q in 0.1f64..1.0, mu in 0.01f64..6.0) {
        prop_assume!((w - 0.6973).abs() > 2e-3);
        let sd = SpectralData::new(ProblemParams::new(w, q).unwrap(), &cfg()).unwrap();
        let sol = Solution::new(&sd, 1.0).unwrap();
        let h = sol.distribution(0.0, mu).unwrap();
        let target: C64 = 2.0 * sol.coefficients().s;
        prop_assert!((h - target).norm() < 1e-8 * target.norm());
    }
}

#[test]
fn wall_routes_agree_next_to_the_transition() {
    for w in [0.68, 0.69, 0.695, 0.699] {
        let sd = SpectralData::new(ProblemParams::new(w, 0.5).unwrap(), &cfg()).unwrap();
        let sol = Solution::new(&sd, 1.0).unwrap();
        let b = sol.wall_factor_closed_form();
        assert!((sol.wall_factor().unwrap() - b).norm() < 1e-9 * b.norm(), "omega1={w}");
        assert!(sol.boundary_residual(&[0.5, 0.93, 2.0]).unwrap() < 1e-9, "omega1={w}");
    }
}
