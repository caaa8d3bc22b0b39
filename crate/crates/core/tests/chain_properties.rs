use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

use lincon_es_core::analysis::{
    aggregate, isotropy_positivity_check, run_delta_chain, run_replica, selected_g_given_delta, ChainRunConfig,
    IsotropyReport,
};
use lincon_es_core::dist::{GaussianStep, IsotropicStudentT, LinearImage};
use lincon_es_core::rng::stream;
use lincon_es_core::stats::{moving_block_bootstrap, BootstrapConfig};
use lincon_es_core::Problem;
use proptest::prelude::*;

fn gaussian_problem(lambda: usize, theta: f64, sigma: f64) -> (Problem, GaussianStep) {
    (Problem::new(2, lambda, theta, sigma).unwrap(), GaussianStep::standard(2).unwrap())
}

#[test]
fn same_seed_gives_identical_report() {
    let (p, g) = gaussian_problem(5, FRAC_PI_4, 1.0);
    let cfg = ChainRunConfig { burn_in: 1_000, steps: 50_000, replicas: 3, seed: 11, ..ChainRunConfig::default() };
    assert_eq!(run_delta_chain(&p, &g, &cfg).unwrap(), run_delta_chain(&p, &g, &cfg).unwrap());
    let other = run_delta_chain(&p, &g, &ChainRunConfig { seed: 12, ..cfg }).unwrap();
    assert_ne!(run_delta_chain(&p, &g, &cfg).unwrap().divergence_rate, other.divergence_rate);
}

#[test]
fn delta_trajectory_does_not_depend_on_sigma() {
    let cfg = ChainRunConfig { burn_in: 100, steps: 20_000, seed: 4, ..ChainRunConfig::default() };
    let (p1, g) = gaussian_problem(5, 0.9, 1.0);
    let p7 = p1.with_sigma(7.0).unwrap();
    let a = run_replica(&p1, &g, &cfg, 0, true).unwrap();
    let b = run_replica(&p7, &g, &cfg, 0, true).unwrap();
    assert_eq!(a.rows, b.rows);
    let ra = aggregate(&p1, &cfg, &[a]).unwrap();
    let rb = aggregate(&p7, &cfg, &[b]).unwrap();
    assert!((rb.divergence_rate.value - 7.0 * ra.divergence_rate.value).abs() < 1e-12);
}

#[test]
fn rate_scales_linearly_with_sigma() {
    let cfg = ChainRunConfig { burn_in: 10_000, steps: 200_000, seed: 21, ..ChainRunConfig::default() };
    let (p1, g) = gaussian_problem(5, FRAC_PI_4, 1.0);
    let r1 = run_delta_chain(&p1, &g, &cfg).unwrap().divergence_rate;
    let r2 =
        run_delta_chain(&p1.with_sigma(2.0).unwrap(), &g, &ChainRunConfig { seed: 22, ..cfg }).unwrap().divergence_rate;
    // the doubled unit-σ interval must overlap the σ = 2 interval
    assert!(2.0 * r1.lower <= r2.upper && r2.lower <= 2.0 * r1.upper, "{r1:?} {r2:?}");
}

#[test]
fn halves_of_a_long_chain_agree() {
    let (p, g) = gaussian_problem(5, FRAC_PI_3, 1.0);
    let cfg = ChainRunConfig { burn_in: 10_000, steps: 410_000, seed: 8, ..ChainRunConfig::default() };
    let t = run_replica(&p, &g, &cfg, 0, false).unwrap();
    let (a, b) = t.mstar_1.split_at(t.mstar_1.len() / 2);
    let boot = BootstrapConfig::default();
    let ea = moving_block_bootstrap(&[a], &boot, &mut stream(1, 0)).unwrap();
    let eb = moving_block_bootstrap(&[b], &boot, &mut stream(2, 0)).unwrap();
    assert!(ea.lower <= eb.upper && eb.lower <= ea.upper, "{ea:?} {eb:?}");
}

#[test]
fn aggregation_ignores_replica_order() {
    let (p, g) = gaussian_problem(3, 0.6, 1.0);
    let cfg = ChainRunConfig { burn_in: 500, steps: 10_000, replicas: 4, seed: 3, ..ChainRunConfig::default() };
    let traces: Vec<_> = (0..4).map(|i| run_replica(&p, &g, &cfg, i, false).unwrap()).collect();
    let mut reversed = traces.clone();
    reversed.reverse();
    assert_eq!(aggregate(&p, &cfg, &traces).unwrap(), aggregate(&p, &cfg, &reversed).unwrap());
    assert_eq!(aggregate(&p, &cfg, &traces).unwrap(), run_delta_chain(&p, &g, &cfg).unwrap());
}

#[test]
fn stationarity_residual_interval_contains_zero() {
    for (lambda, theta) in [(2, 0.4), (5, FRAC_PI_4), (10, 1.2)] {
        let (p, g) = gaussian_problem(lambda, theta, 1.0);
        let cfg = ChainRunConfig { burn_in: 10_000, steps: 200_000, seed: lambda as u64, ..ChainRunConfig::default() };
        let r = run_delta_chain(&p, &g, &cfg).unwrap();
        assert!(r.stationarity_residual.contains(0.0), "lambda={lambda}: {:?}", r.stationarity_residual);
    }
}

#[test]
fn selected_second_coordinate_is_negative_near_the_constraint() {
    let (p, g) = gaussian_problem(5, FRAC_PI_4, 1.0);
    let (_, m2) = selected_g_given_delta(&p, &g, 1.0, 100_000, &mut stream(5, 0)).unwrap();
    assert!(m2.upper < 0.0, "{m2:?}");
}

#[test]
fn isotropic_student_t_has_positive_rate() {
    let p = Problem::new(2, 3, FRAC_PI_3, 1.0).unwrap();
    let t = IsotropicStudentT::new(2, 3.0, 1.0).unwrap();
    let cfg = ChainRunConfig { burn_in: 10_000, steps: 200_000, seed: 17, ..ChainRunConfig::default() };
    let r = isotropy_positivity_check(&t, &p, &cfg, &[0.5, 1.0, 3.0], 50_000).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn undeclared_isotropy_is_gated() {
    let p = Problem::new(2, 3, FRAC_PI_3, 1.0).unwrap();
    let t = IsotropicStudentT::new(2, 3.0, 1.0).unwrap();
    let stretched = LinearImage::new(t, &[3.0, 0.0, 0.0, 1.0], false).unwrap();
    let r = isotropy_positivity_check(&stretched, &p, &ChainRunConfig::default(), &[1.0], 10).unwrap();
    assert_eq!(r, IsotropyReport::HypothesisNotDeclared);
    assert!(!r.passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn intervals_bracket_estimates(seed in any::<u64>(), lambda in 2usize..8, theta in 0.1f64..1.45, delta0 in 0.0f64..5.0) {
        let (p, g) = gaussian_problem(lambda, theta, 1.0);
        let cfg = ChainRunConfig { burn_in: 200, steps: 3_000, replicas: 2, seed, delta0, thinning: 3 };
        let r = run_delta_chain(&p, &g, &cfg).unwrap();
        for e in [r.divergence_rate, r.mean_mstar_1, r.mean_mstar_2, r.stationarity_residual] {
            prop_assert!(e.lower <= e.value && e.value <= e.upper);
        }
        let q = r.stationary_delta.quantiles;
        prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(q[0] >= 0.0);
    }

    #[test]
    fn delta_stays_non_negative(seed in any::<u64>(), lambda in 2usize..6, theta in 0.05f64..1.5) {
        let (p, g) = gaussian_problem(lambda, theta, 1.0);
        let cfg = ChainRunConfig { burn_in: 0, steps: 2_000, seed, delta0: 0.0, ..ChainRunConfig::default() };
        let t = run_replica(&p, &g, &cfg, 0, true).unwrap();
        prop_assert!(t.rows.iter().all(|r| r.delta >= 0.0));
        prop_assert!(t.final_delta >= 0.0);
    }
}
