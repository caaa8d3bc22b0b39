use std::f64::consts::FRAC_PI_4;

use lincon_es_core::analysis::{covariance_transform, verify_covariance_equivalence, EquivalenceConfig};

const DIAG_4_1: [f64; 4] = [4.0, 0.0, 0.0, 1.0];

#[test]
fn identity_covariance_passes_trivially() {
    let r = verify_covariance_equivalence(
        &[1.0, 0.0, 0.0, 1.0],
        2,
        0.8,
        &EquivalenceConfig { seed: 1, ..EquivalenceConfig::default() },
    )
    .unwrap();
    assert_eq!(r.theta_used, 0.8);
    assert!(r.passed(), "{r:?}");
}

#[test]
fn diagonal_covariance_passes_with_computed_angle() {
    let r = verify_covariance_equivalence(
        &DIAG_4_1,
        2,
        FRAC_PI_4,
        &EquivalenceConfig { seed: 2, ..EquivalenceConfig::default() },
    )
    .unwrap();
    assert!((r.transform.theta_prime - 0.5f64.atan()).abs() < 1e-14);
    assert!(r.passed(), "{r:?}");
}

#[test]
fn unchanged_angle_is_rejected() {
    let cfg = EquivalenceConfig { seed: 3, theta_prime_override: Some(FRAC_PI_4), ..EquivalenceConfig::default() };
    let r = verify_covariance_equivalence(&DIAG_4_1, 2, FRAC_PI_4, &cfg).unwrap();
    assert!(!r.passed_at(1000));
}

/// `arccos(β₁ cos θ / √(β₁² cos² θ + β₂² sin² θ))` with `β = (1/2, 1)` gives
/// 1.10715; the simulated trajectories rule it out.
#[test]
fn swapped_scaling_angle_is_rejected() {
    let (b1, b2) = (0.5f64, 1.0f64);
    let (s, c) = FRAC_PI_4.sin_cos();
    let swapped = (b1 * c / (b1 * b1 * c * c + b2 * b2 * s * s).sqrt()).acos();
    assert!((swapped - 1.107_148_717_794_090_4).abs() < 1e-12);
    let cfg = EquivalenceConfig { seed: 4, theta_prime_override: Some(swapped), ..EquivalenceConfig::default() };
    let r = verify_covariance_equivalence(&DIAG_4_1, 2, FRAC_PI_4, &cfg).unwrap();
    assert!(!r.passed_at(1000));
}

#[test]
fn higher_dimensional_diagonal_covariance() {
    let cov = [4.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 9.0];
    let t = covariance_transform(&cov, 3, 1.0, &[-1.0, -1.0, 2.0]).unwrap();
    assert_eq!(t.x0_prime.len(), 3);
    assert!((t.beta[2] - 1.0 / 3.0).abs() < 1e-14);
    let r = verify_covariance_equivalence(
        &cov,
        3,
        1.0,
        &EquivalenceConfig { seed: 5, checkpoints: vec![10, 200], ..EquivalenceConfig::default() },
    )
    .unwrap();
    assert!(r.passed(), "{r:?}");
}
