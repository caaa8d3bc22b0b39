use alloc::vec;
use alloc::vec::Vec;

use libm::{atan2, sqrt};
use nalgebra::DMatrix;

use crate::dist::GaussianStep;
use crate::es::{ESState, Generation};
use crate::problem::Problem;
use crate::rng::stream;
use crate::stats::{ks_two_sample, TestResult};
use crate::{Error, Result};

/// Angle, start point and per-coordinate scaling that map the algorithm with
/// step covariance `C` onto the algorithm with whitened steps.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CovarianceTransform {
    pub theta_prime: f64,
    pub x0_prime: Vec<f64>,
    /// `β_k = √(Σ_j b_{kj}² / α_j²)`, with `b_{·j}` the unit eigenvectors of `C`
    /// and `α_j²` the eigenvalues.
    pub beta: Vec<f64>,
}

/// Computes the transform for covariance `C` (row-major `n × n`).
///
/// Scaling coordinate `k` by `β_k` turns the constraint normal
/// `(cos θ, sin θ)` into a multiple of `(cos θ / β₁, sin θ / β₂)`, hence
/// `tan θ′ = β₁ sin θ / (β₂ cos θ)`. The two algorithms coincide in law when the
/// eigenbasis of `C` is the coordinate basis.
pub fn covariance_transform(covariance: &[f64], n: usize, theta: f64, x0: &[f64]) -> Result<CovarianceTransform> {
    if covariance.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, actual: covariance.len() });
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x0.len() });
    }
    if !(theta > 0.0 && theta < core::f64::consts::FRAC_PI_2) {
        return Err(Error::invalid("theta", "angle must lie in (0, pi/2)"));
    }
    // validates symmetry and positive definiteness
    GaussianStep::new(n, covariance)?;
    let eig = DMatrix::from_row_slice(n, n, covariance).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let beta: Vec<f64> = (0..n)
        .map(|k| sqrt((0..n).map(|j| eig.eigenvectors[(k, j)] * eig.eigenvectors[(k, j)] / eig.eigenvalues[j]).sum()))
        .collect();
    let theta_prime = atan2(beta[0] * libm::sin(theta), beta[1] * libm::cos(theta));
    let x0_prime = x0.iter().zip(&beta).map(|(x, b)| x * b).collect();
    Ok(CovarianceTransform { theta_prime, x0_prime, beta })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceConfig {
    pub lambda: usize,
    pub sigma: f64,
    pub replicas: u32,
    pub checkpoints: Vec<u64>,
    pub seed: u64,
    /// Start point; `None` means `−(cos θ, sin θ, 0, …)`.
    pub x0: Option<Vec<f64>>,
    /// Replaces the computed `θ′`, for negative controls.
    pub theta_prime_override: Option<f64>,
    pub alpha: f64,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        EquivalenceConfig {
            lambda: 5,
            sigma: 1.0,
            replicas: 200,
            checkpoints: vec![10, 100, 1000],
            seed: 0,
            x0: None,
            theta_prime_override: None,
            alpha: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceCheck {
    pub checkpoint: u64,
    pub coordinate: usize,
    pub ks: TestResult,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub transform: CovarianceTransform,
    /// angle actually used for the whitened runs
    pub theta_used: f64,
    pub checks: Vec<EquivalenceCheck>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn passed_at(&self, checkpoint: u64) -> bool {
        self.checks.iter().filter(|c| c.checkpoint == checkpoint).all(|c| c.pass)
    }
}

/// Positions at the checkpoints, `[checkpoint][coordinate][replica]`.
fn trajectories(
    problem: &Problem,
    dist: &GaussianStep,
    x0: &[f64],
    scale: &[f64],
    checkpoints: &[u64],
    replicas: u32,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = problem.n();
    let frame = problem.frame();
    let last = checkpoints.iter().copied().max().unwrap_or(0);
    let mut out = vec![vec![Vec::with_capacity(replicas as usize); n]; checkpoints.len()];
    let mut generation = Generation::new(problem);
    for r in 0..replicas as u64 {
        let mut rng = stream(seed, r);
        let mut state = ESState::new(problem, x0.to_vec())?;
        for t in 1..=last {
            generation.advance(&mut state, problem, &frame, dist, &mut rng)?;
            if let Some(i) = checkpoints.iter().position(|&c| c == t) {
                let x = state.parent();
                for k in 0..n {
                    out[i][k].push(scale[k] * x[k]);
                }
            }
        }
    }
    Ok(out)
}

/// Runs the algorithm with `N(0, C)` steps at angle `θ` and the algorithm with
/// `N(0, I)` steps at angle `θ′`, and compares `β ∘ X_t` with `X′_t`
/// coordinate-wise by two-sample KS at each checkpoint.
pub fn verify_covariance_equivalence(
    covariance: &[f64],
    n: usize,
    theta: f64,
    config: &EquivalenceConfig,
) -> Result<EquivalenceReport> {
    if config.replicas < 2 {
        return Err(Error::invalid("replicas", "at least two replicas are required"));
    }
    if config.checkpoints.is_empty() || config.checkpoints.contains(&0) {
        return Err(Error::invalid("checkpoints", "checkpoints must be positive"));
    }
    let x0 = match &config.x0 {
        Some(x) => x.clone(),
        None => {
            let mut x = vec![0.0; n];
            x[0] = -libm::cos(theta);
            x[1] = -libm::sin(theta);
            x
        }
    };
    let transform = covariance_transform(covariance, n, theta, &x0)?;
    let theta_used = config.theta_prime_override.unwrap_or(transform.theta_prime);

    let original = Problem::new(n, config.lambda, theta, config.sigma)?;
    let whitened = Problem::new(n, config.lambda, theta_used, config.sigma)?;
    let dist = GaussianStep::new(n, covariance)?;
    let white = GaussianStep::standard(n)?;
    let ones = vec![1.0; n];

    let a = trajectories(&original, &dist, &x0, &transform.beta, &config.checkpoints, config.replicas, config.seed)?;
    let b = trajectories(
        &whitened,
        &white,
        &transform.x0_prime,
        &ones,
        &config.checkpoints,
        config.replicas,
        config.seed ^ 0x05ee_d0f1_e33a,
    )?;

    let mut checks = Vec::new();
    for (i, &checkpoint) in config.checkpoints.iter().enumerate() {
        for k in 0..n {
            let ks = ks_two_sample(&a[i][k], &b[i][k])?;
            checks.push(EquivalenceCheck { checkpoint, coordinate: k, ks, pass: ks.p_value > config.alpha });
        }
    }
    Ok(EquivalenceReport { transform, theta_used, checks })
}
