use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, fabs};
use rand::RngCore;

use crate::dist::StepDistribution;
use crate::es::{sample_feasible_step, Generation};
use crate::problem::Problem;
use crate::stats::{pairwise_sum, Estimate};
use crate::{Error, Result};

/// Number of sample doublings watched by the running-mean check.
pub const DOUBLINGS: u32 = 10;

/// Largest relative change of the running mean tolerated over the last three doublings.
pub const MOMENT_TOL: f64 = 0.05;

/// Running-mean check of a moment: means at `n₀·2^k`, `k = 0..=10`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentCheck {
    pub estimate: f64,
    pub running_means: Vec<f64>,
    /// max `|m_k − m_{k−1}| / |m_k|` over the last three doublings
    pub relative_change: f64,
    pub divergent: bool,
}

impl MomentCheck {
    /// Evaluates the check on `values`, whose length must be `n₀·2^DOUBLINGS`.
    pub fn from_values(values: &[f64]) -> Self {
        let n0 = values.len() >> DOUBLINGS;
        let mut running_means = Vec::with_capacity(DOUBLINGS as usize + 1);
        let mut acc = 0.0;
        let mut done = 0;
        for k in 0..=DOUBLINGS {
            let upto = n0 << k;
            acc += pairwise_sum(&values[done..upto]);
            done = upto;
            running_means.push(acc / upto as f64);
        }
        let last = running_means.len() - 1;
        let mut relative_change: f64 = 0.0;
        for k in last - 2..=last {
            let (a, b) = (running_means[k - 1], running_means[k]);
            let scale = fabs(b).max(f64::MIN_POSITIVE);
            relative_change = relative_change.max(fabs(b - a) / scale);
        }
        let finite = running_means.iter().all(|m| m.is_finite());
        let divergent = !finite || !(relative_change <= MOMENT_TOL);
        MomentCheck { estimate: running_means[last], running_means, relative_change, divergent }
    }
}

/// Moments at one grid point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionRow {
    pub delta: f64,
    /// `E|g(M̃)|` over feasible steps
    pub abs_g: MomentCheck,
    /// `E exp(g(M))` over raw steps
    pub exp_g: MomentCheck,
    /// `E[g(M⋆) | δ]`
    pub selected_g: Estimate,
    /// `E[[M⋆]₂ | δ]`
    pub selected_m2: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsTable {
    pub rows: Vec<ConditionRow>,
    /// `lim_{δ→∞} E[g(M⋆) | δ]` when the law has a closed form for it
    pub analytic_limit: Option<f64>,
    /// `(Ê − limit) / SE` at the largest δ
    pub limit_z: Option<f64>,
    /// the estimate at the largest δ has a 95% interval above zero
    pub limit_positive: bool,
}

impl DiagnosticsTable {
    pub fn abs_moment_flag(&self) -> bool {
        self.rows.iter().any(|r| r.abs_g.divergent)
    }

    pub fn exp_moment_flag(&self) -> bool {
        self.rows.iter().any(|r| r.exp_g.divergent)
    }

    /// Within three standard errors of the analytic limit, or no limit known.
    pub fn limit_consistent(&self) -> bool {
        self.limit_z.is_none_or(|z| fabs(z) <= 3.0)
    }

    pub fn any_flag(&self) -> bool {
        self.abs_moment_flag() || self.exp_moment_flag() || !self.limit_consistent() || !self.limit_positive
    }
}

/// Monte Carlo estimates of `E[g(M⋆) | δ]` and `E[[M⋆]₂ | δ]` from `samples` generations.
pub fn selected_g_given_delta(
    problem: &Problem,
    dist: &dyn StepDistribution,
    delta: f64,
    samples: usize,
    rng: &mut dyn RngCore,
) -> Result<(Estimate, Estimate)> {
    if samples < 2 {
        return Err(Error::invalid("samples", "at least two samples are required"));
    }
    let frame = problem.frame();
    let mut generation = Generation::new(problem);
    let mut g = Vec::with_capacity(samples);
    let mut m2 = Vec::with_capacity(samples);
    for _ in 0..samples {
        let step = generation.sample(dist, &frame, delta, rng)?;
        g.push(frame.g(step));
        m2.push(step[1]);
    }
    Ok((Estimate::iid_mean(&g), Estimate::iid_mean(&m2)))
}

/// Numerical diagnostics for the moment and drift conditions.
///
/// `samples_per_delta` is rounded down to a multiple of `2^DOUBLINGS` (at least one
/// multiple). The exponential moment is taken over unconstrained steps, the
/// absolute moment over feasible ones.
pub fn diagnose_conditions(
    problem: &Problem,
    dist: &dyn StepDistribution,
    delta_grid: &[f64],
    samples_per_delta: usize,
    rng: &mut dyn RngCore,
) -> Result<DiagnosticsTable> {
    if delta_grid.is_empty() {
        return Err(Error::Empty);
    }
    if delta_grid.windows(2).any(|w| !(w[0] < w[1])) || delta_grid.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
        return Err(Error::invalid("delta_grid", "grid must be finite, non-negative and increasing"));
    }
    if dist.dim() != problem.n() {
        return Err(Error::DimensionMismatch { expected: problem.n(), actual: dist.dim() });
    }
    let frame = problem.frame();
    let n0 = (samples_per_delta >> DOUBLINGS).max(1);
    let total = n0 << DOUBLINGS;
    let mut buf = vec![0.0; problem.n()];
    let mut values = vec![0.0; total];
    let mut rows = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        for v in values.iter_mut() {
            sample_feasible_step(dist, &frame, delta, rng, &mut buf)?;
            *v = fabs(frame.g(&buf));
        }
        let abs_g = MomentCheck::from_values(&values);
        for v in values.iter_mut() {
            dist.sample(rng, &mut buf);
            *v = exp(frame.g(&buf));
        }
        let exp_g = MomentCheck::from_values(&values);
        let (selected_g, selected_m2) = selected_g_given_delta(problem, dist, delta, total, rng)?;
        rows.push(ConditionRow { delta, abs_g, exp_g, selected_g, selected_m2 });
    }
    let analytic_limit = dist.unconstrained_selected_g(&frame, problem.lambda());
    let last = &rows[rows.len() - 1].selected_g;
    let limit_z = analytic_limit.map(|l| (last.value - l) / last.std_error);
    let limit_positive = last.lower > 0.0;
    Ok(DiagnosticsTable { rows, analytic_limit, limit_z, limit_positive })
}
