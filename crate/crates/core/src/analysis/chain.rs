use alloc::vec::Vec;

use crate::dist::StepDistribution;
use crate::es::{ESState, Generation};
use crate::problem::Problem;
use crate::rng::stream;
use crate::stats::{mean, moving_block_bootstrap, quantile_sorted, variance, BootstrapConfig, Estimate};
use crate::{Error, Result};

use super::DiagnosticsTable;

/// Stream index reserved for bootstrap resampling.
pub const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// How a chain experiment is run. `steps` counts every generation, burn-in included.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainRunConfig {
    pub burn_in: u64,
    pub steps: u64,
    pub replicas: u32,
    pub seed: u64,
    pub delta0: f64,
    /// Keep every `thinning`-th δ for the stationary summary and the trace.
    pub thinning: u64,
}

impl Default for ChainRunConfig {
    fn default() -> Self {
        ChainRunConfig { burn_in: 10_000, steps: 200_000, replicas: 1, seed: 0, delta0: 1.0, thinning: 1 }
    }
}

impl ChainRunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps <= self.burn_in {
            return Err(Error::invalid("steps", "steps must exceed burn_in"));
        }
        if self.replicas == 0 {
            return Err(Error::invalid("replicas", "at least one replica is required"));
        }
        if self.thinning == 0 {
            return Err(Error::invalid("thinning", "thinning must be at least 1"));
        }
        if !(self.delta0 >= 0.0 && self.delta0.is_finite()) {
            return Err(Error::invalid("delta0", "initial distance must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn measured_steps(&self) -> u64 {
        self.steps - self.burn_in
    }
}

/// One line of the per-generation trace: δ before the generation, the selected
/// step's first two coordinates and the rejected draws of that generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub delta: f64,
    pub mstar_1: f64,
    pub mstar_2: f64,
    pub resamples: u64,
}

/// Raw output of one replica.
#[derive(Debug, Clone, Default)]
pub struct ReplicaTrace {
    pub index: u64,
    /// `[M⋆]₁` after burn-in
    pub mstar_1: Vec<f64>,
    /// `[M⋆]₂` after burn-in
    pub mstar_2: Vec<f64>,
    /// thinned δ after burn-in
    pub deltas: Vec<f64>,
    /// full trace, when requested
    pub rows: Vec<TraceRow>,
    pub draws: u64,
    pub rejections: u64,
    pub final_delta: f64,
    pub final_parent: Vec<f64>,
}

/// Runs replica `index` of the experiment on stream `(config.seed, index)`.
pub fn run_replica(
    problem: &Problem,
    dist: &dyn StepDistribution,
    config: &ChainRunConfig,
    index: u64,
    record_trace: bool,
) -> Result<ReplicaTrace> {
    config.validate()?;
    if dist.dim() != problem.n() {
        return Err(Error::DimensionMismatch { expected: problem.n(), actual: dist.dim() });
    }
    let frame = problem.frame();
    let mut rng = stream(config.seed, index);
    let mut state = ESState::at_delta(problem, config.delta0)?;
    let mut generation = Generation::new(problem);
    let measured = config.measured_steps() as usize;
    let mut trace = ReplicaTrace {
        index,
        mstar_1: Vec::with_capacity(measured),
        mstar_2: Vec::with_capacity(measured),
        deltas: Vec::with_capacity(measured / config.thinning as usize + 1),
        rows: if record_trace { Vec::with_capacity((config.steps / config.thinning) as usize) } else { Vec::new() },
        ..ReplicaTrace::default()
    };
    for t in 0..config.steps {
        let delta = state.delta;
        generation.advance(&mut state, problem, &frame, dist, &mut rng)?;
        let step = generation.selected();
        if record_trace && t.is_multiple_of(config.thinning) {
            trace.rows.push(TraceRow {
                t,
                delta,
                mstar_1: step[0],
                mstar_2: step[1],
                resamples: generation.rejections(),
            });
        }
        if t >= config.burn_in {
            trace.mstar_1.push(step[0]);
            trace.mstar_2.push(step[1]);
            if (t - config.burn_in).is_multiple_of(config.thinning) {
                trace.deltas.push(delta);
            }
        }
    }
    trace.rejections = state.resamples;
    trace.draws = state.resamples + config.steps * problem.lambda() as u64;
    trace.final_delta = state.delta;
    trace.final_parent = state.parent();
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeltaSummary {
    pub mean: f64,
    pub variance: f64,
    /// 5%, 25%, 50%, 75% and 95% quantiles
    pub quantiles: [f64; 5],
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResampleStats {
    pub draws: u64,
    pub rejections: u64,
    /// accepted / drawn
    pub acceptance_rate: f64,
}

/// Summary of a chain experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunReport {
    pub problem: Problem,
    pub config: ChainRunConfig,
    /// `σ · mean([M⋆]₁)` with a moving-block bootstrap interval.
    pub divergence_rate: Estimate,
    pub mean_mstar_1: Estimate,
    pub mean_mstar_2: Estimate,
    /// `cos θ · mean([M⋆]₁) + sin θ · mean([M⋆]₂)`, zero under stationarity.
    pub stationarity_residual: Estimate,
    pub stationary_delta: DeltaSummary,
    pub resample_stats: ResampleStats,
    pub condition_diagnostics: Option<DiagnosticsTable>,
}

/// Combines replica traces into a report. Replicas are ordered by index first,
/// so the result does not depend on the order they finished in.
pub fn aggregate(problem: &Problem, config: &ChainRunConfig, traces: &[ReplicaTrace]) -> Result<RunReport> {
    if traces.is_empty() {
        return Err(Error::Empty);
    }
    let mut ordered: Vec<&ReplicaTrace> = traces.iter().collect();
    ordered.sort_by_key(|t| t.index);
    let frame = problem.frame();
    let (c, s) = (frame.cos(), frame.sin());
    let sigma = problem.sigma();

    let boot = BootstrapConfig::default();
    let m1: Vec<&[f64]> = ordered.iter().map(|t| t.mstar_1.as_slice()).collect();
    let m2: Vec<&[f64]> = ordered.iter().map(|t| t.mstar_2.as_slice()).collect();
    let g_series: Vec<Vec<f64>> =
        ordered.iter().map(|t| t.mstar_1.iter().zip(&t.mstar_2).map(|(a, b)| c * a + s * b).collect()).collect();
    let g_refs: Vec<&[f64]> = g_series.iter().map(|v| v.as_slice()).collect();

    // each estimate gets its own resampling stream so they do not interfere
    let mean_mstar_1 = moving_block_bootstrap(&m1, &boot, &mut stream(config.seed ^ 0x6d31, BOOTSTRAP_STREAM))?;
    let mean_mstar_2 = moving_block_bootstrap(&m2, &boot, &mut stream(config.seed ^ 0x6d32, BOOTSTRAP_STREAM))?;
    let stationarity_residual =
        moving_block_bootstrap(&g_refs, &boot, &mut stream(config.seed ^ 0x6733, BOOTSTRAP_STREAM))?;
    let divergence_rate = Estimate {
        value: sigma * mean_mstar_1.value,
        lower: sigma * mean_mstar_1.lower,
        upper: sigma * mean_mstar_1.upper,
        std_error: sigma * mean_mstar_1.std_error,
    };

    let mut deltas: Vec<f64> = ordered.iter().flat_map(|t| t.deltas.iter().copied()).collect();
    let stationary_delta = if deltas.is_empty() {
        DeltaSummary { mean: f64::NAN, variance: f64::NAN, quantiles: [f64::NAN; 5] }
    } else {
        let m = mean(&deltas);
        let v = variance(&deltas);
        deltas.sort_by(f64::total_cmp);
        DeltaSummary {
            mean: m,
            variance: v,
            quantiles: [0.05, 0.25, 0.5, 0.75, 0.95].map(|q| quantile_sorted(&deltas, q)),
        }
    };
    let draws: u64 = ordered.iter().map(|t| t.draws).sum();
    let rejections: u64 = ordered.iter().map(|t| t.rejections).sum();
    Ok(RunReport {
        problem: *problem,
        config: *config,
        divergence_rate,
        mean_mstar_1,
        mean_mstar_2,
        stationarity_residual,
        stationary_delta,
        resample_stats: ResampleStats {
            draws,
            rejections,
            acceptance_rate: if draws > 0 { (draws - rejections) as f64 / draws as f64 } else { f64::NAN },
        },
        condition_diagnostics: None,
    })
}

/// Runs every replica in turn and aggregates them.
pub fn run_delta_chain(problem: &Problem, dist: &dyn StepDistribution, config: &ChainRunConfig) -> Result<RunReport> {
    config.validate()?;
    let traces = (0..config.replicas as u64)
        .map(|i| run_replica(problem, dist, config, i, false))
        .collect::<Result<Vec<_>>>()?;
    aggregate(problem, config, &traces)
}
