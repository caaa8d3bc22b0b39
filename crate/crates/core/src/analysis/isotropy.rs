use alloc::vec::Vec;

use crate::dist::StepDistribution;
use crate::problem::Problem;
use crate::rng::stream;
use crate::stats::Estimate;
use crate::Result;

use super::{run_delta_chain, selected_g_given_delta, ChainRunConfig};

/// Stream used for the conditional estimates, kept apart from the chain replicas.
const CONDITIONAL_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum IsotropyReport {
    /// The law does not claim to be isotropic after whitening; nothing was run.
    HypothesisNotDeclared,
    Checked {
        /// `(δ, Ê[[M⋆]₂ | δ])`
        conditional_mstar_2: Vec<(f64, Estimate)>,
        divergence_rate: Estimate,
    },
}

impl IsotropyReport {
    /// Every conditional interval lies below zero.
    pub fn mstar_2_negative(&self) -> bool {
        match self {
            IsotropyReport::HypothesisNotDeclared => false,
            IsotropyReport::Checked { conditional_mstar_2, .. } => {
                conditional_mstar_2.iter().all(|(_, e)| e.upper < 0.0)
            }
        }
    }

    pub fn rate_positive(&self) -> bool {
        match self {
            IsotropyReport::HypothesisNotDeclared => false,
            IsotropyReport::Checked { divergence_rate, .. } => divergence_rate.lower > 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.mstar_2_negative() && self.rate_positive()
    }
}

/// Estimates `E[[M⋆]₂ | δ]` on `delta_grid` and the stationary divergence rate.
pub fn isotropy_positivity_check(
    dist: &dyn StepDistribution,
    problem: &Problem,
    config: &ChainRunConfig,
    delta_grid: &[f64],
    samples_per_delta: usize,
) -> Result<IsotropyReport> {
    if !dist.isotropic_after_whitening() {
        return Ok(IsotropyReport::HypothesisNotDeclared);
    }
    let mut rng = stream(config.seed, CONDITIONAL_STREAM);
    let conditional_mstar_2 = delta_grid
        .iter()
        .map(|&d| selected_g_given_delta(problem, dist, d, samples_per_delta, &mut rng).map(|(_, m2)| (d, m2)))
        .collect::<Result<Vec<_>>>()?;
    let divergence_rate = run_delta_chain(problem, dist, config)?.divergence_rate;
    Ok(IsotropyReport::Checked { conditional_mstar_2, divergence_rate })
}
