//! Experiments on the normalised-distance chain `δ_{t+1} = δ_t − g(M⋆_t)`.

mod chain;
mod conditions;
mod covariance;
mod isotropy;

pub use chain::{
    aggregate, run_delta_chain, run_replica, ChainRunConfig, DeltaSummary, ReplicaTrace, ResampleStats, RunReport,
    TraceRow, BOOTSTRAP_STREAM,
};
pub use conditions::{
    diagnose_conditions, selected_g_given_delta, ConditionRow, DiagnosticsTable, MomentCheck, DOUBLINGS, MOMENT_TOL,
};
pub use covariance::{
    covariance_transform, verify_covariance_equivalence, CovarianceTransform, EquivalenceCheck, EquivalenceConfig,
    EquivalenceReport,
};
pub use isotropy::{isotropy_positivity_check, IsotropyReport};
