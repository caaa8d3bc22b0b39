//! Constant step-size (1,λ) evolution strategy maximising `f(x) = x₁` under the
//! linear constraint `g(x) = x₁ cos θ + x₂ sin θ ≤ 0`, with infeasible children
//! handled by resampling.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the numerical side of the
//! simulator:
//!
//! * [`problem`]: the objective, the constraint and the rotated frame `(∇g, ∇g⊥, e₃, …)`.
//! * [`dist`]: step distributions (Gaussian, isotropic Student-t, 2-D Archimedean
//!   copulas with arbitrary marginals) with densities and rotated marginals.
//! * [`es`]: resampling, selection, the parent/δ update and exact densities of
//!   the feasible and selected steps.
//! * [`copula_path`]: the finite-sample construction of feasible and selected steps
//!   from copula draws and truncated marginal quantiles.
//! * [`analysis`]: the normalised-distance Markov chain, divergence-rate estimation,
//!   moment diagnostics, the covariance/angle equivalence and isotropy checks.
//!
//! IO, configuration and the command line live in the `lincon-es` crate.

#![no_std]
// negated float comparisons are used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod copula_path;
pub mod dist;
mod error;
pub mod es;
pub mod problem;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use problem::{Problem, RotationFrame};
