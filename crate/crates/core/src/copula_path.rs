//! Feasible and selected steps generated from copula draws through truncated
//! marginal quantiles, with no rejection loop.
//!
//! For a step law whose coordinates are independent in the constraint frame the
//! copula of the feasible step does not depend on δ. A feasible step is then
//! `Q (F⁻¹_{1,δ}(u₁), F⁻¹_{2,δ}(u₂), …)` with `u` drawn from that copula, where
//! only the first rotated coordinate (`M·∇g = g(M)`) is truncated at δ.

use alloc::vec::Vec;

use rand::RngCore;

use crate::dist::{Marginal, StepDistribution, COPULA_CLAMP};
use crate::es::argmax_first;
use crate::problem::RotationFrame;
use crate::rng::open01;
use crate::{Error, Result};

/// Marginal laws of the feasible step in the constraint frame for a fixed δ.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMarginalSet {
    delta: f64,
    laws: Vec<Marginal>,
    /// `F₁(δ)`
    first_mass: f64,
}

impl TruncatedMarginalSet {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.laws.len()
    }

    /// `F_{k,δ}(x)`; for `k = 0` this is `F₁(min(x, δ)) / F₁(δ)`.
    pub fn cdf(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            if x >= self.delta {
                return 1.0;
            }
            return (self.laws[0].cdf(x) / self.first_mass).min(1.0);
        }
        self.laws[k].cdf(x)
    }

    /// `F⁻¹_{k,δ}(u)` with `u` clamped to `[1e-12, 1 − 1e-12]`.
    pub fn quantile(&self, k: usize, u: f64) -> Result<f64> {
        let u = u.clamp(COPULA_CLAMP, 1.0 - COPULA_CLAMP);
        if k == 0 {
            return Ok(self.laws[0].quantile(u * self.first_mass)?.min(self.delta));
        }
        self.laws[k].quantile(u)
    }
}

/// Truncated marginals of the feasible step at distance `delta`.
///
/// Refused unless `dist` has independent, closed-form coordinates in `frame`.
pub fn build_truncated_marginals(
    dist: &dyn StepDistribution,
    frame: &RotationFrame,
    delta: f64,
) -> Result<TruncatedMarginalSet> {
    if !(delta >= 0.0) {
        return Err(Error::invalid("delta", "distance must be non-negative"));
    }
    if !dist.independent_in_frame(frame) {
        return Err(Error::Unsupported(
            "copula path needs coordinates that are independent in the constraint frame".into(),
        ));
    }
    let laws = (0..dist.dim())
        .map(|k| {
            dist.rotated_marginal(frame, k)
                .ok_or_else(|| Error::Unsupported("rotated marginal not available in closed form".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let first_mass = laws[0].cdf(delta);
    if !(first_mass > 0.0) {
        return Err(Error::invalid("delta", "feasible set has zero mass"));
    }
    Ok(TruncatedMarginalSet { delta, laws, first_mass })
}

/// `G(δ, u) = Q (F⁻¹_{1,δ}(u₁), …, F⁻¹_{n,δ}(uₙ))`. The result satisfies `g ≤ δ`.
pub fn map_g(u: &[f64], marginals: &TruncatedMarginalSet, frame: &RotationFrame) -> Result<Vec<f64>> {
    if u.len() != marginals.dim() || frame.n() != marginals.dim() {
        return Err(Error::DimensionMismatch { expected: marginals.dim(), actual: u.len() });
    }
    let mut x = u.iter().enumerate().map(|(k, &uk)| marginals.quantile(k, uk)).collect::<Result<Vec<_>>>()?;
    frame.unrotate_in_place(&mut x);
    // rotating back can overshoot the boundary by an ulp; moving x₁ down lowers g
    while frame.g(&x) > marginals.delta {
        x[0] = x[0].next_down();
    }
    Ok(x)
}

/// `G⋆(δ, v)`: the image with the largest first coordinate among `G(δ, vᵢ)`.
pub fn map_g_star(draws: &[Vec<f64>], marginals: &TruncatedMarginalSet, frame: &RotationFrame) -> Result<Vec<f64>> {
    let images = draws.iter().map(|v| map_g(v, marginals, frame)).collect::<Result<Vec<_>>>()?;
    let best = argmax_first(images.iter().map(|x| x.as_slice())).ok_or(Error::Empty)?;
    Ok(images.into_iter().nth(best).expect("index from argmax"))
}

/// One draw of the copula of the feasible step, which is the independence copula
/// on the supported laws.
pub fn draw_copula(n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    (0..n).map(|_| open01(rng)).collect()
}

/// Selected step through the copula path: λ copula draws mapped by `G⋆`.
pub fn sample_selected(
    marginals: &TruncatedMarginalSet,
    frame: &RotationFrame,
    lambda: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    let draws: Vec<Vec<f64>> = (0..lambda).map(|_| draw_copula(marginals.dim(), rng)).collect();
    map_g_star(&draws, marginals, frame)
}

/// Feasible step through the copula path.
pub fn sample_feasible(
    marginals: &TruncatedMarginalSet,
    frame: &RotationFrame,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    map_g(&draw_copula(marginals.dim(), rng), marginals, frame)
}
