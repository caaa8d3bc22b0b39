//! One generation of the (1,λ)-ES with resampling, and the exact densities of
//! the feasible and selected steps given the normalised distance δ.

use alloc::vec;
use alloc::vec::Vec;

use libm::pow;
use rand::RngCore;

use crate::dist::StepDistribution;
use crate::problem::{Problem, RotationFrame};
use crate::quad::integrate_2d;
use crate::{Error, Result};

/// Draws allowed per child before sampling gives up.
pub const RESAMPLE_CAP: u64 = 1_000_000;

/// Absolute tolerance of the planar quadratures behind the density oracles.
pub const MASS_TOL: f64 = 1e-8;

/// Parent point, normalised distance and counters.
///
/// The parent is accumulated with Neumaier compensation so that it stays
/// consistent with the δ recurrence over long runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ESState {
    parent: Vec<f64>,
    compensation: Vec<f64>,
    pub delta: f64,
    pub iteration: u64,
    /// Rejected draws so far.
    pub resamples: u64,
}

impl ESState {
    /// Starts from a feasible parent; `δ₀ = −g(X₀)/σ`.
    pub fn new(problem: &Problem, parent: Vec<f64>) -> Result<Self> {
        let g = problem.constraint(&parent)?;
        if g > 0.0 {
            return Err(Error::invalid("parent", "initial parent must be feasible"));
        }
        let n = parent.len();
        Ok(ESState { parent, compensation: vec![0.0; n], delta: -g / problem.sigma(), iteration: 0, resamples: 0 })
    }

    /// Starts from the point `−δ σ ∇g`, whose normalised distance is `delta`.
    pub fn at_delta(problem: &Problem, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::invalid("delta0", "initial distance must be finite and non-negative"));
        }
        let frame = problem.frame();
        let mut parent = vec![0.0; problem.n()];
        parent[0] = -delta * problem.sigma() * frame.cos();
        parent[1] = -delta * problem.sigma() * frame.sin();
        let n = parent.len();
        Ok(ESState { parent, compensation: vec![0.0; n], delta, iteration: 0, resamples: 0 })
    }

    pub fn parent(&self) -> Vec<f64> {
        self.parent.iter().zip(&self.compensation).map(|(a, b)| a + b).collect()
    }

    /// `−g(X_t)/σ` recomputed from the parent.
    pub fn delta_from_parent(&self, problem: &Problem) -> f64 {
        let f = problem.frame();
        let g = f.cos() * self.parent[0] + f.sin() * self.parent[1];
        let g_lo = f.cos() * self.compensation[0] + f.sin() * self.compensation[1];
        -(g + g_lo) / problem.sigma()
    }

    fn advance_parent(&mut self, sigma: f64, step: &[f64]) {
        for ((p, c), m) in self.parent.iter_mut().zip(self.compensation.iter_mut()).zip(step) {
            let inc = sigma * m;
            let t = *p + inc;
            if p.abs() >= inc.abs() {
                *c += (*p - t) + inc;
            } else {
                *c += (inc - t) + *p;
            }
            *p = t;
        }
    }
}

/// The selected step together with all feasible children of its generation.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedStep {
    pub vector: Vec<f64>,
    pub feasible_children: Vec<Vec<f64>>,
    /// 0-based index of the winner among the children.
    pub winner_index: usize,
}

/// Draws from `dist` until `g(M) ≤ δ`; writes the feasible step into `out` and
/// returns the number of rejected draws.
pub fn sample_feasible_step(
    dist: &dyn StepDistribution,
    frame: &RotationFrame,
    delta: f64,
    rng: &mut dyn RngCore,
    out: &mut [f64],
) -> Result<u64> {
    for attempt in 0..RESAMPLE_CAP {
        dist.sample(rng, out);
        if frame.g(out) <= delta {
            return Ok(attempt);
        }
    }
    Err(Error::ResampleCap { attempts: RESAMPLE_CAP, delta })
}

/// Index of the child with the largest first coordinate; ties go to the lowest index.
pub fn argmax_first<'a>(children: impl IntoIterator<Item = &'a [f64]>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in children.into_iter().enumerate() {
        match best {
            Some((_, v)) if c[0] <= v => {}
            _ => best = Some((i, c[0])),
        }
    }
    best.map(|(i, _)| i)
}

pub fn select_step(children: Vec<Vec<f64>>) -> Result<SelectedStep> {
    let winner_index = argmax_first(children.iter().map(|c| c.as_slice())).ok_or(Error::Empty)?;
    Ok(SelectedStep { vector: children[winner_index].clone(), feasible_children: children, winner_index })
}

/// Reusable buffers for running many generations without allocating.
#[derive(Debug, Clone)]
pub struct Generation {
    n: usize,
    children: Vec<f64>,
    winner: usize,
    rejections: u64,
}

impl Generation {
    pub fn new(problem: &Problem) -> Self {
        Generation { n: problem.n(), children: vec![0.0; problem.n() * problem.lambda()], winner: 0, rejections: 0 }
    }

    /// Samples λ feasible children for distance `delta` and selects the best.
    pub fn sample(
        &mut self,
        dist: &dyn StepDistribution,
        frame: &RotationFrame,
        delta: f64,
        rng: &mut dyn RngCore,
    ) -> Result<&[f64]> {
        let n = self.n;
        self.rejections = 0;
        for child in self.children.chunks_exact_mut(n) {
            self.rejections += sample_feasible_step(dist, frame, delta, rng, child)?;
        }
        self.winner = argmax_first(self.children.chunks_exact(n)).ok_or(Error::Empty)?;
        Ok(self.selected())
    }

    pub fn selected(&self) -> &[f64] {
        &self.children[self.winner * self.n..(self.winner + 1) * self.n]
    }

    pub fn children(&self) -> impl Iterator<Item = &[f64]> {
        self.children.chunks_exact(self.n)
    }

    pub fn winner_index(&self) -> usize {
        self.winner
    }

    pub fn rejections(&self) -> u64 {
        self.rejections
    }

    /// Samples a generation and moves `state` forward: `X ← X + σM⋆`, `δ ← δ − g(M⋆)`.
    pub fn advance(
        &mut self,
        state: &mut ESState,
        problem: &Problem,
        frame: &RotationFrame,
        dist: &dyn StepDistribution,
        rng: &mut dyn RngCore,
    ) -> Result<()> {
        self.sample(dist, frame, state.delta, rng)?;
        let n = self.n;
        let step = &self.children[self.winner * n..(self.winner + 1) * n];
        state.delta -= frame.g(step);
        state.advance_parent(problem.sigma(), step);
        state.iteration += 1;
        state.resamples += self.rejections;
        Ok(())
    }
}

/// One generation from `state`, returning the new state and the selection record.
pub fn es_iterate(
    state: &ESState,
    problem: &Problem,
    dist: &dyn StepDistribution,
    rng: &mut dyn RngCore,
) -> Result<(ESState, SelectedStep)> {
    if dist.dim() != problem.n() {
        return Err(Error::DimensionMismatch { expected: problem.n(), actual: dist.dim() });
    }
    let frame = problem.frame();
    let mut generation = Generation::new(problem);
    let mut next = state.clone();
    generation.advance(&mut next, problem, &frame, dist, rng)?;
    let selected = SelectedStep {
        vector: generation.selected().to_vec(),
        feasible_children: generation.children().map(|c| c.to_vec()).collect(),
        winner_index: generation.winner_index(),
    };
    Ok((next, selected))
}

/// `F(L_δ) = P(g(M) ≤ δ)`: the rotated first marginal when it is known, planar
/// quadrature otherwise.
pub fn mass_of_feasible_set(dist: &dyn StepDistribution, frame: &RotationFrame, delta: f64) -> Result<f64> {
    if let Some(m) = dist.rotated_marginal(frame, 0) {
        return Ok(m.cdf(delta));
    }
    mass_of_truncated_halfplane(dist, frame, delta, f64::INFINITY)
}

/// `P(M₁ < v, g(M) ≤ δ)` by adaptive quadrature of the planar density over the
/// distribution's bounding box.
pub fn mass_of_truncated_halfplane(
    dist: &dyn StepDistribution,
    frame: &RotationFrame,
    delta: f64,
    v: f64,
) -> Result<f64> {
    let [(lo1, hi1), (lo2, hi2)] = dist.planar_box();
    let upper1 = v.min(hi1);
    if upper1 <= lo1 {
        return Ok(0.0);
    }
    let (c, s) = (frame.cos(), frame.sin());
    let r = integrate_2d(
        |x1, x2| dist.planar_density(x1, x2),
        lo1,
        upper1,
        |_| lo2,
        |x1| ((delta - c * x1) / s).min(hi2),
        MASS_TOL,
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Density of the feasible step, `h(x) 1{g(x) ≤ δ} / F(L_δ)`.
pub fn feasible_step_density(dist: &dyn StepDistribution, frame: &RotationFrame, delta: f64, x: &[f64]) -> Result<f64> {
    if frame.g(x) > delta {
        return Ok(0.0);
    }
    Ok(dist.density(x) / mass_of_feasible_set(dist, frame, delta)?)
}

/// Density of the selected step,
/// `λ h(x) 1{g(x) ≤ δ} P(M₁ < x₁, g(M) ≤ δ)^{λ−1} / F(L_δ)^λ`.
pub fn selected_step_density(dist: &dyn StepDistribution, problem: &Problem, delta: f64, x: &[f64]) -> Result<f64> {
    let frame = problem.frame();
    if frame.g(x) > delta {
        return Ok(0.0);
    }
    let lambda = problem.lambda() as f64;
    let feasible = mass_of_feasible_set(dist, &frame, delta)?;
    let below = if problem.lambda() > 1 { mass_of_truncated_halfplane(dist, &frame, delta, x[0])? } else { 1.0 };
    Ok(lambda * dist.density(x) * pow(below, lambda - 1.0) / pow(feasible, lambda))
}

/// Planar version of [`selected_step_density`] for `n > 2`: the density of
/// `(M⋆₁, M⋆₂)`.
pub fn selected_planar_density(
    dist: &dyn StepDistribution,
    problem: &Problem,
    delta: f64,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    let frame = problem.frame();
    if frame.cos() * x1 + frame.sin() * x2 > delta {
        return Ok(0.0);
    }
    let lambda = problem.lambda() as f64;
    let feasible = mass_of_feasible_set(dist, &frame, delta)?;
    let below = if problem.lambda() > 1 { mass_of_truncated_halfplane(dist, &frame, delta, x1)? } else { 1.0 };
    Ok(lambda * dist.planar_density(x1, x2) * pow(below, lambda - 1.0) / pow(feasible, lambda))
}
