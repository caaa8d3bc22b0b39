//! Linear objective, linear constraint and the constraint-aligned frame.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use libm::{cos, sin};

use crate::{Error, Result};

/// Maximise `x₁` subject to `x₁ cos θ + x₂ sin θ ≤ 0` with a (1,λ)-ES of constant step size σ.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Problem {
    n: usize,
    lambda: usize,
    theta: f64,
    sigma: f64,
}

impl Problem {
    pub fn new(n: usize, lambda: usize, theta: f64, sigma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", "dimension must be at least 2"));
        }
        if lambda < 2 {
            return Err(Error::invalid("lambda", "offspring count must be at least 2"));
        }
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::invalid("theta", "constraint angle must lie in (0, pi/2)"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", "step size must be positive"));
        }
        Ok(Problem { n, lambda, theta, sigma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Same problem with another offspring count. Any `lambda ≥ 1` is accepted so
    /// that single-child kernels can be evaluated.
    pub fn with_lambda(mut self, lambda: usize) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::invalid("lambda", "offspring count must be positive"));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        Problem::new(self.n, self.lambda, self.theta, sigma).map(|p| Problem { lambda: self.lambda, ..p })
    }

    pub fn frame(&self) -> RotationFrame {
        RotationFrame::new(self.n, self.theta)
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(objective(x))
    }

    pub fn constraint(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(constraint(x, self.theta))
    }

    pub fn is_feasible(&self, x: &[f64]) -> Result<bool> {
        Ok(self.constraint(x)? <= 0.0)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: x.len() });
        }
        Ok(())
    }
}

/// `f(x) = x₁`.
pub fn objective(x: &[f64]) -> f64 {
    x[0]
}

/// `g(x) = x₁ cos θ + x₂ sin θ`; `x` is feasible iff the value is `≤ 0`.
pub fn constraint(x: &[f64], theta: f64) -> f64 {
    x[0] * cos(theta) + x[1] * sin(theta)
}

/// The orthogonal change of basis `Q` sending `(e₁, e₂, e₃, …)` to `(∇g, ∇g⊥, e₃, …)`
/// with `∇g = (cos θ, sin θ, 0, …)` and `∇g⊥ = (−sin θ, cos θ, 0, …)`.
///
/// Only the leading 2×2 block is non-trivial, so the frame stores `cos θ` and `sin θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationFrame {
    n: usize,
    theta: f64,
    cos: f64,
    sin: f64,
}

impl RotationFrame {
    pub fn new(n: usize, theta: f64) -> Self {
        RotationFrame { n, theta, cos: cos(theta), sin: sin(theta) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cos(&self) -> f64 {
        self.cos
    }

    pub fn sin(&self) -> f64 {
        self.sin
    }

    /// `g` written with the cached cosine and sine; this is the value used by the ES.
    #[inline]
    pub fn g(&self, x: &[f64]) -> f64 {
        self.cos * x[0] + self.sin * x[1]
    }

    /// Coordinates of `x` in the basis `(∇g, ∇g⊥, e₃, …)`, i.e. `Qᵀx`.
    pub fn rotate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut y = x.to_vec();
        y[0] = self.cos * x[0] + self.sin * x[1];
        y[1] = -self.sin * x[0] + self.cos * x[1];
        Ok(y)
    }

    /// Inverse of [`rotate`](Self::rotate), i.e. `Qy`.
    pub fn unrotate(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        let mut x = y.to_vec();
        self.unrotate_in_place(&mut x);
        Ok(x)
    }

    #[inline]
    pub(crate) fn unrotate_in_place(&self, y: &mut [f64]) {
        let (a, b) = (y[0], y[1]);
        y[0] = self.cos * a - self.sin * b;
        y[1] = self.sin * a + self.cos * b;
    }

    /// Planar coordinates `(x₁, x₂)` of the point with rotated coordinates `(y₁, y₂)`.
    #[inline]
    pub fn unrotate_planar(&self, y1: f64, y2: f64) -> (f64, f64) {
        (self.cos * y1 - self.sin * y2, self.sin * y1 + self.cos * y2)
    }

    #[inline]
    pub fn rotate_planar(&self, x1: f64, x2: f64) -> (f64, f64) {
        (self.cos * x1 + self.sin * x2, -self.sin * x1 + self.cos * x2)
    }

    /// The dense matrix `Q`, row-major.
    pub fn forward(&self) -> Vec<f64> {
        let n = self.n;
        let mut q = vec![0.0; n * n];
        for k in 0..n {
            q[k * n + k] = 1.0;
        }
        q[0] = self.cos;
        q[1] = -self.sin;
        q[n] = self.sin;
        q[n + 1] = self.cos;
        q
    }

    /// `Qᵀ`, row-major.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let q = self.forward();
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = q[i * n + j];
            }
        }
        t
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: x.len() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(Problem::new(1, 5, FRAC_PI_4, 1.0).is_err());
        assert!(Problem::new(2, 1, FRAC_PI_4, 1.0).is_err());
        assert!(Problem::new(2, 5, 0.0, 1.0).is_err());
        assert!(Problem::new(2, 5, FRAC_PI_2, 1.0).is_err());
        assert!(Problem::new(2, 5, FRAC_PI_4, 0.0).is_err());
        assert!(Problem::new(2, 5, FRAC_PI_4, -1.0).is_err());
        assert!(Problem::new(2, 5, FRAC_PI_4, 1.0).is_ok());
    }

    #[test]
    fn objective_is_first_coordinate() {
        let p = Problem::new(2, 2, FRAC_PI_4, 1.0).unwrap();
        assert_eq!(p.objective(&[3.0, -1.0]).unwrap(), 3.0);
        assert_eq!(p.objective(&[0.0, 0.0]).unwrap(), 0.0);
        let p3 = Problem::new(3, 2, FRAC_PI_4, 1.0).unwrap();
        assert_eq!(p3.objective(&[-2.5, 7.0, 1.0]).unwrap(), -2.5);
        assert_eq!(p.objective(&[1.0, 2.0, 3.0]), Err(Error::DimensionMismatch { expected: 2, actual: 3 }));
    }

    #[test]
    fn constraint_values() {
        let p = Problem::new(2, 2, FRAC_PI_4, 1.0).unwrap();
        assert!((p.constraint(&[1.0, 0.0]).unwrap() - 0.707_106_781_186_547_5).abs() < 1e-15);
        assert_eq!(p.constraint(&[0.0, 0.0]).unwrap(), 0.0);
        let p = Problem::new(2, 2, FRAC_PI_3, 1.0).unwrap();
        assert!((p.constraint(&[-1.0, -1.0]).unwrap() + 1.366_025_403_784_438_6).abs() < 1e-15);
        assert!(p.constraint(&[1.0]).is_err());
    }

    #[test]
    fn basis_images() {
        let f = RotationFrame::new(3, FRAC_PI_6);
        let grad = [f.cos(), f.sin(), 0.0];
        let perp = [-f.sin(), f.cos(), 0.0];
        let a = f.rotate(&grad).unwrap();
        let b = f.rotate(&perp).unwrap();
        for (v, e) in a.iter().zip([1.0, 0.0, 0.0]) {
            assert!((v - e).abs() < 1e-15);
        }
        for (v, e) in b.iter().zip([0.0, 1.0, 0.0]) {
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_is_orthogonal_with_expected_columns() {
        let f = RotationFrame::new(4, 0.3);
        let q = f.forward();
        let qt = f.inverse();
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| q[i * 4 + k] * qt[k * 4 + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-12);
            }
        }
        // columns 1 and 2
        assert_eq!([q[0], q[4]], [f.cos(), f.sin()]);
        assert_eq!([q[1], q[5]], [-f.sin(), f.cos()]);
        assert_eq!([q[8], q[9], q[12], q[13]], [0.0; 4]);
    }

    #[test]
    fn round_trip() {
        let f = RotationFrame::new(3, FRAC_PI_4);
        let x = [0.3, -0.7, 1.1];
        let back = f.unrotate(&f.rotate(&x).unwrap()).unwrap();
        for (a, b) in back.iter().zip(x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn first_rotated_coordinate_is_constraint(
            theta in 1e-3..(FRAC_PI_2 - 1e-3),
            x in proptest::collection::vec(-1e3..1e3f64, 2..6),
        ) {
            let f = RotationFrame::new(x.len(), theta);
            let y = f.rotate(&x).unwrap();
            prop_assert!((y[0] - constraint(&x, theta)).abs() <= 1e-12 * (1.0 + x[0].abs() + x[1].abs()));
            let back = f.unrotate(&y).unwrap();
            for (a, b) in back.iter().zip(&x) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn feasibility_invariant_under_positive_scaling(
            theta in 1e-3..(FRAC_PI_2 - 1e-3),
            x1 in -10.0..10.0f64,
            x2 in -10.0..10.0f64,
        ) {
            let g = constraint(&[x1, x2], theta);
            prop_assert_eq!(g <= 0.0, 2.0 * g <= 0.0);
        }
    }
}
