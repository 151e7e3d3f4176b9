//! Constant-coefficient biharmonic model problems on the half-space
//! `x_n > 0`, for the operator `(Σ a^{jk} ∂_j∂_k + a^{nn} ∂_n²)²`.
//!
//! After a Fourier transform in the tangential variables the problem reduces
//! to the ODE `a_nn² (d²/dx_n² - |ξ'|²)² û = 0` with
//! `|ξ'| = √(η'ᵀ a_tan η' / a_nn)`. Bounded solutions are
//! `(c0 + c1 x_n) e^{-|ξ'| x_n}`.

mod banded;
mod bvp;
mod kernel;

pub use banded::BandedMatrix;
pub use bvp::{bvp_solve_p1, bvp_solve_p2, BvpSolution, HalfSpaceGrid, MIN_DECAY_LENGTH};
pub use kernel::{
    fourier_synthesis, kernel_k, solve_by_kernel, BoundaryData, KernelKind, KernelValue, DEFAULT_QUAD_POINTS,
    MIN_NORMAL_DISTANCE,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::symbols::{check_spd, BoundaryMetric};

/// The block-diagonal coefficient matrix `diag(a_tan, a_nn)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricBlock {
    a_tan: DMatrix<f64>,
    a_nn: f64,
}

impl MetricBlock {
    pub fn new(a_tan: DMatrix<f64>, a_nn: f64) -> Result<Self> {
        check_spd(&a_tan, "tangential block")?;
        if !(a_nn > 0.0 && a_nn.is_finite()) {
            return domain(format!("a_nn must be positive, got {a_nn}"));
        }
        Ok(MetricBlock { a_tan, a_nn })
    }

    /// Identity coefficients in `R^n`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 2, "half-space problems need n >= 2");
        MetricBlock { a_tan: DMatrix::identity(n - 1, n - 1), a_nn: 1.0 }
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.a_tan.nrows() + 1
    }

    pub fn a_tan(&self) -> &DMatrix<f64> {
        &self.a_tan
    }

    pub fn a_nn(&self) -> f64 {
        self.a_nn
    }

    /// `η'ᵀ a_tan η'`.
    pub fn tangential_form(&self, eta: &[f64]) -> Result<f64> {
        if eta.len() != self.a_tan.nrows() {
            return domain(format!("covector has {} components, expected {}", eta.len(), self.a_tan.nrows()));
        }
        let k = eta.len();
        let mut s = 0.0;
        for j in 0..k {
            for l in 0..k {
                s += self.a_tan[(j, l)] * eta[j] * eta[l];
            }
        }
        Ok(s)
    }

    /// A seeded random block: `a_tan = BᵀB + I/2` with `B` uniform in
    /// `[-1, 1]`, and `a_nn` uniform in `[0.5, 2]`.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return domain("half-space problems need n >= 2");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = n - 1;
        let b = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
        let a_tan = b.transpose() * &b + DMatrix::identity(k, k) * 0.5;
        let a_nn = rng.random_range(0.5..2.0);
        Self::new(a_tan, a_nn)
    }

    /// The tangential block viewed as a (constant) inverse boundary metric.
    pub fn tangential_metric(&self) -> BoundaryMetric {
        BoundaryMetric::constant(self.a_tan.clone()).expect("validated at construction")
    }
}

/// A tangential frequency with a transformed boundary amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierDatum {
    pub eta: Vec<f64>,
    pub amplitude: Complex64,
}

impl FourierDatum {
    pub fn new(eta: Vec<f64>, amplitude: Complex64) -> Self {
        FourierDatum { eta, amplitude }
    }

    pub fn unit(eta: Vec<f64>) -> Self {
        FourierDatum { eta, amplitude: Complex64::new(1.0, 0.0) }
    }
}

/// `|ξ'| = √(η'ᵀ a_tan η' / a_nn)`.
pub fn xi_norm(block: &MetricBlock, eta: &[f64]) -> Result<f64> {
    if eta.iter().all(|&v| v == 0.0) {
        return domain("xi_norm is defined for eta' != 0");
    }
    Ok((block.tangential_form(eta)? / block.a_nn).sqrt())
}

/// `(c0 + c1 x) e^{-k x}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpLinearProfile {
    pub decay: f64,
    pub c0: Complex64,
    pub c1: Complex64,
}

impl ExpLinearProfile {
    pub fn value(&self, x: f64) -> Complex64 {
        self.derivative(0, x)
    }

    /// `d^j/dx^j [(c0 + c1 x) e^{-kx}] = e^{-kx} [(-k)^j (c0 + c1 x) + j (-k)^{j-1} c1]`.
    pub fn derivative(&self, order: u32, x: f64) -> Complex64 {
        let k = self.decay;
        let e = (-k * x).exp();
        let j = order as i32;
        let lead = (-k).powi(j) * (self.c0 + self.c1 * x);
        let tail = if j == 0 { Complex64::new(0.0, 0.0) } else { self.c1 * (j as f64 * (-k).powi(j - 1)) };
        (lead + tail) * e
    }
}

/// Bounded solution with `û(0) = 0`, `√a_nn û'(0) = ĥ`.
pub fn p1_profile(block: &MetricBlock, datum: &FourierDatum) -> Result<ExpLinearProfile> {
    let k = xi_norm(block, &datum.eta)?;
    Ok(ExpLinearProfile { decay: k, c0: Complex64::new(0.0, 0.0), c1: datum.amplitude / block.a_nn.sqrt() })
}

/// Bounded solution with `û(0) = φ̂`, `û'(0) = 0`.
pub fn p2_profile(block: &MetricBlock, datum: &FourierDatum) -> Result<ExpLinearProfile> {
    let k = xi_norm(block, &datum.eta)?;
    Ok(ExpLinearProfile { decay: k, c0: datum.amplitude, c1: datum.amplitude * k })
}

/// `(ĥ/√a_nn) x_n e^{-|ξ'| x_n}`.
pub fn fourier_solution_p1(block: &MetricBlock, datum: &FourierDatum, x_n: f64) -> Result<Complex64> {
    if !(x_n >= 0.0) {
        return domain("x_n must be nonnegative");
    }
    Ok(p1_profile(block, datum)?.value(x_n))
}

/// `φ̂ e^{-|ξ'| x_n} (1 + |ξ'| x_n)`.
pub fn fourier_solution_p2(block: &MetricBlock, datum: &FourierDatum, x_n: f64) -> Result<Complex64> {
    if !(x_n >= 0.0) {
        return domain("x_n must be nonnegative");
    }
    Ok(p2_profile(block, datum)?.value(x_n))
}

/// Transformed operator `a_nn² (û'''' - 2k² û'' + k⁴ û)` applied to a profile.
pub fn transformed_bilaplacian(block: &MetricBlock, profile: &ExpLinearProfile, x: f64) -> Complex64 {
    let k2 = profile.decay * profile.decay;
    let r = profile.derivative(4, x) - profile.derivative(2, x) * (2.0 * k2) + profile.value(x) * (k2 * k2);
    r * (block.a_nn * block.a_nn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn block(a_tan: &[f64], k: usize, a_nn: f64) -> MetricBlock {
        MetricBlock::new(DMatrix::from_row_slice(k, k, a_tan), a_nn).unwrap()
    }

    #[test]
    fn xi_norm_examples() {
        let id = MetricBlock::identity(3);
        assert!((xi_norm(&id, &[0.6, 0.8]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(xi_norm(&block(&[1.0], 1, 4.0), &[2.0]).unwrap(), 1.0);
        let a = block(&[2.0, 0.5, 0.5, 1.0], 2, 3.0);
        let base = xi_norm(&a, &[0.3, -0.7]).unwrap();
        assert!((xi_norm(&a, &[0.9, -2.1]).unwrap() - 3.0 * base).abs() < 1e-14);
        assert!(xi_norm(&a, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn random_blocks_are_seeded_and_valid() {
        let a = MetricBlock::random(3, 7).unwrap();
        assert_eq!(a, MetricBlock::random(3, 7).unwrap());
        assert_ne!(a, MetricBlock::random(3, 8).unwrap());
        assert_eq!(a.dim(), 3);
        assert!((0.5..2.0).contains(&a.a_nn()));
        assert!(MetricBlock::random(1, 0).is_err());
    }

    #[test]
    fn block_validation() {
        assert!(MetricBlock::new(DMatrix::from_row_slice(1, 1, &[1.0]), 0.0).is_err());
        assert!(MetricBlock::new(DMatrix::from_row_slice(1, 1, &[-1.0]), 1.0).is_err());
        assert!(MetricBlock::identity(2).tangential_form(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn p1_boundary_conditions_are_exact() {
        let a = block(&[2.0, 0.3, 0.3, 1.5], 2, 2.5);
        let d = FourierDatum::new(vec![0.4, 1.1], Complex64::new(0.7, -0.2));
        let p = p1_profile(&a, &d).unwrap();
        assert!(p.value(0.0).norm() <= 1e-15);
        assert!((p.derivative(1, 0.0) * a.a_nn().sqrt() - d.amplitude).norm() <= 1e-15);
        assert_eq!(fourier_solution_p1(&a, &d, 0.0).unwrap(), c(0.0));
        assert!(fourier_solution_p1(&a, &d, -1.0).is_err());
    }

    #[test]
    fn p1_boundary_laplacian_identity_block() {
        // -a_nn û''(0) = 2 for the identity block, unit amplitude, |η'| = 1
        let id = MetricBlock::identity(2);
        let p = p1_profile(&id, &FourierDatum::unit(vec![1.0])).unwrap();
        assert!((-p.derivative(2, 0.0).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn p2_boundary_conditions_are_exact() {
        let a = block(&[1.3], 1, 0.6);
        let d = FourierDatum::new(vec![-2.0], Complex64::new(1.5, 0.5));
        let p = p2_profile(&a, &d).unwrap();
        assert!((p.value(0.0) - d.amplitude).norm() <= 1e-15);
        assert!(p.derivative(1, 0.0).norm() <= 1e-15);
        // û'''(0) = 2 k³ φ̂
        let k = xi_norm(&a, &d.eta).unwrap();
        assert!((p.derivative(3, 0.0) - d.amplitude * (2.0 * k.powi(3))).norm() < 1e-13);
        // √a_nn ∂_n(Δ̂u)(0) = 2 (ηᵀ a_tan η)^{3/2} φ̂
        let q = a.tangential_form(&d.eta).unwrap();
        let lap_deriv = (p.derivative(3, 0.0) - p.derivative(1, 0.0) * (k * k)) * a.a_nn();
        assert!((lap_deriv * a.a_nn().sqrt() - d.amplitude * (2.0 * q.powf(1.5))).norm() < 1e-12);
    }

    #[test]
    fn profiles_solve_the_transformed_ode() {
        let a = block(&[2.0, 0.1, 0.1, 0.9], 2, 1.7);
        for d in [FourierDatum::unit(vec![0.5, 0.2]), FourierDatum::unit(vec![-1.0, 2.0])] {
            for p in [p1_profile(&a, &d).unwrap(), p2_profile(&a, &d).unwrap()] {
                for x in [0.0, 0.3, 1.0, 4.0] {
                    let scale = p.value(x).norm().max(p.derivative(4, x).norm()).max(1e-300);
                    assert!(transformed_bilaplacian(&a, &p, x).norm() <= 1e-12 * scale * a.a_nn().powi(2) * 10.0);
                }
            }
        }
    }

    #[test]
    fn fourth_order_difference_residual_shrinks() {
        // central 5-point stencil of (D² - k²)² applied to the closed form
        let id = MetricBlock::identity(2);
        let p = p2_profile(&id, &FourierDatum::unit(vec![1.3])).unwrap();
        let k2 = p.decay * p.decay;
        let residual = |h: f64| {
            let s = k2 * h * h;
            let w = [1.0, -2.0 * (2.0 + s), (2.0 + s) * (2.0 + s) + 2.0, -2.0 * (2.0 + s), 1.0];
            let x0 = 0.8;
            let acc: f64 = (0..5).map(|i| w[i] * p.value(x0 + (i as f64 - 2.0) * h).re).sum();
            (acc / h.powi(4)).abs()
        };
        let r1 = residual(0.04);
        let r2 = residual(0.02);
        let ratio = r1 / r2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
