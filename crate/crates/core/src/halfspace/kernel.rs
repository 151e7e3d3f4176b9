//! Explicit half-space kernels `K1`, `K2` and the convolution solution
//! `u = K1 * φ + K2 * h`, with a Fourier-side reference solution.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::MetricBlock;
use crate::error::{domain, Error, Result};
use crate::quadrature::{composite_rule, PANEL_ORDER};

/// Default node count for the circle quadrature when `n = 3`.
pub const DEFAULT_QUAD_POINTS: usize = 256;

/// Kernels are only evaluated at `x_n >= MIN_NORMAL_DISTANCE`.
pub const MIN_NORMAL_DISTANCE: f64 = 1e-3;

const IMAG_TOLERANCE: f64 = 1e-10;
const SUPPORT_TOLERANCE: f64 = 1e-12;
const SYNTHESIS_PANELS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// Kernel acting on the Dirichlet datum `φ`.
    K1,
    /// Kernel acting on the Neumann datum `h`.
    K2,
}

/// A kernel value with the imaginary part left over by the complex
/// integrand, kept as a diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub imag: f64,
}

/// Unit directions on `S^{n-2}` with their quadrature weights.
fn sphere_nodes(n: usize, quad_points: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match n {
        2 => Ok(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
        3 => {
            if quad_points < 3 {
                return domain("circle quadrature needs at least 3 points");
            }
            let w = 2.0 * PI / quad_points as f64;
            Ok((0..quad_points)
                .map(|j| {
                    let t = w * j as f64;
                    (vec![t.cos(), t.sin()], w)
                })
                .collect())
        }
        _ => domain(format!("kernels are implemented for n = 2, 3 only, got n = {n}")),
    }
}

/// `(-1)^{n-1} (n-2)! / (2πi)^{n-1}`.
fn prefactor(n: usize) -> Complex64 {
    let fact: f64 = (1..=n.saturating_sub(2)).map(|k| k as f64).product();
    let sign = if (n - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    Complex64::new(sign * fact, 0.0) / Complex64::new(0.0, 2.0 * PI).powi((n - 1) as i32)
}

/// Evaluates `K1` or `K2` at `(x', x_n)` by integrating over unit `η'`.
pub fn kernel_k(
    block: &MetricBlock,
    which: KernelKind,
    x_tan: &[f64],
    x_n: f64,
    quad_points: usize,
) -> Result<KernelValue> {
    let n = block.dim();
    if !(x_n > 0.0 && x_n.is_finite()) {
        return domain(format!("kernels need x_n > 0, got {x_n}"));
    }
    if x_tan.len() != n - 1 {
        return domain(format!("x' has {} components, expected {}", x_tan.len(), n - 1));
    }
    let nodes = sphere_nodes(n, quad_points)?;
    let a_nn = block.a_nn();
    let n_i = n as i32;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (eta, w) in &nodes {
        let s = (block.tangential_form(eta)? / a_nn).sqrt();
        let dot: f64 = x_tan.iter().zip(eta).map(|(a, b)| a * b).sum();
        let z = Complex64::new(dot, x_n * s);
        let term = match which {
            KernelKind::K1 => z.powi(1 - n_i) + Complex64::new(0.0, (n - 1) as f64 * x_n * s) * z.powi(-n_i),
            KernelKind::K2 => z.powi(1 - n_i) * (x_n / a_nn.sqrt()),
        };
        sum += term * *w;
        scale += term.norm() * *w;
    }
    let pre = prefactor(n);
    let total = sum * pre;
    let scale = scale * pre.norm();
    if total.im.abs() > IMAG_TOLERANCE * scale.max(1.0) {
        return Err(Error::Numerical(format!("kernel imaginary part {} exceeds tolerance (scale {scale})", total.im)));
    }
    Ok(KernelValue { value: total.re, imag: total.im })
}

/// Boundary data `(φ, h)` sampled on the uniform grid `start + j·spacing`
/// of the line `x_n = 0` (the case `n = 2`).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    pub start: f64,
    pub spacing: f64,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
}

impl BoundaryData {
    pub fn new(start: f64, spacing: f64, phi: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite() && start.is_finite()) {
            return domain("sample spacing must be positive");
        }
        if phi.len() != h.len() || phi.len() < 2 {
            return domain("phi and h need the same number (>= 2) of samples");
        }
        if phi.iter().chain(&h).any(|v| !v.is_finite()) {
            return domain("boundary samples must be finite");
        }
        Ok(BoundaryData { start, spacing, phi, h })
    }

    /// Samples `φ` and `h` on `[lo, hi]` with `points` nodes.
    pub fn sample(lo: f64, hi: f64, points: usize, phi: impl Fn(f64) -> f64, h: impl Fn(f64) -> f64) -> Result<Self> {
        if points < 2 || !(hi > lo) {
            return domain("sampling window needs lo < hi and at least 2 points");
        }
        let spacing = (hi - lo) / (points - 1) as f64;
        let ys: Vec<f64> = (0..points).map(|j| lo + j as f64 * spacing).collect();
        Self::new(lo, spacing, ys.iter().map(|&y| phi(y)).collect(), ys.iter().map(|&y| h(y)).collect())
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn node(&self, j: usize) -> f64 {
        self.start + j as f64 * self.spacing
    }

    /// Trapezoid weight of sample `j`.
    fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.len() {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    fn check_support(&self) -> Result<()> {
        let last = self.len() - 1;
        for v in [self.phi[0], self.phi[last], self.h[0], self.h[last]] {
            if v.abs() > SUPPORT_TOLERANCE {
                return Err(Error::Support(v));
            }
        }
        Ok(())
    }
}

fn check_problem(block: &MetricBlock, data: &BoundaryData, points: &[[f64; 2]]) -> Result<()> {
    if block.dim() != 2 {
        return domain("boundary convolution is implemented for n = 2 only");
    }
    data.check_support()?;
    for p in points {
        if !(p[1] >= MIN_NORMAL_DISTANCE) || !p[0].is_finite() {
            return domain(format!("evaluation point {p:?} must have x_n >= {MIN_NORMAL_DISTANCE}"));
        }
    }
    Ok(())
}

/// Trapezoid-rule convolution of the kernels with the sampled data, at
/// points `(x', x_n)`.
pub fn solve_by_kernel(block: &MetricBlock, data: &BoundaryData, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    check_problem(block, data, points)?;
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let mut acc = 0.0;
        for j in 0..data.len() {
            let (phi, h) = (data.phi[j], data.h[j]);
            if phi == 0.0 && h == 0.0 {
                continue;
            }
            let dx = [p[0] - data.node(j)];
            let mut v = 0.0;
            if phi != 0.0 {
                v += phi * kernel_k(block, KernelKind::K1, &dx, p[1], 0)?.value;
            }
            if h != 0.0 {
                v += h * kernel_k(block, KernelKind::K2, &dx, p[1], 0)?.value;
            }
            acc += data.weight(j) * v;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Reference solution: the discrete-time Fourier transform of the samples
/// fed through the exact Fourier-side profiles and inverted by composite
/// Gauss–Legendre quadrature over `|η| <= π/spacing`.
pub fn fourier_synthesis(block: &MetricBlock, data: &BoundaryData, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    check_problem(block, data, points)?;
    let eta_max = PI / data.spacing;
    let ratio = (block.a_tan()[(0, 0)] / block.a_nn()).sqrt();
    let root_nn = block.a_nn().sqrt();
    // split at 0 where |η| has a kink
    let mut rule = composite_rule(-eta_max, 0.0, SYNTHESIS_PANELS, PANEL_ORDER);
    rule.extend(composite_rule(0.0, eta_max, SYNTHESIS_PANELS, PANEL_ORDER));

    let transforms: Vec<(f64, f64, Complex64, Complex64)> = rule
        .iter()
        .map(|&(eta, w)| {
            let mut phi_hat = Complex64::new(0.0, 0.0);
            let mut h_hat = Complex64::new(0.0, 0.0);
            for j in 0..data.len() {
                let e = Complex64::from_polar(data.weight(j), -eta * data.node(j));
                phi_hat += e * data.phi[j];
                h_hat += e * data.h[j];
            }
            (eta, w, phi_hat, h_hat)
        })
        .collect();

    Ok(points
        .iter()
        .map(|p| {
            let (x, x_n) = (p[0], p[1]);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(eta, w, phi_hat, h_hat) in &transforms {
                let k = eta.abs() * ratio;
                let decay = (-k * x_n).exp();
                let u_hat = phi_hat * (decay * (1.0 + k * x_n)) + h_hat * (x_n * decay / root_nn);
                acc += u_hat * Complex64::from_polar(w, eta * x);
            }
            acc.re / (2.0 * PI)
        })
        .collect())
}
