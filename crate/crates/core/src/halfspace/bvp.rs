//! Finite-difference solution of the transformed fourth-order ODE on a
//! truncated interval `[0, L]`.

use num_complex::Complex64;

use super::banded::BandedMatrix;
use super::{xi_norm, FourierDatum, MetricBlock};
use crate::error::{domain, Error, Result};

/// Smallest admissible `L·|ξ'|`.
pub const MIN_DECAY_LENGTH: f64 = 20.0;

/// Uniform grid `{0, h, 2h, …, L}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfSpaceGrid {
    h: f64,
    length: f64,
    intervals: usize,
}

impl HalfSpaceGrid {
    pub fn new(h: f64, length: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return domain(format!("step h must be positive, got {h}"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return domain(format!("truncation length L must be positive, got {length}"));
        }
        let ratio = length / h;
        let intervals = ratio.round();
        if (ratio - intervals).abs() > 1e-9 * ratio.max(1.0) {
            return domain(format!("L/h = {ratio} is not an integer"));
        }
        if intervals < 8.0 {
            return domain("grid needs at least 8 intervals");
        }
        if intervals > 1e8 {
            return Err(Error::Resource(format!("grid with {intervals} intervals is too large")));
        }
        Ok(HalfSpaceGrid { h, length, intervals: intervals as usize })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of intervals `L/h`; there are one more nodes.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.intervals).map(|i| i as f64 * self.h).collect()
    }
}

/// Discrete solution: the recovered boundary ratio and nodal values of `û`.
#[derive(Clone, Debug, PartialEq)]
pub struct BvpSolution {
    pub recovered: f64,
    pub values: Vec<Complex64>,
    pub grid: HalfSpaceGrid,
}

#[derive(Clone, Copy, PartialEq)]
enum Condition {
    /// `u(0) = 0`, `u'(0) = 1/√a_nn`
    Neumann,
    /// `u(0) = 1`, `u'(0) = 0`
    Dirichlet,
}

/// Unit-amplitude solve; returns nodal values of `û`.
///
/// `(D² - k²)² u = 0` is solved as the coupled pair `(D² - k²) u = v/h²`,
/// `(D² - k²) v = 0`, interleaved as `[u_0, v_0, u_1, v_1, …]`. Eliminating
/// `v` gives back the five-point stencil, but the coupled matrix avoids the
/// `h^{-4}` conditioning of the direct fourth-order system.
fn solve_unit(k: f64, a_nn: f64, grid: &HalfSpaceGrid, cond: Condition) -> Result<Vec<f64>> {
    if grid.length * k < MIN_DECAY_LENGTH {
        return Err(Error::Adequacy(grid.length * k));
    }
    let n = grid.intervals;
    let h = grid.h;
    let diag = -(2.0 + k * k * h * h);
    let u = |i: usize| 2 * i;
    let v = |i: usize| 2 * i + 1;
    let mut m = BandedMatrix::zeros(2 * n + 2, 4, 3);
    let mut rhs = vec![0.0; 2 * n + 2];

    m.set(0, u(0), 1.0);
    // one-sided u'(0)·2h
    m.set(1, u(0), -3.0);
    m.set(1, u(1), 4.0);
    m.set(1, u(2), -1.0);
    match cond {
        Condition::Neumann => rhs[1] = 2.0 * h / a_nn.sqrt(),
        Condition::Dirichlet => rhs[0] = 1.0,
    }
    for i in 1..n {
        m.set(2 * i, u(i - 1), 1.0);
        m.set(2 * i, u(i), diag);
        m.set(2 * i, u(i + 1), 1.0);
        m.set(2 * i, v(i), -1.0);
        m.set(2 * i + 1, v(i - 1), 1.0);
        m.set(2 * i + 1, v(i), diag);
        m.set(2 * i + 1, v(i + 1), 1.0);
    }
    // u'(L) = 0, u(L) = 0
    m.set(2 * n, u(n), 3.0);
    m.set(2 * n, u(n - 1), -4.0);
    m.set(2 * n, u(n - 2), 1.0);
    m.set(2 * n + 1, u(n), 1.0);
    let x = m.solve(rhs)?;
    Ok(x.into_iter().step_by(2).collect())
}

fn checked_datum(block: &MetricBlock, datum: &FourierDatum) -> Result<f64> {
    if datum.amplitude == Complex64::new(0.0, 0.0) || !datum.amplitude.is_finite() {
        return domain("boundary amplitude must be nonzero and finite");
    }
    xi_norm(block, &datum.eta)
}

/// Recovers `−a_nn(û''(0) − |ξ'|² û(0))/ĥ`, which tends to `2√(η'ᵀ a_tan η')`.
pub fn bvp_solve_p1(block: &MetricBlock, datum: &FourierDatum, grid: &HalfSpaceGrid) -> Result<BvpSolution> {
    let k = checked_datum(block, datum)?;
    let a_nn = block.a_nn();
    let u = solve_unit(k, a_nn, grid, Condition::Neumann)?;
    let h = grid.h;
    let d2 = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h);
    let recovered = -a_nn * (d2 - k * k * u[0]);
    finish(recovered, u, datum, grid)
}

/// Recovers `√a_nn·a_nn(û'''(0) − |ξ'|² û'(0))/φ̂`, which tends to `2(η'ᵀ a_tan η')^{3/2}`.
pub fn bvp_solve_p2(block: &MetricBlock, datum: &FourierDatum, grid: &HalfSpaceGrid) -> Result<BvpSolution> {
    let k = checked_datum(block, datum)?;
    let a_nn = block.a_nn();
    let u = solve_unit(k, a_nn, grid, Condition::Dirichlet)?;
    let h = grid.h;
    let d1 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    let d3 = (-5.0 * u[0] + 18.0 * u[1] - 24.0 * u[2] + 14.0 * u[3] - 3.0 * u[4]) / (2.0 * h * h * h);
    let recovered = a_nn.sqrt() * a_nn * (d3 - k * k * d1);
    finish(recovered, u, datum, grid)
}

fn finish(recovered: f64, u: Vec<f64>, datum: &FourierDatum, grid: &HalfSpaceGrid) -> Result<BvpSolution> {
    if !recovered.is_finite() {
        return Err(Error::Numerical("recovered symbol value is not finite".into()));
    }
    let values = u.into_iter().map(|v| datum.amplitude * v).collect();
    Ok(BvpSolution { recovered, values, grid: *grid })
}
