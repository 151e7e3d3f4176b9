//! Biharmonic Steklov spectra on balls, Weyl-type counting laws with explicit
//! leading constants, principal-symbol algebra for the Neumann-to-Laplacian and
//! Dirichlet-to-Laplacian-derivative maps, and numerical half-space model
//! problems that recover those symbols independently.
//!
//! Sign convention: the boundary normal `ν` points into the domain, so on the
//! unit sphere `∂/∂ν = -Σ x_i ∂/∂x_i`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod counting;
pub mod error;
pub mod expr;
pub mod halfspace;
pub mod poly;
pub mod quadrature;
pub mod spectra;
pub mod symbols;

pub use error::{Error, Result};
pub use spectra::{ProblemKind, Spectrum};

/// Volume of the unit ball in `R^k`, `π^{k/2} / Γ(k/2 + 1)`, evaluated by the
/// recurrence `ω_k = 2π/k · ω_{k-2}` which is exact to a few ulps.
pub fn unit_ball_volume(k: usize) -> f64 {
    let mut omega = if k.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut j = 2 - k % 2;
    while j <= k {
        if j >= 2 {
            omega *= 2.0 * std::f64::consts::PI / j as f64;
        }
        j += 2;
    }
    omega
}
