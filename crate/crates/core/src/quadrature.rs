//! Boundary parametrizations, boundary weights and composite Gauss–Legendre
//! quadrature over parameter rectangles.

use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{domain, Result};

/// Points per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 10;

pub type ParamFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn reference_rule(order: usize) -> Vec<(f64, f64)> {
    let order = NonZeroUsize::new(order).expect("quadrature order is positive");
    GaussLegendre::new(order).iter().map(|&(x, w)| (x, w)).collect()
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let reference = reference_rule(order);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        for &(x, w) in &reference {
            out.push((mid + 0.5 * width * x, 0.5 * width * w));
        }
    }
    out
}

/// Tensor-product composite rule over a rectangle, calling `f` at every node
/// with its combined weight. Nodes are visited in a fixed order.
pub fn tensor_quadrature(
    bounds: &[(f64, f64)],
    panels: usize,
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<f64> {
    if panels == 0 {
        return domain("quadrature needs at least one panel");
    }
    let rules: Vec<Vec<(f64, f64)>> = bounds.iter().map(|&(a, b)| composite_rule(a, b, panels, PANEL_ORDER)).collect();
    let dim = rules.len();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut total = 0.0;
    if dim == 0 {
        return f(&point);
    }
    loop {
        let mut weight = 1.0;
        for d in 0..dim {
            let (x, w) = rules[d][idx[d]];
            point[d] = x;
            weight *= w;
        }
        total += weight * f(&point)?;
        // odometer increment
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(total);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < rules[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// A boundary `∂Ω` given by a parametrization over a rectangle together with
/// its area element.
#[derive(Clone)]
pub struct BoundarySurface {
    label: String,
    ambient_dim: usize,
    bounds: Vec<(f64, f64)>,
    area_element: ParamFn,
}

impl fmt::Debug for BoundarySurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundarySurface")
            .field("label", &self.label)
            .field("ambient_dim", &self.ambient_dim)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl BoundarySurface {
    pub fn new(
        label: impl Into<String>,
        ambient_dim: usize,
        bounds: Vec<(f64, f64)>,
        area_element: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if ambient_dim < 2 || bounds.len() != ambient_dim - 1 {
            return domain("a boundary in R^n is parametrized by n-1 parameters");
        }
        if bounds.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return domain("parameter bounds must be finite with lower < upper");
        }
        Ok(BoundarySurface { label: label.into(), ambient_dim, bounds, area_element: Arc::new(area_element) })
    }

    /// Circle of the given radius, parametrized by angle.
    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return domain("circle radius must be positive");
        }
        Self::new(format!("circle(r={radius})"), 2, vec![(0.0, 2.0 * PI)], move |_| radius)
    }

    /// Unit sphere `S^{n-1} ⊂ R^n` in hyperspherical coordinates
    /// `(φ_1, …, φ_{n-2}, θ)` with `φ_j ∈ [0, π]` and `θ ∈ [0, 2π]`.
    pub fn unit_sphere(n: usize) -> Result<Self> {
        if n < 2 {
            return domain("unit_sphere needs n >= 2");
        }
        let mut bounds = vec![(0.0, PI); n - 2];
        bounds.push((0.0, 2.0 * PI));
        Self::new(format!("unit sphere in R^{n}"), n, bounds, move |p| {
            (0..n - 2).map(|j| p[j].sin().powi((n - 2 - j) as i32)).product()
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn parameter_dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn area_element(&self, p: &[f64]) -> f64 {
        (self.area_element)(p)
    }

    /// Total boundary measure.
    pub fn area(&self, panels: usize) -> Result<f64> {
        tensor_quadrature(&self.bounds, panels, |p| Ok(self.area_element(p)))
    }
}

/// The boundary density `ρ` on a surface, with the regularizing shift `ε`.
#[derive(Clone)]
pub struct BoundaryWeight {
    surface: BoundarySurface,
    rho: ParamFn,
    epsilon: f64,
}

impl fmt::Debug for BoundaryWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryWeight").field("surface", &self.surface).field("epsilon", &self.epsilon).finish()
    }
}

impl BoundaryWeight {
    pub fn new(
        surface: BoundarySurface,
        rho: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return domain("epsilon must be a finite nonnegative number");
        }
        Ok(BoundaryWeight { surface, rho: Arc::new(rho), epsilon })
    }

    pub fn constant(surface: BoundarySurface, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return domain("rho must be nonnegative");
        }
        Self::new(surface, move |_| c, 0.0)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return domain("epsilon must be a finite nonnegative number");
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn surface(&self) -> &BoundarySurface {
        &self.surface
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `ρ` at a boundary parameter point; negative values are rejected.
    pub fn rho(&self, p: &[f64]) -> Result<f64> {
        let r = (self.rho)(p);
        if !(r >= 0.0) {
            return domain(format!("rho({p:?}) = {r} is negative or undefined"));
        }
        Ok(r)
    }

    /// `ρ + ε`, the quantity symbols divide by.
    pub fn shifted_rho(&self, p: &[f64]) -> Result<f64> {
        Ok(self.rho(p)? + self.epsilon)
    }
}
