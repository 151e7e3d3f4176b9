//! Principal symbols on the cotangent fibres of the boundary.
//!
//! Symbols are pointwise evaluators carrying their homogeneity degree. Values
//! are kept as a numerator/denominator pair so that dividing by a weight such
//! as `(ρ + ε)` stays a division after composition instead of becoming a
//! multiplication by a rounded reciprocal.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{domain, Result};
use crate::quadrature::BoundaryWeight;
use crate::spectra::ProblemKind;

type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

#[derive(Clone)]
enum MetricField {
    Constant(DMatrix<f64>),
    Field(MatrixFn),
}

/// The inverse boundary metric `g^{jk}(x')` on an `(n-1)`-dimensional chart.
#[derive(Clone)]
pub struct BoundaryMetric {
    dim: usize,
    field: Arc<MetricField>,
}

impl fmt::Debug for BoundaryMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field.as_ref() {
            MetricField::Constant(m) => write!(f, "BoundaryMetric(constant {m:?})"),
            MetricField::Field(_) => write!(f, "BoundaryMetric(field, dim {})", self.dim),
        }
    }
}

pub(crate) fn check_spd(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return domain(format!("{what} must be a nonempty square matrix"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return domain(format!("{what} has non-finite entries"));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return domain(format!("{what} is not symmetric"));
    }
    if m.clone().cholesky().is_none() {
        return domain(format!("{what} is not positive definite"));
    }
    Ok(())
}

impl BoundaryMetric {
    pub fn constant(g_inv: DMatrix<f64>) -> Result<Self> {
        check_spd(&g_inv, "inverse metric")?;
        Ok(BoundaryMetric { dim: g_inv.nrows(), field: Arc::new(MetricField::Constant(g_inv)) })
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "metric dimension must be positive");
        BoundaryMetric { dim, field: Arc::new(MetricField::Constant(DMatrix::identity(dim, dim))) }
    }

    /// A position-dependent inverse metric. Positive definiteness is checked
    /// at every query.
    pub fn from_fn(dim: usize, g_inv: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        BoundaryMetric { dim, field: Arc::new(MetricField::Field(Arc::new(g_inv))) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `g^{jk}(x')`.
    pub fn inverse_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        match self.field.as_ref() {
            MetricField::Constant(m) => Ok(m.clone()),
            MetricField::Field(f) => {
                let m = f(x);
                if m.nrows() != self.dim {
                    return domain("metric field returned a matrix of the wrong size");
                }
                check_spd(&m, "inverse metric")?;
                Ok(m)
            }
        }
    }

    /// `Σ g^{jk}(x') η_j η_k`.
    pub fn quadratic_form(&self, x: &[f64], eta: &[f64]) -> Result<f64> {
        if eta.len() != self.dim {
            return domain(format!("covector has {} components, metric dimension is {}", eta.len(), self.dim));
        }
        let q = match self.field.as_ref() {
            MetricField::Constant(m) => quad(m, eta),
            MetricField::Field(_) => quad(&self.inverse_at(x)?, eta),
        };
        Ok(q)
    }

    /// Density of the fibre measure `dξ* = √|g'| dη` with `g' = (g^{jk})`.
    pub fn fiber_density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.inverse_at(x)?.determinant().sqrt())
    }

    pub fn same_field(&self, other: &BoundaryMetric) -> bool {
        Arc::ptr_eq(&self.field, &other.field)
    }
}

fn quad(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let k = v.len();
    let mut s = 0.0;
    for j in 0..k {
        let mut row = 0.0;
        for l in 0..k {
            row += m[(j, l)] * v[l];
        }
        s += v[j] * row;
    }
    s
}

/// A symbol value as `numerator / denominator`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolValue {
    pub numerator: f64,
    pub denominator: f64,
}

impl SymbolValue {
    pub fn new(numerator: f64) -> Self {
        SymbolValue { numerator, denominator: 1.0 }
    }

    pub fn ratio(numerator: f64, denominator: f64) -> Self {
        SymbolValue { numerator, denominator }
    }

    pub fn value(self) -> f64 {
        self.numerator / self.denominator
    }

    fn product(self, other: SymbolValue) -> SymbolValue {
        SymbolValue { numerator: self.numerator * other.numerator, denominator: self.denominator * other.denominator }
    }
}

type SymbolFn = Arc<dyn Fn(&[f64], &[f64]) -> Result<SymbolValue> + Send + Sync>;
type CoefficientFn = Arc<dyn Fn(&[f64]) -> Result<SymbolValue> + Send + Sync>;

/// Structure of symbols of the form `c(x') · (Σ g^{jk} η_j η_k)^{d/2}`.
/// Degree-zero multipliers carry no metric.
#[derive(Clone)]
pub struct EllipsoidalForm {
    coefficient: CoefficientFn,
    metric: Option<BoundaryMetric>,
}

impl EllipsoidalForm {
    pub fn coefficient(&self, x: &[f64]) -> Result<f64> {
        Ok((self.coefficient)(x)?.value())
    }

    pub fn metric(&self) -> Option<&BoundaryMetric> {
        self.metric.as_ref()
    }
}

/// A positively homogeneous function on the cotangent fibre, defined for `η' ≠ 0`.
#[derive(Clone)]
pub struct HomogeneousSymbol {
    label: String,
    degree: f64,
    eval: SymbolFn,
    form: Option<EllipsoidalForm>,
}

impl fmt::Debug for HomogeneousSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousSymbol")
            .field("label", &self.label)
            .field("degree", &self.degree)
            .field("ellipsoidal", &self.form.is_some())
            .finish()
    }
}

fn check_covector(eta: &[f64]) -> Result<()> {
    if eta.iter().any(|v| !v.is_finite()) {
        return domain("covector has non-finite components");
    }
    if eta.iter().all(|&v| v == 0.0) {
        return domain("symbols are evaluated away from the zero section (eta' = 0)");
    }
    Ok(())
}

impl HomogeneousSymbol {
    /// A symbol from an arbitrary evaluator; the caller asserts homogeneity of
    /// the given degree.
    pub fn new(
        label: impl Into<String>,
        degree: f64,
        eval: impl Fn(&[f64], &[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        HomogeneousSymbol {
            label: label.into(),
            degree,
            eval: Arc::new(move |x, eta| eval(x, eta).map(SymbolValue::new)),
            form: None,
        }
    }

    /// The constant symbol `c` of degree 0.
    pub fn constant(c: f64) -> Self {
        HomogeneousSymbol {
            label: format!("{c}"),
            degree: 0.0,
            eval: Arc::new(move |_, _| Ok(SymbolValue::new(c))),
            form: Some(EllipsoidalForm { coefficient: Arc::new(move |_| Ok(SymbolValue::new(c))), metric: None }),
        }
    }

    /// The degree-0 multiplier `1 / (ρ(x') + ε)^power`.
    pub fn weight_reciprocal(weight: &BoundaryWeight, power: i32) -> Self {
        let w = weight.clone();
        let coefficient: CoefficientFn = Arc::new(move |x| {
            let shifted = w.shifted_rho(x)?;
            if shifted <= 0.0 {
                return domain("rho + epsilon vanishes; the symbol is undefined here");
            }
            Ok(SymbolValue::ratio(1.0, shifted.powi(power)))
        });
        let c = coefficient.clone();
        HomogeneousSymbol {
            label: format!("(rho+eps)^-{power}"),
            degree: 0.0,
            eval: Arc::new(move |x, _| c(x)),
            form: Some(EllipsoidalForm { coefficient, metric: None }),
        }
    }

    /// `c · (Σ g^{jk} η_j η_k)^{degree/2}` with a constant `c`.
    pub fn metric_power(label: impl Into<String>, metric: &BoundaryMetric, c: f64, degree: f64) -> Self {
        let m = metric.clone();
        HomogeneousSymbol {
            label: label.into(),
            degree,
            eval: Arc::new(move |x, eta| {
                let q = m.quadratic_form(x, eta)?;
                Ok(SymbolValue::new(c * metric_power_value(q, degree)))
            }),
            form: Some(EllipsoidalForm {
                coefficient: Arc::new(move |_| Ok(SymbolValue::new(c))),
                metric: Some(metric.clone()),
            }),
        }
    }

    /// Principal symbol of the Neumann-to-Laplacian map, `2 √(Σ g^{jk} η_j η_k)`.
    pub fn neumann_to_laplacian(metric: &BoundaryMetric) -> Self {
        Self::metric_power("F", metric, 2.0, 1.0)
    }

    /// Principal symbol of the Dirichlet-to-Laplacian-derivative map, `2 (Σ g^{jk} η_j η_k)^{3/2}`.
    pub fn dirichlet_to_laplacian_derivative(metric: &BoundaryMetric) -> Self {
        Self::metric_power("Theta", metric, 2.0, 3.0)
    }

    /// Principal symbol of the harmonic Dirichlet-to-Neumann map, `√(Σ g^{jk} η_j η_k)`.
    pub fn dirichlet_to_neumann(metric: &BoundaryMetric) -> Self {
        Self::metric_power("DtN", metric, 1.0, 1.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn ellipsoidal_form(&self) -> Option<&EllipsoidalForm> {
        self.form.as_ref()
    }

    pub fn evaluate_parts(&self, x: &[f64], eta: &[f64]) -> Result<SymbolValue> {
        check_covector(eta)?;
        (self.eval)(x, eta)
    }

    pub fn evaluate(&self, x: &[f64], eta: &[f64]) -> Result<f64> {
        Ok(self.evaluate_parts(x, eta)?.value())
    }
}

fn metric_power_value(q: f64, degree: f64) -> f64 {
    // exact paths for the degrees that occur in practice
    if degree == 1.0 {
        q.sqrt()
    } else if degree == 2.0 {
        q
    } else if degree == 3.0 {
        q * q.sqrt()
    } else {
        q.powf(degree / 2.0)
    }
}

/// Principal symbol of `A ∘ B`: degrees add and values multiply.
pub fn symbol_compose(a: &HomogeneousSymbol, b: &HomogeneousSymbol) -> HomogeneousSymbol {
    let (ea, eb) = (a.eval.clone(), b.eval.clone());
    let form = match (&a.form, &b.form) {
        (Some(fa), Some(fb)) => {
            let metric = match (&fa.metric, &fb.metric) {
                (None, None) => Some(None),
                (Some(m), None) | (None, Some(m)) => Some(Some(m.clone())),
                (Some(m1), Some(m2)) if m1.same_field(m2) => Some(Some(m1.clone())),
                _ => None,
            };
            metric.map(|metric| {
                let (ca, cb) = (fa.coefficient.clone(), fb.coefficient.clone());
                EllipsoidalForm { coefficient: Arc::new(move |x| Ok(ca(x)?.product(cb(x)?))), metric }
            })
        }
        _ => None,
    };
    HomogeneousSymbol {
        label: format!("{}*{}", a.label, b.label),
        degree: a.degree + b.degree,
        eval: Arc::new(move |x, eta| Ok(ea(x, eta)?.product(eb(x, eta)?))),
        form,
    }
}

/// `2 √(η'ᵀ g^{-1}(x') η')`.
pub fn symbol_f(metric: &BoundaryMetric, x: &[f64], eta: &[f64]) -> Result<f64> {
    check_covector(eta)?;
    Ok(2.0 * metric.quadratic_form(x, eta)?.sqrt())
}

/// `2 (η'ᵀ g^{-1}(x') η')^{3/2}`.
pub fn symbol_theta(metric: &BoundaryMetric, x: &[f64], eta: &[f64]) -> Result<f64> {
    check_covector(eta)?;
    let q = metric.quadratic_form(x, eta)?;
    Ok(2.0 * q * q.sqrt())
}

/// The weighted boundary operator symbol for each problem kind.
pub fn symbol_steklov(
    problem: ProblemKind,
    metric: &BoundaryMetric,
    weight: &BoundaryWeight,
    x: &[f64],
    eta: &[f64],
) -> Result<f64> {
    let shifted = weight.shifted_rho(x)?;
    if shifted <= 0.0 {
        return domain("rho + epsilon vanishes; the symbol is undefined here");
    }
    match problem {
        ProblemKind::NeumannTrace => Ok(symbol_f(metric, x, eta)? / shifted),
        ProblemKind::DirichletTrace => Ok(symbol_theta(metric, x, eta)? / shifted.powi(3)),
        ProblemKind::HarmonicSteklov => {
            check_covector(eta)?;
            Ok(metric.quadratic_form(x, eta)?.sqrt() / shifted)
        }
    }
}

/// The same symbol as [`symbol_steklov`], assembled by composition of the
/// weight multiplier with the unweighted boundary operator.
pub fn steklov_symbol(problem: ProblemKind, metric: &BoundaryMetric, weight: &BoundaryWeight) -> HomogeneousSymbol {
    match problem {
        ProblemKind::NeumannTrace => symbol_compose(
            &HomogeneousSymbol::weight_reciprocal(weight, 1),
            &HomogeneousSymbol::neumann_to_laplacian(metric),
        ),
        ProblemKind::DirichletTrace => symbol_compose(
            &HomogeneousSymbol::weight_reciprocal(weight, 3),
            &HomogeneousSymbol::dirichlet_to_laplacian_derivative(metric),
        ),
        ProblemKind::HarmonicSteklov => symbol_compose(
            &HomogeneousSymbol::weight_reciprocal(weight, 1),
            &HomogeneousSymbol::dirichlet_to_neumann(metric),
        ),
    }
}
