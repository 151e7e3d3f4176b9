//! Counting functions, Weyl-type leading terms and their remainders.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use crate::error::{domain, Result};
use crate::quadrature::{tensor_quadrature, BoundaryWeight};
use crate::spectra::{Eigenvalue, ProblemKind, Spectrum};
use crate::symbols::{BoundaryMetric, HomogeneousSymbol};
use crate::unit_ball_volume;

/// Upper bound for a counting query.
#[derive(Clone, Debug, PartialEq)]
pub enum Threshold {
    /// Compared against the floating value of each eigenvalue.
    Value(f64),
    /// `τ^power = value`, compared exactly.
    Power { power: u32, value: BigRational },
}

impl From<f64> for Threshold {
    fn from(v: f64) -> Self {
        Threshold::Value(v)
    }
}

impl Threshold {
    /// `τ` given through its exact cube.
    pub fn cube(value: BigRational) -> Self {
        Threshold::Power { power: 3, value }
    }

    pub fn approx(&self) -> f64 {
        match self {
            Threshold::Value(v) => *v,
            Threshold::Power { power, value } => value.to_f64().unwrap_or(f64::NAN).powf(1.0 / *power as f64),
        }
    }

    fn admits(&self, e: &Eigenvalue) -> bool {
        match self {
            Threshold::Value(t) => e.value() <= *t,
            Threshold::Power { power, value } => {
                if value < &BigRational::zero() {
                    return false;
                }
                // e^(1/p) <= v^(1/q)  <=>  e^q <= v^p
                let lhs = BigRational::from_integer(e.exact_power().pow(*power).into());
                lhs <= value.pow(e.power() as i32)
            }
        }
    }
}

/// Number of eigenvalues `≤ τ`, with multiplicity.
pub fn count_upto(spectrum: &Spectrum, tau: &Threshold) -> BigUint {
    let k = spectrum.entries().partition_point(|e| tau.admits(&e.value));
    spectrum.cumulative_count(k)
}

/// `Σ_{k≤m} N(n, k) = C(n+m-1, n-1) + C(n+m-2, n-1)`, the number of
/// Neumann-trace eigenvalues of the unit ball up to `n + 2m`.
pub fn ball_count_closed(n: usize, m: usize) -> Result<BigUint> {
    if n < 2 {
        return domain("ball_count_closed needs n >= 2");
    }
    let big = |v: usize| BigUint::from(v);
    let a = binomial(big(n + m - 1), big(n - 1));
    let b = if m == 0 { BigUint::zero() } else { binomial(big(n + m - 2), big(n - 1)) };
    Ok(a + b)
}

/// `4π`, `∛16 π` or `2π`: the base whose `(n-1)`-th power divides the leading term.
pub fn denominator_base(problem: ProblemKind) -> f64 {
    match problem {
        ProblemKind::NeumannTrace => 4.0 * PI,
        ProblemKind::DirichletTrace => 16f64.cbrt() * PI,
        ProblemKind::HarmonicSteklov => 2.0 * PI,
    }
}

/// Leading coefficient `ω_{n-1} ∫ρ^{n-1} ds / base^{n-1}` of the counting function.
pub fn weyl_leading(problem: ProblemKind, n: usize, boundary_integral: f64) -> Result<f64> {
    if n < 2 {
        return domain("Weyl laws need n >= 2");
    }
    if !(boundary_integral > 0.0 && boundary_integral.is_finite()) {
        return domain(format!("boundary integral must be positive, got {boundary_integral}"));
    }
    let k = n - 1;
    Ok(unit_ball_volume(k) * boundary_integral / denominator_base(problem).powi(k as i32))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylModel {
    pub n: usize,
    pub problem: ProblemKind,
    pub boundary_integral: f64,
    pub leading: f64,
}

impl WeylModel {
    pub fn new(problem: ProblemKind, n: usize, boundary_integral: f64) -> Result<Self> {
        let leading = weyl_leading(problem, n, boundary_integral)?;
        Ok(WeylModel { n, problem, boundary_integral, leading })
    }

    /// Unit ball (or disk) with `ρ ≡ 1`, where `∫ds = n ω_n`.
    pub fn unit_ball(problem: ProblemKind, n: usize) -> Result<Self> {
        Self::new(problem, n, n as f64 * unit_ball_volume(n))
    }

    pub fn denominator_base(&self) -> f64 {
        denominator_base(self.problem)
    }

    /// `C_lead τ^{n-1}`.
    pub fn predict(&self, tau: f64) -> f64 {
        self.leading * tau.powi(self.n as i32 - 1)
    }

    /// `(count - C_lead τ^{n-1}) / τ^{n-2}`.
    pub fn scaled_residual(&self, tau: f64, count: f64) -> f64 {
        (count - self.predict(tau)) / tau.powi(self.n as i32 - 2)
    }
}

/// `∫_{∂Ω} (ρ + ε)^{n-1} ds` by composite Gauss–Legendre quadrature with
/// `panels` panels per parameter direction.
pub fn boundary_integral(weight: &BoundaryWeight, n: usize, panels: usize) -> Result<f64> {
    let surface = weight.surface();
    if n < 2 || surface.parameter_dim() != n - 1 {
        return domain(format!(
            "boundary '{}' has {} parameters, expected n-1 = {}",
            surface.label(),
            surface.parameter_dim(),
            n.saturating_sub(1)
        ));
    }
    if panels == 0 {
        return domain("panels must be at least 1");
    }
    let k = (n - 1) as i32;
    tensor_quadrature(surface.bounds(), panels, |p| Ok(weight.shifted_rho(p)?.powi(k) * surface.area_element(p)))
}

/// Samples `(τ, count(τ))` of a counting function.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingSeries {
    problem: ProblemKind,
    n: usize,
    samples: Vec<(f64, BigUint)>,
}

impl CountingSeries {
    pub fn new(problem: ProblemKind, n: usize, samples: Vec<(f64, BigUint)>) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[0].0 < w[1].0) {
                return domain("series abscissae must be strictly increasing");
            }
            if w[0].1 > w[1].1 {
                return domain("counts must be nondecreasing");
            }
        }
        if samples.iter().any(|(t, _)| !t.is_finite()) {
            return domain("series abscissae must be finite");
        }
        Ok(CountingSeries { problem, n, samples })
    }

    /// The counting function sampled at each distinct eigenvalue, inclusive.
    pub fn at_eigenvalues(spectrum: &Spectrum) -> Self {
        let samples = spectrum
            .entries()
            .iter()
            .enumerate()
            .map(|(k, e)| (e.value.value(), spectrum.cumulative_count(k + 1)))
            .collect();
        CountingSeries::new(spectrum.problem(), spectrum.dimension(), samples)
            .expect("spectrum values are strictly increasing")
    }

    /// The counting function at the given thresholds.
    pub fn sample(spectrum: &Spectrum, taus: &[f64]) -> Result<Self> {
        let samples = taus.iter().map(|&t| (t, count_upto(spectrum, &Threshold::Value(t)))).collect();
        CountingSeries::new(spectrum.problem(), spectrum.dimension(), samples)
    }

    pub fn problem(&self) -> ProblemKind {
        self.problem
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[(f64, BigUint)] {
        &self.samples
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemainderReport {
    /// Scaled residual `(count - C_lead τ^{n-1}) / τ^{n-2}` at the largest `τ`.
    pub second_coeff_estimate: f64,
    /// Change of the scaled residual per decade of `τ` over the last decade.
    pub trend_per_decade: f64,
    pub residual_series: Vec<(f64, f64)>,
    pub sharp_verdict: bool,
    pub tolerance_used: f64,
}

/// Remainder analysis with the default tolerance `0.1 C_lead`.
pub fn remainder_fit(series: &CountingSeries, model: &WeylModel) -> Result<RemainderReport> {
    remainder_fit_with_tolerance(series, model, 0.1 * model.leading)
}

pub fn remainder_fit_with_tolerance(
    series: &CountingSeries,
    model: &WeylModel,
    tolerance: f64,
) -> Result<RemainderReport> {
    if series.dimension() != model.n || series.problem() != model.problem {
        return domain(format!(
            "series is for {} in dimension {}, model is for {} in dimension {}",
            series.problem(),
            series.dimension(),
            model.problem,
            model.n
        ));
    }
    if !(tolerance >= 0.0) {
        return domain("tolerance must be nonnegative");
    }
    let samples: Vec<&(f64, BigUint)> = series.samples().iter().filter(|(t, _)| model.n == 2 || *t > 0.0).collect();
    if samples.len() < 10 {
        return domain(format!("remainder fit needs at least 10 samples, got {}", samples.len()));
    }
    let tau_max = samples.last().expect("nonempty").0;
    let tau_min_pos = samples.iter().map(|s| s.0).find(|&t| t > 0.0).unwrap_or(tau_max);
    if !(tau_max >= 10.0 * tau_min_pos) {
        return domain("remainder fit needs samples spanning at least one decade");
    }
    let residual_series: Vec<(f64, f64)> =
        samples.iter().map(|(t, c)| (*t, model.scaled_residual(*t, c.to_f64().unwrap_or(f64::INFINITY)))).collect();
    let &(t_last, r_last) = residual_series.last().expect("nonempty");
    // reference sample nearest to one decade below the end
    let target = (t_last / 10.0).log10();
    let &(t_ref, r_ref) = residual_series
        .iter()
        .filter(|(t, _)| *t > 0.0 && *t < t_last)
        .min_by(|a, b| (a.0.log10() - target).abs().total_cmp(&(b.0.log10() - target).abs()))
        .expect("decade span guarantees a reference sample");
    let trend_per_decade = (r_last - r_ref) / (t_last.log10() - t_ref.log10());

    Ok(RemainderReport {
        second_coeff_estimate: r_last,
        trend_per_decade,
        residual_series,
        sharp_verdict: r_last.abs() > tolerance,
        tolerance_used: tolerance,
    })
}

/// `|1/(2^{n-2}(n-1)!) - ω_{n-1} n ω_n / (4π)^{n-1}|`.
pub fn gamma_identity_check(n: usize) -> Result<f64> {
    let (lhs, rhs) = gamma_identity_sides(n)?;
    Ok((lhs - rhs).abs())
}

pub fn gamma_identity_sides(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return domain("gamma_identity_check needs n >= 2");
    }
    let factorial: f64 = (1..n).map(|k| k as f64).product();
    let lhs = 1.0 / (2f64.powi(n as i32 - 2) * factorial);
    let omega = |k: usize| {
        let half = k as f64 / 2.0;
        PI.powf(half) / gamma(half + 1.0)
    };
    let rhs = omega(n - 1) * n as f64 * omega(n) / (4.0 * PI).powi(n as i32 - 1);
    Ok((lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeMethod {
    /// Exact volume of an ellipsoidal sublevel set.
    Closed,
    /// Seeded uniform sampling of a bounding box.
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseVolume {
    pub value: f64,
    /// Zero for the closed form.
    pub std_error: f64,
}

/// Fibre volume `∫_{p0(x', η') < 1} dξ*` with `dξ* = √|g'| dη`.
///
/// `metric` supplies the fibre measure. For symbols of the form
/// `c(x') (ηᵀGη)^{d/2}` the sublevel set is an ellipsoid and the closed form is
/// `ω_{n-1} c^{-(n-1)/d} √det g' / √det G`.
pub fn hormander_phase_volume(
    symbol: &HomogeneousSymbol,
    metric: &BoundaryMetric,
    x: &[f64],
    method: VolumeMethod,
) -> Result<PhaseVolume> {
    let k = metric.dim();
    let degree = symbol.degree();
    if !(degree > 0.0 && degree.is_finite()) {
        return domain("phase volumes need a symbol of positive degree");
    }
    check_homogeneous(symbol, x, k)?;
    let density = metric.fiber_density(x)?;
    match method {
        VolumeMethod::Closed => {
            let form = symbol
                .ellipsoidal_form()
                .ok_or_else(|| crate::Error::Domain("closed form needs an ellipsoidal symbol".into()))?;
            let g = form
                .metric()
                .ok_or_else(|| crate::Error::Domain("closed form needs a metric-dependent symbol".into()))?;
            if g.dim() != k {
                return domain("symbol and measure metrics have different dimensions");
            }
            let c = form.coefficient(x)?;
            if !(c > 0.0) {
                return domain("symbol coefficient must be positive");
            }
            let value = unit_ball_volume(k) * c.powf(-(k as f64) / degree) * density / g.fiber_density(x)?;
            Ok(PhaseVolume { value, std_error: 0.0 })
        }
        VolumeMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return domain("Monte Carlo needs at least one sample");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let half_widths = bounding_box(symbol, x, k, &mut rng)?;
            let box_volume: f64 = half_widths.iter().map(|w| 2.0 * w).product();
            let mut eta = vec![0.0; k];
            let mut hits: u64 = 0;
            for _ in 0..samples {
                for (e, w) in eta.iter_mut().zip(&half_widths) {
                    *e = rng.random_range(-*w..*w);
                }
                if eta.iter().all(|&v| v == 0.0) {
                    hits += 1;
                    continue;
                }
                if symbol.evaluate(x, &eta)? < 1.0 {
                    hits += 1;
                }
            }
            let p = hits as f64 / samples as f64;
            let scale = box_volume * density;
            Ok(PhaseVolume { value: scale * p, std_error: scale * (p * (1.0 - p) / samples as f64).sqrt() })
        }
    }
}

fn check_homogeneous(symbol: &HomogeneousSymbol, x: &[f64], k: usize) -> Result<()> {
    let probe: Vec<f64> = (0..k).map(|i| 0.37 + 0.21 * i as f64).collect();
    let base = symbol.evaluate(x, &probe)?;
    for t in [0.5, 3.0] {
        let scaled: Vec<f64> = probe.iter().map(|v| v * t).collect();
        let got = symbol.evaluate(x, &scaled)?;
        let expected = t.powf(symbol.degree()) * base;
        if !((got - expected).abs() <= 1e-9 * expected.abs().max(f64::MIN_POSITIVE)) {
            return domain(format!("symbol '{}' is not homogeneous of degree {}", symbol.label(), symbol.degree()));
        }
    }
    Ok(())
}

/// Half-widths of a box containing the sublevel set `{p0 < 1}`.
///
/// Ellipsoidal symbols give the exact box `r √(G^{-1})_{ii}`. Otherwise the
/// minimum of `p0` on the unit sphere is estimated from sampled directions and
/// the resulting radius is padded by 25%.
fn bounding_box(symbol: &HomogeneousSymbol, x: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let d = symbol.degree();
    if let Some(form) = symbol.ellipsoidal_form() {
        if let Some(g) = form.metric() {
            let c = form.coefficient(x)?;
            if !(c > 0.0) {
                return domain("symbol coefficient must be positive");
            }
            let r = c.powf(-1.0 / d);
            let inv = g
                .inverse_at(x)?
                .try_inverse()
                .ok_or_else(|| crate::Error::Singular("metric is not invertible".into()))?;
            return Ok((0..k).map(|i| r * inv[(i, i)].sqrt()).collect());
        }
    }
    let mut min_on_sphere = f64::INFINITY;
    let mut dir = vec![0.0; k];
    for _ in 0..4096 {
        for v in dir.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        dir.iter_mut().for_each(|v| *v /= norm);
        min_on_sphere = min_on_sphere.min(symbol.evaluate(x, &dir)?);
    }
    if !(min_on_sphere > 0.0) {
        return domain("symbol must be positive away from eta' = 0");
    }
    Ok(vec![1.25 * min_on_sphere.powf(-1.0 / d); k])
}
