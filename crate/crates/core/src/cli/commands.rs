use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::format::{g17, vector, Csv};
use super::{BlockKind, CommandKind, HalfspaceMode, RunConfig, WeightSpec};
use crate::counting::{
    gamma_identity_sides, hormander_phase_volume, remainder_fit, CountingSeries, VolumeMethod, WeylModel,
};
use crate::error::{Error, Result};
use crate::halfspace::{
    bvp_solve_p1, bvp_solve_p2, fourier_synthesis, solve_by_kernel, xi_norm, BoundaryData, FourierDatum, HalfSpaceGrid,
    MetricBlock,
};
use crate::quadrature::{BoundarySurface, BoundaryWeight};
use crate::spectra::{ball_spectrum_p1, disk_spectrum_harmonic, disk_spectrum_p2, ProblemKind, Spectrum};
use crate::symbols::{steklov_symbol, symbol_f, symbol_steklov, symbol_theta, BoundaryMetric};
use crate::unit_ball_volume;

/// Coarsest step of the half-space refinement ladder.
const LADDER_START: f64 = 1.0 / 64.0;
const KERNEL_GRID_POINTS: usize = 128;
const KERNEL_WINDOW: f64 = 10.0;
const SYMBOL_ROWS: usize = 8;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(super) fn dispatch(cfg: &RunConfig) -> Result<String> {
    match cfg.command {
        CommandKind::Spectrum => spectrum(cfg),
        CommandKind::Weyl => weyl(cfg),
        CommandKind::Halfspace => match cfg.mode {
            HalfspaceMode::Bvp => halfspace_bvp(cfg),
            HalfspaceMode::Kernel => halfspace_kernel(cfg),
        },
        CommandKind::Symbol => symbol(cfg),
        CommandKind::IdentityCheck => identity_check(cfg),
    }
}

fn build_spectrum(cfg: &RunConfig) -> Result<Spectrum> {
    match cfg.problem {
        ProblemKind::NeumannTrace => ball_spectrum_p1(cfg.n, cfg.m_max),
        other if cfg.n != 2 => invalid(format!("the {other} spectrum is tabulated for the disk only (n = 2)")),
        ProblemKind::DirichletTrace => Ok(disk_spectrum_p2(cfg.m_max)),
        ProblemKind::HarmonicSteklov => Ok(disk_spectrum_harmonic(cfg.m_max)),
    }
}

/// The constant weight; counting functions are only tabulated for these.
fn constant_rho(cfg: &RunConfig) -> Result<f64> {
    match cfg.rho {
        WeightSpec::Constant(c) if c > 0.0 => Ok(c),
        WeightSpec::Constant(_) => invalid("--rho must be positive for spectra"),
        WeightSpec::Expression(_) => invalid("spectra and counts are available for constant --rho only"),
    }
}

fn spectrum(cfg: &RunConfig) -> Result<String> {
    let c = constant_rho(cfg)?;
    let spec = build_spectrum(cfg)?;
    let mut csv = Csv::new(&["index", "value", "multiplicity", "cumulative_count"]);
    for (k, e) in spec.entries().iter().enumerate() {
        csv.row([
            k.to_string(),
            g17(e.value.value() / c),
            e.mult.to_string(),
            spec.cumulative_count(k + 1).to_string(),
        ]);
    }
    Ok(csv.into_string())
}

fn weight(cfg: &RunConfig, surface: BoundarySurface) -> Result<BoundaryWeight> {
    match &cfg.rho {
        WeightSpec::Constant(c) => BoundaryWeight::constant(surface, *c)?.with_epsilon(cfg.epsilon),
        WeightSpec::Expression(e) => {
            let e = e.clone();
            BoundaryWeight::new(surface, move |p| e.eval(p), cfg.epsilon)
        }
    }
}

fn weyl(cfg: &RunConfig) -> Result<String> {
    let c = constant_rho(cfg)?;
    let spec = build_spectrum(cfg)?;
    // ∫(ρ+ε)^{n-1} ds over the unit sphere, in closed form for constant ρ
    let area = cfg.n as f64 * unit_ball_volume(cfg.n);
    let model = WeylModel::new(cfg.problem, cfg.n, (c + cfg.epsilon).powi(cfg.n as i32 - 1) * area)?;

    let samples: Vec<(f64, BigUint)> =
        spec.entries().iter().enumerate().map(|(k, e)| (e.value.value() / c, spec.cumulative_count(k + 1))).collect();
    let series = CountingSeries::new(cfg.problem, cfg.n, samples)?;
    let report = remainder_fit(&series, &model)?;

    let mut csv = Csv::new(&["tau", "count", "predicted", "residual_scaled"]);
    for (tau, count) in series.samples() {
        let residual = model.scaled_residual(*tau, count.to_f64().unwrap_or(f64::INFINITY));
        csv.row([g17(*tau), count.to_string(), g17(model.predict(*tau)), g17(residual)]);
    }
    csv.row([
        "summary".to_string(),
        format!("second_coeff_estimate={}", g17(report.second_coeff_estimate)),
        format!("sharp_verdict={}", report.sharp_verdict),
        format!("leading_coefficient={}", g17(model.leading)),
    ]);
    Ok(csv.into_string())
}

fn block(cfg: &RunConfig) -> Result<MetricBlock> {
    match cfg.block {
        BlockKind::Identity => Ok(MetricBlock::identity(cfg.n)),
        BlockKind::Random => MetricBlock::random(cfg.n, cfg.seed),
    }
}

/// Steps `1/64, 1/128, …` down to the finest one not below `--h`.
fn ladder(h_min: f64) -> Vec<f64> {
    if h_min >= LADDER_START {
        return vec![h_min];
    }
    let mut out = Vec::new();
    let mut h = LADDER_START;
    while h >= h_min * (1.0 - 1e-12) {
        out.push(h);
        h /= 2.0;
    }
    out
}

fn halfspace_bvp(cfg: &RunConfig) -> Result<String> {
    let solve = match cfg.problem {
        ProblemKind::NeumannTrace => bvp_solve_p1,
        ProblemKind::DirichletTrace => bvp_solve_p2,
        ProblemKind::HarmonicSteklov => return invalid("halfspace supports --problem p1 or p2"),
    };
    let a = block(cfg)?;
    let mut eta = vec![0.0; cfg.n - 1];
    eta[0] = 1.0;
    let datum = FourierDatum::unit(eta.clone());
    let origin = vec![0.0; cfg.n - 1];
    let metric = a.tangential_metric();
    let target = match cfg.problem {
        ProblemKind::NeumannTrace => symbol_f(&metric, &origin, &eta)?,
        _ => symbol_theta(&metric, &origin, &eta)?,
    };
    let steps = ladder(cfg.h);
    let length = match cfg.length {
        Some(l) => l,
        None => {
            let k = xi_norm(&a, &eta)?;
            (30.0 / k / steps[0]).ceil() * steps[0]
        }
    };

    let mut csv = Csv::new(&["h", "recovered", "target", "rel_error"]);
    let mut errors = Vec::new();
    for &h in &steps {
        let grid = HalfSpaceGrid::new(h, length)?;
        let sol = solve(&a, &datum, &grid)?;
        let rel = (sol.recovered - target).abs() / target.abs();
        errors.push(rel);
        csv.row([g17(h), g17(sol.recovered), g17(target), g17(rel)]);
    }
    let (ratio, order) = match errors.as_slice() {
        [.., prev, last] => (prev / last, (prev / last).log2()),
        _ => (f64::NAN, f64::NAN),
    };
    csv.row([
        "summary".to_string(),
        format!("observed_order={}", g17(order)),
        format!("last_ratio={}", g17(ratio)),
        format!("levels={}", steps.len()),
    ]);
    Ok(csv.into_string())
}

fn halfspace_kernel(cfg: &RunConfig) -> Result<String> {
    if cfg.n != 2 {
        return invalid("kernel mode is implemented for n = 2");
    }
    let gauss = |y: f64| (-0.5 * y * y).exp();
    let zero = |_: f64| 0.0;
    let data = match cfg.problem {
        ProblemKind::NeumannTrace => {
            BoundaryData::sample(-KERNEL_WINDOW, KERNEL_WINDOW, KERNEL_GRID_POINTS, zero, gauss)?
        }
        ProblemKind::DirichletTrace => {
            BoundaryData::sample(-KERNEL_WINDOW, KERNEL_WINDOW, KERNEL_GRID_POINTS, gauss, zero)?
        }
        ProblemKind::HarmonicSteklov => return invalid("kernel mode supports --problem p1 or p2"),
    };
    let a = block(cfg)?;
    let points: Vec<[f64; 2]> = (0..=12).map(|i| [-3.0 + 0.5 * i as f64, 1.0]).collect();
    let by_kernel = solve_by_kernel(&a, &data, &points)?;
    let by_fourier = fourier_synthesis(&a, &data, &points)?;

    let mut csv = Csv::new(&["x", "x_n", "kernel", "fourier", "abs_diff"]);
    let mut max_diff: f64 = 0.0;
    for ((p, k), f) in points.iter().zip(&by_kernel).zip(&by_fourier) {
        let d = (k - f).abs();
        max_diff = max_diff.max(d);
        csv.row([g17(p[0]), g17(p[1]), g17(*k), g17(*f), g17(d)]);
    }
    csv.row([
        "summary".to_string(),
        format!("max_abs_diff={}", g17(max_diff)),
        format!("grid_points={KERNEL_GRID_POINTS}"),
        String::new(),
        String::new(),
    ]);
    Ok(csv.into_string())
}

/// Inverse round metric of the unit sphere in hyperspherical coordinates:
/// `g = dφ_1² + sin²φ_1 dφ_2² + … + (Π sin²φ_i) dθ²`.
fn sphere_metric(n: usize) -> BoundaryMetric {
    let k = n - 1;
    BoundaryMetric::from_fn(k, move |p| {
        let mut g_inv = DMatrix::zeros(k, k);
        let mut scale = 1.0;
        for i in 0..k {
            if i > 0 {
                scale *= p[i - 1].sin().powi(2);
            }
            g_inv[(i, i)] = 1.0 / scale;
        }
        g_inv
    })
}

fn symbol(cfg: &RunConfig) -> Result<String> {
    let n = cfg.n;
    let surface = BoundarySurface::unit_sphere(n)?;
    let w = weight(cfg, surface)?;
    let metric = sphere_metric(n);
    let sym = steklov_symbol(cfg.problem, &metric, &w);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut csv =
        Csv::new(&["point", "eta", "symbol", "direct", "phase_volume_closed", "phase_volume_mc", "mc_std_error"]);
    for row in 0..SYMBOL_ROWS {
        // polar angles away from the coordinate singularities
        let mut x: Vec<f64> = (0..n - 2).map(|_| rng.random_range(0.2..PI - 0.2)).collect();
        x.push(rng.random_range(0.0..2.0 * PI));
        let eta: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.25..1.0)).collect();
        let value = sym.evaluate(&x, &eta)?;
        let direct = symbol_steklov(cfg.problem, &metric, &w, &x, &eta)?;
        let closed = hormander_phase_volume(&sym, &metric, &x, VolumeMethod::Closed)?;
        let mc = hormander_phase_volume(
            &sym,
            &metric,
            &x,
            VolumeMethod::MonteCarlo { samples: cfg.samples, seed: cfg.seed.wrapping_add(row as u64) },
        )?;
        csv.row([
            vector(&x),
            vector(&eta),
            g17(value),
            g17(direct),
            g17(closed.value),
            g17(mc.value),
            g17(mc.std_error),
        ]);
    }
    Ok(csv.into_string())
}

fn identity_check(cfg: &RunConfig) -> Result<String> {
    let mut csv = Csv::new(&["n", "lhs", "rhs", "abs_diff"]);
    for n in 2..=cfg.n {
        let (lhs, rhs) = gamma_identity_sides(n)?;
        csv.row([n.to_string(), g17(lhs), g17(rhs), g17((lhs - rhs).abs())]);
    }
    Ok(csv.into_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_steps() {
        assert_eq!(ladder(1.0 / 512.0), vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0]);
        assert_eq!(ladder(1.0 / 300.0), vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]);
        assert_eq!(ladder(0.1), vec![0.1]);
    }

    #[test]
    fn sphere_metric_is_round() {
        let g = sphere_metric(4).inverse_at(&[PI / 2.0, PI / 6.0, 1.0]).unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((g[(1, 1)] - 1.0).abs() < 1e-15);
        assert!((g[(2, 2)] - 4.0).abs() < 1e-12);
        assert_eq!(g[(0, 1)], 0.0);
    }
}
