use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use steklov::cli::format::g17;
use steklov::cli::FileConfig;
use steklov::counting::{count_upto, hormander_phase_volume, Threshold, VolumeMethod};
use steklov::expr::Expr;
use steklov::halfspace::{
    bvp_solve_p1, bvp_solve_p2, fourier_solution_p1, fourier_solution_p2, p1_profile, p2_profile, xi_norm,
    FourierDatum, HalfSpaceGrid, MetricBlock,
};
use steklov::quadrature::{BoundarySurface, BoundaryWeight};
use steklov::spectra::{ball_spectrum_p1, disk_spectrum_p2, ProblemKind};
use steklov::symbols::{steklov_symbol, symbol_compose, symbol_f, symbol_theta, BoundaryMetric, HomogeneousSymbol};

/// Symmetric positive definite `BᵀB + I/2` from entries in `[-1, 1]`.
fn spd(dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, dim * dim).prop_map(move |v| {
        let b = DMatrix::from_vec(dim, dim, v);
        b.transpose() * &b + DMatrix::identity(dim, dim) * 0.5
    })
}

fn covector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, dim).prop_filter("nonzero", |v| v.iter().any(|c| c.abs() > 1e-3))
}

fn weighted_sphere(n: usize, eps: f64) -> BoundaryWeight {
    let surface = BoundarySurface::unit_sphere(n).unwrap();
    BoundaryWeight::new(surface, |p| 1.5 + p.iter().map(|t| t.sin()).sum::<f64>() * 0.25, eps).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_in_symbols_are_homogeneous(g in spd(2), eta in covector(2), x in prop::collection::vec(0.1..3.0f64, 2)) {
        let metric = BoundaryMetric::constant(g).unwrap();
        let weight = weighted_sphere(3, 0.1);
        let mut symbols = vec![
            HomogeneousSymbol::neumann_to_laplacian(&metric),
            HomogeneousSymbol::dirichlet_to_laplacian_derivative(&metric),
            HomogeneousSymbol::dirichlet_to_neumann(&metric),
        ];
        symbols.extend(ProblemKind::ALL.iter().map(|&p| steklov_symbol(p, &metric, &weight)));
        for s in &symbols {
            let base = s.evaluate(&x, &eta).unwrap();
            for t in [2.0, 10.0, 1000.0] {
                let scaled: Vec<f64> = eta.iter().map(|c| c * t).collect();
                let v = s.evaluate(&x, &scaled).unwrap();
                prop_assert!(rel(v, t.powf(s.degree()) * base) < 1e-12, "{}: t={t}", s.label());
            }
        }
    }

    #[test]
    fn composition_is_associative_and_commutative(
        g in spd(2), eta in covector(2), x in prop::collection::vec(0.1..3.0f64, 2), c in 0.1..5.0f64,
    ) {
        let metric = BoundaryMetric::constant(g).unwrap();
        let a = HomogeneousSymbol::constant(c);
        let b = HomogeneousSymbol::weight_reciprocal(&weighted_sphere(3, 0.0), 3);
        let d = HomogeneousSymbol::dirichlet_to_laplacian_derivative(&metric);
        let left = symbol_compose(&symbol_compose(&a, &b), &d).evaluate(&x, &eta).unwrap();
        let right = symbol_compose(&a, &symbol_compose(&b, &d)).evaluate(&x, &eta).unwrap();
        let swapped = symbol_compose(&d, &symbol_compose(&b, &a)).evaluate(&x, &eta).unwrap();
        prop_assert!(rel(left, right) < 4.0 * f64::EPSILON);
        prop_assert!(rel(left, swapped) < 4.0 * f64::EPSILON);
        prop_assert_eq!(symbol_compose(&a, &d).degree(), 3.0);
    }

    #[test]
    fn symbols_survive_linear_changes_of_covector(
        g in spd(3), c in prop::collection::vec(-2.0..2.0f64, 9), zeta in covector(3),
    ) {
        let cm = DMatrix::from_vec(3, 3, c);
        prop_assume!(cm.determinant().abs() > 0.05);
        let eta: Vec<f64> = (&cm * DMatrix::from_column_slice(3, 1, &zeta)).iter().copied().collect();
        prop_assume!(eta.iter().any(|v| v.abs() > 1e-3));
        let pulled = cm.transpose() * &g * &cm;
        let (orig, moved) = (BoundaryMetric::constant(g).unwrap(), BoundaryMetric::constant(pulled).unwrap());
        let x = [0.0; 3];
        prop_assert!(rel(symbol_f(&orig, &x, &eta).unwrap(), symbol_f(&moved, &x, &zeta).unwrap()) < 1e-12);
        prop_assert!(rel(symbol_theta(&orig, &x, &eta).unwrap(), symbol_theta(&moved, &x, &zeta).unwrap()) < 1e-12);
    }

    #[test]
    fn counting_is_monotone(n in 2usize..6, a in 0.0..400.0f64, b in 0.0..400.0f64) {
        let spec = ball_spectrum_p1(n, 150).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(count_upto(&spec, &Threshold::Value(lo)) <= count_upto(&spec, &Threshold::Value(hi)));
        let disk = disk_spectrum_p2(150);
        prop_assert!(count_upto(&disk, &Threshold::Value(lo)) <= count_upto(&disk, &Threshold::Value(hi)));
    }

    #[test]
    fn xi_norm_is_homogeneous(seed in 0u64..1000, eta in covector(2), t in 0.01..100.0f64) {
        let block = MetricBlock::random(3, seed).unwrap();
        let scaled: Vec<f64> = eta.iter().map(|c| c * t).collect();
        prop_assert!(rel(xi_norm(&block, &scaled).unwrap(), t * xi_norm(&block, &eta).unwrap()) < 1e-13);
    }

    #[test]
    fn fourier_solutions_meet_boundary_conditions(seed in 0u64..1000, eta in covector(1), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let block = MetricBlock::random(2, seed).unwrap();
        let amp = Complex64::new(re, im);
        prop_assume!(amp.norm() > 1e-3);
        let d = FourierDatum::new(eta, amp);
        let sq = block.a_nn().sqrt();
        let p1 = p1_profile(&block, &d).unwrap();
        prop_assert!(fourier_solution_p1(&block, &d, 0.0).unwrap().norm() <= 1e-15 * amp.norm());
        prop_assert!((p1.derivative(1, 0.0) * sq - amp).norm() <= 1e-15 * amp.norm() * 4.0);
        let p2 = p2_profile(&block, &d).unwrap();
        prop_assert!((fourier_solution_p2(&block, &d, 0.0).unwrap() - amp).norm() <= 1e-15 * amp.norm());
        prop_assert!(p2.derivative(1, 0.0).norm() <= 1e-15 * amp.norm() * 4.0);
    }

    #[test]
    fn bvp_is_linear_in_the_data(re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let amp = Complex64::new(re, im);
        prop_assume!(amp.norm() > 1e-2);
        let id = MetricBlock::identity(2);
        let grid = HalfSpaceGrid::new(1.0 / 32.0, 30.0).unwrap();
        for solve in [bvp_solve_p1, bvp_solve_p2] {
            let unit = solve(&id, &FourierDatum::unit(vec![1.0]), &grid).unwrap();
            let scaled = solve(&id, &FourierDatum::new(vec![1.0], amp), &grid).unwrap();
            prop_assert!((unit.recovered - scaled.recovered).abs() < 1e-12);
            for (u, s) in unit.values.iter().zip(&scaled.values) {
                prop_assert!((u * amp - s).norm() <= 1e-12 * (1.0 + s.norm()));
            }
        }
    }

    #[test]
    fn expression_parser_never_panics(src in "\\PC{0,64}") {
        let _ = Expr::parse(&src);
    }

    #[test]
    fn expression_parser_handles_operator_soup(src in "[-+*/^() .0-9eE]{0,40}|(cos|sin|pi|t|s|theta|[-+*/^()0-9.])*") {
        if let Ok(e) = Expr::parse(&src) {
            let again = Expr::parse(&e.to_string()).unwrap();
            prop_assert_eq!(&again, &e);
            let p = [0.7, 1.3];
            let (a, b) = (e.eval(&p), again.eval(&p));
            prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()), "{src} -> {e}");
        }
    }

    #[test]
    fn config_parser_never_panics(src in "\\PC{0,128}") {
        let _ = FileConfig::parse(&src);
    }

    #[test]
    fn seventeen_digit_cells_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let s = g17(x);
        prop_assert!(!s.contains(','));
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}

#[test]
fn monte_carlo_volume_is_reproducible() {
    let metric = BoundaryMetric::identity(2);
    let weight = weighted_sphere(3, 0.0);
    let sym = steklov_symbol(ProblemKind::NeumannTrace, &metric, &weight);
    let x = [1.0, 2.0];
    let run =
        |seed| hormander_phase_volume(&sym, &metric, &x, VolumeMethod::MonteCarlo { samples: 20_000, seed }).unwrap();
    let (a, b, c) = (run(5), run(5), run(6));
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert_ne!(a.value.to_bits(), c.value.to_bits());
    let closed = hormander_phase_volume(&sym, &metric, &x, VolumeMethod::Closed).unwrap();
    let rho = 1.5 + (1.0f64.sin() + 2.0f64.sin()) * 0.25;
    assert!((closed.value - PI * (rho / 2.0).powi(2)).abs() < 1e-14);
}
