//! Closed-form Steklov spectra of the unit ball and disk (unit weight), with
//! exact verification of the eigenpairs that produce them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::poly::{check_nvars, monomials, rat, Polynomial};

/// Which boundary eigenvalue problem a spectrum belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// `Δ²u = 0`, `u = 0`, `Δu + λρ ∂u/∂ν = 0` on the boundary.
    NeumannTrace,
    /// `Δ²u = 0`, `∂u/∂ν = 0`, `∂(Δu)/∂ν = μ³ρ³u` on the boundary.
    DirichletTrace,
    /// Classical harmonic Steklov problem `Δu = 0`, `∂u/∂ν = ηρu`.
    HarmonicSteklov,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] =
        [ProblemKind::NeumannTrace, ProblemKind::DirichletTrace, ProblemKind::HarmonicSteklov];

    /// Eigenvalues of this kind are stored through their `root_power`-th power,
    /// which is what the closed forms give exactly.
    pub fn root_power(self) -> u32 {
        match self {
            ProblemKind::DirichletTrace => 3,
            _ => 1,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            ProblemKind::NeumannTrace => "p1",
            ProblemKind::DirichletTrace => "p2",
            ProblemKind::HarmonicSteklov => "harmonic",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "p1" => Ok(ProblemKind::NeumannTrace),
            "p2" => Ok(ProblemKind::DirichletTrace),
            "harmonic" => Ok(ProblemKind::HarmonicSteklov),
            other => domain(format!("unknown problem '{other}' (expected p1, p2 or harmonic)")),
        }
    }
}

/// A nonnegative eigenvalue stored exactly through an integer power of it.
///
/// `exact = value^power`; ordering and equality use `exact` only, the
/// floating root is for presentation and float thresholds.
#[derive(Clone, Debug)]
pub struct Eigenvalue {
    power: u32,
    exact: BigUint,
    approx: f64,
}

impl Eigenvalue {
    pub fn integer(v: BigUint) -> Self {
        let approx = v.to_f64().unwrap_or(f64::INFINITY);
        Eigenvalue { power: 1, exact: v, approx }
    }

    /// The real cube root of `cube`, correctly rounded.
    pub fn cube_root(cube: BigUint) -> Self {
        let approx = rounded_cube_root(&cube);
        Eigenvalue { power: 3, exact: cube, approx }
    }

    pub fn value(&self) -> f64 {
        self.approx
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    /// `value^power`, exactly.
    pub fn exact_power(&self) -> &BigUint {
        &self.exact
    }
}

/// The float nearest to `∛n`: `libm` cbrt may be off by an ulp, so the
/// candidate is moved until `n` lies between the cubes of the two
/// neighbouring midpoints.
fn rounded_cube_root(n: &BigUint) -> f64 {
    let mut y = n.to_f64().unwrap_or(f64::INFINITY).cbrt();
    if y == 0.0 || !y.is_finite() {
        return y;
    }
    let target = BigRational::from_integer(n.clone().into());
    let cube = |v: f64| {
        let r = BigRational::from_float(v).expect("finite");
        &r * &r * &r
    };
    for _ in 0..4 {
        let lo = cube(0.5 * (y + y.next_down()));
        let hi = cube(0.5 * (y + y.next_up()));
        if target < lo {
            y = y.next_down();
        } else if target > hi {
            y = y.next_up();
        } else {
            break;
        }
    }
    y
}

impl PartialEq for Eigenvalue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Eigenvalue {}

impl PartialOrd for Eigenvalue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Eigenvalue {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.power == other.power {
            self.exact.cmp(&other.exact)
        } else {
            // a^(1/p) vs b^(1/q)  <=>  a^q vs b^p
            let lhs = self.exact.pow(other.power);
            let rhs = other.exact.pow(self.power);
            lhs.cmp(&rhs)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumEntry {
    pub value: Eigenvalue,
    pub mult: u64,
}

/// Distinct eigenvalues in increasing order with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    problem: ProblemKind,
    n: usize,
    entries: Vec<SpectrumEntry>,
    cumulative: Vec<BigUint>,
}

impl Spectrum {
    pub fn new(problem: ProblemKind, n: usize, entries: Vec<SpectrumEntry>) -> Result<Self> {
        if n == 0 {
            return domain("dimension must be at least 1");
        }
        for w in entries.windows(2) {
            if w[0].value >= w[1].value {
                return domain("spectrum entries must be strictly increasing");
            }
        }
        for e in &entries {
            if e.mult == 0 {
                return domain("multiplicities must be positive");
            }
            if e.value.power() != problem.root_power() {
                return domain(format!("eigenvalue representation does not match problem {problem}"));
            }
            if problem == ProblemKind::NeumannTrace && e.value.exact_power().is_zero() {
                return domain("eigenvalues of the Neumann-trace problem are positive");
            }
        }
        let mut acc = BigUint::zero();
        let cumulative = entries
            .iter()
            .map(|e| {
                acc += e.mult;
                acc.clone()
            })
            .collect();
        Ok(Spectrum { problem, n, entries, cumulative })
    }

    pub fn problem(&self) -> ProblemKind {
        self.problem
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of eigenvalues, with multiplicity, among the first `k` entries.
    pub fn cumulative_count(&self, k: usize) -> BigUint {
        if k == 0 {
            BigUint::zero()
        } else {
            self.cumulative[k - 1].clone()
        }
    }
}

/// `N(n, m) = dim H_m(R^n)`, the dimension of the solid spherical harmonics of
/// degree `m` in `n` variables.
pub fn harmonic_dim(n: usize, m: usize) -> BigUint {
    match n {
        0 => BigUint::from(u8::from(m == 0)),
        1 => BigUint::from(u8::from(m <= 1)),
        2 => BigUint::from(if m == 0 { 1u8 } else { 2 }),
        _ => {
            let c = binomial(BigUint::from(m + n - 3), BigUint::from(n - 3));
            c * BigUint::from(2 * m + n - 2) / BigUint::from(n - 2)
        }
    }
}

/// A polynomial that is exactly harmonic and homogeneous of a fixed degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicPoly {
    poly: Polynomial,
    degree: u32,
}

impl HarmonicPoly {
    pub fn new(poly: Polynomial, degree: u32) -> Result<Self> {
        if poly.is_zero() {
            return domain("the zero polynomial is not a spherical harmonic");
        }
        if !poly.is_homogeneous(degree) {
            return domain(format!("polynomial is not homogeneous of degree {degree}"));
        }
        if !poly.is_harmonic() {
            return domain("polynomial is not harmonic");
        }
        Ok(HarmonicPoly { poly, degree })
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }
}

impl fmt::Display for HarmonicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

/// Largest monomial basis `harmonic_basis` will work with by default.
pub const DEFAULT_MONOMIAL_CAP: usize = 50_000;

pub fn harmonic_basis(n: usize, m: usize) -> Result<Vec<HarmonicPoly>> {
    harmonic_basis_with_cap(n, m, DEFAULT_MONOMIAL_CAP)
}

/// Exact basis of the kernel of `Δ: P_m(R^n) -> P_{m-2}(R^n)`.
///
/// Ordering monomials by their power of `x_1`, the Laplacian is triangular:
/// the coefficients with `x_1`-degree 0 or 1 are free and every other
/// coefficient is fixed by them. Each free monomial yields one kernel vector
/// `u = Σ_k x_1^k c_k / k!` with `c_{k+2} = -Δ' c_k`, where `Δ'` acts on
/// `x_2, …, x_n`. This gives `C(m+n-2, n-2) + C(m+n-3, n-2) = N(n, m)`
/// independent harmonics.
pub fn harmonic_basis_with_cap(n: usize, m: usize, max_monomials: usize) -> Result<Vec<HarmonicPoly>> {
    if n < 2 {
        return domain("harmonic_basis needs n >= 2");
    }
    let size = binomial(BigUint::from(m + n - 1), BigUint::from(n - 1));
    if size > BigUint::from(max_monomials) {
        return Err(Error::Resource(format!("P_{m}(R^{n}) has {size} monomials, cap is {max_monomials}")));
    }
    let mut basis = Vec::new();
    let deg = m as u32;
    // c_0 = monomial of degree m in x_2..x_n, c_1 = 0
    for tail in monomials(n - 1, deg) {
        basis.push(lift_cauchy_data(n, &tail, 0, deg)?);
    }
    if m >= 1 {
        // c_0 = 0, c_1 = monomial of degree m-1
        for tail in monomials(n - 1, deg - 1) {
            basis.push(lift_cauchy_data(n, &tail, 1, deg)?);
        }
    }
    Ok(basis)
}

fn lift_cauchy_data(n: usize, tail: &[u32], start: u32, deg: u32) -> Result<HarmonicPoly> {
    let mut e = vec![0u32];
    e.extend_from_slice(tail);
    let mut c = Polynomial::monomial(e, BigRational::one());
    let mut k = start;
    let mut factorial = BigRational::one();
    for j in 2..=k {
        factorial *= rat(j as i64);
    }
    let mut u = Polynomial::zero(n);
    let x1 = Polynomial::var(n, 0);
    let mut x1_pow = Polynomial::one(n);
    for _ in 0..k {
        x1_pow = &x1_pow * &x1;
    }
    while !c.is_zero() {
        u = &u + &(&x1_pow * &c).scale(&factorial.recip());
        c = -&c.partial_laplacian(1);
        x1_pow = &(&x1_pow * &x1) * &x1;
        factorial *= rat(((k + 1) * (k + 2)) as i64);
        k += 2;
    }
    HarmonicPoly::new(u, deg)
}

fn require_ball_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("ball spectra need n >= 2, got n = {n}"));
    }
    Ok(())
}

/// Neumann-trace spectrum of the unit ball: `n + 2m` with multiplicity `N(n, m)`.
pub fn ball_spectrum_p1(n: usize, m_max: usize) -> Result<Spectrum> {
    require_ball_dimension(n)?;
    let entries = (0..=m_max)
        .map(|m| {
            let mult = harmonic_dim(n, m)
                .to_u64()
                .ok_or_else(|| Error::Resource(format!("multiplicity N({n},{m}) exceeds u64")))?;
            Ok(SpectrumEntry { value: Eigenvalue::integer(BigUint::from(n + 2 * m)), mult })
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(ProblemKind::NeumannTrace, n, entries)
}

/// `μ³ = 2m²(m+1)` for `m ≥ 1`.
pub fn disk_p2_cube(m: usize) -> BigUint {
    let m = BigUint::from(m);
    BigUint::from(2u8) * &m * &m * (m + 1u8)
}

/// Dirichlet-trace spectrum of the unit disk: `0` once, then `(2m²(m+1))^{1/3}` twice.
pub fn disk_spectrum_p2(m_max: usize) -> Spectrum {
    let mut entries = vec![SpectrumEntry { value: Eigenvalue::cube_root(BigUint::zero()), mult: 1 }];
    entries.extend((1..=m_max).map(|m| SpectrumEntry { value: Eigenvalue::cube_root(disk_p2_cube(m)), mult: 2 }));
    Spectrum::new(ProblemKind::DirichletTrace, 2, entries).expect("closed-form spectrum is valid")
}

/// Harmonic Steklov spectrum of the unit disk: `0` once, then `m` twice.
pub fn disk_spectrum_harmonic(m_max: usize) -> Spectrum {
    let entries = (0..=m_max)
        .map(|m| SpectrumEntry { value: Eigenvalue::integer(BigUint::from(m)), mult: if m == 0 { 1 } else { 2 } })
        .collect();
    Spectrum::new(ProblemKind::HarmonicSteklov, 2, entries).expect("closed-form spectrum is valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EigenpairReport {
    /// `Δ²φ ≡ 0`.
    pub biharmonic: bool,
    /// `φ ≡ 0` modulo `|x|² - 1`.
    pub vanishes_on_boundary: bool,
    /// `Δφ + λ̃ ∂φ/∂ν ≡ 0` modulo `|x|² - 1`, with the inward normal.
    pub steklov_condition: bool,
}

impl EigenpairReport {
    pub fn all(&self) -> bool {
        self.biharmonic && self.vanishes_on_boundary && self.steklov_condition
    }
}

/// Checks that `φ = (1 - |x|²)ψ` is a Neumann-trace eigenfunction of the unit
/// ball with eigenvalue `n + 2m`, in exact arithmetic.
pub fn verify_ball_eigenpair(n: usize, m: usize, psi: &HarmonicPoly) -> Result<EigenpairReport> {
    require_ball_dimension(n)?;
    check_nvars(psi.poly(), n)?;
    if psi.degree() as usize != m {
        return domain(format!("harmonic has degree {}, expected {m}", psi.degree()));
    }
    // HarmonicPoly guarantees harmonicity; recheck anyway, everything below depends on it.
    if !psi.poly().is_harmonic() || !psi.poly().is_homogeneous(m as u32) {
        return domain("psi must be harmonic and homogeneous");
    }
    let one_minus_r2 = &Polynomial::one(n) - &Polynomial::norm_squared(n);
    let phi = &one_minus_r2 * psi.poly();
    let lambda = rat((n + 2 * m) as i64);

    let biharmonic = phi.laplacian().laplacian().is_zero();
    let vanishes_on_boundary = phi.reduce_mod_unit_sphere().is_zero();
    // ∂/∂ν = -Σ x_i ∂_i on the unit sphere
    let normal_derivative = -&phi.euler();
    let condition = &phi.laplacian() + &normal_derivative.scale(&lambda);
    let steklov_condition = condition.reduce_mod_unit_sphere().is_zero();

    Ok(EigenpairReport { biharmonic, vanishes_on_boundary, steklov_condition })
}

/// Exact outcome of the radial reduction for the disk Dirichlet-trace problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadialCheck {
    /// `f(1)`, the boundary value of the radial profile of `u`.
    pub boundary_value: BigRational,
    /// `μ³`, the ratio `∂(Δu)/∂ν / u` on the boundary.
    pub eigen_ratio: BigRational,
    /// Sum of absolute defects; zero for an exact eigenpair.
    pub residual: BigRational,
}

/// Solves `Δu = r^m cos mθ`, `∂u/∂ν = 0` on the unit disk through its radial
/// profile `u = f(r) cos mθ`, and extracts `μ³` from the boundary condition
/// `u = μ^{-3} ∂(Δu)/∂ν`.
pub fn radial_verify_p2(m: usize) -> Result<RadialCheck> {
    if m == 0 {
        return domain("radial_verify_p2 needs m >= 1");
    }
    let mi = m as i64;
    // On r^p the radial operator f'' + f'/r - m² f/r² acts as (p² - m²) r^{p-2}.
    let radial_factor = |p: i64| rat(p * p - mi * mi);

    // particular solution A r^{m+2} for the source r^m
    let a = radial_factor(mi + 2).recip();
    // regular homogeneous part B r^m chosen so that f'(1) = 0
    let b = -(&a * rat(mi + 2)) / rat(mi);
    let mut profile: BTreeMap<i64, BigRational> = BTreeMap::new();
    profile.insert(mi + 2, a);
    profile.insert(mi, b);

    let mut ode_defect: BTreeMap<i64, BigRational> = BTreeMap::new();
    for (&p, c) in &profile {
        *ode_defect.entry(p - 2).or_insert_with(BigRational::zero) += c * radial_factor(p);
    }
    *ode_defect.entry(mi).or_insert_with(BigRational::zero) -= BigRational::one();

    let f_at_1: BigRational = profile.values().cloned().sum();
    let df_at_1: BigRational = profile.iter().map(|(&p, c)| c * rat(p)).sum();

    // ∂/∂ν = -∂/∂r; Δu = r^m cos mθ so ∂(Δu)/∂ν = -m cos mθ at r = 1
    let eigen_ratio = rat(-mi) / &f_at_1;

    let expected_boundary = -rat(2 * mi * (mi + 1)).recip();
    let expected_ratio = BigRational::from_integer(disk_p2_cube(m).into());
    let residual = ode_defect.values().map(|c| c.abs()).sum::<BigRational>()
        + df_at_1.abs()
        + (&f_at_1 - &expected_boundary).abs()
        + (&eigen_ratio - &expected_ratio).abs();

    Ok(RadialCheck { boundary_value: f_at_1, eigen_ratio, residual })
}
