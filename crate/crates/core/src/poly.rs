//! Exact multivariate polynomials over the rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Result};

/// Exponent multi-index, one entry per variable.
pub type Exponents = Vec<u32>;

/// A polynomial in `nvars` variables with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn monomial(exponents: Exponents, coeff: BigRational) -> Self {
        let mut p = Polynomial::zero(exponents.len());
        p.add_term(exponents, coeff);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponents, BigRational)>) -> Self {
        let mut p = Polynomial::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    /// `|x|^2 = Σ x_i^2`.
    pub fn norm_squared(nvars: usize) -> Self {
        let mut p = Polynomial::zero(nvars);
        for i in 0..nvars {
            let mut e = vec![0; nvars];
            e[i] = 2;
            p.add_term(e, BigRational::one());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exponents: &[u32]) -> BigRational {
        self.terms.get(exponents).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// True when every term has total degree `deg`. The zero polynomial is
    /// homogeneous of every degree.
    pub fn is_homogeneous(&self, deg: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == deg)
    }

    fn add_term(&mut self, exponents: Exponents, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exponents) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect() }
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * BigInt::from(e[i]));
        }
        out
    }

    /// Second partial derivative `∂²/∂x_i²`, without the intermediate allocation.
    fn second_derivative_into(&self, i: usize, out: &mut Polynomial) {
        for (e, c) in &self.terms {
            if e[i] < 2 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 2;
            out.add_term(d, c * BigInt::from(e[i] * (e[i] - 1)));
        }
    }

    pub fn laplacian(&self) -> Self {
        self.partial_laplacian(0)
    }

    /// Laplacian in the variables `x_from, …, x_{n-1}` only.
    pub fn partial_laplacian(&self, from: usize) -> Self {
        let mut out = Polynomial::zero(self.nvars);
        for i in from..self.nvars {
            self.second_derivative_into(i, &mut out);
        }
        out
    }

    /// Radial derivative `Σ x_i ∂_i` (the Euler operator).
    pub fn euler(&self) -> Self {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let deg: u32 = e.iter().sum();
            out.add_term(e.clone(), c * BigInt::from(deg));
        }
        out
    }

    pub fn is_harmonic(&self) -> bool {
        self.laplacian().is_zero()
    }

    /// Normal form modulo the ideal generated by `|x|^2 - 1`.
    ///
    /// The single generator is a Gröbner basis of the principal ideal, so the
    /// remainder after rewriting `x_0^2 -> 1 - Σ_{i≥1} x_i^2` until every term
    /// has `x_0`-degree at most one is canonical: it vanishes iff the
    /// polynomial vanishes on the unit sphere. Each rewrite lowers the
    /// `x_0`-degree, so the loop terminates.
    pub fn reduce_mod_unit_sphere(&self) -> Self {
        let n = self.nvars;
        if n == 0 {
            return self.clone();
        }
        let mut work = self.clone();
        loop {
            let high: Vec<(Exponents, BigRational)> =
                work.terms.iter().filter(|(e, _)| e[0] >= 2).map(|(e, c)| (e.clone(), c.clone())).collect();
            if high.is_empty() {
                return work;
            }
            for (e, c) in high {
                work.add_term(e.clone(), -c.clone());
                let mut base = e;
                base[0] -= 2;
                work.add_term(base.clone(), c.clone());
                for i in 1..n {
                    let mut t = base.clone();
                    t[i] += 2;
                    work.add_term(t, -c.clone());
                }
            }
        }
    }

    /// Floating-point evaluation, for presentation and spot checks.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product();
                c.to_f64().unwrap_or(f64::NAN) * m
            })
            .sum()
    }

    fn check_same_ring(&self, other: &Polynomial) {
        assert_eq!(self.nvars, other.nvars, "polynomials live in different rings");
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_ring(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_ring(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    #[allow(clippy::suspicious_arithmetic_impl)] // exponents add
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_ring(rhs);
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            let is_const = e.iter().all(|&p| p == 0);
            if !a.is_one() || is_const {
                write!(f, "{a}")?;
            }
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "x{}", i + 1)?,
                    _ => write!(f, "x{}^{}", i + 1, p)?,
                }
            }
        }
        Ok(())
    }
}

/// All exponent vectors of total degree `deg` in `nvars` variables, in
/// lexicographic order (largest power of `x_0` first).
pub fn monomials(nvars: usize, deg: u32) -> Vec<Exponents> {
    fn rec(nvars: usize, deg: u32, prefix: &mut Exponents, out: &mut Vec<Exponents>) {
        if prefix.len() + 1 == nvars {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=deg).rev() {
            prefix.push(k);
            rec(nvars, deg - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, deg, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// Exact rational from an integer.
pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Rejects polynomials whose variable count differs from `n`.
pub(crate) fn check_nvars(p: &Polynomial, n: usize) -> Result<()> {
    if p.nvars() != n {
        return domain(format!("polynomial has {} variables, expected {n}", p.nvars()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    #[test]
    fn arithmetic_cancels_to_zero() {
        let p = &(&x(2, 0) * &x(2, 0)) - &(&x(2, 1) * &x(2, 1));
        let q = &(&x(2, 0) + &x(2, 1)) * &(&x(2, 0) - &x(2, 1));
        assert_eq!(p, q);
        assert!((&p - &q).is_zero());
        assert_eq!(p.num_terms(), 2);
    }

    #[test]
    fn laplacian_of_simple_polynomials() {
        let r2 = Polynomial::norm_squared(3);
        assert_eq!(r2.laplacian(), Polynomial::constant(3, rat(6)));
        let xy = &x(3, 0) * &x(3, 1);
        assert!(xy.is_harmonic());
        // Δ(x^4) = 12 x^2
        let x4 = Polynomial::monomial(vec![4, 0], rat(1));
        assert_eq!(x4.laplacian(), Polynomial::monomial(vec![2, 0], rat(12)));
    }

    #[test]
    fn euler_operator_scales_by_degree() {
        let p = &(&x(2, 0) * &x(2, 1)) + &x(2, 0);
        let expected = &(&x(2, 0) * &x(2, 1)).scale(&rat(2)) + &x(2, 0);
        assert_eq!(p.euler(), expected);
    }

    #[test]
    fn sphere_reduction_detects_ideal_membership() {
        let n = 3;
        let r2 = Polynomial::norm_squared(n);
        let g = &r2 - &Polynomial::one(n);
        let p = &(&x(n, 0) * &x(n, 2)) + &Polynomial::constant(n, rat(5));
        assert!((&g * &p).reduce_mod_unit_sphere().is_zero());
        // |x|^4 ≡ 1
        assert_eq!((&r2 * &r2).reduce_mod_unit_sphere(), Polynomial::one(n));
        // x_1^2 is not in the ideal
        assert!(!(&x(n, 0) * &x(n, 0)).reduce_mod_unit_sphere().is_zero());
    }

    #[test]
    fn monomial_enumeration_counts() {
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(1, 5), vec![vec![5]]);
        assert_eq!(monomials(4, 0), vec![vec![0, 0, 0, 0]]);
        assert_eq!(monomials(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn display_is_readable() {
        let p = &(&x(2, 0) * &x(2, 0)) - &(&x(2, 1) * &x(2, 1));
        assert_eq!(p.to_string(), "x1^2 - x2^2");
        assert_eq!(Polynomial::zero(2).to_string(), "0");
    }
}
