//! Sparse Laurent polynomials on the unit circle.
//!
//! A [`LaurentPoly`] is a finitely supported map `degree -> complex
//! coefficient`. It serves three roles at once: trigonometric polynomials
//! `f(z) = sum_k c_k z^k` on `|z| = 1`, vectors in `L^2(T)` through their
//! Fourier coefficients, and square-summable signals through `l^2 = L^2(T)`.
//! Coefficients with modulus below [`PRUNE_EPS`] are dropped after arithmetic
//! so cancellation residue cannot blow up the support.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use serde::de::Deserializer;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with modulus below this are pruned after add/mul.
pub const PRUNE_EPS: f64 = 1e-14;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The Fourier monomial `e_k(z) = z^k`.
    pub fn basis(k: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(k, Complex64::new(1.0, 0.0));
        Self { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms([(0, c)])
    }

    /// Builds a polynomial from `(degree, coefficient)` terms; duplicate
    /// degrees are summed and near-zero results pruned.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (k, c) in terms {
            *coeffs.entry(k).or_insert(Complex64::ZERO) += c;
        }
        let mut p = Self { coeffs };
        p.prune();
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient at `degree`, zero when absent.
    pub fn coeff(&self, degree: i64) -> Complex64 {
        self.coeffs.get(&degree).copied().unwrap_or(Complex64::ZERO)
    }

    /// Iterates `(degree, coefficient)` pairs in increasing degree order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    /// `(lowest, highest)` stored degree, `None` for the zero polynomial.
    pub fn degree_bounds(&self) -> Option<(i64, i64)> {
        let lo = self.coeffs.keys().next()?;
        let hi = self.coeffs.keys().next_back()?;
        Some((*lo, *hi))
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.norm_sqr() >= PRUNE_EPS * PRUNE_EPS);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (&k, &c) in &other.coeffs {
            *coeffs.entry(k).or_insert(Complex64::ZERO) += c;
        }
        let mut p = Self { coeffs };
        p.prune();
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut p = Self {
            coeffs: self.coeffs.iter().map(|(&k, &v)| (k, v * c)).collect(),
        };
        p.prune();
        p
    }

    /// Coefficient convolution `(f*g)(k) = sum_m f(m) g(k-m)`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&k1, &c1) in &self.coeffs {
            for (&k2, &c2) in &other.coeffs {
                *coeffs.entry(k1 + k2).or_insert(Complex64::ZERO) += c1 * c2;
            }
        }
        let mut p = Self { coeffs };
        p.prune();
        p
    }

    /// Complex conjugation on `|z| = 1`: the coefficient at `k` becomes the
    /// conjugate of the coefficient at `-k`.
    pub fn conj_reflect(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (-k, c.conj())).collect(),
        }
    }

    /// Substitution `z -> z^n` for `n >= 2`.
    pub fn dilate(&self, n: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDilation(n));
        }
        Ok(self.dilate_any(n))
    }

    /// Substitution `z -> z^factor` for any `factor >= 1`.
    pub(crate) fn dilate_any(&self, factor: i64) -> Self {
        debug_assert!(factor >= 1);
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (k * factor, c)).collect(),
        }
    }

    /// The `L^2(T)` inner product, conjugate-linear in `self`:
    /// `<f, g> = sum_k conj(f(k)) g(k)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        // Iterate the smaller support.
        if self.coeffs.len() <= other.coeffs.len() {
            self.coeffs
                .iter()
                .filter_map(|(k, c)| other.coeffs.get(k).map(|g| c.conj() * g))
                .sum()
        } else {
            other.coeffs
                .iter()
                .filter_map(|(k, g)| self.coeffs.get(k).map(|c| c.conj() * g))
                .sum()
        }
    }

    pub fn norm_sq(&self) -> f64 {
        // fold from +0.0: an empty Sum<f64> would give -0.0
        self.coeffs.values().fold(0.0, |acc, c| acc + c.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Evaluation `f(e^{i 2 pi theta}) = sum_k c_k e^{i 2 pi k theta}`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, &c)| c * Complex64::cis(std::f64::consts::TAU * k as f64 * theta))
            .sum()
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut degrees: Vec<i64> = self.coeffs.keys().copied().collect();
        degrees.extend(other.coeffs.keys().copied());
        degrees
            .into_iter()
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_coeff_diff(other) <= tol
    }

    /// `(degree, re, im)` triples in degree order — the JSON interchange form.
    pub fn to_triples(&self) -> Vec<(i64, f64, f64)> {
        self.coeffs.iter().map(|(&k, &c)| (k, c.re, c.im)).collect()
    }

    pub fn from_triples(triples: &[(i64, f64, f64)]) -> Self {
        Self::from_terms(triples.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))))
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for (&k, &c) in &self.coeffs {
            seq.serialize_element(&(k, c.re, c.im))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let triples = Vec::<(i64, f64, f64)>::deserialize(deserializer)?;
        Ok(Self::from_triples(&triples))
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::add(self, rhs)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::sub(self, rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::mul(self, rhs)
    }
}

/// Random polynomial with `terms` coefficients drawn uniformly from the
/// complex unit square at degrees in `[-max_abs_degree, max_abs_degree]`.
pub fn random<R: Rng + ?Sized>(rng: &mut R, max_abs_degree: i64, terms: usize) -> LaurentPoly {
    LaurentPoly::from_terms((0..terms).map(|_| {
        let k = rng.random_range(-max_abs_degree..=max_abs_degree);
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        (k, c)
    }))
}

/// Like [`random`] but normalized to unit `L^2` norm.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, max_abs_degree: i64, terms: usize) -> LaurentPoly {
    loop {
        let f = random(rng, max_abs_degree, terms);
        let n = f.norm();
        if n > 1e-6 {
            return f.scale(Complex64::new(1.0 / n, 0.0));
        }
    }
}
