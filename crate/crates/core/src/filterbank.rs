//! Filter systems and the quadrature-mirror (unitarity) validation.
//!
//! A [`FilterSystem`] is an ordered list of `N` Laurent polynomials
//! `m_0, ..., m_{N-1}`. The system is a valid QMF bank when the polyphase
//! matrix is unitary as a Laurent-polynomial identity; [`FilterSystem::validate`]
//! checks this in two mathematically equivalent ways (coefficient-level
//! orthogonality conditions and polyphase completeness), which doubles as a
//! self-test of the convolution engine.
//!
//! Filters are stored pre-normalized so the Cuntz isometry conditions hold
//! directly in coefficient form: the Haar low-pass is `(e_0 + e_1)/sqrt(2)`,
//! and every low-pass satisfies `m_0(1) = sqrt(N)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::DEFAULT_TOL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FilterSpec", into = "FilterSpec")]
pub struct FilterSystem {
    n: usize,
    filters: Vec<LaurentPoly>,
}

/// JSON interchange form: `{ "N": n, "filters": [[[deg,re,im],...], ...] }`.
#[derive(Serialize, Deserialize)]
struct FilterSpec {
    #[serde(rename = "N")]
    n: usize,
    filters: Vec<LaurentPoly>,
}

impl TryFrom<FilterSpec> for FilterSystem {
    type Error = Error;
    fn try_from(spec: FilterSpec) -> Result<Self> {
        FilterSystem::new(spec.n, spec.filters)
    }
}

impl From<FilterSystem> for FilterSpec {
    fn from(fs: FilterSystem) -> Self {
        FilterSpec {
            n: fs.n,
            filters: fs.filters,
        }
    }
}

/// Outcome of [`FilterSystem::validate`].
#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// Largest defect of the coefficient-level orthogonality conditions
    /// `sum_k conj(m_i(k)) m_j(k + N l) = delta_{i,j} delta_{l,0}`.
    pub max_isometry_defect: f64,
    /// Largest coefficient defect of the polyphase completeness identity
    /// `sum_r A_{i,r} conj_reflect(A_{j,r}) = delta_{i,j} e_0`.
    pub max_completeness_defect: f64,
    pub passed: bool,
    pub tol: f64,
    /// Defect per `(i, j, l)` triple of the coefficient-level conditions.
    pub per_pair_defects: BTreeMap<(usize, usize, i64), f64>,
}

impl FilterSystem {
    /// Wraps `filters` without checking unitarity; `validate` is explicit so
    /// that deliberately broken systems can be constructed and inspected.
    pub fn new(n: usize, filters: Vec<LaurentPoly>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewBands(n));
        }
        if filters.len() != n {
            return Err(Error::FilterCount {
                expected: n,
                got: filters.len(),
            });
        }
        Ok(Self { n, filters })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn filter(&self, j: usize) -> Result<&LaurentPoly> {
        self.filters.get(j).ok_or(Error::DigitOutOfRange {
            digit: j,
            radix: self.n,
        })
    }

    pub fn filters(&self) -> &[LaurentPoly] {
        &self.filters
    }

    /// Checks the QMF unitarity condition as exact Laurent identities, both in
    /// coefficient form and through the polyphase matrix.
    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        if tol <= 0.0 {
            return Err(Error::InvalidTolerance(tol));
        }
        let n = self.n as i64;

        let mut per_pair_defects = BTreeMap::new();
        let mut max_isometry_defect: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let mi = &self.filters[i];
                let mj = &self.filters[j];
                // l ranges over every shift for which the supports can meet,
                // always including l = 0.
                let (mut lo, mut hi) = (0i64, 0i64);
                if let (Some((ilo, ihi)), Some((jlo, jhi))) =
                    (mi.degree_bounds(), mj.degree_bounds())
                {
                    lo = lo.min((jlo - ihi).div_euclid(n));
                    hi = hi.max((jhi - ilo).div_euclid(n) + 1);
                }
                for l in lo..=hi {
                    let mut s = Complex64::ZERO;
                    for (k, c) in mi.terms() {
                        s += c.conj() * mj.coeff(k + n * l);
                    }
                    let target = if i == j && l == 0 { 1.0 } else { 0.0 };
                    let defect = (s - Complex64::new(target, 0.0)).norm();
                    per_pair_defects.insert((i, j, l), defect);
                    max_isometry_defect = max_isometry_defect.max(defect);
                }
            }
        }

        // Polyphase components: m_j(z) = sum_r z^r A_{j,r}(z^N).
        let components: Vec<Vec<LaurentPoly>> = (0..self.n)
            .map(|j| {
                (0..n)
                    .map(|r| {
                        LaurentPoly::from_terms(
                            self.filters[j]
                                .terms()
                                .filter(|(k, _)| k.rem_euclid(n) == r)
                                .map(|(k, c)| ((k - r).div_euclid(n), c)),
                        )
                    })
                    .collect()
            })
            .collect();
        let mut max_completeness_defect: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = LaurentPoly::zero();
                for r in 0..self.n {
                    acc = acc.add(&components[i][r].mul(&components[j][r].conj_reflect()));
                }
                let target = if i == j {
                    LaurentPoly::basis(0)
                } else {
                    LaurentPoly::zero()
                };
                max_completeness_defect = max_completeness_defect.max(acc.max_coeff_diff(&target));
            }
        }

        let passed = max_isometry_defect <= tol && max_completeness_defect <= tol;
        Ok(ValidationReport {
            max_isometry_defect,
            max_completeness_defect,
            passed,
            tol,
            per_pair_defects,
        })
    }

    /// Mixes the filters by a constant `N x N` matrix: `m_i' = sum_j u[i][j] m_j`.
    /// For unitary `u` the mixed system validates whenever the original does.
    pub fn mix(&self, u: &[Vec<Complex64>]) -> Result<FilterSystem> {
        if u.len() != self.n || u.iter().any(|row| row.len() != self.n) {
            return Err(Error::FilterCount {
                expected: self.n,
                got: u.len(),
            });
        }
        let filters = u
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.filters)
                    .fold(LaurentPoly::zero(), |acc, (&c, m)| acc.add(&m.scale(c)))
            })
            .collect();
        FilterSystem::new(self.n, filters)
    }
}

/// The dyadic Haar system: `m_0 = (e_0 + e_1)/sqrt(2)`, `m_1 = (e_0 - e_1)/sqrt(2)`.
pub fn haar() -> FilterSystem {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let m0 = LaurentPoly::basis(0).add(&LaurentPoly::basis(1)).scale(r);
    let m1 = LaurentPoly::basis(0).sub(&LaurentPoly::basis(1)).scale(r);
    FilterSystem::new(2, vec![m0, m1]).expect("haar system is well formed")
}

/// The permutative shift system `m_j = e_j`, `j = 0, ..., N-1`.
pub fn permutative_shift(n: usize) -> Result<FilterSystem> {
    if n < 2 {
        return Err(Error::TooFewBands(n));
    }
    FilterSystem::new(n, (0..n as i64).map(LaurentPoly::basis).collect())
}

/// The 3-band system whose induced measure at `e_0` is the middle-third
/// Cantor measure: `m_0 = (e_0 + e_2)/sqrt(2)`, `m_1 = e_1`,
/// `m_2 = (e_0 - e_2)/sqrt(2)`.
pub fn cantor3() -> FilterSystem {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let m0 = LaurentPoly::basis(0).add(&LaurentPoly::basis(2)).scale(r);
    let m1 = LaurentPoly::basis(1);
    let m2 = LaurentPoly::basis(0).sub(&LaurentPoly::basis(2)).scale(r);
    FilterSystem::new(3, vec![m0, m1, m2]).expect("cantor system is well formed")
}

/// Builds the dyadic high-pass from a low-pass by the mirror formula
/// `m_1(z) = z conj(m_0(-z))`, i.e. `m_1(1-k) = (-1)^k conj(m_0(k))`.
///
/// The input must satisfy the single-filter quadrature condition
/// `sum_k conj(a_k) a_{k+2l} = delta_{0,l}` within [`DEFAULT_TOL`].
pub fn high_pass_from_low(m0: &LaurentPoly) -> Result<LaurentPoly> {
    let mut worst: f64 = 0.0;
    if let Some((lo, hi)) = m0.degree_bounds() {
        let span = (hi - lo).div_euclid(2) + 1;
        for l in -span..=span {
            let mut s = Complex64::ZERO;
            for (k, c) in m0.terms() {
                s += c.conj() * m0.coeff(k + 2 * l);
            }
            let target = if l == 0 { 1.0 } else { 0.0 };
            worst = worst.max((s - Complex64::new(target, 0.0)).norm());
        }
    } else {
        worst = 1.0; // the zero filter is maximally non-isometric
    }
    if worst > DEFAULT_TOL {
        return Err(Error::QuadratureCondition { defect: worst });
    }
    Ok(LaurentPoly::from_terms(m0.terms().map(|(k, c)| {
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        (1 - k, c.conj() * sign)
    })))
}

/// The 4-tap orthogonal low-pass with two vanishing moments, solved at call
/// time by spectral factorization rather than transcribed digits.
///
/// The autocorrelation of the residual factor is obtained by substituting
/// `y = (2 - z - 1/z)/4` into `P(y) = 1 + 2y`; its quadratic root inside the
/// unit disk fixes the factor `B(z)`, and `m_0 = sqrt(2) ((1+z)/2)^2 B(z)`.
/// `m_1` then follows from [`high_pass_from_low`].
pub fn daubechies4() -> FilterSystem {
    // q(z) = 1 + 2 (2 - z - 1/z)/4 = 2 - (z + 1/z)/2; roots of z q(z) * (-2):
    // z^2 - 4z + 1 = 0.
    let root = 2.0 - 3.0_f64.sqrt();
    // B(z) = sqrt(c) (z - root) with c = 1/(2 root) matches q and has B(1) > 0,
    // which gives the low-pass normalization m_0(1) = sqrt(2).
    let scale = (1.0 / (2.0 * root)).sqrt();
    let b = LaurentPoly::from_triples(&[(0, -scale * root, 0.0), (1, scale, 0.0)]);
    let half_sum = LaurentPoly::basis(0)
        .add(&LaurentPoly::basis(1))
        .scale(Complex64::new(0.5, 0.0));
    let m0 = half_sum
        .mul(&half_sum)
        .mul(&b)
        .scale(Complex64::new(std::f64::consts::SQRT_2, 0.0));
    let m1 = high_pass_from_low(&m0).expect("spectral factorization yields a quadrature filter");
    FilterSystem::new(2, vec![m0, m1]).expect("daubechies-4 system is well formed")
}
