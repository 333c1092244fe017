//! The representation layer: isometries `S_j`, adjoints `S_j*`, operator
//! words `S_a`, range projections `P_k(a) = S_a S_a*`, and the endomorphism
//! `alpha(T) = sum_i S_i T S_i*` restricted to monomials.
//!
//! For a filter system `m_0, ..., m_{N-1}` the operators act on `L^2(T)` by
//! `S_j f(z) = m_j(z) f(z^N)`. The adjoint is computed entirely in
//! coefficient space — `(S_j* f)(k) = sum_m conj(m_j(m)) f(m + N k)` — which
//! is exact and `O(support)`, with no evaluation grid anywhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::FilterSystem;
use crate::laurent::LaurentPoly;

/// A finite string of subband digits `a = (a_1, ..., a_k)` over the alphabet
/// `{0, ..., N-1}`. The empty word is allowed and acts as the identity.
///
/// Words carry their own `N` so that digit strings from systems with
/// different subband counts cannot be mixed silently.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    n: usize,
    digits: Vec<u8>,
}

impl Word {
    pub fn new(n: usize, digits: Vec<u8>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewBands(n));
        }
        if n > u8::MAX as usize + 1 {
            return Err(Error::RadixMismatch {
                expected: u8::MAX as usize + 1,
                got: n,
            });
        }
        if let Some(&d) = digits.iter().find(|&&d| d as usize >= n) {
            return Err(Error::DigitOutOfRange {
                digit: d as usize,
                radix: n,
            });
        }
        Ok(Self { n, digits })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// Concatenation `ab` (self first).
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.n != other.n {
            return Err(Error::RadixMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&other.digits);
        Ok(Word {
            n: self.n,
            digits,
        })
    }

    /// Appends one digit, as in the child cell `a i`.
    pub fn child(&self, digit: u8) -> Result<Word> {
        if digit as usize >= self.n {
            return Err(Error::DigitOutOfRange {
                digit: digit as usize,
                radix: self.n,
            });
        }
        let mut digits = self.digits.clone();
        digits.push(digit);
        Ok(Word {
            n: self.n,
            digits,
        })
    }

    pub fn reversed(&self) -> Word {
        let mut digits = self.digits.clone();
        digits.reverse();
        Word {
            n: self.n,
            digits,
        }
    }

    /// Big-endian index `a_1 N^{k-1} + ... + a_k`: level-`k` words in index
    /// order list their N-adic intervals left to right.
    pub fn index(&self) -> u64 {
        self.digits
            .iter()
            .fold(0u64, |acc, &d| acc * self.n as u64 + d as u64)
    }

    /// Inverse of [`Word::index`] at a fixed length `k`.
    pub fn from_index(n: usize, k: u32, mut index: u64) -> Result<Word> {
        if n < 2 {
            return Err(Error::TooFewBands(n));
        }
        let mut digits = vec![0u8; k as usize];
        for slot in digits.iter_mut().rev() {
            *slot = (index % n as u64) as u8;
            index /= n as u64;
        }
        if index != 0 {
            return Err(Error::DigitOutOfRange {
                digit: index as usize,
                radix: n,
            });
        }
        Word::new(n, digits)
    }

    /// Compact display form, e.g. `"021"`; dash-separated when `N > 10`.
    pub fn display(&self) -> String {
        if self.is_empty() {
            return "()".to_string();
        }
        if self.n <= 10 {
            self.digits.iter().map(|d| (b'0' + d) as char).collect()
        } else {
            self.digits
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("-")
        }
    }
}

/// `scalar * S_left S_right*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub left: Word,
    pub right: Word,
    pub scalar: Complex64,
}

impl Monomial {
    pub fn new(left: Word, right: Word, scalar: Complex64) -> Result<Self> {
        if left.n() != right.n() {
            return Err(Error::RadixMismatch {
                expected: left.n(),
                got: right.n(),
            });
        }
        Ok(Self {
            left,
            right,
            scalar,
        })
    }

    /// The identity monomial (both words empty, scalar one).
    pub fn identity(n: usize) -> Result<Self> {
        Ok(Self {
            left: Word::empty(n)?,
            right: Word::empty(n)?,
            scalar: Complex64::new(1.0, 0.0),
        })
    }

    pub fn n(&self) -> usize {
        self.left.n()
    }
}

fn check_digit(fs: &FilterSystem, j: usize) -> Result<()> {
    if j >= fs.n() {
        return Err(Error::DigitOutOfRange {
            digit: j,
            radix: fs.n(),
        });
    }
    Ok(())
}

fn check_word(fs: &FilterSystem, a: &Word) -> Result<()> {
    if a.n() != fs.n() {
        return Err(Error::RadixMismatch {
            expected: fs.n(),
            got: a.n(),
        });
    }
    Ok(())
}

/// `S_j f = m_j(z) f(z^N)`; an isometry of `L^2(T)` for validated systems.
pub fn apply_s(fs: &FilterSystem, j: usize, f: &LaurentPoly) -> Result<LaurentPoly> {
    check_digit(fs, j)?;
    Ok(fs.filter(j)?.mul(&f.dilate_any(fs.n() as i64)))
}

/// The adjoint in coefficient form: `(S_j* f)(k) = sum_m conj(m_j(m)) f(m + N k)`.
pub fn apply_s_star(fs: &FilterSystem, j: usize, f: &LaurentPoly) -> Result<LaurentPoly> {
    check_digit(fs, j)?;
    let n = fs.n() as i64;
    let mj = fs.filter(j)?;
    Ok(LaurentPoly::from_terms(mj.terms().flat_map(|(m, c)| {
        f.terms().filter_map(move |(t, v)| {
            let shifted = t - m;
            (shifted.rem_euclid(n) == 0).then(|| (shifted.div_euclid(n), c.conj() * v))
        })
    })))
}

/// `S_a = S_{a_1} ... S_{a_k}`; the empty word is the identity.
pub fn apply_word(fs: &FilterSystem, a: &Word, f: &LaurentPoly) -> Result<LaurentPoly> {
    check_word(fs, a)?;
    let mut acc = f.clone();
    for &d in a.digits().iter().rev() {
        acc = apply_s(fs, d as usize, &acc)?;
    }
    Ok(acc)
}

/// `S_a* = S_{a_k}* ... S_{a_1}*`; the empty word is the identity.
pub fn apply_word_star(fs: &FilterSystem, a: &Word, f: &LaurentPoly) -> Result<LaurentPoly> {
    check_word(fs, a)?;
    let mut acc = f.clone();
    for &d in a.digits() {
        acc = apply_s_star(fs, d as usize, &acc)?;
    }
    Ok(acc)
}

/// The range projection `P_k(a) f = S_a S_a* f`.
pub fn projection(fs: &FilterSystem, a: &Word, f: &LaurentPoly) -> Result<LaurentPoly> {
    apply_word(fs, a, &apply_word_star(fs, a, f)?)
}

/// The filter product `m_a(z) = m_{a_1}(z) m_{a_2}(z^N) ... m_{a_k}(z^{N^{k-1}})`,
/// equal to `S_a e_0`.
pub fn m_word(fs: &FilterSystem, a: &Word) -> Result<LaurentPoly> {
    check_word(fs, a)?;
    let n = fs.n() as i64;
    let mut acc = LaurentPoly::basis(0);
    for &d in a.digits().iter().rev() {
        acc = fs.filter(d as usize)?.mul(&acc.dilate_any(n));
    }
    Ok(acc)
}

/// Applies `scalar * S_left S_right*` to a vector.
pub fn monomial_apply(fs: &FilterSystem, m: &Monomial, f: &LaurentPoly) -> Result<LaurentPoly> {
    let pulled = apply_word_star(fs, &m.right, f)?;
    Ok(apply_word(fs, &m.left, &pulled)?.scale(m.scalar))
}

/// One step of the endomorphism on a monomial:
/// `alpha(scalar S_a S_b*) = sum_i scalar S_{i a} S_{i b}*`, returned as the
/// `N` summands with the digit `i` prepended on both sides.
pub fn alpha_on_monomial(m: &Monomial) -> Result<Vec<Monomial>> {
    let n = m.n();
    (0..n as u8)
        .map(|i| {
            let head = Word::new(n, vec![i])?;
            Monomial::new(
                head.concat(&m.left)?,
                head.concat(&m.right)?,
                m.scalar,
            )
        })
        .collect()
}
