//! Exact N-adic intervals, symbolic cylinders, and affine iterated function
//! systems.
//!
//! The level-`k` cell of a digit word `a = (a_1, ..., a_k)` is
//! `J_k(a) = [sum_i a_i N^{-i}, sum_i a_i N^{-i} + N^{-k})`. Endpoints are
//! kept as integer numerators over the canonical (unreduced) denominator
//! `N^k`, never as floats, so they can key measure tables exactly. The level
//! is capped at 40 to keep numerators inside 128-bit range for `N <= 8`.

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::cuntz::Word;

/// Exact rational scalar used for endpoints and step-function grids.
pub type Rational = Ratio<i128>;

/// Level cap guaranteeing `N^k` fits comfortably in `i128` for `N <= 8`.
pub const MAX_LEVEL: u32 = 40;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NadicInterval {
    digits: Word,
}

impl NadicInterval {
    /// The cell `J_k(a)` for the digit word `a`.
    pub fn from_word(digits: Word) -> Result<Self> {
        let k = digits.len() as u32;
        if k > MAX_LEVEL || (digits.n() as i128).checked_pow(k).is_none() {
            return Err(Error::IntervalLevelCap(k));
        }
        Ok(Self { digits })
    }

    /// The whole space `[0, 1)` as the level-0 interval.
    pub fn root(n: usize) -> Result<Self> {
        Self::from_word(Word::empty(n)?)
    }

    pub fn n(&self) -> usize {
        self.digits.n()
    }

    pub fn level(&self) -> u32 {
        self.digits.len() as u32
    }

    pub fn word(&self) -> &Word {
        &self.digits
    }

    /// Canonical denominator `N^k`.
    pub fn denominator(&self) -> i128 {
        (self.n() as i128).pow(self.level())
    }

    /// Left endpoint numerator over `N^k` (the word index, in 128 bits so
    /// deep levels stay exact).
    pub fn numerator(&self) -> i128 {
        self.digits
            .digits()
            .iter()
            .fold(0i128, |acc, &d| acc * self.n() as i128 + d as i128)
    }

    pub fn left(&self) -> Rational {
        Rational::new(self.numerator(), self.denominator())
    }

    pub fn width(&self) -> Rational {
        Rational::new(1, self.denominator())
    }

    pub fn right(&self) -> Rational {
        Rational::new(self.numerator() + 1, self.denominator())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        *x >= self.left() && *x < self.right()
    }

    /// The `N` level-`(k+1)` cells partitioning this one, left to right.
    pub fn children(&self) -> Result<Vec<NadicInterval>> {
        (0..self.n() as u8)
            .map(|d| NadicInterval::from_word(self.digits.child(d)?))
            .collect()
    }

    /// Unreduced fraction strings for display: `("p/N^k", "1/N^k")`.
    pub fn fraction_strings(&self) -> (String, String) {
        let q = self.denominator();
        (format!("{}/{}", self.numerator(), q), format!("1/{q}"))
    }
}

impl Serialize for NadicInterval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (left, width) = self.fraction_strings();
        let mut s = serializer.serialize_struct("NadicInterval", 4)?;
        s.serialize_field("N", &self.n())?;
        s.serialize_field("digits", self.digits.digits())?;
        s.serialize_field("left", &left)?;
        s.serialize_field("width", &width)?;
        s.end()
    }
}

/// Convenience constructor mirroring the mathematical notation `J_k(a)`.
pub fn interval(n: usize, digits: Vec<u8>) -> Result<NadicInterval> {
    NadicInterval::from_word(Word::new(n, digits)?)
}

/// A cylinder set in symbolic space: all infinite digit strings extending
/// `prefix`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cylinder {
    pub prefix: Word,
}

impl Cylinder {
    pub fn new(prefix: Word) -> Self {
        Self { prefix }
    }

    pub fn n(&self) -> usize {
        self.prefix.n()
    }
}

/// The interval carrying the same digit address as the cylinder.
pub fn cylinder_to_interval(c: &Cylinder) -> Result<NadicInterval> {
    NadicInterval::from_word(c.prefix.clone())
}

/// An iterated function system with affine branches
/// `sigma_i(x) = (x + t_i)/s` and forward map `sigma(x) = s x mod 1`.
///
/// The translations are base-`s` digits, so branch images of N-adic cells are
/// again N-adic cells with the digit prepended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IfsSystem {
    scale: i128,
    translations: Vec<i128>,
}

impl IfsSystem {
    pub fn new(scale: i128, translations: Vec<i128>) -> Result<Self> {
        if scale < 2 || translations.len() < 2 {
            return Err(Error::TooFewBands(translations.len()));
        }
        if let Some(&t) = translations.iter().find(|&&t| t < 0 || t >= scale) {
            return Err(Error::DigitOutOfRange {
                digit: t.unsigned_abs() as usize,
                radix: scale as usize,
            });
        }
        Ok(Self {
            scale,
            translations,
        })
    }

    /// The base-`N` system `sigma_i(x) = (x + i)/N` with all `N` branches.
    pub fn base_n(n: usize) -> Result<Self> {
        Self::new(n as i128, (0..n as i128).collect())
    }

    pub fn scale(&self) -> i128 {
        self.scale
    }

    pub fn branch_count(&self) -> usize {
        self.translations.len()
    }

    pub fn translation(&self, i: usize) -> Result<i128> {
        self.translations.get(i).copied().ok_or(Error::DigitOutOfRange {
            digit: i,
            radix: self.translations.len(),
        })
    }

    /// One branch applied to an exact point.
    pub fn sigma_point(&self, i: usize, x: &Rational) -> Result<Rational> {
        let t = self.translation(i)?;
        Ok((x + Rational::from_integer(t)) / Rational::from_integer(self.scale))
    }

    /// The forward map `sigma(x) = s x mod 1` on `[0, 1)`.
    pub fn sigma_forward(&self, x: &Rational) -> Result<Rational> {
        if *x < Rational::zero() || *x >= Rational::one() {
            return Err(Error::PointOutOfRange(x.to_string()));
        }
        let y = x * Rational::from_integer(self.scale);
        Ok(y.fract())
    }

    /// The branch composition `sigma_{a_1} o ... o sigma_{a_k}` applied to an
    /// interval in base `s`: digits `t_{a_i}` are prepended, so
    /// `sigma_a(J_l(b)) = J_{k+l}(t_a b)` exactly.
    pub fn sigma_map(&self, a: &Word, j: &NadicInterval) -> Result<NadicInterval> {
        if a.n() != self.branch_count() {
            return Err(Error::RadixMismatch {
                expected: self.branch_count(),
                got: a.n(),
            });
        }
        if j.n() as i128 != self.scale {
            return Err(Error::RadixMismatch {
                expected: self.scale as usize,
                got: j.n(),
            });
        }
        let mut digits: Vec<u8> = Vec::with_capacity(a.len() + j.word().len());
        for &branch in a.digits() {
            digits.push(self.translation(branch as usize)? as u8);
        }
        digits.extend_from_slice(j.word().digits());
        NadicInterval::from_word(Word::new(j.n(), digits)?)
    }
}

/// The middle-third Cantor IFS `sigma_0(x) = x/3`, `sigma_1(x) = (x+2)/3`;
/// its attractor is the set of base-3 fractions with digits in `{0, 2}`.
pub fn cantor_ifs() -> IfsSystem {
    IfsSystem::new(3, vec![0, 2]).expect("cantor IFS is well formed")
}

/// True when every digit of the word lies in the Cantor digit set `{0, 2}`.
pub fn is_cantor_word(a: &Word) -> bool {
    a.digits().iter().all(|&d| d == 0 || d == 2)
}
