//! Wavelet packets, bit-reversal indexing, and the exact dyadic pipeline.
//!
//! Only the Haar case gets the exact packet machinery: its packets are step
//! functions (the Walsh family on `[0,1)`), so every integral below is a
//! finite sum over exact rational cells and the theorem checks run without
//! quadrature error. General filters are served by the truncated
//! scaling-function product only.
//!
//! The packet of the digit word `(b_1, ..., b_k)` is built by the masking
//! recursion `w(x) = sqrt(2) sum_j c_j v(2x - j)` with `c = m_{b_1}` taps and
//! `v` the packet of `(b_2, ..., b_k)`, starting from `chi_[0,1)`. With the
//! Fourier transform `g^(xi) = int e^{-i 2 pi xi x} g(x) dx` this gives
//! `w_rev(a)^(2^k xi) = 2^{-k/2} m_a(e^{-i 2 pi xi}) chi^(xi)`, and the
//! coefficient identity checked by [`check_lemma_com3`] reads
//!
//! `m_a^(j 2^k - p) = 2^{k/2} (T_phi^k w_rev(a))(j - p/2^k)`.
//!
//! (The mirrored index `p - j 2^k` appears instead under the opposite
//! transform convention; both sides here are computed with the same one.)

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;

use crate::cuntz::{self, Word};
use crate::error::{Error, Result};
use crate::filterbank::{self, FilterSystem};
use crate::measures::{Engine, MeasureTable};
use crate::nadic::Rational;

/// Largest grid denominator step functions may be refined to.
const GRID_DENOM_CAP: i128 = 1 << 80;

/// A packet index in explicit digit form: `n = b_1 + b_2 N + ... + b_k N^{k-1}`
/// with the length `k` part of the data, so trailing zero digits are
/// meaningful and bit-reversal is well defined.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PacketIndex {
    word: Word,
}

impl PacketIndex {
    pub fn new(word: Word) -> Self {
        Self { word }
    }

    pub fn from_value(n: usize, k: u32, value: u64) -> Result<Self> {
        let mut digits = vec![0u8; k as usize];
        let mut v = value;
        for slot in digits.iter_mut() {
            *slot = (v % n as u64) as u8;
            v /= n as u64;
        }
        if v != 0 {
            return Err(Error::DigitOutOfRange {
                digit: value as usize,
                radix: n,
            });
        }
        Ok(Self {
            word: Word::new(n, digits)?,
        })
    }

    pub fn n(&self) -> usize {
        self.word.n()
    }

    pub fn k(&self) -> u32 {
        self.word.len() as u32
    }

    pub fn digits(&self) -> &[u8] {
        self.word.digits()
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    /// The integer value `b_1 + b_2 N + ... + b_k N^{k-1}`.
    pub fn value(&self) -> u64 {
        self.word
            .digits()
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * self.n() as u64 + d as u64)
    }

    /// Digit reversal at fixed length; an involution.
    pub fn bit_reverse(&self) -> PacketIndex {
        Self {
            word: self.word.reversed(),
        }
    }
}

/// A complex step function on a uniform rational grid: cell `j` covers
/// `[(start + j)/denom, (start + j + 1)/denom)`. Finite support, right-open
/// cells.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    denom: i128,
    start: i64,
    values: Vec<Complex64>,
}

impl StepFunction {
    pub fn new(denom: i128, start: i64, values: Vec<Complex64>) -> Self {
        let mut f = Self {
            denom: denom.max(1),
            start,
            values,
        };
        f.trim();
        f
    }

    pub fn zero() -> Self {
        Self::new(1, 0, Vec::new())
    }

    /// The indicator of the unit interval `[0, 1)`.
    pub fn unit_indicator() -> Self {
        Self::new(1, 0, vec![Complex64::new(1.0, 0.0)])
    }

    fn trim(&mut self) {
        while self.values.last().is_some_and(|v| v.norm_sqr() == 0.0) {
            self.values.pop();
        }
        let leading = self
            .values
            .iter()
            .take_while(|v| v.norm_sqr() == 0.0)
            .count();
        if leading > 0 {
            self.values.drain(..leading);
            self.start += leading as i64;
        }
        if self.values.is_empty() {
            self.denom = 1;
            self.start = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn denom(&self) -> i128 {
        self.denom
    }

    /// Support bounds `(left, right)` as exact rationals.
    pub fn support(&self) -> (Rational, Rational) {
        (
            Rational::new(self.start as i128, self.denom),
            Rational::new(self.start as i128 + self.values.len() as i128, self.denom),
        )
    }

    /// `(cell left endpoint, value)` pairs over the support.
    pub fn cells(&self) -> impl Iterator<Item = (Rational, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(j, &v)| (Rational::new(self.start as i128 + j as i128, self.denom), v))
    }

    pub fn value_at(&self, x: &Rational) -> Complex64 {
        let scaled = x * Rational::from_integer(self.denom);
        let cell = scaled.floor().to_integer() - self.start as i128;
        if cell < 0 || cell as usize >= self.values.len() {
            Complex64::ZERO
        } else {
            self.values[cell as usize]
        }
    }

    /// Rewrites the function on a finer grid whose denominator must be a
    /// multiple of the current one.
    fn refine(&self, new_denom: i128) -> Result<StepFunction> {
        if new_denom % self.denom != 0 {
            return Err(Error::GridOverflow);
        }
        let factor = (new_denom / self.denom) as usize;
        let mut values = Vec::with_capacity(self.values.len() * factor);
        for &v in &self.values {
            values.extend(std::iter::repeat_n(v, factor));
        }
        Ok(StepFunction {
            denom: new_denom,
            start: self.start * factor as i64,
            values,
        })
    }

    fn common_denom(&self, other: &StepFunction) -> Result<i128> {
        let d = self.denom.lcm(&other.denom);
        if d > GRID_DENOM_CAP {
            return Err(Error::GridOverflow);
        }
        Ok(d)
    }

    pub fn scale(&self, c: Complex64) -> StepFunction {
        StepFunction::new(
            self.denom,
            self.start,
            self.values.iter().map(|&v| v * c).collect(),
        )
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        let d = self.common_denom(other)?;
        let a = self.refine(d)?;
        let b = other.refine(d)?;
        if a.is_zero() {
            return Ok(b);
        }
        if b.is_zero() {
            return Ok(a);
        }
        let start = a.start.min(b.start);
        let end = (a.start + a.values.len() as i64).max(b.start + b.values.len() as i64);
        let mut values = vec![Complex64::ZERO; (end - start) as usize];
        for (src, offset) in [(&a, a.start - start), (&b, b.start - start)] {
            for (j, &v) in src.values.iter().enumerate() {
                values[j + offset as usize] += v;
            }
        }
        Ok(StepFunction::new(d, start, values))
    }

    /// Argument compression `g(x) = f(s x)`, `s >= 1`.
    pub fn compress(&self, s: i128) -> Result<StepFunction> {
        let denom = self.denom.checked_mul(s).filter(|&d| d <= GRID_DENOM_CAP);
        Ok(StepFunction {
            denom: denom.ok_or(Error::GridOverflow)?,
            start: self.start,
            values: self.values.clone(),
        })
    }

    /// Argument stretch `g(x) = f(x / s)`, `s >= 1`.
    pub fn stretch(&self, s: i128) -> Result<StepFunction> {
        if s <= 0 || s > GRID_DENOM_CAP {
            return Err(Error::GridOverflow);
        }
        if self.denom % s == 0 {
            return Ok(StepFunction {
                denom: self.denom / s,
                start: self.start,
                values: self.values.clone(),
            });
        }
        let factor = s as usize;
        let mut values = Vec::with_capacity(self.values.len() * factor);
        for &v in &self.values {
            values.extend(std::iter::repeat_n(v, factor));
        }
        Ok(StepFunction {
            denom: self.denom,
            start: self.start.checked_mul(s as i64).ok_or(Error::GridOverflow)?,
            values,
        })
    }

    /// Integer translation `g(x) = f(x - t)`.
    pub fn translate_int(&self, t: i64) -> Result<StepFunction> {
        let shift = (t as i128)
            .checked_mul(self.denom)
            .filter(|s| i64::try_from(*s).is_ok())
            .ok_or(Error::GridOverflow)?;
        Ok(StepFunction {
            denom: self.denom,
            start: self.start + shift as i64,
            values: self.values.clone(),
        })
    }

    /// The `L^2(R)` inner product, conjugate-linear in `self`; exact on the
    /// common refinement.
    pub fn inner(&self, other: &StepFunction) -> Result<Complex64> {
        let d = self.common_denom(other)?;
        let a = self.refine(d)?;
        let b = other.refine(d)?;
        let lo = a.start.max(b.start);
        let hi = (a.start + a.values.len() as i64).min(b.start + b.values.len() as i64);
        let mut acc = Complex64::ZERO;
        for j in lo..hi {
            let va = a.values[(j - a.start) as usize];
            let vb = b.values[(j - b.start) as usize];
            acc += va.conj() * vb;
        }
        Ok(acc / d as f64)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc + v.norm_sqr()) / self.denom as f64
    }

    /// Largest pointwise difference over the union of supports.
    pub fn max_abs_diff(&self, other: &StepFunction) -> Result<f64> {
        let d = self.common_denom(other)?;
        let a = self.refine(d)?;
        let b = other.refine(d)?;
        let lo = a.start.min(b.start);
        let hi = (a.start + a.values.len() as i64).max(b.start + b.values.len() as i64);
        let mut worst = 0.0f64;
        for j in lo..hi {
            let va = a
                .values
                .get(usize::try_from(j - a.start).unwrap_or(usize::MAX))
                .copied()
                .unwrap_or(Complex64::ZERO);
            let vb = b
                .values
                .get(usize::try_from(j - b.start).unwrap_or(usize::MAX))
                .copied()
                .unwrap_or(Complex64::ZERO);
            worst = worst.max((va - vb).norm());
        }
        Ok(worst)
    }

    /// CSV rows `left,re,im` per cell.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "left,re,im")?;
        for (left, v) in self.cells() {
            writeln!(w, "{left},{},{}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// The exact packet of a dyadic digit word: the masking recursion applied to
/// `chi_[0,1)` with the Haar taps. Values are `+-1` on dyadic cells — the
/// Walsh function of the index.
pub fn haar_packet(p: &PacketIndex) -> Result<StepFunction> {
    if p.n() != 2 {
        return Err(Error::PacketRadix(p.n()));
    }
    fn build(digits: &[u8]) -> Result<StepFunction> {
        match digits.split_first() {
            None => Ok(StepFunction::unit_indicator()),
            Some((&first, rest)) => {
                let v = build(rest)?;
                let a = v.compress(2)?;
                let b = v.translate_int(1)?.compress(2)?;
                let sign = if first == 0 { 1.0 } else { -1.0 };
                a.add(&b.scale(Complex64::new(sign, 0.0)))
            }
        }
    }
    build(p.digits())
}

/// Truncated infinite product for the scaling function transform:
/// `prod_{k=1}^{K} m_0(xi / N^k) / sqrt(N)`. Requires the low-pass
/// normalization `m_0(1) = sqrt(N)`.
pub fn scaling_product_truncated(fs: &FilterSystem, depth: u32, xi: f64) -> Result<Complex64> {
    let sqrt_n = (fs.n() as f64).sqrt();
    let at_zero = fs.filter(0)?.eval(0.0);
    if (at_zero - Complex64::new(sqrt_n, 0.0)).norm() > 1e-9 {
        return Err(Error::LowPassNormalization {
            got: at_zero.norm(),
            want: sqrt_n,
        });
    }
    let m0 = fs.filter(0)?;
    let mut acc = Complex64::new(1.0, 0.0);
    let mut arg = xi;
    for _ in 0..depth {
        arg /= fs.n() as f64;
        acc *= m0.eval(arg) / sqrt_n;
    }
    Ok(acc)
}

/// The window transform `(T_phi^k f)(x) = int f(x + y) conj(phi(scale y)) dy`
/// with `scale = N^k`, evaluated exactly at the rational point `x`.
pub fn t_phi_k(
    phi: &StepFunction,
    f: &StepFunction,
    scale: i128,
    x: &Rational,
) -> Result<Complex64> {
    if scale < 1 {
        return Err(Error::GridOverflow);
    }
    let window = phi.compress(scale)?;
    let d = f
        .common_denom(&window)?
        .lcm(x.denom());
    if d > GRID_DENOM_CAP {
        return Err(Error::GridOverflow);
    }
    let fd = f.refine(d)?;
    let wd = window.refine(d)?;
    let shift = (x * Rational::from_integer(d)).to_integer() as i64;
    // sum_j f(j + shift) conj(window(j)) / d over the overlap in y-cells
    let lo = wd.start.max(fd.start - shift);
    let hi = (wd.start + wd.values.len() as i64).min(fd.start + fd.values.len() as i64 - shift);
    let mut acc = Complex64::ZERO;
    for j in lo..hi {
        let fv = fd.values[(j + shift - fd.start) as usize];
        let wv = wd.values[(j - wd.start) as usize];
        acc += fv * wv.conj();
    }
    Ok(acc / d as f64)
}

/// Both sides of the packet coefficient identity at `(a, p, j)`.
#[derive(Clone, Copy, Debug)]
pub struct LemmaCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub defect: f64,
}

/// Verifies, in the exact dyadic case, that the filter-product coefficient
/// `m_a^(j 2^k - p)` equals `2^{k/2} (T_phi^k w)(j - p/2^k)` where `w` is the
/// packet of the reversed digit word and `phi = chi_[0,1)`. Both sides are
/// computed independently: the left from the convolution engine, the right
/// from exact step-function integration.
pub fn check_lemma_com3(a: &Word, p: i64, j: i64) -> Result<LemmaCheck> {
    if a.n() != 2 {
        return Err(Error::PacketRadix(a.n()));
    }
    let k = a.len() as u32;
    let scale = 1i64
        .checked_shl(k)
        .filter(|_| k < 62)
        .ok_or(Error::IntervalLevelCap(k))?;
    let fs = filterbank::haar();
    let m_a = cuntz::m_word(&fs, a)?;
    let lhs = m_a.coeff(j * scale - p);

    let w = haar_packet(&PacketIndex::new(a.reversed()))?;
    let x = Rational::new((j * scale - p) as i128, scale as i128);
    let t = t_phi_k(&StepFunction::unit_indicator(), &w, scale as i128, &x)?;
    let rhs = t * (scale as f64).sqrt();
    Ok(LemmaCheck {
        lhs,
        rhs,
        defect: (lhs - rhs).norm(),
    })
}

/// The basis measure through the packet route:
/// `mu_p(J_k(a)) = 2^k sum_j |(T_phi^k w)(j - p/2^k)|^2`, exact dyadic case.
pub fn mu_p_via_packets(p: i64, a: &Word) -> Result<f64> {
    if a.n() != 2 {
        return Err(Error::PacketRadix(a.n()));
    }
    let k = a.len() as u32;
    let scale = 1i64
        .checked_shl(k)
        .filter(|_| k < 62)
        .ok_or(Error::IntervalLevelCap(k))?;
    let w = haar_packet(&PacketIndex::new(a.reversed()))?;
    let phi = StepFunction::unit_indicator();
    let (lo, hi) = w.support();
    let p_over = Rational::new(p as i128, scale as i128);
    let width = Rational::new(1, scale as i128);
    // T(w)(x) vanishes unless x + [0, 2^-k) meets supp(w)
    let j_lo = (lo.clone() - width + p_over.clone()).floor().to_integer() as i64;
    let j_hi = (hi + p_over).ceil().to_integer() as i64;
    let mut acc = 0.0;
    for j in j_lo..=j_hi {
        let x = Rational::from_integer(j as i128) - p_over.clone();
        let t = t_phi_k(&phi, &w, scale as i128, &x)?;
        acc += t.norm_sqr();
    }
    Ok(acc * scale as f64)
}

/// Tabulates [`mu_p_via_packets`] on the full level-`k` partition.
pub fn haar_packet_table(p: i64, level: u32) -> Result<MeasureTable> {
    let cells = 1u64
        .checked_shl(level)
        .filter(|_| level < 24)
        .ok_or(Error::LevelCapExceeded {
            radix: 2,
            level,
            cap: 1 << 24,
        })?;
    let values = (0..cells)
        .map(|idx| mu_p_via_packets(p, &Word::from_index(2, level, idx)?))
        .collect::<Result<Vec<_>>>()?;
    MeasureTable::new(2, level, values, Engine::Packet, format!("e_{p}"))
}

fn pow2_rational(q: i32) -> Result<Rational> {
    if q.unsigned_abs() > 60 {
        return Err(Error::GridOverflow);
    }
    Ok(if q >= 0 {
        Rational::from_integer(1i128 << q)
    } else {
        Rational::new(1, 1i128 << (-q))
    })
}

/// Gram-matrix identity defect for a packet family selected by index
/// intervals.
///
/// Each entry `(n, q)` contributes the functions `2^{q/2} w_n(2^q x - t)` for
/// translates `|t| <= kmax`. The index intervals `I(n, q) = [2^q n, 2^q (n+1))`
/// must tile `[0, bound)` exactly: overlaps or gaps of positive length are
/// errors. Returns the largest deviation of the Gram matrix from the
/// identity, computed by exact step-function integration.
pub fn packet_onb_check(entries: &[(PacketIndex, i32)], kmax: i64) -> Result<f64> {
    let mut intervals: Vec<(Rational, Rational)> = Vec::with_capacity(entries.len());
    for (p, q) in entries {
        if p.n() != 2 {
            return Err(Error::PacketRadix(p.n()));
        }
        let w = pow2_rational(*q)?;
        let left = w.clone() * Rational::from_integer(p.value() as i128);
        let right = left.clone() + w;
        intervals.push((left, right));
    }
    intervals.sort();
    let mut cursor = Rational::zero();
    for (left, right) in &intervals {
        if *left < cursor {
            return Err(Error::TilingOverlap(left.to_string()));
        }
        if *left > cursor {
            return Err(Error::TilingGap(cursor.to_string()));
        }
        cursor = right.clone();
    }

    let mut family: Vec<StepFunction> = Vec::new();
    for (p, q) in entries {
        let w = haar_packet(p)?;
        let amp = Complex64::new(pow2_f64(*q).sqrt(), 0.0);
        for t in -kmax..=kmax {
            let shifted = w.translate_int(t)?;
            let scaled = if *q >= 0 {
                shifted.compress(1i128 << *q)?
            } else {
                shifted.stretch(1i128 << (-*q))?
            };
            family.push(scaled.scale(amp));
        }
    }

    let mut worst = 0.0f64;
    for (i, fi) in family.iter().enumerate() {
        for (j, fj) in family.iter().enumerate() {
            let g = fi.inner(fj)?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

fn pow2_f64(q: i32) -> f64 {
    (2.0f64).powi(q)
}
