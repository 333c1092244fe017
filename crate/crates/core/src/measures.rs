//! Scalar measures induced on N-adic intervals by a filter-bank
//! representation: `mu_f(J_k(a)) = ||S_a* f||^2`.
//!
//! Two independent engines compute the same quantity:
//!
//! * the operator engine pulls `f` down the adjoint tree and takes squared
//!   norms, `mu_f(J_k(a)) = ||S_a* f||^2`;
//! * the spectral engine forms the filter product `m_a` and sums
//!   `|(f conj(m_a))^(n N^k)|^2` over the lattice `N^k Z`.
//!
//! They are provably equal for validated systems, so any disagreement is a
//! bug detector for the whole stack; [`measure_table`] can be run with either
//! engine and the CLI cross-checks them on demand.
//!
//! The module also detects product measures (joint `S_i*`-eigenvectors),
//! verifies the covariance identities of the projection-valued measure under
//! the base-N IFS, applies the level-`k` isometries built from step
//! coefficients, and performs a finite-level greedy decomposition into
//! cyclic subspaces. The greedy decomposition is a finite-level heuristic:
//! it orthogonalizes against level-`k` projection spans only, and makes no
//! claim about the full (infinite-level) decomposition.

use std::collections::BTreeSet;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::cuntz::{self, Monomial, Word};
use crate::error::{Error, Result};
use crate::filterbank::FilterSystem;
use crate::laurent::LaurentPoly;
use crate::nadic::NadicInterval;

/// Which engine produced a [`MeasureTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Operator,
    Spectral,
    Product,
    Packet,
}

/// Hard cap on table size: `N^k <= 2^24` cells.
pub const TABLE_CELL_CAP: u64 = 1 << 24;
/// Cap for the rank computation: `N^k <= 2^12`.
pub const SPAN_CELL_CAP: u64 = 1 << 12;
/// Values in `[-NEG_EPS, 0)` clip to zero; anything lower is an error.
pub const NEG_EPS: f64 = 1e-12;

/// All values `mu_f(J_k(a))` at one level, index `a_1 N^{k-1} + ... + a_k`
/// (interval order, left to right).
#[derive(Clone, Debug)]
pub struct MeasureTable {
    n: usize,
    level: u32,
    values: Vec<f64>,
    engine: Engine,
    f_description: String,
}

impl MeasureTable {
    pub fn new(
        n: usize,
        level: u32,
        mut values: Vec<f64>,
        engine: Engine,
        f_description: String,
    ) -> Result<Self> {
        let expected = cell_count(n, level, TABLE_CELL_CAP)?;
        if values.len() as u64 != expected {
            return Err(Error::TableInvariant(format!(
                "expected {expected} cells, got {}",
                values.len()
            )));
        }
        for v in &mut values {
            if *v < -NEG_EPS {
                return Err(Error::NegativeMeasure(*v));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self {
            n,
            level,
            values,
            engine,
            f_description,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn f_description(&self) -> &str {
        &self.f_description
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, a: &Word) -> Result<f64> {
        if a.n() != self.n || a.len() as u32 != self.level {
            return Err(Error::ShapeMismatch {
                left_radix: self.n,
                left_level: self.level,
                right_radix: a.n(),
                right_level: a.len() as u32,
            });
        }
        Ok(self.values[a.index() as usize])
    }

    /// Total mass; `||f||^2` for the operator/spectral engines.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest cell mass scaled by `N^k` — a level-`k` density ceiling.
    /// This is a descriptive statistic only; it decides nothing about
    /// absolute continuity.
    pub fn max_density(&self) -> f64 {
        let scale = (self.n as f64).powi(self.level as i32);
        self.values.iter().fold(0.0f64, |m, &v| m.max(v * scale))
    }

    /// Histogram of cell densities `value * N^k`, as `(bin upper edge, count)`
    /// pairs over `[0, max density]`.
    pub fn density_histogram(&self, bins: usize) -> Vec<(f64, usize)> {
        let bins = bins.max(1);
        let max = self.max_density().max(f64::MIN_POSITIVE);
        let scale = (self.n as f64).powi(self.level as i32);
        let mut counts = vec![0usize; bins];
        for &v in &self.values {
            let d = v * scale;
            let idx = ((d / max * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (max * (i + 1) as f64 / bins as f64, c))
            .collect()
    }

    /// Largest violation of additivity against the level-`(k-1)` parent
    /// table: `|parent(a) - sum_i child(a i)|`.
    pub fn refinement_defect(&self, parent: &MeasureTable) -> Result<f64> {
        if parent.n != self.n || parent.level + 1 != self.level {
            return Err(Error::ShapeMismatch {
                left_radix: self.n,
                left_level: self.level,
                right_radix: parent.n,
                right_level: parent.level,
            });
        }
        let mut worst: f64 = 0.0;
        for (idx, &pv) in parent.values.iter().enumerate() {
            let child_sum: f64 = self.values[idx * self.n..(idx + 1) * self.n].iter().sum();
            worst = worst.max((pv - child_sum).abs());
        }
        Ok(worst)
    }

    fn interval_at(&self, idx: u64) -> Result<NadicInterval> {
        NadicInterval::from_word(Word::from_index(self.n, self.level, idx)?)
    }

    /// CSV rows `digits,left,value` in interval order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "digits,left,value")?;
        for (idx, v) in self.values.iter().enumerate() {
            let cell = self.interval_at(idx as u64)?;
            writeln!(w, "{},{},{v}", cell.word().display(), cell.fraction_strings().0)?;
        }
        Ok(())
    }

    /// CSV rows `right,cumulative`: the distribution function sampled at the
    /// right endpoint of every cell, in interval order.
    pub fn write_cdf_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "right,cumulative")?;
        let mut cum = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            cum += v;
            let cell = self.interval_at(idx as u64)?;
            writeln!(w, "{}/{},{cum}", cell.numerator() + 1, cell.denominator())?;
        }
        Ok(())
    }
}

impl Serialize for MeasureTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row {
            digits: Vec<u8>,
            left: String,
            value: f64,
        }
        let rows: Vec<Row> = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &value)| {
                let word = Word::from_index(self.n, self.level, idx as u64)
                    .expect("indices below N^k are valid");
                let cell = NadicInterval::from_word(word).expect("level already checked");
                Row {
                    digits: cell.word().digits().to_vec(),
                    left: cell.fraction_strings().0,
                    value,
                }
            })
            .collect();
        let mut s = serializer.serialize_struct("MeasureTable", 5)?;
        s.serialize_field("N", &self.n)?;
        s.serialize_field("k", &self.level)?;
        s.serialize_field("engine", &self.engine)?;
        s.serialize_field("f", &self.f_description)?;
        s.serialize_field("rows", &rows)?;
        s.end()
    }
}

fn cell_count(n: usize, level: u32, cap: u64) -> Result<u64> {
    let cells = (n as u64)
        .checked_pow(level)
        .filter(|&c| c <= cap)
        .ok_or(Error::LevelCapExceeded {
            radix: n,
            level,
            cap,
        })?;
    Ok(cells)
}

/// `mu_f(J_k(a)) = ||S_a* f||^2`, the operator-engine value for one cell.
pub fn mu_operator(fs: &FilterSystem, f: &LaurentPoly, a: &Word) -> Result<f64> {
    Ok(cuntz::apply_word_star(fs, a, f)?.norm_sq())
}

fn spectral_cell(f: &LaurentPoly, m_a: &LaurentPoly, step: i64) -> f64 {
    let g = f.mul(&m_a.conj_reflect());
    g.terms()
        .filter(|(t, _)| t.rem_euclid(step) == 0)
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

fn lattice_step(fs: &FilterSystem, level: u32) -> Result<i64> {
    (fs.n() as i64)
        .checked_pow(level)
        .ok_or(Error::LevelCapExceeded {
            radix: fs.n(),
            level,
            cap: i64::MAX as u64,
        })
}

/// The spectral-engine value: `sum_n |(f conj(m_a))^(n N^k)|^2`.
pub fn mu_spectral(fs: &FilterSystem, f: &LaurentPoly, a: &Word) -> Result<f64> {
    let step = lattice_step(fs, a.len() as u32)?;
    Ok(spectral_cell(f, &cuntz::m_word(fs, a)?, step))
}

/// Specialization to a Fourier basis vector:
/// `mu_p(J_k(a)) = sum_n |m_a(p - n N^k)|^2`.
pub fn mu_basis(fs: &FilterSystem, p: i64, a: &Word) -> Result<f64> {
    let step = lattice_step(fs, a.len() as u32)?;
    let m_a = cuntz::m_word(fs, a)?;
    Ok(m_a
        .terms()
        .filter(|(t, _)| (p - t).rem_euclid(step) == 0)
        .map(|(_, c)| c.norm_sqr())
        .sum())
}

fn describe(f: &LaurentPoly) -> String {
    let mut terms = f.terms();
    match (terms.next(), terms.next()) {
        (Some((k, c)), None) if (c - Complex64::new(1.0, 0.0)).norm() < 1e-12 => format!("e_{k}"),
        _ => format!("poly[{} terms]", f.num_terms()),
    }
}

fn fill_operator(fs: &FilterSystem, f: &LaurentPoly, out: &mut [f64]) -> Result<()> {
    if out.len() == 1 {
        out[0] = f.norm_sq();
        return Ok(());
    }
    let children: Vec<LaurentPoly> = (0..fs.n())
        .map(|j| cuntz::apply_s_star(fs, j, f))
        .collect::<Result<_>>()?;
    let chunk = out.len() / fs.n();
    if out.len() >= 1024 {
        out.par_chunks_mut(chunk)
            .zip(children.par_iter())
            .try_for_each(|(slot, child)| fill_operator(fs, child, slot))
    } else {
        for (slot, child) in out.chunks_mut(chunk).zip(&children) {
            fill_operator(fs, child, slot)?;
        }
        Ok(())
    }
}

fn fill_spectral(
    fs: &FilterSystem,
    f: &LaurentPoly,
    prefix: &LaurentPoly,
    depth: u32,
    level: u32,
    step: i64,
    out: &mut [f64],
) -> Result<()> {
    if depth == level {
        out[0] = spectral_cell(f, prefix, step);
        return Ok(());
    }
    let dilation = (fs.n() as i64).pow(depth);
    let children: Vec<LaurentPoly> = (0..fs.n())
        .map(|j| Ok(prefix.mul(&fs.filter(j)?.dilate_any(dilation))))
        .collect::<Result<_>>()?;
    let chunk = out.len() / fs.n();
    if out.len() >= 1024 {
        out.par_chunks_mut(chunk)
            .zip(children.par_iter())
            .try_for_each(|(slot, child)| fill_spectral(fs, f, child, depth + 1, level, step, slot))
    } else {
        for (slot, child) in out.chunks_mut(chunk).zip(&children) {
            fill_spectral(fs, f, child, depth + 1, level, step, slot)?;
        }
        Ok(())
    }
}

/// Tabulates `mu_f` on the full level-`k` partition with the chosen engine.
pub fn measure_table(
    fs: &FilterSystem,
    f: &LaurentPoly,
    level: u32,
    engine: Engine,
) -> Result<MeasureTable> {
    let cells = cell_count(fs.n(), level, TABLE_CELL_CAP)?;
    let mut values = vec![0.0f64; cells as usize];
    match engine {
        Engine::Operator => fill_operator(fs, f, &mut values)?,
        Engine::Spectral => {
            let step = lattice_step(fs, level)?;
            fill_spectral(fs, f, &LaurentPoly::basis(0), 0, level, step, &mut values)?;
        }
        Engine::Product | Engine::Packet => {
            return Err(Error::TableInvariant(
                "product/packet tables have dedicated constructors".into(),
            ))
        }
    }
    let table = MeasureTable::new(fs.n(), level, values, engine, describe(f))?;
    let mass_defect = (table.total() - f.norm_sq()).abs();
    if mass_defect > 1e-9 * (1.0 + f.norm_sq()) {
        return Err(Error::TableInvariant(format!(
            "total mass defect {mass_defect:.3e} at level {level}"
        )));
    }
    Ok(table)
}

/// Joint eigenvector diagnostics for the adjoints `S_i*`.
#[derive(Clone, Debug)]
pub struct EigenData {
    /// Rayleigh coefficients `lambda_i = <f, S_i* f>`.
    pub lambdas: Vec<Complex64>,
    /// Residual norms `||S_i* f - lambda_i f||`.
    pub residuals: Vec<f64>,
    pub is_eigen: bool,
}

impl EigenData {
    /// The induced probability weights `p_i = |lambda_i|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l.norm_sqr()).collect()
    }
}

/// Tests whether the unit vector `f` is a joint eigenvector of all `S_i*`.
/// The eigenvalue guesses are the Rayleigh inner products, which are optimal
/// in least squares, so no iteration is needed.
pub fn eigen_detect(fs: &FilterSystem, f: &LaurentPoly, tol: f64) -> Result<EigenData> {
    if f.is_zero() {
        return Err(Error::ZeroVector);
    }
    let norm = f.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnitNorm(norm));
    }
    let mut lambdas = Vec::with_capacity(fs.n());
    let mut residuals = Vec::with_capacity(fs.n());
    for i in 0..fs.n() {
        let pulled = cuntz::apply_s_star(fs, i, f)?;
        let lambda = f.inner(&pulled);
        residuals.push(pulled.sub(&f.scale(lambda)).norm());
        lambdas.push(lambda);
    }
    let is_eigen = residuals.iter().all(|&r| r <= tol);
    Ok(EigenData {
        lambdas,
        residuals,
        is_eigen,
    })
}

/// A probability vector on the digit alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSpec {
    probabilities: Vec<f64>,
}

impl ProductSpec {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        let sum: f64 = probabilities.iter().sum();
        if probabilities.len() < 2
            || probabilities.iter().any(|&p| p < 0.0)
            || (sum - 1.0).abs() > 1e-12
        {
            return Err(Error::BadProbabilities(sum));
        }
        Ok(Self { probabilities })
    }

    pub fn n(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// The product-measure mass of a cylinder: `p_{a_1} p_{a_2} ... p_{a_k}`.
pub fn product_measure(spec: &ProductSpec, a: &Word) -> Result<f64> {
    if a.n() != spec.n() {
        return Err(Error::RadixMismatch {
            expected: spec.n(),
            got: a.n(),
        });
    }
    Ok(a.digits()
        .iter()
        .map(|&d| spec.probabilities[d as usize])
        .product())
}

/// Tabulates the product measure at level `k`.
pub fn product_table(spec: &ProductSpec, level: u32) -> Result<MeasureTable> {
    let cells = cell_count(spec.n(), level, TABLE_CELL_CAP)?;
    let values = (0..cells)
        .map(|idx| {
            let a = Word::from_index(spec.n(), level, idx)?;
            product_measure(spec, &a)
        })
        .collect::<Result<Vec<_>>>()?;
    MeasureTable::new(
        spec.n(),
        level,
        values,
        Engine::Product,
        format!("product{:?}", spec.probabilities),
    )
}

/// True when `f` is a joint `S_i*`-eigenvector and its level-`k` operator
/// table agrees entrywise (within `tol`) with the product measure built from
/// `p_i = |lambda_i|^2`.
pub fn check_product(fs: &FilterSystem, f: &LaurentPoly, level: u32, tol: f64) -> Result<bool> {
    let eigen = eigen_detect(fs, f, tol)?;
    if !eigen.is_eigen {
        return Ok(false);
    }
    let spec = ProductSpec::new(eigen.probabilities())?;
    let table = measure_table(fs, f, level, Engine::Operator)?;
    let product = product_table(&spec, level)?;
    let worst = table
        .values()
        .iter()
        .zip(product.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(worst <= tol)
}

/// Level-`k` total-variation distance `1/2 sum_a |t1(a) - t2(a)|`.
pub fn tv_distance(t1: &MeasureTable, t2: &MeasureTable) -> Result<f64> {
    if t1.n() != t2.n() || t1.level() != t2.level() {
        return Err(Error::ShapeMismatch {
            left_radix: t1.n(),
            left_level: t1.level(),
            right_radix: t2.n(),
            right_level: t2.level(),
        });
    }
    Ok(t1
        .values()
        .iter()
        .zip(t2.values())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0)
}

/// Verifies the covariance of the projection-valued measure under the base-N
/// IFS, tested weakly against `f` on the cell `J_l(b)`:
///
/// * `<S_a* f, E(J_l(b)) S_a* f> = <f, E(J_{k+l}(a b)) f>`, and
/// * `sum_i <S_i* f, E(J_l(b)) S_i* f> = <f, E(sigma^{-1} J_l(b)) f>` with
///   `sigma^{-1}(J_l(b)) = union_i J_{l+1}(i b)`.
pub fn check_covariance(
    fs: &FilterSystem,
    a: &Word,
    b: &Word,
    f: &LaurentPoly,
    tol: f64,
) -> Result<bool> {
    let pulled = cuntz::apply_word_star(fs, a, f)?;
    let lhs1 = pulled.inner(&cuntz::projection(fs, b, &pulled)?);
    let rhs1 = f.inner(&cuntz::projection(fs, &a.concat(b)?, f)?);
    if (lhs1 - rhs1).norm() > tol {
        return Ok(false);
    }

    let mut lhs2 = Complex64::ZERO;
    let mut rhs2 = Complex64::ZERO;
    for i in 0..fs.n() as u8 {
        let head = Word::new(fs.n(), vec![i])?;
        let pulled = cuntz::apply_s_star(fs, i as usize, f)?;
        lhs2 += pulled.inner(&cuntz::projection(fs, b, &pulled)?);
        rhs2 += f.inner(&cuntz::projection(fs, &head.concat(b)?, f)?);
    }
    Ok((lhs2 - rhs2).norm() <= tol)
}

/// Checks `<f, alpha(T) f> = <f, T f>` for the monomial `T`, the state
/// invariance that characterizes joint eigenvectors.
pub fn check_state_invariance(
    fs: &FilterSystem,
    f: &LaurentPoly,
    m: &Monomial,
    tol: f64,
) -> Result<bool> {
    let direct = f.inner(&cuntz::monomial_apply(fs, m, f)?);
    let mut pushed = Complex64::ZERO;
    for part in cuntz::alpha_on_monomial(m)? {
        pushed += f.inner(&cuntz::monomial_apply(fs, &part, f)?);
    }
    Ok((pushed - direct).norm() <= tol)
}

/// Applies the level-`k` isometry determined by `f`: the step function
/// `sum_a c_a chi_{J_k(a)}` maps to `sum_a c_a P_k(a) f`, whose squared norm
/// is `sum_a |c_a|^2 mu_f(J_k(a))`.
pub fn build_isometry_apply(
    fs: &FilterSystem,
    f: &LaurentPoly,
    steps: &[(Word, Complex64)],
) -> Result<LaurentPoly> {
    if let Some((first, _)) = steps.first() {
        let k = first.len();
        if steps.iter().any(|(w, _)| w.len() != k) {
            return Err(Error::MixedWordLength(k));
        }
        let mut seen = BTreeSet::new();
        for (w, _) in steps {
            if !seen.insert(w.clone()) {
                return Err(Error::DuplicateWord);
            }
        }
    }
    let mut acc = LaurentPoly::zero();
    for (w, c) in steps {
        acc = acc.add(&cuntz::projection(fs, w, f)?.scale(*c));
    }
    Ok(acc)
}

/// Collects every projection `P_j(a) f` for `j <= k` as rows of a coefficient
/// matrix and counts singular values above `1e-8` — the dimension of the
/// level-`k` span of the cyclic orbit of `f`.
pub fn cyclic_span_dim(fs: &FilterSystem, f: &LaurentPoly, level: u32) -> Result<usize> {
    cell_count(fs.n(), level, SPAN_CELL_CAP)?;
    let mut vectors = Vec::new();
    for j in 0..=level {
        for idx in 0..(fs.n() as u64).pow(j) {
            let a = Word::from_index(fs.n(), j, idx)?;
            let v = cuntz::projection(fs, &a, f)?;
            if !v.is_zero() {
                vectors.push(v);
            }
        }
    }
    if vectors.is_empty() {
        return Ok(0);
    }
    let support: Vec<i64> = vectors
        .iter()
        .flat_map(|v| v.terms().map(|(k, _)| k))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let matrix = DMatrix::from_fn(vectors.len(), support.len(), |r, c| {
        vectors[r].coeff(support[c])
    });
    let singular = matrix.singular_values();
    Ok(singular.iter().filter(|&&s| s > 1e-8).count())
}

/// Greedy finite-level decomposition: each seed is orthogonalized against the
/// span of the level-`k` projections of previously accepted vectors; survivors
/// are normalized and returned with their operator-engine tables.
pub fn greedy_decompose(
    fs: &FilterSystem,
    seeds: &[LaurentPoly],
    level: u32,
) -> Result<Vec<(LaurentPoly, MeasureTable)>> {
    let cells = cell_count(fs.n(), level, SPAN_CELL_CAP)?;
    let mut basis: Vec<LaurentPoly> = Vec::new();
    let mut out = Vec::new();
    for seed in seeds {
        if seed.is_zero() {
            return Err(Error::ZeroVector);
        }
        let mut residual = seed.clone();
        for b in &basis {
            let coef = b.inner(&residual);
            residual = residual.sub(&b.scale(coef));
        }
        if residual.norm() <= 1e-8 * seed.norm() {
            continue; // absorbed by an earlier cyclic subspace
        }
        let vector = residual.scale(Complex64::new(1.0 / residual.norm(), 0.0));
        for idx in 0..cells {
            let a = Word::from_index(fs.n(), level, idx)?;
            let mut p = cuntz::projection(fs, &a, &vector)?;
            for b in &basis {
                let coef = b.inner(&p);
                p = p.sub(&b.scale(coef));
            }
            let norm = p.norm();
            if norm > 1e-10 {
                basis.push(p.scale(Complex64::new(1.0 / norm, 0.0)));
            }
        }
        let table = measure_table(fs, &vector, level, Engine::Operator)?;
        out.push((vector, table));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::{cantor3, haar, permutative_shift};
    use crate::nadic::is_cantor_word;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(k: i64) -> LaurentPoly {
        LaurentPoly::basis(k)
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn word(n: usize, digits: &[u8]) -> Word {
        Word::new(n, digits.to_vec()).unwrap()
    }

    #[test]
    fn mu_operator_known_values() {
        let fs = haar();
        for (digits, want) in [(vec![0u8], 0.5), (vec![1, 0], 0.25), (vec![1, 1, 0], 0.125)] {
            let got = mu_operator(&fs, &e(0), &word(2, &digits)).unwrap();
            assert!((got - want).abs() < 1e-14);
        }

        let p = permutative_shift(2).unwrap();
        assert!((mu_operator(&p, &e(0), &word(2, &[0, 0, 0])).unwrap() - 1.0).abs() < 1e-15);
        assert!(mu_operator(&p, &e(0), &word(2, &[0, 1, 0])).unwrap() < 1e-15);

        let c = cantor3();
        // brute force through the adjoint formulas: ||S_2* S_0* e_0||^2 = 1/4
        assert!((mu_operator(&c, &e(0), &word(3, &[0, 2])).unwrap() - 0.25).abs() < 1e-14);
        assert!(mu_operator(&c, &e(0), &word(3, &[0, 1])).unwrap() < 1e-15);
    }

    #[test]
    fn mu_operator_equals_projection_quadratic_form() {
        let fs = cantor3();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = crate::laurent::random(&mut rng, 12, 6);
            let a = Word::from_index(3, 3, rng.random_range(0..27)).unwrap();
            let direct = mu_operator(&fs, &f, &a).unwrap();
            let form = f.inner(&cuntz::projection(&fs, &a, &f).unwrap());
            assert!((direct - form.re).abs() < 1e-10);
            assert!(form.im.abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_engine_agrees_with_operator_engine() {
        let systems = [haar(), cantor3(), permutative_shift(2).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for fs in &systems {
            for _ in 0..40 {
                let f = crate::laurent::random_unit(&mut rng, 16, 8);
                let len = rng.random_range(0..=4u32);
                let idx = rng.random_range(0..(fs.n() as u64).pow(len));
                let a = Word::from_index(fs.n(), len, idx).unwrap();
                let op = mu_operator(fs, &f, &a).unwrap();
                let sp = mu_spectral(fs, &f, &a).unwrap();
                assert!((op - sp).abs() < 1e-9, "N={} a={}", fs.n(), a.display());
            }
        }
    }

    #[test]
    fn mu_spectral_empty_word_is_norm() {
        let fs = haar();
        let f = LaurentPoly::from_triples(&[(0, 0.6, 0.0), (5, 0.0, 0.8)]);
        let got = mu_spectral(&fs, &f, &Word::empty(2).unwrap()).unwrap();
        assert!((got - 1.0).abs() < 1e-12);
        let got = mu_spectral(&fs, &e(0), &word(2, &[0])).unwrap();
        assert!((got - 0.5).abs() < 1e-14);
    }

    #[test]
    fn mu_basis_identities() {
        // periodicity in p with period N^k, and unit column sums
        for fs in [haar(), cantor3()] {
            let n = fs.n() as i64;
            for k in 1..=3u32 {
                let cells = n.pow(k);
                for idx in 0..cells as u64 {
                    let a = Word::from_index(fs.n(), k, idx).unwrap();
                    let mut col = 0.0;
                    for p in 0..cells {
                        let v = mu_basis(&fs, p, &a).unwrap();
                        let shifted = mu_basis(&fs, p + cells, &a).unwrap();
                        assert!((v - shifted).abs() < 1e-12);
                        col += v;
                    }
                    assert!((col - 1.0).abs() < 1e-10, "column sum at {}", a.display());
                }
            }
        }
        // Haar Lebesgue case
        assert!((mu_basis(&haar(), 0, &word(2, &[1])).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn mu_basis_matches_spectral_on_basis_vectors() {
        let fs = cantor3();
        for p in -5i64..=5 {
            for idx in 0..9u64 {
                let a = Word::from_index(3, 2, idx).unwrap();
                let b = mu_basis(&fs, p, &a).unwrap();
                let s = mu_spectral(&fs, &e(p), &a).unwrap();
                assert!((b - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tables_for_the_three_reference_systems() {
        let t = measure_table(&haar(), &e(0), 3, Engine::Operator).unwrap();
        assert!(t.values().iter().all(|&v| (v - 0.125).abs() < 1e-12));

        let t = measure_table(&cantor3(), &e(0), 2, Engine::Operator).unwrap();
        for idx in 0..9u64 {
            let a = Word::from_index(3, 2, idx).unwrap();
            let want = if is_cantor_word(&a) { 0.25 } else { 0.0 };
            assert!((t.value(&a).unwrap() - want).abs() < 1e-12);
        }

        let t = measure_table(&permutative_shift(2).unwrap(), &e(0), 4, Engine::Operator).unwrap();
        assert!((t.values()[0] - 1.0).abs() < 1e-12);
        assert!(t.values()[1..].iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn table_refinement_consistency() {
        let fs = cantor3();
        let f = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            crate::laurent::random_unit(&mut rng, 8, 5)
        };
        let parent = measure_table(&fs, &f, 2, Engine::Operator).unwrap();
        let child = measure_table(&fs, &f, 3, Engine::Operator).unwrap();
        assert!(child.refinement_defect(&parent).unwrap() < 1e-9);
        assert!((child.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn table_rejects_too_negative_values() {
        assert!(matches!(
            MeasureTable::new(2, 0, vec![-1e-9], Engine::Operator, "x".into()),
            Err(Error::NegativeMeasure(_))
        ));
        let t = MeasureTable::new(2, 0, vec![-1e-13], Engine::Operator, "x".into()).unwrap();
        assert_eq!(t.values()[0], 0.0);
    }

    #[test]
    fn table_cap_enforced() {
        let fs = haar();
        assert!(matches!(
            measure_table(&fs, &e(0), 25, Engine::Operator),
            Err(Error::LevelCapExceeded { .. })
        ));
    }

    #[test]
    fn eigen_detect_reference_vectors() {
        let fs = haar();
        let data = eigen_detect(&fs, &e(0), 1e-10).unwrap();
        assert!(data.is_eigen);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((data.lambdas[0] - re(r)).norm() < 1e-12);
        assert!((data.lambdas[1] - re(r)).norm() < 1e-12);
        let psum: f64 = data.probabilities().iter().sum();
        assert!((psum - 1.0).abs() < 1e-12);

        let c = cantor3();
        let data = eigen_detect(&c, &e(0), 1e-10).unwrap();
        assert!(data.is_eigen);
        assert!((data.lambdas[0] - re(r)).norm() < 1e-12);
        assert!(data.lambdas[1].norm() < 1e-12);
        assert!((data.lambdas[2] - re(r)).norm() < 1e-12);

        // (e_0 + e_1)/sqrt 2 is not a joint eigenvector
        let g = e(0).add(&e(1)).scale(re(r));
        let data = eigen_detect(&fs, &g, 1e-10).unwrap();
        assert!(!data.is_eigen);
        assert!(data.residuals.iter().any(|&x| x > 1e-3));

        assert!(matches!(
            eigen_detect(&fs, &LaurentPoly::zero(), 1e-10),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            eigen_detect(&fs, &e(0).scale(re(2.0)), 1e-10),
            Err(Error::NotUnitNorm(_))
        ));
    }

    #[test]
    fn product_measure_values() {
        let half = ProductSpec::new(vec![0.5, 0.5]).unwrap();
        assert!((product_measure(&half, &word(2, &[1, 0, 1])).unwrap() - 0.125).abs() < 1e-15);

        let dirac = ProductSpec::new(vec![1.0, 0.0]).unwrap();
        assert!((product_measure(&dirac, &word(2, &[0, 0, 0])).unwrap() - 1.0).abs() < 1e-15);

        let cantor = ProductSpec::new(vec![0.5, 0.0, 0.5]).unwrap();
        assert!((product_measure(&cantor, &word(3, &[0, 2])).unwrap() - 0.25).abs() < 1e-15);

        assert!(ProductSpec::new(vec![0.5, 0.6]).is_err());
        assert!(ProductSpec::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn check_product_for_reference_vectors() {
        assert!(check_product(&haar(), &e(0), 6, 1e-9).unwrap());
        assert!(check_product(&permutative_shift(2).unwrap(), &e(0), 6, 1e-9).unwrap());
        assert!(check_product(&cantor3(), &e(0), 4, 1e-9).unwrap());
        // S_0* e_1 = (1/sqrt 2) e_0 is not proportional to e_1, so eigen fails
        assert!(!check_product(&haar(), &e(1), 4, 1e-9).unwrap());
    }

    #[test]
    fn tv_distance_known_values() {
        let dirac = product_table(&ProductSpec::new(vec![1.0, 0.0]).unwrap(), 6).unwrap();
        let uniform = product_table(&ProductSpec::new(vec![0.5, 0.5]).unwrap(), 6).unwrap();
        assert_eq!(tv_distance(&dirac, &dirac).unwrap(), 0.0);
        // brute force over 64 cells: 1/2 (|1 - 2^-6| + 63 * 2^-6) = 1 - 2^-6
        let got = tv_distance(&dirac, &uniform).unwrap();
        assert!((got - (1.0 - 1.0 / 64.0)).abs() < 1e-12);

        let skew = ProductSpec::new(vec![0.9, 0.1]).unwrap();
        let fair = ProductSpec::new(vec![0.5, 0.5]).unwrap();
        let tv4 = tv_distance(
            &product_table(&skew, 4).unwrap(),
            &product_table(&fair, 4).unwrap(),
        )
        .unwrap();
        let tv8 = tv_distance(
            &product_table(&skew, 8).unwrap(),
            &product_table(&fair, 8).unwrap(),
        )
        .unwrap();
        assert!(tv8 > tv4, "tv distance should grow with level");

        let three = product_table(&ProductSpec::new(vec![0.5, 0.0, 0.5]).unwrap(), 2).unwrap();
        let two = product_table(&fair, 2).unwrap();
        assert!(tv_distance(&three, &two).is_err());
    }

    #[test]
    fn covariance_weak_identities() {
        let fs = haar();
        assert!(check_covariance(&fs, &word(2, &[0]), &word(2, &[1]), &e(0), 1e-12).unwrap());
        assert!(
            check_covariance(&fs, &Word::empty(2).unwrap(), &word(2, &[1]), &e(0), 1e-12).unwrap()
        );

        let c = cantor3();
        assert!(check_covariance(&c, &word(3, &[2]), &word(3, &[0]), &e(0), 1e-10).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..25 {
            let f = crate::laurent::random(&mut rng, 16, 6);
            let alen = rng.random_range(0..=3u32);
            let a = Word::from_index(2, alen, rng.random_range(0..(1u64 << alen))).unwrap();
            let b = Word::from_index(2, 2, rng.random_range(0..4)).unwrap();
            assert!(check_covariance(&fs, &a, &b, &f, 1e-10).unwrap());
        }
    }

    #[test]
    fn state_invariance_on_eigenvectors() {
        let fs = haar();
        let id = Monomial::identity(2).unwrap();
        assert!(check_state_invariance(&fs, &e(0), &id, 1e-12).unwrap());

        let w0 = word(2, &[0]);
        let proj = Monomial::new(w0.clone(), w0.clone(), re(1.0)).unwrap();
        assert!(check_state_invariance(&fs, &e(0), &proj, 1e-12).unwrap());
        // both sides are p_0 = 1/2
        let direct = e(0).inner(&cuntz::monomial_apply(&fs, &proj, &e(0)).unwrap());
        assert!((direct - re(0.5)).norm() < 1e-12);

        let cross = Monomial::new(w0.clone(), word(2, &[1]), re(1.0)).unwrap();
        assert!(check_state_invariance(&fs, &e(0), &cross, 1e-12).unwrap());
        let direct = e(0).inner(&cuntz::monomial_apply(&fs, &cross, &e(0)).unwrap());
        assert!(
            (direct - re(0.5)).norm() < 1e-12,
            "conj(lambda_0) lambda_1 = 1/2"
        );
    }

    #[test]
    fn isometry_apply_norms() {
        let fs = haar();
        // single cell
        let a = word(2, &[1, 0]);
        let v = build_isometry_apply(&fs, &e(0), &[(a.clone(), re(1.0))]).unwrap();
        let mu = mu_operator(&fs, &e(0), &a).unwrap();
        assert!((v.norm_sq() - mu).abs() < 1e-12);

        // all cells with unit coefficients resolve the identity
        let k = 3;
        let steps: Vec<(Word, Complex64)> = (0..8u64)
            .map(|i| (Word::from_index(2, k, i).unwrap(), re(1.0)))
            .collect();
        let v = build_isometry_apply(&fs, &e(0), &steps).unwrap();
        assert!(v.approx_eq(&e(0), 1e-12));

        // k = 1 with coefficients (1, -1): (m_0 - m_1)/sqrt 2 = e_1
        let steps = vec![(word(2, &[0]), re(1.0)), (word(2, &[1]), re(-1.0))];
        let v = build_isometry_apply(&fs, &e(0), &steps).unwrap();
        assert!(v.approx_eq(&e(1), 1e-12));
        assert!((v.norm_sq() - 1.0).abs() < 1e-12);

        // duplicates rejected
        let dup = vec![(word(2, &[0]), re(1.0)), (word(2, &[0]), re(1.0))];
        assert!(matches!(
            build_isometry_apply(&fs, &e(0), &dup),
            Err(Error::DuplicateWord)
        ));
        let mixed = vec![(word(2, &[0]), re(1.0)), (word(2, &[0, 1]), re(1.0))];
        assert!(matches!(
            build_isometry_apply(&fs, &e(0), &mixed),
            Err(Error::MixedWordLength(_))
        ));
    }

    #[test]
    fn cyclic_span_dimensions() {
        let fs = haar();
        for k in 0..=5u32 {
            assert_eq!(cyclic_span_dim(&fs, &e(0), k).unwrap(), 1 << k);
        }
        let p = permutative_shift(2).unwrap();
        assert_eq!(cyclic_span_dim(&p, &e(0), 4).unwrap(), 1);
        assert_eq!(cyclic_span_dim(&fs, &e(5), 0).unwrap(), 1);
    }

    #[test]
    fn greedy_decompose_examples() {
        let fs = haar();
        let parts = greedy_decompose(&fs, &[e(0)], 3).unwrap();
        assert_eq!(parts.len(), 1);
        assert!(parts[0].1.values().iter().all(|&v| (v - 0.125).abs() < 1e-9));

        let parts = greedy_decompose(&fs, &[e(0), e(0)], 3).unwrap();
        assert_eq!(parts.len(), 1, "duplicate seed must be absorbed");

        let p = permutative_shift(2).unwrap();
        let parts = greedy_decompose(&p, &[e(0), e(1)], 3).unwrap();
        assert_eq!(parts.len(), 2);
        let support = |t: &MeasureTable| -> Vec<usize> {
            t.values()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 1e-12)
                .map(|(i, _)| i)
                .collect()
        };
        let s0 = support(&parts[0].1);
        let s1 = support(&parts[1].1);
        assert!(s0.iter().all(|i| !s1.contains(i)), "disjoint support words");

        assert!(matches!(
            greedy_decompose(&fs, &[LaurentPoly::zero()], 2),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn csv_and_json_exports() {
        let t = measure_table(&haar(), &e(0), 1, Engine::Operator).unwrap();
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "digits,left,value");
        assert!(lines[1].starts_with("0,0/2,0.5"));
        assert!(lines[2].starts_with("1,1/2,0.5"));

        let mut cdf = Vec::new();
        t.write_cdf_csv(&mut cdf).unwrap();
        let text = String::from_utf8(cdf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "right,cumulative");
        assert!(lines[1].starts_with("1/2,0.5"));
        let total: f64 = lines[2].strip_prefix("2/2,").unwrap().parse().unwrap();
        assert!((total - 1.0).abs() < 1e-12);

        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"engine\":\"operator\""));
        assert!(json.contains("\"left\":\"1/2\""));
    }

    #[test]
    fn density_diagnostics() {
        let t = measure_table(&cantor3(), &e(0), 3, Engine::Operator).unwrap();
        // 8 cells of mass 1/8 at scale 27: max density 27/8
        assert!((t.max_density() - 27.0 / 8.0).abs() < 1e-12);
        let hist = t.density_histogram(4);
        let total: usize = hist.iter().map(|(_, c)| c).sum();
        assert_eq!(total, 27);
    }
}
