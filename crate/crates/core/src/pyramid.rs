//! The discrete-signal view of the filter bank: up/down-sampling, subband
//! analysis and synthesis with perfect reconstruction, the row-contraction
//! inequality, and the intertwining of the time-domain low-pass with dyadic
//! scaling on the line.
//!
//! Signals share the [`LaurentPoly`] representation through `l^2 = L^2(T)`;
//! the operations here are thin wrappers whose agreement with the Fourier
//! picture is itself a tested claim.

use num_complex::Complex64;

use crate::cuntz;
use crate::error::{Error, Result};
use crate::filterbank::{self, FilterSystem};
use crate::laurent::LaurentPoly;
use crate::packets::StepFunction;

/// A finitely supported sequence, indexed by integers.
pub type Signal = LaurentPoly;

/// Inserts `n - 1` zeros between samples: index `k` moves to `n k`.
pub fn upsample(signal: &Signal, n: i64) -> Signal {
    debug_assert!(n >= 1);
    signal.dilate_any(n.max(1))
}

/// Keeps indices divisible by `n`: index `n k` moves to `k`.
pub fn downsample(signal: &Signal, n: i64) -> Signal {
    debug_assert!(n >= 1);
    let n = n.max(1);
    LaurentPoly::from_terms(
        signal
            .terms()
            .filter(|(k, _)| k.rem_euclid(n) == 0)
            .map(|(k, c)| (k.div_euclid(n), c)),
    )
}

/// The dyadic low-pass in the time domain: `(S_0 xi)_n = sum_k a_{n-2k} xi_k`,
/// computed by direct convolution rather than through the Fourier engine.
pub fn s0_time(fs: &FilterSystem, signal: &Signal) -> Result<Signal> {
    if fs.n() != 2 {
        return Err(Error::RadixMismatch {
            expected: 2,
            got: fs.n(),
        });
    }
    let taps = fs.filter(0)?;
    Ok(LaurentPoly::from_terms(signal.terms().flat_map(|(k, v)| {
        taps.terms().map(move |(m, a)| (m + 2 * k, a * v))
    })))
}

/// Splits a signal into its `N` subbands `S_i* xi`.
pub fn analyze(fs: &FilterSystem, signal: &Signal) -> Result<Vec<Signal>> {
    (0..fs.n())
        .map(|i| cuntz::apply_s_star(fs, i, signal))
        .collect()
}

/// Recombines subbands: `sum_i S_i band_i`. Inverse of [`analyze`] for
/// validated systems.
pub fn synthesize(fs: &FilterSystem, bands: &[Signal]) -> Result<Signal> {
    if bands.len() != fs.n() {
        return Err(Error::BandCount {
            expected: fs.n(),
            got: bands.len(),
        });
    }
    let mut acc = LaurentPoly::zero();
    for (i, band) in bands.iter().enumerate() {
        acc = acc.add(&cuntz::apply_s(fs, i, band)?);
    }
    Ok(acc)
}

/// Full analysis tree of the given depth; leaves in word-index order, so the
/// leaf at index `a` is `S_a* xi`.
pub fn analyze_tree(fs: &FilterSystem, signal: &Signal, depth: u32) -> Result<Vec<Signal>> {
    if depth == 0 {
        return Ok(vec![signal.clone()]);
    }
    let mut leaves = Vec::with_capacity(fs.n().pow(depth));
    for band in analyze(fs, signal)? {
        leaves.extend(analyze_tree(fs, &band, depth - 1)?);
    }
    Ok(leaves)
}

/// Inverse of [`analyze_tree`].
pub fn synthesize_tree(fs: &FilterSystem, leaves: &[Signal], depth: u32) -> Result<Signal> {
    if depth == 0 {
        return match leaves {
            [only] => Ok(only.clone()),
            _ => Err(Error::BandCount {
                expected: 1,
                got: leaves.len(),
            }),
        };
    }
    let expected = fs.n().pow(depth);
    if leaves.len() != expected {
        return Err(Error::BandCount {
            expected,
            got: leaves.len(),
        });
    }
    let chunk = leaves.len() / fs.n();
    let bands = leaves
        .chunks(chunk)
        .map(|sub| synthesize_tree(fs, sub, depth - 1))
        .collect::<Result<Vec<_>>>()?;
    synthesize(fs, &bands)
}

/// `||synthesize_tree(analyze_tree(xi)) - xi||` at the given depth.
pub fn reconstruction_defect(fs: &FilterSystem, signal: &Signal, depth: u32) -> Result<f64> {
    let leaves = analyze_tree(fs, signal, depth)?;
    let back = synthesize_tree(fs, &leaves, depth)?;
    Ok(back.sub(signal).norm())
}

/// `sum_i ||S_i* f||^2 - ||f||^2` for an arbitrary (not necessarily
/// quadrature) filter list. Nonpositive exactly when the system is a
/// row contraction; zero for validated QMF systems.
pub fn row_contraction_defect(filters: &[LaurentPoly], f: &LaurentPoly) -> Result<f64> {
    let fs = FilterSystem::new(filters.len(), filters.to_vec())?;
    let mut total = 0.0;
    for i in 0..fs.n() {
        total += cuntz::apply_s_star(&fs, i, f)?.norm_sq();
    }
    Ok(total - f.norm_sq())
}

/// The synthesis operator onto unit-width cells: `sum_k xi_k chi_[k, k+1)`.
/// Isometric from `l^2` into `L^2(R)`.
pub fn w_phi_haar(signal: &Signal) -> StepFunction {
    match signal.degree_bounds() {
        None => StepFunction::zero(),
        Some((lo, hi)) => {
            let values = (lo..=hi).map(|k| signal.coeff(k)).collect();
            StepFunction::new(1, lo, values)
        }
    }
}

/// The unitary dyadic scaling `(U f)(x) = f(x/2)/sqrt(2)` on step functions.
pub fn dyadic_scale(f: &StepFunction) -> Result<StepFunction> {
    Ok(f.stretch(2)?
        .scale(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)))
}

/// Largest cell difference between `W_phi S_0 xi` and `U W_phi xi` for the
/// Haar filters, both sides exact dyadic step functions.
pub fn intertwining_defect(signal: &Signal) -> Result<f64> {
    let fs = filterbank::haar();
    let lhs = w_phi_haar(&s0_time(&fs, signal)?);
    let rhs = dyadic_scale(&w_phi_haar(signal))?;
    lhs.max_abs_diff(&rhs)
}

/// True when the intertwining identity holds within `tol`.
pub fn check_intertwining(signal: &Signal, tol: f64) -> Result<bool> {
    Ok(intertwining_defect(signal)? <= tol)
}
