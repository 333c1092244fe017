//! Cuntz-algebra representations built from quadrature-mirror filter (QMF)
//! banks, and the projection-valued / scalar measures they induce on N-adic
//! intervals.
//!
//! The crate is organized around one pipeline:
//!
//! * [`laurent`] — sparse Laurent polynomials on the unit circle, the shared
//!   representation of filters, Hilbert-space vectors, and signals;
//! * [`filterbank`] — filter systems, the unitarity (QMF) validation, and the
//!   built-in systems (Haar, shift, Cantor, Daubechies-4);
//! * [`cuntz`] — the isometries `S_j`, their adjoints, operator words,
//!   projections `P_k(a) = S_a S_a*`, and the endomorphism on monomials;
//! * [`nadic`] — exact N-adic intervals, symbolic cylinders, and iterated
//!   function systems;
//! * [`measures`] — the induced scalar measures on N-adic cells, computed by
//!   two independent engines, with product-measure detection and the
//!   subspace-decomposition helpers;
//! * [`packets`] — wavelet packets, bit-reversal indexing, and the exact
//!   step-function pipeline for the dyadic (Haar/Walsh) case;
//! * [`pyramid`] — the discrete up/down-sampling view: subband analysis,
//!   synthesis, and perfect reconstruction.
//!
//! The `cuntz-measures` binary exposes the same machinery as a CLI; see the
//! README for the file formats it reads and writes.

pub mod cuntz;
pub mod error;
pub mod filterbank;
pub mod laurent;
pub mod measures;
pub mod nadic;
pub mod packets;
pub mod pyramid;

pub use cuntz::{Monomial, Word};
pub use error::{Error, Result};
pub use filterbank::{FilterSystem, ValidationReport};
pub use laurent::LaurentPoly;
pub use measures::{EigenData, Engine, MeasureTable, ProductSpec};

/// Default comparison tolerance for identity checks.
pub const DEFAULT_TOL: f64 = 1e-9;
