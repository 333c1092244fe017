//! Property tests for the algebraic invariants of the Laurent engine and the
//! operator layer.

use num_complex::Complex64;
use proptest::prelude::*;

use cuntz_measures::cuntz::{self, Word};
use cuntz_measures::filterbank::{cantor3, daubechies4, haar, permutative_shift, FilterSystem};
use cuntz_measures::laurent::LaurentPoly;
use cuntz_measures::pyramid;

fn arb_poly(max_deg: i64, max_terms: usize) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec(
        (-max_deg..=max_deg, -1.0f64..1.0, -1.0f64..1.0),
        0..=max_terms,
    )
    .prop_map(|terms| {
        LaurentPoly::from_terms(
            terms
                .into_iter()
                .map(|(k, re, im)| (k, Complex64::new(re, im))),
        )
    })
}

fn arb_system() -> impl Strategy<Value = FilterSystem> {
    prop_oneof![
        Just(haar()),
        Just(daubechies4()),
        Just(cantor3()),
        Just(permutative_shift(3).unwrap()),
    ]
}

proptest! {
    #[test]
    fn parseval_at_the_coefficient_level(f in arb_poly(24, 10)) {
        let inner = f.inner(&f);
        prop_assert!((inner.re - f.norm_sq()).abs() <= 1e-12);
        prop_assert!(inner.im.abs() <= 1e-15);
        prop_assert!(inner.re >= 0.0);
    }

    #[test]
    fn dilation_is_multiplicative(f in arb_poly(12, 6), g in arb_poly(12, 6), n in 2i64..=5) {
        let lhs = f.mul(&g).dilate(n).unwrap();
        let rhs = f.dilate(n).unwrap().mul(&g.dilate(n).unwrap());
        prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn conjugation_is_multiplicative(f in arb_poly(12, 6), g in arb_poly(12, 6)) {
        let lhs = f.mul(&g).conj_reflect();
        let rhs = f.conj_reflect().mul(&g.conj_reflect());
        prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn dilation_is_isometric(f in arb_poly(16, 8), g in arb_poly(16, 8), n in 2i64..=4) {
        let lhs = f.dilate(n).unwrap().inner(&g.dilate(n).unwrap());
        let rhs = f.inner(&g);
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn triples_round_trip(f in arb_poly(32, 12)) {
        let json = serde_json::to_string(&f).unwrap();
        let back: LaurentPoly = serde_json::from_str(&json).unwrap();
        prop_assert!(back.max_coeff_diff(&f) <= 1e-15);
    }

    #[test]
    fn operators_are_isometric(fs in arb_system(), f in arb_poly(32, 10)) {
        for j in 0..fs.n() {
            let image = cuntz::apply_s(&fs, j, &f).unwrap();
            prop_assert!((image.norm() - f.norm()).abs() <= 1e-12);
        }
    }

    #[test]
    fn adjoint_pairing(fs in arb_system(), f in arb_poly(24, 8), g in arb_poly(24, 8)) {
        for j in 0..fs.n() {
            let lhs = cuntz::apply_s(&fs, j, &g).unwrap().inner(&f);
            let rhs = g.inner(&cuntz::apply_s_star(&fs, j, &f).unwrap());
            prop_assert!((lhs - rhs).norm() <= 1e-10);
        }
    }

    #[test]
    fn projection_refinement(fs in arb_system(), f in arb_poly(16, 6), idx in 0u64..8) {
        let len = 2u32.min(if fs.n() == 2 { 2 } else { 1 });
        let a = Word::from_index(fs.n(), len, idx % (fs.n() as u64).pow(len)).unwrap();
        let parent = cuntz::projection(&fs, &a, &f).unwrap();
        let mut children = LaurentPoly::zero();
        for i in 0..fs.n() as u8 {
            let child = a.child(i).unwrap();
            children = children.add(&cuntz::projection(&fs, &child, &f).unwrap());
        }
        prop_assert!(children.max_coeff_diff(&parent) <= 1e-10);
    }

    #[test]
    fn shift_system_permutes_the_basis(n in -32i64..=32, j in 0usize..3) {
        let fs = permutative_shift(3).unwrap();
        let image = cuntz::apply_s(&fs, j, &LaurentPoly::basis(n)).unwrap();
        prop_assert_eq!(image.num_terms(), 1);
        let (degree, c) = image.terms().next().unwrap();
        prop_assert_eq!(degree, 3 * n + j as i64);
        prop_assert!((c - Complex64::new(1.0, 0.0)).norm() <= 1e-15);
    }

    #[test]
    fn down_up_sampling_round_trip(f in arb_poly(20, 10), n in 2i64..=4) {
        let back = pyramid::downsample(&pyramid::upsample(&f, n), n);
        prop_assert!(back.max_coeff_diff(&f) <= 1e-15);
    }

    #[test]
    fn word_index_round_trip(n in 2usize..=4, k in 0u32..=5, idx in 0u64..1024) {
        let cells = (n as u64).pow(k);
        let idx = idx % cells;
        let w = Word::from_index(n, k, idx).unwrap();
        prop_assert_eq!(w.index(), idx);
        prop_assert_eq!(w.len() as u32, k);
    }
}
