//! Exercises the C ABI surface the way a foreign binding would: through raw
//! pointers and status codes only.

use std::ffi::{CStr, CString};
use std::ptr;

use cuntz_measures_ffi::*;

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(cm_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn builtin_constructors_and_validation() {
    unsafe {
        for (fs, bands) in [
            (cm_filter_haar(), 2usize),
            (cm_filter_cantor3(), 3),
            (cm_filter_daubechies4(), 2),
            (cm_filter_permutative(4), 4),
        ] {
            assert!(!fs.is_null());
            assert_eq!(cm_filter_bands(fs), bands);
            let mut report = CmValidationReport {
                max_isometry_defect: f64::NAN,
                max_completeness_defect: f64::NAN,
                passed: false,
            };
            assert_eq!(cm_filter_validate(fs, 1e-12, &mut report), CmStatus::Ok);
            assert!(report.passed);
            assert!(report.max_isometry_defect <= 1e-12);
            cm_filter_free(fs);
        }
        assert!(cm_filter_permutative(1).is_null());
        assert_eq!(cm_filter_bands(ptr::null()), 0);
    }
}

#[test]
fn json_round_trip_through_the_abi() {
    unsafe {
        let fs = cm_filter_cantor3();
        let mut json: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(cm_filter_to_json(fs, &mut json), CmStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.starts_with("{\"N\":3"));

        let mut back: *mut CmFilterSystem = ptr::null_mut();
        let c = CString::new(text).unwrap();
        assert_eq!(cm_filter_from_json(c.as_ptr(), &mut back), CmStatus::Ok);
        assert_eq!(cm_filter_bands(back), 3);

        cm_string_free(json);
        cm_filter_free(back);
        cm_filter_free(fs);

        let bad = CString::new("{ not json").unwrap();
        let mut out: *mut CmFilterSystem = ptr::null_mut();
        assert_eq!(cm_filter_from_json(bad.as_ptr(), &mut out), CmStatus::ParseError);
        assert_eq!(
            cm_filter_from_json(ptr::null(), &mut out),
            CmStatus::NullArgument
        );
    }
}

#[test]
fn validation_failure_is_reported_not_fatal() {
    unsafe {
        // e_0, e_0 violates orthogonality
        let spec = CString::new(r#"{"N":2,"filters":[[[0,1.0,0.0]],[[0,1.0,0.0]]]}"#).unwrap();
        let mut fs: *mut CmFilterSystem = ptr::null_mut();
        assert_eq!(cm_filter_from_json(spec.as_ptr(), &mut fs), CmStatus::Ok);
        let mut report = CmValidationReport {
            max_isometry_defect: f64::NAN,
            max_completeness_defect: f64::NAN,
            passed: true,
        };
        assert_eq!(
            cm_filter_validate(fs, 1e-12, &mut report),
            CmStatus::ValidationFailed
        );
        assert!(!report.passed);
        assert!(report.max_isometry_defect > 0.5);
        cm_filter_free(fs);
    }
}

#[test]
fn measure_tables_through_the_abi() {
    unsafe {
        let fs = cm_filter_haar();
        for engine in [CmEngine::Operator, CmEngine::Spectral] {
            let mut table: *mut CmMeasureTable = ptr::null_mut();
            assert_eq!(
                cm_measure_table_basis(fs, 0, 3, engine, &mut table),
                CmStatus::Ok
            );
            let len = cm_measure_table_len(table);
            assert_eq!(len, 8);
            let mut values = vec![0.0f64; len];
            assert_eq!(
                cm_measure_table_copy_values(table, values.as_mut_ptr(), len),
                CmStatus::Ok
            );
            assert!(values.iter().all(|v| (v - 0.125).abs() < 1e-12));
            assert!((cm_measure_table_total(table) - 1.0).abs() < 1e-12);

            let mut csv: *mut std::ffi::c_char = ptr::null_mut();
            assert_eq!(cm_measure_table_to_csv(table, &mut csv), CmStatus::Ok);
            let text = CStr::from_ptr(csv).to_str().unwrap();
            assert!(text.starts_with("digits,left,value\n"));
            cm_string_free(csv);

            // wrong buffer length is rejected
            assert_eq!(
                cm_measure_table_copy_values(table, values.as_mut_ptr(), len - 1),
                CmStatus::InvalidArgument
            );
            cm_measure_table_free(table);
        }

        // cap enforcement surfaces as a status code
        let mut table: *mut CmMeasureTable = ptr::null_mut();
        assert_eq!(
            cm_measure_table_basis(fs, 0, 30, CmEngine::Operator, &mut table),
            CmStatus::CapExceeded
        );
        cm_filter_free(fs);
    }
}

#[test]
fn single_cell_measure_through_the_abi() {
    unsafe {
        let fs = cm_filter_cantor3();
        let mut v = f64::NAN;
        let digits = [0u8, 2u8];
        assert_eq!(
            cm_mu_basis(fs, 0, digits.as_ptr(), digits.len(), &mut v),
            CmStatus::Ok
        );
        assert!((v - 0.25).abs() < 1e-12);

        // empty word: the whole space
        assert_eq!(cm_mu_basis(fs, 0, ptr::null(), 0, &mut v), CmStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);

        // digit out of range
        let bad = [7u8];
        assert_eq!(
            cm_mu_basis(fs, 0, bad.as_ptr(), 1, &mut v),
            CmStatus::InvalidArgument
        );
        cm_filter_free(fs);
    }
}

#[test]
fn generated_header_declares_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/cuntz_measures.h");
    let text = std::fs::read_to_string(header).expect("header generated by build script");
    for needle in [
        "typedef struct CmFilterSystem CmFilterSystem;",
        "typedef struct CmMeasureTable CmMeasureTable;",
        "cm_filter_haar",
        "cm_measure_table_basis",
        "cm_mu_basis",
        "CM_STATUS_OK",
        "cm_string_free",
    ] {
        assert!(text.contains(needle), "header is missing `{needle}`");
    }
}
