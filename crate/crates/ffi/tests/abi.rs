use std::ffi::{CStr, CString};
use std::ptr;

use orthosurv_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(os_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn generate_query_and_free() {
    let setting = CString::new("low_censoring").unwrap();
    let mut ds = ptr::null_mut();
    let st = unsafe { os_dataset_generate(1, setting.as_ptr(), 200, 3, &mut ds) };
    assert_eq!(st, OsStatus::Ok);
    unsafe {
        assert_eq!(os_dataset_len(ds), 200);
        assert_eq!(os_dataset_dim(ds), 1);
        assert_eq!(os_dataset_t_max(ds), 5);
        let mut buf = vec![0.0; 200];
        assert_eq!(os_dataset_covariates(ds, buf.as_mut_ptr(), 200), OsStatus::Ok);
        assert!(buf.iter().all(|v| v.is_finite()));
        assert_eq!(os_dataset_covariates(ds, buf.as_mut_ptr(), 10), OsStatus::DimensionMismatch);
        os_dataset_free(ds);
        os_dataset_free(ptr::null_mut());
    }
}

#[test]
fn errors_set_codes_and_messages() {
    let setting = CString::new("sideways").unwrap();
    let mut ds = ptr::null_mut();
    let st = unsafe { os_dataset_generate(1, setting.as_ptr(), 10, 0, &mut ds) };
    assert_eq!(st, OsStatus::InvalidArgument);
    assert!(ds.is_null());
    assert!(last_error().contains("sideways"), "{}", last_error());
    let st = unsafe { os_dataset_generate(1, ptr::null(), 10, 0, &mut ds) };
    assert_eq!(st, OsStatus::NullPointer);
    assert_eq!(unsafe { os_dataset_len(ptr::null()) }, 0);
}

#[test]
fn weight_and_truth_values() {
    let scheme = CString::new("tcs").unwrap();
    let mut f = 0.0;
    assert_eq!(unsafe { os_weight(scheme.as_ptr(), 0.5, 0.8, 0.8, 0.8, 0.8, &mut f) }, OsStatus::Ok);
    assert!((f - 0.1024).abs() < 1e-15);
    let bogus = CString::new("bogus").unwrap();
    assert_eq!(unsafe { os_weight(bogus.as_ptr(), 0.5, 1.0, 1.0, 1.0, 1.0, &mut f) }, OsStatus::InvalidArgument);

    let setting = CString::new("low_survival").unwrap();
    let x = [1.0];
    let mut tau = f64::NAN;
    assert_eq!(unsafe { os_true_cate(1, setting.as_ptr(), x.as_ptr(), 1, 0, &mut tau) }, OsStatus::Ok);
    let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
    assert!((tau - (sig(0.0) - sig(-1.0))).abs() < 1e-12);
    assert_eq!(unsafe { os_true_cate(1, setting.as_ptr(), x.as_ptr(), 2, 0, &mut tau) }, OsStatus::DimensionMismatch);
}

#[test]
fn csv_round_trip_through_loader() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, "x0,a,t_tilde,delta_s,delta_g\n0.1,1,2,1,0\n0.3,0,1,0,1\n").unwrap();
    let p = CString::new(path.to_str().unwrap()).unwrap();
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { os_dataset_load_csv(p.as_ptr(), -1, &mut ds) }, OsStatus::Ok);
    assert_eq!(unsafe { os_dataset_len(ds) }, 2);
    unsafe { os_dataset_free(ds) };
    std::fs::write(&path, "x0,a,t_tilde,delta_s,delta_g\n").unwrap();
    assert_eq!(unsafe { os_dataset_load_csv(p.as_ptr(), -1, &mut ds) }, OsStatus::InvalidData);
    assert!(last_error().contains("empty dataset"));
}

#[test]
fn fit_and_predict_end_to_end() {
    let setting = CString::new("full").unwrap();
    let scheme = CString::new("t").unwrap();
    let mut ds = ptr::null_mut();
    let mut nu = ptr::null_mut();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(os_dataset_generate(1, setting.as_ptr(), 400, 1, &mut ds), OsStatus::Ok);
        assert_eq!(os_nuisances_fit(ds, 2, 1, &mut nu), OsStatus::Ok);
        assert_eq!(os_tau_fit(ds, nu, scheme.as_ptr(), 2, 1, &mut m), OsStatus::Ok);
        let x = [-1.0, 0.0, 1.0];
        let mut out = [f64::NAN; 3];
        assert_eq!(os_tau_predict(m, x.as_ptr(), 3, 1, out.as_mut_ptr()), OsStatus::Ok);
        assert!(out.iter().all(|v| v.is_finite() && v.abs() <= 1.5));
        assert_eq!(os_tau_predict(m, x.as_ptr(), 1, 3, out.as_mut_ptr()), OsStatus::DimensionMismatch);
        assert_eq!(os_nuisances_fit(ds, 1000, 1, &mut nu), OsStatus::FitFailed);
        os_tau_free(m);
        os_nuisances_free(nu);
        os_dataset_free(ds);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/orthosurv.h")).unwrap();
    for name in ["os_dataset_generate", "os_tau_predict", "os_last_error_message", "typedef struct OsDataset OsDataset"] {
        assert!(h.contains(name), "missing {name}");
    }
}
