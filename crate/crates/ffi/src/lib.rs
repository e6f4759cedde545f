//! C ABI over the `orthosurv` learners.
//!
//! Objects are opaque handles created by `os_*_new`/`os_*_fit`/`os_*_generate`
//! functions and released by the matching `os_*_free`. Every fallible call
//! returns an [`OsStatus`]; on failure `os_last_error_message` describes the
//! error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use ndarray::ArrayView2;
use orthosurv::cli::{load_csv_dataset, ExperimentConfig};
use orthosurv::nuisance::{cross_fit, FoldedNuisances};
use orthosurv::orthogonal::{pseudo_rows_from_points, PseudoConfig};
use orthosurv::second_stage::{fit_tau, TauModel};
use orthosurv::synthetic::{generate, true_cate, GroundTruth, Scenario, ScenarioSpec, Setting};
use orthosurv::weighting::weight;
use orthosurv::{Dataset, Error, TildeEta, WeightScheme};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidData = 4,
    Io = 5,
    FitFailed = 6,
    Panic = 7,
}

/// Opaque dataset handle.
pub struct OsDataset(Dataset);

/// Opaque handle to cross-fitted nuisance models.
pub struct OsNuisances(FoldedNuisances);

/// Opaque handle to a fitted effect model.
pub struct OsTauModel(TauModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(e: &Error) -> OsStatus {
    match e {
        Error::DimensionMismatch { .. } => OsStatus::DimensionMismatch,
        Error::Config { .. } => OsStatus::InvalidArgument,
        Error::Csv { .. } | Error::InvalidDataset(_) | Error::NonFinite(_) | Error::Empty(_) => OsStatus::InvalidData,
        Error::Io { .. } => OsStatus::Io,
        _ => OsStatus::FitFailed,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (OsStatus, String)>) -> OsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            OsStatus::Ok
        }
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            OsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (OsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (OsStatus, String) {
    (OsStatus::NullPointer, format!("null pointer: {what}"))
}

fn bad(msg: impl Into<String>) -> (OsStatus, String) {
    (OsStatus::InvalidArgument, msg.into())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (OsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| bad(format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (OsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn truth(scenario: u32, setting: &str) -> Result<GroundTruth, (OsStatus, String)> {
    let sc = Scenario::from_number(scenario).map_err(lib)?;
    let st: Setting = setting.parse().map_err(lib)?;
    Ok(GroundTruth::new(sc, st))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn os_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn os_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Draws `n` rows from a synthetic scenario (1 or 2) and setting (`full`,
/// `low_treatment`, `low_censoring`, `low_survival` or a `+`-joined mix).
///
/// # Safety
/// `setting` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_dataset_generate(
    scenario: u32,
    setting: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut OsDataset,
) -> OsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let gt = truth(scenario, str_arg(setting, "setting")?)?;
        let (d, _) = generate(&ScenarioSpec {
            scenario: gt.scenario,
            setting: gt.setting,
            n,
            seed,
        });
        *out = Box::into_raw(Box::new(OsDataset(d)));
        Ok(())
    })
}

/// Loads a dataset CSV. `t_max < 0` uses the largest observed time.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_dataset_load_csv(path: *const c_char, t_max: i64, out: *mut *mut OsDataset) -> OsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = str_arg(path, "path")?;
        let tm = if t_max < 0 { None } else { Some(t_max as usize) };
        let d = load_csv_dataset(Path::new(p), tm).map_err(lib)?;
        *out = Box::into_raw(Box::new(OsDataset(d)));
        Ok(())
    })
}

/// Number of rows (0 for a null handle).
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_dataset_len(ds: *const OsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// Covariate dimension (0 for a null handle).
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_dataset_dim(ds: *const OsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.p())
}

/// Last grid step (0 for a null handle).
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_dataset_t_max(ds: *const OsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.t_max())
}

/// Copies the row-major `len x dim` covariate matrix into `buf`.
///
/// # Safety
/// `buf` must hold `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn os_dataset_covariates(ds: *const OsDataset, buf: *mut f64, buf_len: usize) -> OsStatus {
    guard(|| {
        let d = &handle(ds, "dataset")?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = d.len() * d.p();
        if buf_len != need {
            return Err((OsStatus::DimensionMismatch, format!("buffer holds {buf_len} values, need {need}")));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (i, r) in d.rows().iter().enumerate() {
            out[i * d.p()..(i + 1) * d.p()].copy_from_slice(&r.x);
        }
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn os_dataset_free(ds: *mut OsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// True effect `S_t(x, 1) - S_t(x, 0)` of a synthetic scenario.
///
/// # Safety
/// `x` must point to `dim` doubles; `setting` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn os_true_cate(
    scenario: u32,
    setting: *const c_char,
    x: *const f64,
    dim: usize,
    t: usize,
    out: *mut f64,
) -> OsStatus {
    guard(|| {
        let gt = truth(scenario, str_arg(setting, "setting")?)?;
        if x.is_null() || out.is_null() {
            return Err(null("x/out"));
        }
        if dim != gt.scenario.dim() {
            return Err((OsStatus::DimensionMismatch, format!("scenario has {} covariates, got {dim}", gt.scenario.dim())));
        }
        if t > gt.t_max() {
            return Err(bad(format!("t = {t} exceeds t_max = {}", gt.t_max())));
        }
        *out = true_cate(&gt, std::slice::from_raw_parts(x, dim), t);
        Ok(())
    })
}

/// Weighting value `f` of a scheme (`none`, `t`, `c`, `s`, `tc`, `ts`, `cs`,
/// `tcs`) at the given propensity and previous-step survival values.
///
/// # Safety
/// `scheme` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_weight(
    scheme: *const c_char,
    pi: f64,
    s1_prev: f64,
    s0_prev: f64,
    g1_prev: f64,
    g0_prev: f64,
    out: *mut f64,
) -> OsStatus {
    guard(|| {
        let s: WeightScheme = str_arg(scheme, "scheme")?.parse().map_err(lib)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = weight(s, &TildeEta::new(pi, s1_prev, s0_prev, g1_prev, g0_prev));
        Ok(())
    })
}

/// Cross-fits propensity and hazard networks with `k` folds using the
/// default architecture.
///
/// # Safety
/// `ds` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn os_nuisances_fit(ds: *const OsDataset, k: usize, seed: u64, out: *mut *mut OsNuisances) -> OsStatus {
    guard(|| {
        let d = &handle(ds, "dataset")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig::synthetic(Scenario::One, vec![Setting::FULL]);
        let fns = cross_fit(d, k, &cfg.nuisance_config(seed), seed).map_err(lib)?;
        *out = Box::into_raw(Box::new(OsNuisances(fns)));
        Ok(())
    })
}

/// # Safety
/// `n` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn os_nuisances_free(n: *mut OsNuisances) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

/// Fits the second-stage effect model for horizon `t` and weighting scheme.
/// `nuis` must have been fitted on the same dataset.
///
/// # Safety
/// Handles must be live; `scheme` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn os_tau_fit(
    ds: *const OsDataset,
    nuis: *const OsNuisances,
    scheme: *const c_char,
    t: usize,
    seed: u64,
    out: *mut *mut OsTauModel,
) -> OsStatus {
    guard(|| {
        let d = &handle(ds, "dataset")?.0;
        let n = &handle(nuis, "nuisances")?.0;
        let s: WeightScheme = str_arg(scheme, "scheme")?.parse().map_err(lib)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if t > d.t_max() {
            return Err(bad(format!("t = {t} exceeds t_max = {}", d.t_max())));
        }
        let naps = n.evaluate_rows(d).map_err(lib)?;
        let (rows, _) = pseudo_rows_from_points(d, &naps, s, t, &PseudoConfig::default());
        let cfg = ExperimentConfig::synthetic(Scenario::One, vec![Setting::FULL]).second_stage_config(seed, t);
        let m = fit_tau(&rows, &cfg, t, s).map_err(lib)?;
        *out = Box::into_raw(Box::new(OsTauModel(m)));
        Ok(())
    })
}

/// Predicts effects for `n_rows` row-major covariate vectors of length `dim`.
///
/// # Safety
/// `x` must hold `n_rows * dim` doubles and `out` `n_rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn os_tau_predict(
    m: *const OsTauModel,
    x: *const f64,
    n_rows: usize,
    dim: usize,
    out: *mut f64,
) -> OsStatus {
    guard(|| {
        let m = &handle(m, "model")?.0;
        if x.is_null() || out.is_null() {
            return Err(null("x/out"));
        }
        let xs = std::slice::from_raw_parts(x, n_rows * dim);
        let view = ArrayView2::from_shape((n_rows, dim), xs).map_err(|e| bad(e.to_string()))?;
        let p = m.predict(view).map_err(lib)?;
        std::slice::from_raw_parts_mut(out, n_rows).copy_from_slice(&p);
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn os_tau_free(m: *mut OsTauModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
