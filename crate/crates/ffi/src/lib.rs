//! C ABI over `skeptic-update`.
//!
//! Every fallible function returns an [`SuStatus`]; on failure a message is
//! kept per thread and read with [`su_last_error_message`]. Datasets and
//! fits are opaque handles created by `su_*_load`/`su_fit_*`/`su_simulate`
//! and released with the matching `*_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use skeptic_update::belief::{posterior_mean_quality, posterior_mean_structural, InfoShock, QualityWeight};
use skeptic_update::dataio::{load_survey, Dataset, LoadOptions, SurveyRecord, Variable};
use skeptic_update::estimators::{
    fit_binary, fit_tobit_generalized, predict_change, BinaryFit, DesignMatrix, Link, TobitFit,
};
use skeptic_update::simulate::{simulate_survey, DgpConfig, ModelKind};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    EstimationError = 4,
    SimulationError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuLink {
    Probit = 0,
    Logit = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuModel {
    Tobit = 0,
    Hurdle = 1,
    Linear = 2,
}

/// Survey rows, valid and invalid.
pub struct SuDataset {
    inner: Dataset,
}

/// Generalized Tobit fit.
pub struct SuTobitFit {
    inner: TobitFit,
    names: Vec<CString>,
}

/// Probit or logit fit of Change.
pub struct SuBinaryFit {
    inner: BinaryFit,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (SuStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SuStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SuStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (SuStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(message: impl Into<String>) -> Failure {
    (SuStatus::InvalidArgument, message.into())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Comma-separated covariate names, Prior and empty items skipped.
fn covariates(list: &str) -> Result<Vec<Variable>, Failure> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let v = Variable::from_name(name).ok_or_else(|| invalid(format!("unknown covariate `{name}`")))?;
        if matches!(v, Variable::Change | Variable::Post) {
            return Err(invalid(format!("{} cannot be a covariate", v.label())));
        }
        if v != Variable::Prior && !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

fn c_names(names: &[String]) -> Vec<CString> {
    names
        .iter()
        .map(|n| CString::new(n.as_str()).unwrap_or_default())
        .collect()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn su_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn su_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn su_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Posterior mean `N/(c+N)·π* + c/(c+N)·π0` with shock weight `N` and prior
/// concentration `c = α + β`.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn su_posterior_mean_structural(
    pi0: f64,
    pi_star: f64,
    weight: f64,
    concentration: f64,
    out: *mut f64,
) -> SuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let shock = InfoShock::new(pi_star, weight).map_err(|e| invalid(e.to_string()))?;
        *out = posterior_mean_structural(pi0, &shock, concentration).map_err(|e| invalid(e.to_string()))?;
        Ok(())
    })
}

/// Posterior mean `(1 + 1/η)⁻¹·π* + (1 + η)⁻¹·π0` for informational quality `η`.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn su_posterior_mean_quality(pi0: f64, pi_star: f64, eta: f64, out: *mut f64) -> SuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let q = QualityWeight::new(eta).map_err(|e| invalid(e.to_string()))?;
        *out = posterior_mean_quality(pi0, pi_star, q).map_err(|e| invalid(e.to_string()))?;
        Ok(())
    })
}

/// Loads a survey CSV. With `strict` non-zero, any invariant violation fails
/// the load; otherwise offending rows are kept but excluded from analyses.
///
/// # Safety
/// `path` must be NULL or a NUL-terminated string; `out` must be NULL or
/// point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn su_dataset_load(path: *const c_char, strict: i32, out: *mut *mut SuDataset) -> SuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let loaded = load_survey(path, LoadOptions { strict: strict != 0 })
            .map_err(|e| (SuStatus::DataError, format!("{}: {e}", e.name())))?;
        *out = Box::into_raw(Box::new(SuDataset { inner: loaded.dataset }));
        Ok(())
    })
}

/// Draws a synthetic survey with the default planted parameters.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn su_simulate(model: SuModel, n: usize, seed: u64, out: *mut *mut SuDataset) -> SuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let kind = match model {
            SuModel::Tobit => ModelKind::Tobit,
            SuModel::Hurdle => ModelKind::Hurdle,
            SuModel::Linear => ModelKind::Linear,
        };
        let data = simulate_survey(&DgpConfig::new(kind, n, seed))
            .map_err(|e| (SuStatus::SimulationError, format!("{}: {e}", e.name())))?;
        *out = Box::into_raw(Box::new(SuDataset { inner: data }));
        Ok(())
    })
}

/// # Safety
/// `data` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn su_dataset_free(data: *mut SuDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of rows, valid or not; 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn su_dataset_len(data: *const SuDataset) -> usize {
    data.as_ref().map_or(0, |d| d.inner.len())
}

/// Number of rows that passed validation; 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn su_dataset_n_valid(data: *const SuDataset) -> usize {
    data.as_ref().map_or(0, |d| d.inner.n_valid())
}

/// Generalized Tobit of `Prior − Post` on Prior and the comma-separated
/// covariates, after listwise deletion.
///
/// # Safety
/// `data` must be NULL or a live handle, `covariates` NULL or a
/// NUL-terminated string, `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn su_fit_tobit(
    data: *const SuDataset,
    covariates_csv: *const c_char,
    out: *mut *mut SuTobitFit,
) -> SuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let data = &handle(data, "data")?.inner;
        let vars = covariates(str_arg(covariates_csv, "covariates")?)?;
        let mut needed = vec![Variable::Prior];
        needed.extend(&vars);
        let rows: Vec<&SurveyRecord> = data.complete_cases(&needed).collect();
        let est = |e: skeptic_update::estimators::EstimationError| (SuStatus::EstimationError, format!("{}: {e}", e.name()));
        let x = DesignMatrix::from_records(&rows, &vars).map_err(est)?;
        let prior: Vec<f64> = rows.iter().map(|r| r.prior).collect();
        let post: Vec<f64> = rows.iter().map(|r| r.post).collect();
        let fit = fit_tobit_generalized(&prior, &post, &x).map_err(est)?;
        let names = c_names(fit.delta.names());
        *out = Box::into_raw(Box::new(SuTobitFit { inner: fit, names }));
        Ok(())
    })
}

/// # Safety
/// `fit` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn su_tobit_free(fit: *mut SuTobitFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// γ of the latent posterior `Post* = γ·Prior + Xδ + u` and its standard error.
///
/// # Safety
/// `fit` must be NULL or a live handle; `estimate` and `std_error` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn su_tobit_gamma(fit: *const SuTobitFit, estimate: *mut f64, std_error: *mut f64) -> SuStatus {
    guard(|| {
        let fit = &handle(fit, "fit")?.inner;
        *out_arg(estimate, "estimate")? = fit.gamma;
        *out_arg(std_error, "std_error")? = fit.gamma_se;
        Ok(())
    })
}

/// σ of the latent error and its standard error.
///
/// # Safety
/// As [`su_tobit_gamma`].
#[no_mangle]
pub unsafe extern "C" fn su_tobit_sigma(fit: *const SuTobitFit, estimate: *mut f64, std_error: *mut f64) -> SuStatus {
    guard(|| {
        let fit = &handle(fit, "fit")?.inner;
        *out_arg(estimate, "estimate")? = fit.sigma;
        *out_arg(std_error, "std_error")? = fit.sigma_se;
        Ok(())
    })
}

/// Number of δ coefficients, intercept included; 0 for NULL.
///
/// # Safety
/// `fit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn su_tobit_num_delta(fit: *const SuTobitFit) -> usize {
    fit.as_ref().map_or(0, |f| f.inner.delta.len())
}

/// δ coefficient `index` (intercept first) with its standard error.
///
/// # Safety
/// As [`su_tobit_gamma`].
#[no_mangle]
pub unsafe extern "C" fn su_tobit_delta(
    fit: *const SuTobitFit,
    index: usize,
    estimate: *mut f64,
    std_error: *mut f64,
) -> SuStatus {
    guard(|| {
        let fit = &handle(fit, "fit")?.inner;
        let value = *fit
            .delta
            .values()
            .get(index)
            .ok_or_else(|| invalid(format!("delta index {index} out of range")))?;
        *out_arg(estimate, "estimate")? = value;
        *out_arg(std_error, "std_error")? = fit.delta_se.values()[index];
        Ok(())
    })
}

/// Name of δ coefficient `index`, or NULL. Owned by the fit.
///
/// # Safety
/// `fit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn su_tobit_delta_name(fit: *const SuTobitFit, index: usize) -> *const c_char {
    fit.as_ref()
        .and_then(|f| f.names.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Observations, censored observations and log-likelihood.
///
/// # Safety
/// `fit` must be NULL or a live handle; outputs NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn su_tobit_summary(
    fit: *const SuTobitFit,
    n: *mut usize,
    n_censored: *mut usize,
    log_likelihood: *mut f64,
) -> SuStatus {
    guard(|| {
        let fit = &handle(fit, "fit")?.inner;
        *out_arg(n, "n")? = fit.n;
        *out_arg(n_censored, "n_censored")? = fit.n_censored;
        *out_arg(log_likelihood, "log_likelihood")? = fit.log_likelihood;
        Ok(())
    })
}

/// Probit or logit of Change on an intercept, Prior and the comma-separated
/// covariates.
///
/// # Safety
/// As [`su_fit_tobit`].
#[no_mangle]
pub unsafe extern "C" fn su_fit_binary(
    data: *const SuDataset,
    covariates_csv: *const c_char,
    link: SuLink,
    out: *mut *mut SuBinaryFit,
) -> SuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let data = &handle(data, "data")?.inner;
        let mut vars = vec![Variable::Prior];
        vars.extend(covariates(str_arg(covariates_csv, "covariates")?)?);
        let rows: Vec<&SurveyRecord> = data.complete_cases(&vars).collect();
        let est = |e: skeptic_update::estimators::EstimationError| (SuStatus::EstimationError, format!("{}: {e}", e.name()));
        let x = DesignMatrix::from_records(&rows, &vars).map_err(est)?;
        let y: Vec<bool> = rows.iter().map(|r| r.change).collect();
        let link = match link {
            SuLink::Probit => Link::Probit,
            SuLink::Logit => Link::Logit,
        };
        let fit = fit_binary(&y, &x, link).map_err(est)?;
        let names = c_names(fit.names());
        *out = Box::into_raw(Box::new(SuBinaryFit { inner: fit, names }));
        Ok(())
    })
}

/// # Safety
/// `fit` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn su_binary_free(fit: *mut SuBinaryFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of coefficients, intercept included; 0 for NULL.
///
/// # Safety
/// `fit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn su_binary_num_coefficients(fit: *const SuBinaryFit) -> usize {
    fit.as_ref().map_or(0, |f| f.inner.coefficients.len())
}

/// Coefficient `index` (intercept first) with its standard error.
///
/// # Safety
/// `fit` must be NULL or a live handle; outputs NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn su_binary_coefficient(
    fit: *const SuBinaryFit,
    index: usize,
    estimate: *mut f64,
    std_error: *mut f64,
) -> SuStatus {
    guard(|| {
        let fit = &handle(fit, "fit")?.inner;
        let value = *fit
            .coefficients
            .values()
            .get(index)
            .ok_or_else(|| invalid(format!("coefficient index {index} out of range")))?;
        *out_arg(estimate, "estimate")? = value;
        *out_arg(std_error, "std_error")? = fit.standard_errors.values()[index];
        Ok(())
    })
}

/// Name of coefficient `index`, or NULL. Owned by the fit.
///
/// # Safety
/// `fit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn su_binary_coefficient_name(fit: *const SuBinaryFit, index: usize) -> *const c_char {
    fit.as_ref()
        .and_then(|f| f.names.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Share of valid rows whose Change is predicted correctly when Change = 1
/// is predicted at fitted probability `>= threshold`.
///
/// # Safety
/// `fit` and `data` must be NULL or live handles; `success_rate` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn su_binary_success_rate(
    fit: *const SuBinaryFit,
    data: *const SuDataset,
    threshold: f64,
    success_rate: *mut f64,
) -> SuStatus {
    guard(|| {
        let fit = &handle(fit, "fit")?.inner;
        let data = &handle(data, "data")?.inner;
        let out = out_arg(success_rate, "success_rate")?;
        let report = predict_change(fit, data, threshold).map_err(|e| match e {
            skeptic_update::estimators::EstimationError::InvalidInput(m) => invalid(m),
            e => (SuStatus::EstimationError, format!("{}: {e}", e.name())),
        })?;
        *out = report.success_rate;
        Ok(())
    })
}
