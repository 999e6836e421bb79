use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use skeptic_update_ffi::*;

fn last_error() -> String {
    let p = su_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fixture() -> CString {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/golden_survey.csv");
    CString::new(path.to_str().unwrap()).unwrap()
}

#[test]
fn belief_closed_forms() {
    let mut out = f64::NAN;
    let s = unsafe { su_posterior_mean_structural(0.3, 0.0004, 10.0, 10.0, &mut out) };
    assert_eq!(s, SuStatus::Ok);
    assert!((out - (0.5 * 0.0004 + 0.5 * 0.3)).abs() < 1e-15);
    let s = unsafe { su_posterior_mean_quality(0.3, 0.0004, 0.0, &mut out) };
    assert_eq!(s, SuStatus::Ok);
    assert_eq!(out, 0.3);
}

#[test]
fn errors_set_status_and_message() {
    su_clear_last_error();
    assert!(su_last_error_message().is_null());
    let s = unsafe { su_posterior_mean_quality(0.3, 0.1, -1.0, ptr::null_mut()) };
    assert_eq!(s, SuStatus::NullPointer);
    assert!(last_error().contains("out"));
    let mut out = 0.0;
    let s = unsafe { su_posterior_mean_quality(0.3, 0.1, -1.0, &mut out) };
    assert_eq!(s, SuStatus::InvalidArgument);
    assert!(last_error().contains("quality"));

    let mut data = ptr::null_mut();
    let missing = CString::new("/nonexistent/survey.csv").unwrap();
    let s = unsafe { su_dataset_load(missing.as_ptr(), 0, &mut data) };
    assert_eq!(s, SuStatus::DataError);
    assert!(data.is_null());
    assert!(last_error().starts_with("Io"));
}

#[test]
fn tobit_on_golden_fixture() {
    let mut data = ptr::null_mut();
    let path = fixture();
    assert_eq!(unsafe { su_dataset_load(path.as_ptr(), 0, &mut data) }, SuStatus::Ok);
    assert_eq!(unsafe { su_dataset_len(data) }, 2885);
    assert_eq!(unsafe { su_dataset_n_valid(data) }, 2884);

    let covs = CString::new("age,gender,matching_gender,educ_int").unwrap();
    let mut fit = ptr::null_mut();
    assert_eq!(unsafe { su_fit_tobit(data, covs.as_ptr(), &mut fit) }, SuStatus::Ok);
    let (mut n, mut censored, mut ll) = (0usize, 0usize, 0.0);
    assert_eq!(unsafe { su_tobit_summary(fit, &mut n, &mut censored, &mut ll) }, SuStatus::Ok);
    assert_eq!(n, 2828);
    assert!(censored > 2600 && ll < 0.0);
    let (mut g, mut se) = (0.0, 0.0);
    assert_eq!(unsafe { su_tobit_gamma(fit, &mut g, &mut se) }, SuStatus::Ok);
    assert!(g.is_finite() && se > 0.0);
    assert_eq!(unsafe { su_tobit_num_delta(fit) }, 5);
    let name = unsafe { CStr::from_ptr(su_tobit_delta_name(fit, 0)) };
    assert_eq!(name.to_str().unwrap(), "Constant");
    assert!(unsafe { su_tobit_delta_name(fit, 5) }.is_null());
    assert_eq!(
        unsafe { su_tobit_delta(fit, 5, &mut g, &mut se) },
        SuStatus::InvalidArgument
    );

    let bad = CString::new("income").unwrap();
    let mut other = ptr::null_mut();
    assert_eq!(
        unsafe { su_fit_tobit(data, bad.as_ptr(), &mut other) },
        SuStatus::InvalidArgument
    );
    assert!(other.is_null());
    unsafe {
        su_tobit_free(fit);
        su_dataset_free(data);
    }
}

#[test]
fn binary_fit_and_prediction() {
    let mut data = ptr::null_mut();
    assert_eq!(unsafe { su_simulate(SuModel::Hurdle, 3000, 7, &mut data) }, SuStatus::Ok);
    let covs = CString::new("").unwrap();
    let mut fit = ptr::null_mut();
    assert_eq!(
        unsafe { su_fit_binary(data, covs.as_ptr(), SuLink::Logit, &mut fit) },
        SuStatus::Ok
    );
    assert_eq!(unsafe { su_binary_num_coefficients(fit) }, 2);
    let name = unsafe { CStr::from_ptr(su_binary_coefficient_name(fit, 1)) };
    assert_eq!(name.to_str().unwrap(), "Prior");
    let mut rate = 0.0;
    assert_eq!(unsafe { su_binary_success_rate(fit, data, 0.5, &mut rate) }, SuStatus::Ok);
    assert!(rate > 0.9);
    assert_eq!(
        unsafe { su_binary_success_rate(fit, data, 2.0, &mut rate) },
        SuStatus::InvalidArgument
    );
    unsafe {
        su_binary_free(fit);
        su_dataset_free(data);
        su_binary_free(ptr::null_mut());
    }
}

#[test]
fn simulate_rejects_small_n() {
    let mut data = ptr::null_mut();
    assert_eq!(unsafe { su_simulate(SuModel::Tobit, 10, 1, &mut data) }, SuStatus::SimulationError);
    assert!(last_error().starts_with("InvalidConfig"));
}

/// Compiles a small C program against the generated header and static
/// library. Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_against_header() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target_dir.join("libskeptic_update_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "skeptic_update.h"
int main(int argc, char **argv) {
    double m = 0.0;
    if (su_posterior_mean_quality(0.3, 0.0004, 1.0, &m) != SU_STATUS_OK) return 1;
    SuDataset *d = NULL;
    if (su_dataset_load(argv[1], 0, &d) != SU_STATUS_OK) return 2;
    SuTobitFit *f = NULL;
    if (su_fit_tobit(d, "age,gender,matching_gender,educ_int", &f) != SU_STATUS_OK) return 3;
    size_t n = 0, c = 0; double ll = 0.0;
    su_tobit_summary(f, &n, &c, &ll);
    if (su_dataset_load("/nonexistent.csv", 0, &d) == SU_STATUS_OK) return 4;
    printf("%.4f %zu %s\n", m, n, su_version());
    su_tobit_free(f);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).arg(fixture().to_str().unwrap()).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("0.1502 2828 "), "{stdout}");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("skeptic-update-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
