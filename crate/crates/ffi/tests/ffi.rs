use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sparsepois_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sp_last_error()) }.to_string_lossy().into_owned()
}

const MODEL: &str = r#"{"n": 200, "means": {"type": "constant", "lambda0": 9.0},
  "sparsity": {"beta": 0.6}, "regime": {"type": "sparse-two-sided", "r": 0.8}, "sidedness": "two-sided"}"#;

#[test]
fn kernel_values() {
    let mut lp = 0.0;
    let mut up = 0.0;
    unsafe {
        assert_eq!(sp_poisson_log_tails(15.0, 30, &mut up, ptr::null_mut()), SpStatus::Ok);
        assert_eq!(sp_poisson_log_pvalue(9.0, 9, SpSidedness::OneSided, &mut lp), SpStatus::Ok);
    }
    assert!((up.exp() - 4.1845e-4).abs() < 1e-7, "{}", up.exp());
    assert!((lp.exp() - 0.54435).abs() < 1e-5, "{}", lp.exp());

    unsafe {
        assert_eq!(sp_poisson_log_pvalue(-1.0, 3, SpSidedness::TwoSided, &mut lp), SpStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(sp_poisson_log_pvalue(1.0, 3, SpSidedness::TwoSided, ptr::null_mut()), SpStatus::NullPointer);
    }
}

#[test]
fn boundary_values() {
    let mut b = 0.0;
    unsafe {
        assert_eq!(sp_boundary(0.6, SpSidedness::TwoSided, SpMeansScale::Large, &mut b), SpStatus::Ok);
        assert!((b - 0.1).abs() < 1e-12);
        assert_eq!(sp_boundary(0.25, SpSidedness::TwoSided, SpMeansScale::Large, &mut b), SpStatus::Ok);
        assert!((b + 0.125).abs() < 1e-12);
        assert_eq!(sp_boundary(1.5, SpSidedness::TwoSided, SpMeansScale::Large, &mut b), SpStatus::Domain);
    }
}

#[test]
fn handles_round_trip() {
    let json = CString::new(MODEL).unwrap();
    let mut model = ptr::null_mut();
    let mut null = ptr::null_mut();
    unsafe {
        assert_eq!(sp_model_from_json(json.as_ptr(), &mut model), SpStatus::Ok);
        let n = sp_model_len(model);
        assert_eq!(n, 200);
        let mut lambdas = vec![0.0; n];
        assert_eq!(sp_model_lambdas(model, lambdas.as_mut_ptr(), n), SpStatus::Ok);
        assert_eq!(sp_null_new(lambdas.as_ptr(), n, &mut null), SpStatus::Ok);
        assert_eq!(sp_null_len(null), 200);

        let mut a = vec![0u64; n];
        let mut b = vec![0u64; n];
        assert_eq!(sp_model_sample(model, 7, 1, SpHypothesis::Alternative, a.as_mut_ptr(), n), SpStatus::Ok);
        assert_eq!(sp_model_sample(model, 7, 1, SpHypothesis::Alternative, b.as_mut_ptr(), n), SpStatus::Ok);
        assert_eq!(a, b);
        assert_eq!(sp_model_sample(model, 7, 1, SpHypothesis::Null, a.as_mut_ptr(), 3), SpStatus::LengthMismatch);

        let det = CString::new("chi2").unwrap();
        let mut stat = 0.0;
        assert_eq!(sp_null_evaluate(null, ptr::null(), det.as_ptr(), b.as_ptr(), n, &mut stat), SpStatus::Ok);
        let expected: f64 = b.iter().zip(&lambdas).map(|(&x, &l)| (x as f64 - l).powi(2) / l).sum();
        assert!((stat - expected).abs() < 1e-9 * expected);

        let mut crit = 0.0;
        assert_eq!(sp_calibrate(null, ptr::null(), det.as_ptr(), 0.05, 100, 3, &mut crit), SpStatus::Ok);
        assert!(crit > 150.0 && crit < 260.0, "{crit}");

        let lrt = CString::new("lrt").unwrap();
        assert_eq!(sp_null_evaluate(null, ptr::null(), lrt.as_ptr(), b.as_ptr(), n, &mut stat), SpStatus::InvalidArgument);
        assert_eq!(sp_null_evaluate(null, model, lrt.as_ptr(), b.as_ptr(), n, &mut stat), SpStatus::Ok);

        let bogus = CString::new("chi3").unwrap();
        assert_eq!(
            sp_null_evaluate(null, ptr::null(), bogus.as_ptr(), b.as_ptr(), n, &mut stat),
            SpStatus::UnknownDetector
        );
        assert!(last_error().contains("chi3"));

        sp_null_free(null);
        sp_model_free(model);
        sp_null_free(ptr::null_mut());
    }
}

#[test]
fn bad_json_is_a_parse_error() {
    let json = CString::new("{").unwrap();
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(sp_model_from_json(json.as_ptr(), &mut model), SpStatus::Parse);
    }
    assert!(model.is_null());
}

#[test]
fn grid_csv() {
    let cfg = CString::new(
        r#"{"n": 50, "means": {"type": "constant", "lambda0": 5.0}, "family": "sparse-two-sided",
            "betas": [0.6], "signals": [0.5], "detectors": ["max"], "seed": 1, "null_reps": 20, "power_reps": 10}"#,
    )
    .unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(sp_run_grid_csv(cfg.as_ptr(), 1, &mut out), SpStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        sp_string_free(out);
        assert!(text.starts_with("detector,n,beta,signal_kind,signal,power,reps,boundary_value,flag\nmax,50,0.6,r,0.5,"));
    }
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libsparsepois_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("cc available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok 0.1 3\n");
}
