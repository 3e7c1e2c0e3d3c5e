use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ua_dirac::initdata::G1Variant;
use ua_dirac::model::{mass, Example};
use ua_dirac::steppers::{propagate, reconstruct_phi, PredictionVariant, Scheme, StepperOptions};
use ua_dirac_ffi::*;

fn small_config() -> UaConfig {
    UaConfig { n: 32, n_tau: 8, epsilon: 0.5, dt: 0.01, init_order: 3, ..ua_config_default() }
}

fn new_solver(cfg: &UaConfig) -> Result<*mut UaSolver, (UaStatus, String)> {
    let mut s = ptr::null_mut();
    let st = unsafe { ua_solver_new(cfg, &mut s) };
    if st == UaStatus::Ok {
        Ok(s)
    } else {
        assert!(s.is_null());
        Err((st, last_error()))
    }
}

fn last_error() -> String {
    let len = unsafe { ua_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; len + 1];
    let got = unsafe { ua_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(got, len);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn phi_of(s: *const UaSolver, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; 4 * n];
    assert_eq!(unsafe { ua_solver_phi(s, out.as_mut_ptr(), out.len()) }, UaStatus::Ok);
    out
}

#[test]
fn initial_state_reproduces_the_gaussian_profile() {
    let s = new_solver(&small_config()).unwrap();
    let mut n = 0;
    assert_eq!(unsafe { ua_solver_grid_size(s, &mut n) }, UaStatus::Ok);
    assert_eq!(n, 32);
    let mut x = vec![0.0; n];
    assert_eq!(unsafe { ua_solver_grid_points(s, x.as_mut_ptr(), n) }, UaStatus::Ok);
    let phi = phi_of(s, n);
    for (j, &xj) in x.iter().enumerate() {
        assert_eq!(xj, -8.0 + 0.5 * j as f64);
        let p1 = (-xj * xj).exp() / 2f64.sqrt();
        let p2 = (-2f64.sqrt() * xj * xj).exp();
        assert!((phi[2 * j] - p1).abs() < 1e-13 && phi[2 * j + 1].abs() < 1e-13);
        assert!((phi[2 * n + 2 * j] - p2).abs() < 1e-13 && phi[2 * n + 2 * j + 1].abs() < 1e-13);
    }
    unsafe { ua_solver_free(s) };
}

#[test]
fn advancing_matches_the_library_propagation() {
    let cfg = small_config();
    let s = new_solver(&cfg).unwrap();
    assert_eq!(unsafe { ua_solver_advance(s, 10) }, UaStatus::Ok);
    let mut t = 0.0;
    assert_eq!(unsafe { ua_solver_time(s, &mut t) }, UaStatus::Ok);
    assert!((t - 0.1).abs() < 1e-14);

    let p = Example::I.problem(0.5);
    let m = p.model(32).unwrap();
    let phi0 = p.initial_data(32).unwrap();
    let opts = StepperOptions { scheme: Scheme::Ua2, dt: 0.01, n_tau: 8, prediction: PredictionVariant::HalfStep };
    let want = reconstruct_phi(&propagate(&m, &phi0, 3, G1Variant::Printed, &opts, 0.1).unwrap(), 0.5);
    let got = phi_of(s, 32);
    for j in 0..32 {
        for c in 0..2 {
            let z = want.component(c)[j];
            assert_eq!((got[2 * 32 * c + 2 * j], got[2 * 32 * c + 2 * j + 1]), (z.re, z.im));
        }
    }

    let (mut mass_now, mut mass0) = (0.0, 0.0);
    assert_eq!(unsafe { ua_solver_mass(s, &mut mass_now, &mut mass0) }, UaStatus::Ok);
    assert_eq!(mass0, mass(&phi0));
    assert!(((mass_now - mass0) / mass0).abs() < 1e-3);
    let mut e = f64::NAN;
    assert_eq!(unsafe { ua_solver_energy(s, &mut e) }, UaStatus::Ok);
    assert_eq!(e, m.energy(&want).unwrap());
    unsafe { ua_solver_free(s) };
}

#[test]
fn automatic_order_is_accepted() {
    let s = new_solver(&UaConfig { init_order: -1, ..small_config() }).unwrap();
    assert_eq!(unsafe { ua_solver_advance(s, 2) }, UaStatus::Ok);
    unsafe { ua_solver_free(s) };
}

#[test]
fn invalid_arguments_report_status_and_message() {
    let cases = [
        (UaConfig { example: 4, ..small_config() }, UaStatus::InvalidArgument, "example"),
        (UaConfig { scheme: 0, ..small_config() }, UaStatus::InvalidArgument, "scheme"),
        (UaConfig { init_order: 6, ..small_config() }, UaStatus::InvalidArgument, "init_order"),
        (UaConfig { ua2_prediction: 2, ..small_config() }, UaStatus::InvalidArgument, "ua2_prediction"),
        (UaConfig { g1: 9, ..small_config() }, UaStatus::InvalidArgument, "g1"),
        (UaConfig { n: 31, ..small_config() }, UaStatus::InvalidConfig, "31"),
        (UaConfig { n_tau: 3, ..small_config() }, UaStatus::InvalidConfig, "3"),
        (UaConfig { epsilon: 0.0, ..small_config() }, UaStatus::InvalidConfig, "psilon"),
        (UaConfig { dt: -1.0, ..small_config() }, UaStatus::InvalidConfig, "time step"),
    ];
    for (cfg, status, needle) in cases {
        let (st, msg) = new_solver(&cfg).unwrap_err();
        assert_eq!(st, status, "{msg}");
        assert!(msg.contains(needle), "'{msg}' should mention {needle}");
    }
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ua_solver_new(ptr::null(), &mut out) }, UaStatus::InvalidArgument);
    assert!(last_error().contains("config"));
    assert_eq!(unsafe { ua_solver_new(&small_config(), ptr::null_mut()) }, UaStatus::InvalidArgument);
}

#[test]
fn null_handles_and_short_buffers_are_rejected() {
    let mut t = 0.0;
    assert_eq!(unsafe { ua_solver_time(ptr::null(), &mut t) }, UaStatus::InvalidArgument);
    assert_eq!(unsafe { ua_solver_advance(ptr::null_mut(), 1) }, UaStatus::InvalidArgument);
    let s = new_solver(&small_config()).unwrap();
    let mut buf = vec![0.0; 10];
    assert_eq!(unsafe { ua_solver_phi(s, buf.as_mut_ptr(), buf.len()) }, UaStatus::InvalidArgument);
    assert!(last_error().contains("128"));
    assert_eq!(unsafe { ua_solver_grid_points(s, buf.as_mut_ptr(), buf.len()) }, UaStatus::InvalidArgument);
    assert_eq!(unsafe { ua_solver_mass(s, ptr::null_mut(), ptr::null_mut()) }, UaStatus::InvalidArgument);
    unsafe {
        ua_solver_free(s);
        ua_solver_free(ptr::null_mut());
    }
}

#[test]
fn divergence_is_reported_and_the_state_kept() {
    // Order-5 data at eps = 1 is far outside the perturbative regime and blows up.
    let cfg = UaConfig { example: 1, epsilon: 1.0, init_order: 5, n: 128, n_tau: 32, dt: 1e-3, ..ua_config_default() };
    let s = new_solver(&cfg).unwrap();
    let st = unsafe { ua_solver_advance(s, 200) };
    assert_eq!(st, UaStatus::Diverged);
    assert!(last_error().contains("diverged"));
    let mut t = 0.0;
    unsafe { ua_solver_time(s, &mut t) };
    assert!(t > 0.0 && t < 0.2);
    assert!(phi_of(s, 128).iter().all(|v| v.is_finite()));
    unsafe { ua_solver_free(s) };
}

#[test]
fn last_error_is_thread_local_and_truncates() {
    ua_clear_last_error();
    assert_eq!(unsafe { ua_last_error_message(ptr::null_mut(), 0) }, 0);
    std::thread::spawn(|| {
        let _ = new_solver(&UaConfig { example: 9, ..small_config() });
        assert!(!last_error().is_empty());
    })
    .join()
    .unwrap();
    assert_eq!(unsafe { ua_last_error_message(ptr::null_mut(), 0) }, 0);

    let _ = new_solver(&UaConfig { example: 9, ..small_config() });
    let full = last_error();
    let mut buf = [1 as std::ffi::c_char; 5];
    let len = unsafe { ua_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(len, full.len());
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), &full[..4]);
}

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("ua_dirac.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "typedef struct UaSolver UaSolver;",
        "UA_STATUS_DIVERGED = 4",
        "ua_config_default(void)",
        "ua_solver_new(const struct UaConfig *config, struct UaSolver **out)",
        "ua_solver_advance",
        "ua_solver_time",
        "ua_solver_grid_size",
        "ua_solver_phi",
        "ua_solver_mass",
        "ua_solver_energy",
        "ua_solver_free",
        "ua_last_error_message",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = target_dir().join("libua_dirac_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler (cc) is required for this test");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("t=0.100000 n=32"), "{stdout}");
    assert!(stdout.contains("odd n: status=2 null=1"), "{stdout}");
}
