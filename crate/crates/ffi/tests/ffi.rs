use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use lattice_vis_ffi::*;

fn last_error() -> String {
    let p = lv_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { lv_string_free(p) };
    s
}

#[test]
fn theory_values_and_errors() {
    let (mut z, mut e) = (0.0, 0.0);
    assert_eq!(
        unsafe { lv_theory_constants(2, 1e-12, &mut z, &mut e) },
        LvStatus::Ok
    );
    assert!((z - 6.0 / std::f64::consts::PI.powi(2)).abs() < 1e-12);
    assert!((e - 0.3226340989).abs() < 1e-9);

    let mut g = 0.0;
    assert_eq!(unsafe { lv_gamma(2, 1, 3, &mut g) }, LvStatus::Ok);
    assert!((g - 3.0 / 7.0 * e).abs() < 1e-12);
    assert_eq!(
        unsafe { lv_gamma(2, 0, 6, &mut g) },
        LvStatus::UnsupportedModulus
    );
    assert!(last_error().contains("odd prime"));
    assert_eq!(
        unsafe { lv_delta(2, 5, 2, &mut g) },
        LvStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { lv_delta(2, 0, 2, ptr::null_mut()) },
        LvStatus::NullPointer
    );
    assert!(last_error().contains("null pointer"));
}

#[test]
fn config_simulation_lifecycle() {
    let json = CString::new(
        r#"{"k":2,"alphas":[[0.2,0.8],[0.7,0.3]],"policy":{"type":"cyclic"},"seed":4}"#,
    )
    .unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { lv_config_from_json(json.as_ptr(), &mut cfg) },
        LvStatus::Ok
    );

    let mut sims = Vec::new();
    for threads in [1, 3] {
        let mut sim = ptr::null_mut();
        assert_eq!(
            unsafe { lv_simulate(cfg, 20_000, 4, 2, threads, &mut sim) },
            LvStatus::Ok
        );
        sims.push(sim);
    }
    let csvs: Vec<String> = sims
        .iter()
        .map(|&s| {
            let mut out = ptr::null_mut();
            assert_eq!(unsafe { lv_simulation_csv(s, &mut out) }, LvStatus::Ok);
            take_string(out)
        })
        .collect();
    assert_eq!(csvs[0], csvs[1]);

    let (mut total, mut r0, mut r1) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(
            lv_simulation_proportion(sims[0], LvStat::Visible, 99, &mut total),
            LvStatus::Ok
        );
        assert_eq!(
            lv_simulation_proportion(sims[0], LvStat::VisibleResidue, 0, &mut r0),
            LvStatus::Ok
        );
        assert_eq!(
            lv_simulation_proportion(sims[0], LvStat::VisibleResidue, 1, &mut r1),
            LvStatus::Ok
        );
        let mut unused = 0.0;
        assert_eq!(
            lv_simulation_proportion(sims[0], LvStat::PairResidue, 2, &mut unused),
            LvStatus::InvalidArgument
        );
    }
    assert!((total - (r0 + r1)).abs() < 1e-15);
    assert!((total - 0.608).abs() < 0.03);

    for s in sims {
        unsafe { lv_simulation_free(s) };
    }
    let mut bad = ptr::null_mut();
    assert_eq!(
        unsafe { lv_simulate(cfg, 0, 4, 1, 1, &mut bad) },
        LvStatus::InvalidArgument
    );
    assert!(bad.is_null());
    unsafe { lv_config_free(cfg) };
    unsafe { lv_config_free(ptr::null_mut()) };
    unsafe { lv_simulation_free(ptr::null_mut()) };
    unsafe { lv_string_free(ptr::null_mut()) };
}

#[test]
fn exact_probabilities() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { lv_config_uniform(3, 0, &mut cfg) }, LvStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { lv_exact_visible_prob(cfg, 2, &mut out) },
        LvStatus::Ok
    );
    assert_eq!(take_string(out), "2/3");
    assert_eq!(
        unsafe { lv_exact_visible_prob(cfg, 1, &mut out) },
        LvStatus::Ok
    );
    assert_eq!(take_string(out), "1");
    assert_eq!(
        unsafe { lv_exact_visible_prob(cfg, 26, &mut out) },
        LvStatus::BudgetExceeded
    );
    unsafe { lv_config_free(cfg) };
}

#[test]
fn bad_inputs() {
    let mut cfg = ptr::null_mut();
    let invalid = CString::new(r#"{"k":2,"alphas":[[1.0,0.0]]}"#).unwrap();
    assert_eq!(
        unsafe { lv_config_from_json(invalid.as_ptr(), &mut cfg) },
        LvStatus::InvalidConfig
    );
    assert!(last_error().contains("interior"));
    let not_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { lv_config_from_json(not_utf8.as_ptr().cast(), &mut cfg) },
        LvStatus::InvalidUtf8
    );
    assert_eq!(
        unsafe { lv_config_from_json(ptr::null(), &mut cfg) },
        LvStatus::NullPointer
    );
    assert_eq!(
        unsafe { lv_config_uniform(1, 0, &mut cfg) },
        LvStatus::InvalidConfig
    );
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/lattice_vis.h"
    ))
    .unwrap();
    for name in [
        "lv_last_error",
        "lv_theory_constants",
        "lv_delta",
        "lv_gamma",
        "lv_config_from_json",
        "lv_config_uniform",
        "lv_config_free",
        "lv_simulate",
        "lv_simulation_proportion",
        "lv_simulation_csv",
        "lv_simulation_free",
        "lv_exact_visible_prob",
        "lv_string_free",
        "typedef struct LvConfig LvConfig",
        "LV_STATUS_UNSUPPORTED_MODULUS = 5",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compile and run the C program against the static library.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("liblattice_vis_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("lv_smoke");
    let compiled = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .output();
    let compiled = match compiled {
        Ok(c) => c,
        Err(e) => {
            eprintln!("skipping: no C compiler ({e})");
            return;
        }
    };
    assert!(
        compiled.status.success(),
        "{}",
        String::from_utf8_lossy(&compiled.stderr)
    );
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
