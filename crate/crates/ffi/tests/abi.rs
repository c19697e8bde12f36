use floquet_lab_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

const DRIVEN: &str = r#"{"variant":"DrivenTwoLevel","omega0":1.3,"drive_amplitude":0.4,"drive_frequency":1.0}"#;

fn model(json: &str) -> *mut FlqModel {
    let text = CString::new(json).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { flq_model_from_json(text.as_ptr(), &mut m) }, FlqStatus::Ok);
    m
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { flq_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string();
    assert_eq!(s.len(), n.min(255));
    s
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(flq_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn bad_json_sets_message() {
    let text = CString::new(r#"{"variant":"Nope"}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { flq_model_from_json(text.as_ptr(), &mut m) }, FlqStatus::InvalidConfig);
    assert!(m.is_null());
    assert!(last_error().contains("Nope"));
    assert_eq!(unsafe { flq_model_from_json(ptr::null(), &mut m) }, FlqStatus::NullPointer);
}

#[test]
fn propagator_and_phases() {
    let m = model(DRIVEN);
    let mut d = 0;
    let mut t = 0.0;
    unsafe {
        assert_eq!(flq_model_dim(m, &mut d), FlqStatus::Ok);
        assert_eq!(flq_model_period(m, &mut t), FlqStatus::Ok);
    }
    assert_eq!(d, 2);
    assert!((t - std::f64::consts::TAU).abs() < 1e-14);

    let mut exact = [FlqComplex::default(); 4];
    let mut numeric = [FlqComplex::default(); 4];
    let mut small = [FlqComplex::default(); 3];
    unsafe {
        assert_eq!(flq_exact_propagator(m, t, exact.as_mut_ptr(), 4), FlqStatus::Ok);
        assert_eq!(flq_monodromy(m, numeric.as_mut_ptr(), 4), FlqStatus::Ok);
        assert_eq!(flq_exact_propagator(m, t, small.as_mut_ptr(), 3), FlqStatus::BufferTooSmall);
    }
    for (a, b) in exact.iter().zip(&numeric) {
        assert!((a.re - b.re).abs() < 1e-6 && (a.im - b.im).abs() < 1e-6);
    }
    // Rabi frequency 1/2 over T = 2π: phases π ± π/2.
    let mut phases = [0.0; 2];
    assert_eq!(unsafe { flq_floquet_phases(m, phases.as_mut_ptr(), 2) }, FlqStatus::Ok);
    let pi = std::f64::consts::PI;
    assert!((phases[0] - pi / 2.0).abs() < 1e-10 && (phases[1] - 1.5 * pi).abs() < 1e-10);
    unsafe { flq_model_free(m) };
}

#[test]
fn orbit_round_trip_and_ap_scan() {
    let m = model(DRIVEN);
    let psi = [FlqComplex { re: 1.0, im: 0.0 }, FlqComplex::default()];
    let t = std::f64::consts::TAU;
    let mut orbit = ptr::null_mut();
    unsafe {
        assert_eq!(flq_propagate(m, psi.as_ptr(), 3, 0.0, t, t / 100.0, &mut orbit), FlqStatus::DimensionMismatch);
        assert_eq!(flq_propagate(m, psi.as_ptr(), 2, 0.0, 8.0 * t, t / 400.0, &mut orbit), FlqStatus::Ok);
    }
    let mut len = 0;
    let mut t_last = 0.0;
    let mut state = [FlqComplex::default(); 2];
    unsafe {
        assert_eq!(flq_orbit_len(orbit, &mut len), FlqStatus::Ok);
        assert_eq!(flq_orbit_time(orbit, len - 1, &mut t_last), FlqStatus::Ok);
        assert_eq!(flq_orbit_state(orbit, len - 1, state.as_mut_ptr(), 2), FlqStatus::Ok);
        assert_eq!(flq_orbit_state(orbit, len, state.as_mut_ptr(), 2), FlqStatus::InvalidArgument);
    }
    assert_eq!(len, 3201);
    assert!((t_last - 8.0 * t).abs() < 1e-9);
    let norm: f64 = state.iter().map(|z| z.re * z.re + z.im * z.im).sum();
    assert!((norm - 1.0).abs() < 1e-8);

    let mut ap = FlqApResult::default();
    assert_eq!(unsafe { flq_ap_scan(orbit, 0.1, 4.0 * t, &mut ap) }, FlqStatus::Ok);
    assert_eq!(ap.epsilon, 0.1);
    assert!(ap.almost_period_count > 0);
    assert_eq!(unsafe { flq_ap_scan(orbit, -1.0, t, &mut ap) }, FlqStatus::InvalidArgument);
    unsafe {
        flq_orbit_free(orbit);
        flq_model_free(m);
    }
}

#[test]
fn run_config_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CString::new(format!(
        r#"{{"scenario":"ffi","model":{DRIVEN},"initial_state":{{"kind":"floquet_eigenvector","index":0}},
            "grid":{{"t1":62.83185307179586,"h":0.015707963267948967}},"diagnostics":[{{"kind":"recurrence"}}]}}"#
    ))
    .unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { flq_run_config(cfg.as_ptr(), out.as_ptr()) }, FlqStatus::Ok, "{}", last_error());
    assert!(dir.path().join("ffi.report.json").exists());

    let bad = CString::new(r#"{"scenario":"x"}"#).unwrap();
    assert_eq!(unsafe { flq_run_config(bad.as_ptr(), out.as_ptr()) }, FlqStatus::InvalidConfig);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/floquet_lab.h");
    match std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).status() {
        Ok(s) => assert!(s.success()),
        Err(_) => eprintln!("no C compiler; header check skipped"),
    }
}
