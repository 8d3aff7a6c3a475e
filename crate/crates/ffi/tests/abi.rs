use std::ffi::{c_char, CString};
use std::ptr;

use spdiff::cli::config::ScenarioConfig;
use spdiff_ffi::*;

const TOY: &str = include_str!("../../../configs/toy.toml");

fn scenario() -> *mut SpdiffScenario {
    let text = CString::new(TOY).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { spdiff_scenario_from_toml(text.as_ptr(), &mut h) }, SpdiffStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { spdiff_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn budget_matches_library() {
    let h = scenario();
    let resolved = ScenarioConfig::from_toml_str(TOY).unwrap().resolve().unwrap();
    let (mut t, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { spdiff_scenario_pulse(h, &mut t, &mut p) }, SpdiffStatus::Ok);
    assert_eq!(t, resolved.duration);
    let mut b = SpdiffPhaseBudget::default();
    assert_eq!(unsafe { spdiff_phase_budget(h, p, t, &mut b) }, SpdiffStatus::Ok);
    let expected = spdiff::phases::mirror_phase_budget(&resolved.packet, &resolved.scenario, p, t).unwrap();
    assert_eq!(b.total, expected.total);
    assert_eq!(b.phi_wv, expected.phi_wv);
    assert!(b.chirp_perfect);
    let mut phase = 0.0;
    assert_eq!(unsafe { spdiff_mirror_phase(h, p, t, &mut phase) }, SpdiffStatus::Ok);
    assert!(spdiff::phases::wrap(phase - b.total).abs() < 1e-6);
    unsafe { spdiff_scenario_free(h) };
}

#[test]
fn propagator_is_unitary_pi_pulse() {
    let h = scenario();
    let (mut t, mut p) = (0.0, 0.0);
    unsafe { spdiff_scenario_pulse(h, &mut t, &mut p) };
    let mut u = SpdiffMatrix2::default();
    assert_eq!(unsafe { spdiff_propagate_heisenberg(h, 0.0, 0.0, t, &mut u) }, SpdiffStatus::Ok);
    let transfer = u.re[1].powi(2) + u.im[1].powi(2);
    assert!((transfer - 1.0).abs() < 1e-6, "{transfer}");
    let mut c = SpdiffDetuningCoefficients::default();
    assert_eq!(unsafe { spdiff_detuning_coefficients(h, 0.0, 0.0, &mut c) }, SpdiffStatus::Ok);
    assert_eq!(c.laser_frequency, 100.0);
    let mut w = 0.0;
    assert_eq!(unsafe { spdiff_resonant_laser_frequency(h, 0.0, &mut w) }, SpdiffStatus::Ok);
    assert!((w - 100.0).abs() < 1e-12);
    unsafe { spdiff_scenario_free(h) };
}

#[test]
fn dyson_weights_at_pi_pulse() {
    let (mut eta, mut xi) = (f64::NAN, f64::NAN);
    let phi = std::f64::consts::FRAC_PI_2;
    assert_eq!(unsafe { spdiff_dyson_coefficients(0, phi, &mut eta, &mut xi) }, SpdiffStatus::Ok);
    // ∫₀^π cos(s − π/2) ds = 2, ∫₀^π sin(s − π/2) ds = 0
    assert!((eta - 2.0).abs() < 1e-12);
    assert!(xi.abs() < 1e-12);
}

#[test]
fn errors_are_reported() {
    let mut h = ptr::null_mut();
    let bad = CString::new(TOY.replace("mass_kg", "mass")).unwrap();
    assert_eq!(unsafe { spdiff_scenario_from_toml(bad.as_ptr(), &mut h) }, SpdiffStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("mass"), "{}", last_error());

    assert_eq!(unsafe { spdiff_scenario_from_toml(ptr::null(), &mut h) }, SpdiffStatus::NullPointer);
    let mut x = 0.0;
    assert_eq!(unsafe { spdiff_mirror_phase(ptr::null(), 0.0, 1.0, &mut x) }, SpdiffStatus::NullPointer);

    let h = scenario();
    assert_eq!(unsafe { spdiff_resonant_laser_frequency(h, f64::NAN, &mut x) }, SpdiffStatus::InvalidArgument);
    assert_eq!(unsafe { spdiff_resonant_laser_frequency(h, 0.0, ptr::null_mut()) }, SpdiffStatus::NullPointer);
    unsafe { spdiff_scenario_free(h) };
    unsafe { spdiff_scenario_free(ptr::null_mut()) };
}

#[test]
fn strict_mode_turns_guards_into_errors() {
    let h = scenario();
    let (mut t, mut p) = (0.0, 0.0);
    unsafe { spdiff_scenario_pulse(h, &mut t, &mut p) };
    let mut u = SpdiffMatrix2::default();
    // Far off resonance the first-order series is out of its regime.
    assert_eq!(unsafe { spdiff_propagate_heisenberg(h, 0.0, 5.0, t, &mut u) }, SpdiffStatus::Ok);
    assert_eq!(unsafe { spdiff_scenario_set_strict(h, true) }, SpdiffStatus::Ok);
    assert_eq!(unsafe { spdiff_propagate_heisenberg(h, 0.0, 5.0, t, &mut u) }, SpdiffStatus::Guard);
    unsafe { spdiff_scenario_free(h) };
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { std::ffi::CStr::from_ptr(spdiff_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spdiff.h")).unwrap();
    for name in [
        "spdiff_scenario_from_toml",
        "spdiff_scenario_free",
        "spdiff_phase_budget",
        "spdiff_propagate_heisenberg",
        "spdiff_last_error",
        "SPDIFF_STATUS_GUARD",
        "typedef struct SpdiffScenario SpdiffScenario",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    // The header must also be valid C when a compiler is around.
    if let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spdiff.h"))
        .status()
    {
        assert!(status.success());
    }
}
