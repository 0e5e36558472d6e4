use std::ffi::{CStr, CString};
use std::ptr;

use wirtflow_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(wf_last_error()) }.to_string_lossy().into_owned()
}

fn interleave(values: &[(f64, f64)]) -> Vec<f64> {
    values.iter().flat_map(|&(a, b)| [a, b]).collect()
}

fn gaussian(n: usize, m: usize, seed: u64) -> *mut WfEnsemble {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { wf_gaussian_ensemble_new(n, m, seed, 0, &mut h) }, WfStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn handle_lifecycle_and_shape() {
    let h = gaussian(4, 24, 1);
    unsafe {
        assert_eq!(wf_ensemble_dim(h), 4);
        assert_eq!(wf_ensemble_measurements(h), 24);
        wf_ensemble_free(h);
        wf_ensemble_free(ptr::null_mut());
        assert_eq!(wf_ensemble_dim(ptr::null()), 0);
    }
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { wf_cdp_ensemble_new(8, 3, WfPattern::Octanary, 1, 0, &mut c) }, WfStatus::Ok);
    unsafe {
        assert_eq!(wf_ensemble_measurements(c), 24);
        wf_ensemble_free(c);
    }
}

#[test]
fn adjointness_through_the_c_interface() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { wf_cdp_ensemble_new(8, 2, WfPattern::Octanary, 3, 0, &mut h) }, WfStatus::Ok);
    let z: Vec<(f64, f64)> = (0..8).map(|t| ((t as f64).sin(), (t as f64 * 0.3).cos())).collect();
    let v: Vec<(f64, f64)> = (0..16).map(|t| ((t as f64 * 0.7).cos(), -(t as f64).sin())).collect();
    let (z, v) = (interleave(&z), interleave(&v));
    let mut az = vec![0.0; 32];
    let mut astar_v = vec![0.0; 16];
    unsafe {
        assert_eq!(wf_forward(h, z.as_ptr(), 8, az.as_mut_ptr(), 16), WfStatus::Ok);
        assert_eq!(wf_adjoint(h, v.as_ptr(), 16, astar_v.as_mut_ptr(), 8), WfStatus::Ok);
        wf_ensemble_free(h);
    }
    // <Az, v> = <z, A^* v> with <a, b> = Σ conj(a) b
    let dot = |a: &[f64], b: &[f64]| {
        a.chunks(2).zip(b.chunks(2)).fold((0.0, 0.0), |(re, im), (p, q)| {
            (re + p[0] * q[0] + p[1] * q[1], im + p[0] * q[1] - p[1] * q[0])
        })
    };
    let lhs = dot(&az, &v);
    let rhs = dot(&z, &astar_v);
    let scale = (lhs.0.hypot(lhs.1)).max(1.0);
    assert!((lhs.0 - rhs.0).abs() <= 1e-9 * scale && (lhs.1 - rhs.1).abs() <= 1e-9 * scale);
}

#[test]
fn end_to_end_recovery() {
    let (n, m) = (8, 80);
    let h = gaussian(n, m, 5);
    let x = interleave(&(0..n).map(|t| (1.0 / (1.0 + t as f64), 0.5 - 0.1 * t as f64)).collect::<Vec<_>>());
    let mut y = vec![0.0; m];
    let mut z0 = vec![0.0; 2 * n];
    let mut z = vec![0.0; 2 * n];
    let mut iters = 0usize;
    let mut d = f64::NAN;
    unsafe {
        assert_eq!(wf_observe(h, x.as_ptr(), n, y.as_mut_ptr(), m), WfStatus::Ok);
        assert_eq!(wf_spectral_init(h, y.as_ptr(), m, 50, 9, z0.as_mut_ptr(), n), WfStatus::Ok);
        let mut opts = wf_solve_options_default();
        opts.max_iterations = 800;
        assert_eq!(
            wf_solve(h, y.as_ptr(), m, z0.as_ptr(), n, &opts, z.as_mut_ptr(), &mut iters),
            WfStatus::Ok
        );
        assert_eq!(wf_dist(z.as_ptr(), x.as_ptr(), n, &mut d), WfStatus::Ok);
        wf_ensemble_free(h);
    }
    assert_eq!(iters, 800);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(d / norm < 1e-6, "relative error {}", d / norm);
    assert_eq!(last_error(), "");
}

#[test]
fn errors_are_reported() {
    let h = gaussian(4, 16, 1);
    let z = [0.0; 8];
    let mut out = vec![0.0; 32];
    unsafe {
        assert_eq!(wf_forward(h, z.as_ptr(), 3, out.as_mut_ptr(), 16), WfStatus::DimensionMismatch);
        assert!(last_error().contains("expected length 4"));
        assert_eq!(wf_forward(h, ptr::null(), 4, out.as_mut_ptr(), 16), WfStatus::NullPointer);
        assert_eq!(wf_forward(ptr::null(), z.as_ptr(), 4, out.as_mut_ptr(), 16), WfStatus::NullPointer);
        let bad = [f64::NAN; 8];
        assert_eq!(wf_forward(h, bad.as_ptr(), 4, out.as_mut_ptr(), 16), WfStatus::InvalidArgument);

        let y = [1.0; 16];
        let mut opts = wf_solve_options_default();
        opts.constant_mu = 1e9;
        opts.max_iterations = 200;
        let z0 = [5.0; 8];
        let mut zf = [0.0; 8];
        assert_eq!(
            wf_solve(h, y.as_ptr(), 16, z0.as_ptr(), 4, &opts, zf.as_mut_ptr(), ptr::null_mut()),
            WfStatus::Diverged
        );
        assert!(last_error().contains("diverged"));
        wf_ensemble_free(h);

        let path = CString::new("/nonexistent/codes.cdpe").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(wf_cdp_ensemble_load(path.as_ptr(), &mut c), WfStatus::Io);
        assert!(c.is_null());
        assert_eq!(wf_gaussian_ensemble_new(0, 4, 0, 0, &mut c), WfStatus::InvalidArgument);
    }
}

#[test]
fn cdp_codes_load_from_file() {
    use wirtflow::measurements::{CdpEnsemble, MeasurementOperator, PatternDistribution};
    use wirtflow::rng::RandomSource;
    use wirtflow::vector::ComplexVector;
    use wirtflow::Complex64;

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("codes.cdpe");
    let ens = CdpEnsemble::sample(6, 2, &PatternDistribution::ternary(), &mut RandomSource::new(2, 0)).unwrap();
    wirtflow::io::save_cdpe(&path, &ens).unwrap();

    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    let x: Vec<(f64, f64)> = (0..6).map(|t| (t as f64, 1.0)).collect();
    let mut y = vec![0.0; 12];
    unsafe {
        assert_eq!(wf_cdp_ensemble_load(c_path.as_ptr(), &mut h), WfStatus::Ok);
        assert_eq!(wf_observe(h, interleave(&x).as_ptr(), 6, y.as_mut_ptr(), 12), WfStatus::Ok);
        wf_ensemble_free(h);
    }
    let xv = ComplexVector::new(x.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
    assert_eq!(ens.observe(&xv).unwrap().as_slice(), y.as_slice());
}

#[test]
fn moments_match_the_library() {
    let mut oct = WfMoments::default();
    let mut ter = WfMoments::default();
    unsafe {
        assert_eq!(wf_pattern_moments(WfPattern::Octanary, &mut oct), WfStatus::Ok);
        assert_eq!(wf_pattern_moments(WfPattern::Ternary, &mut ter), WfStatus::Ok);
        assert_eq!(wf_pattern_moments(WfPattern::Ternary, ptr::null_mut()), WfStatus::NullPointer);
    }
    assert!(oct.admissible && (oct.abs2 - 1.0).abs() < 1e-12 && (oct.abs4 - 2.0).abs() < 1e-12);
    assert!(!ter.admissible && (ter.second_re - 0.5).abs() < 1e-12);
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/wirtflow.h")).unwrap();
    for name in [
        "wf_last_error",
        "wf_solve_options_default",
        "wf_gaussian_ensemble_new",
        "wf_cdp_ensemble_new",
        "wf_cdp_ensemble_load",
        "wf_ensemble_free",
        "wf_ensemble_dim",
        "wf_ensemble_measurements",
        "wf_forward",
        "wf_adjoint",
        "wf_observe",
        "wf_spectral_init",
        "wf_solve",
        "wf_dist",
        "wf_pattern_moments",
        "typedef struct WfEnsemble WfEnsemble",
        "WF_STATUS_DIVERGED = 5",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles a C program against the generated header and the static
/// library. Skipped when no C compiler is on the PATH.
#[test]
fn c_program_links_against_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libwirtflow_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke program failed: {:?} {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("iterations 1000"));
}
