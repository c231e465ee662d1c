use std::ffi::CStr;
use std::ptr;

use conic_uot_ffi::*;

fn last_error() -> String {
    let p = cuot_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn lyapunov_round_trip() {
    let v = [2.0, 0.5, 0.5, 1.0];
    let x = [1.0, 0.3, 0.3, -0.4];
    let mut s = [0.0; 4];
    let st = unsafe { cuot_lyapunov_solve(2, v.as_ptr(), x.as_ptr(), s.as_mut_ptr()) };
    assert_eq!(st, CuotStatus::Ok);
    assert!(cuot_last_error_message().is_null());
    for i in 0..2 {
        for j in 0..2 {
            let sv_vs: f64 = (0..2)
                .map(|k| s[i * 2 + k] * v[k * 2 + j] + v[i * 2 + k] * s[k * 2 + j])
                .sum();
            assert!((sv_vs - x[i * 2 + j]).abs() < 1e-13);
        }
    }
}

#[test]
fn mccann_scalar_midpoint() {
    let (u, v) = ([1.0], [4.0]);
    let mut w = [0.0];
    let st = unsafe { cuot_mccann_geodesic(1, u.as_ptr(), v.as_ptr(), 0.5, w.as_mut_ptr()) };
    assert_eq!(st, CuotStatus::Ok);
    assert!((w[0] - 2.25).abs() < 1e-14);
}

#[test]
fn gaussian_trace_handle() {
    let v = [1.0, 0.1, 0.1, 0.8];
    let p = [0.1, 0.0, 0.0, -0.1];
    let mut h = 0.0;
    unsafe {
        assert_eq!(
            cuot_gaussian_hamiltonian(2, v.as_ptr(), 1.5, p.as_ptr(), 0.3, &mut h),
            CuotStatus::Ok
        );
        let mut trace = ptr::null_mut();
        let st =
            cuot_gaussian_integrate(2, v.as_ptr(), 1.5, p.as_ptr(), 0.3, 1e-2, 100, &mut trace);
        assert_eq!(st, CuotStatus::Ok);
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(cuot_trace_rows(trace, &mut rows), CuotStatus::Ok);
        assert_eq!(cuot_trace_columns(trace, &mut cols), CuotStatus::Ok);
        assert_eq!((rows, cols), (101, 12));
        let name = CStr::from_ptr(cuot_trace_column_name(trace, 1));
        assert_eq!(name.to_str().unwrap(), "m");
        assert!(cuot_trace_column_name(trace, cols).is_null());

        let mut small = vec![0.0; 10];
        let st = cuot_trace_copy(trace, small.as_mut_ptr(), small.len());
        assert_eq!(st, CuotStatus::BufferTooSmall);
        assert!(last_error().contains("1212"));

        let mut data = vec![0.0; rows * cols];
        assert_eq!(
            cuot_trace_copy(trace, data.as_mut_ptr(), data.len()),
            CuotStatus::Ok
        );
        assert_eq!(data[3], h);
        let mut fit = CuotMassFit::default();
        assert_eq!(cuot_trace_mass_fit(trace, &mut fit), CuotStatus::Ok);
        assert!((fit.a - h / 2.0).abs() < 1e-8);
        let mut drift = 1.0;
        assert_eq!(cuot_trace_h_drift(trace, &mut drift), CuotStatus::Ok);
        assert!(drift < 1e-8);
        cuot_trace_free(trace);
        cuot_trace_free(ptr::null_mut());
    }
}

#[test]
fn shooting_scaling_case() {
    let one = [1.0];
    let (mut p0, mut xi0, mut it) = ([1.0], 0.0, usize::MAX);
    let st = unsafe {
        cuot_shoot_bvp(
            1,
            one.as_ptr(),
            1.0,
            one.as_ptr(),
            4.0,
            1e-12,
            0,
            0,
            p0.as_mut_ptr(),
            &mut xi0,
            &mut it,
        )
    };
    assert_eq!(st, CuotStatus::Ok);
    assert!((xi0 - 2.0).abs() < 1e-8);
    assert!(p0[0].abs() < 1e-8);
    assert!(it < 50);
}

#[test]
fn density_metric_and_evolution() {
    let n = 128;
    let length = std::f64::consts::TAU;
    let rho = vec![1.0; n];
    let rho_dot: Vec<f64> = (0..n)
        .map(|i| (length * i as f64 / n as f64).sin())
        .collect();
    let (mut small, mut gdiv) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            cuot_small_metric_eval(n, length, rho.as_ptr(), rho_dot.as_ptr(), &mut small),
            CuotStatus::Ok
        );
        assert_eq!(
            cuot_gdiv_metric_eval(n, length, rho.as_ptr(), rho_dot.as_ptr(), &mut gdiv),
            CuotStatus::Ok
        );
    }
    assert!((small - std::f64::consts::PI).abs() < 1e-6);
    assert!((gdiv - length).abs() < 1e-6);

    let theta = vec![1.0; n];
    let mut trace = ptr::null_mut();
    unsafe {
        let st = cuot_pde_integrate(
            n,
            length,
            rho.as_ptr(),
            theta.as_ptr(),
            CuotModel::Small,
            1e-3,
            100,
            &mut trace,
        );
        assert_eq!(st, CuotStatus::Ok);
        let mut rows = 0;
        cuot_trace_rows(trace, &mut rows);
        let mut data = vec![0.0; rows * (4 + 2 * n)];
        assert_eq!(
            cuot_trace_copy(trace, data.as_mut_ptr(), data.len()),
            CuotStatus::Ok
        );
        let last = &data[(rows - 1) * (4 + 2 * n)..];
        // m(t) = m0 (1 + t/2)² for the uniform scaling geodesic
        assert!((last[1] - length * 1.05f64.powi(2)).abs() < 1e-9);
        cuot_trace_free(trace);
    }
}

#[test]
fn failures_set_status_and_message() {
    let bad = [1.0, 0.0, 0.0, -1.0];
    let x = [1.0, 0.0, 0.0, 1.0];
    let mut s = [0.0; 4];
    unsafe {
        let st = cuot_lyapunov_solve(2, bad.as_ptr(), x.as_ptr(), s.as_mut_ptr());
        assert_eq!(st, CuotStatus::NotPositiveDefinite);
        assert!(last_error().contains("positive definite"));
        let name = CStr::from_ptr(cuot_status_name(st));
        assert_eq!(name.to_str().unwrap(), "not_positive_definite");

        let st = cuot_lyapunov_solve(2, ptr::null(), x.as_ptr(), s.as_mut_ptr());
        assert_eq!(st, CuotStatus::NullPointer);
        assert!(last_error().contains('v'));

        let st = cuot_lyapunov_solve(0, x.as_ptr(), x.as_ptr(), s.as_mut_ptr());
        assert_eq!(st, CuotStatus::InvalidInput);

        // uniform contraction empties the domain at t = 2/3
        let n = 32;
        let rho = vec![1.0; n];
        let theta = vec![-3.0; n];
        let mut trace = ptr::null_mut();
        let st = cuot_pde_integrate(
            n,
            std::f64::consts::TAU,
            rho.as_ptr(),
            theta.as_ptr(),
            CuotModel::Small,
            1e-3,
            1000,
            &mut trace,
        );
        assert_eq!(st, CuotStatus::PositivityLoss);
        assert!(trace.is_null());
        let mut step = 0;
        assert_eq!(cuot_last_error_step(&mut step), 0);
        assert!((600..=667).contains(&step), "{step}");
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/conic_uot.h");
    let source = include_str!("../src/lib.rs");
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("typedef struct CuotTrace CuotTrace;"));
    assert!(header.contains("CUOT_STATUS_OK = 0"));
}
