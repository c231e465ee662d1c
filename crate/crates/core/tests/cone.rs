use conic_uot::cone::*;
use conic_uot::gaussian::{
    integrate_geodesic, BuresWasserstein, GaussianCotangentState, SpdMatrix, SymMatrix,
};
use proptest::prelude::*;

fn polar_line(q0: f64, w0: f64, a0: f64, ad0: f64, t: f64) -> (f64, f64) {
    let (s, c) = q0.sin_cos();
    let (vx, vy) = (ad0 * c - a0 * w0 * s, ad0 * s + a0 * w0 * c);
    (a0 * c + t * vx, a0 * s + t * vy)
}

#[test]
fn cone_over_circle_is_the_plane() {
    let (q0, w0, a0, ad0) = (0.4, -1.1, 1.5, 0.3);
    let start = ConeState::new(vec![q0], vec![w0], a0, ad0).unwrap();
    let path = cone_path(&start, &ConeProblem::new(1.0, 1e-3, 1000).unwrap(), &Circle).unwrap();
    for (k, s) in path.iter().enumerate() {
        let (x, y) = polar_line(q0, w0, a0, ad0, k as f64 * 1e-3);
        let err = (s.alpha * s.q[0].cos() - x).hypot(s.alpha * s.q[0].sin() - y);
        assert!(err < 1e-6, "step {k}: {err:e}");
    }
}

#[test]
fn cone_over_the_sphere_is_euclidean_space() {
    // polar angle θ, azimuth φ; straight lines in ℝ³
    let (th, ph, thd, phd, a, ad) = (1.1, 0.2, 0.3, 0.6, 1.0, 0.1);
    let start = ConeState::new(vec![th, ph], vec![thd, phd], a, ad).unwrap();
    let path = cone_path(
        &start,
        &ConeProblem::new(1.0, 1e-3, 1000).unwrap(),
        &Sphere2,
    )
    .unwrap();
    let cart = |s: &ConeState| {
        let (st, ct) = s.q[0].sin_cos();
        let (sp, cp) = s.q[1].sin_cos();
        [s.alpha * st * cp, s.alpha * st * sp, s.alpha * ct]
    };
    let x0 = cart(&path[0]);
    let h = 1e-6;
    let ahead = ConeState::new(
        vec![th + h * thd, ph + h * phd],
        vec![thd, phd],
        a + h * ad,
        ad,
    )
    .unwrap();
    let x1 = cart(&ahead);
    let v: Vec<f64> = (0..3).map(|i| (x1[i] - x0[i]) / h).collect();
    for (k, s) in path.iter().enumerate() {
        let t = k as f64 * 1e-3;
        let x = cart(s);
        let err = (0..3)
            .map(|i| (x[i] - x0[i] - t * v[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        // the finite-difference initial velocity limits this comparison
        assert!(err < 1e-5, "step {k}: {err:e}");
    }
}

#[test]
fn radial_geodesic_matches_the_mass_law() {
    let (m0, m1) = (1.0f64, 9.0f64);
    let a0 = m0.sqrt();
    let start = ConeState::new(vec![0.0], vec![0.0], a0, m1.sqrt() - a0).unwrap();
    let tr = integrate_cone(&start, &ConeProblem::new(1.0, 1e-2, 100).unwrap(), &Circle).unwrap();
    for (t, m) in tr.times().iter().zip(tr.masses()) {
        assert!((m - radial_mass_geodesic(m0, m1, *t).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn gaussian_model_is_the_cone_over_scaled_bures() {
    let v = SpdMatrix::from_row_major(2, &[1.3, 0.2, 0.2, 0.7]).unwrap();
    let p = SymMatrix::from_row_major(2, &[0.2, -0.1, -0.1, 0.15]).unwrap();
    let (m, xi) = (1.5, 0.4);
    let g = GaussianCotangentState::new(v.clone(), m, p.clone(), xi).unwrap();
    let gt = integrate_geodesic(&g, 1e-3, 500).unwrap();

    let vm = v.matrix();
    let v_dot = (p.matrix() * vm + vm * p.matrix()) * (2.0 / m);
    let q: Vec<f64> = (0..4).map(|i| vm[(i / 2, i % 2)]).collect();
    let q_dot: Vec<f64> = (0..4).map(|i| v_dot[(i / 2, i % 2)]).collect();
    let start = ConeState::new(q, q_dot, 2.0 * m.sqrt(), xi * m.sqrt()).unwrap();
    let base = BuresWasserstein::gaussian_cone_base(2);
    let path = cone_path(&start, &ConeProblem::new(1.0, 1e-3, 500).unwrap(), &base).unwrap();

    let vs = gt.rows();
    for (k, s) in path.iter().enumerate().step_by(50) {
        let mass = s.alpha * s.alpha / 4.0;
        assert!((mass - vs[k][1]).abs() < 1e-9, "mass at {k}");
        for i in 0..4 {
            assert!((s.q[i] - vs[k][4 + i]).abs() < 1e-9, "V at {k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_is_conserved_for_any_exponent(
        p in 0.25..2.0f64, w in -1.0..1.0f64, a in 0.5..2.0f64, ad in -0.3..0.5f64
    ) {
        let start = ConeState::new(vec![0.0, 0.0], vec![w, 0.5 * w], a, ad).unwrap();
        let base = Euclidean::new(2);
        let tr = integrate_cone(&start, &ConeProblem::new(p, 1e-3, 1000).unwrap(), &base).unwrap();
        prop_assert!(tr.relative_h_drift() < 1e-8);
    }
}
