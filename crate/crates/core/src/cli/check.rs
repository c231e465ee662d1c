//! One-shot invariant suite behind the `check` command. Each property is
//! exercised on seeded random data and reported as pass/fail with a short
//! quantitative detail.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::commands::random_perturbations;
use crate::cone::{cone_path, Circle, ConeProblem, ConeState};
use crate::density::{
    bb_action, gdiv_metric_eval, hamiltonian_small, integrate_pde, pde_path, small_metric_eval,
    small_rhs, wfr_rhs, xi_of, BbPath, DensityField, Grid1D, Model, PdeState, PotentialField,
};
use crate::error::Result;
use crate::gaussian::{
    hamiltonian, integrate_geodesic, lyapunov_solve, mccann_geodesic, shoot_bvp,
    submersion_consistency, GaussianCotangentState, SpdMatrix, SymMatrix,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SpdMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    SpdMatrix::new(&a * a.transpose() + DMatrix::identity(n, n) * 0.5).expect("shifted Gram matrix")
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
    SymMatrix::new((&a + a.transpose()) * 0.5).expect("symmetrized")
}

fn outcome(name: &'static str, worst: Result<f64>, bound: f64) -> CheckResult {
    match worst {
        Ok(w) => CheckResult {
            name,
            passed: w <= bound,
            detail: format!("worst {w:e} (bound {bound:e})"),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn lyapunov(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(1..=4);
        let v = random_spd(rng, n);
        let x = random_sym(rng, n, 1.0);
        let s = lyapunov_solve(&v, &x)?;
        let (s, vm, xm) = (s.matrix(), v.matrix(), x.matrix());
        let res = (s * vm + vm * s - xm).norm() / xm.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(res);
    }
    Ok(worst)
}

fn gaussian_state(rng: &mut ChaCha8Rng) -> GaussianCotangentState {
    let n = rng.gen_range(1..=3);
    GaussianCotangentState::new(
        random_spd(rng, n),
        rng.gen_range(0.5..2.0),
        random_sym(rng, n, 0.3),
        rng.gen_range(-0.5..1.0),
    )
    .expect("valid random state")
}

/// `(max H drift, max |a − H/2| of the mass fit)`.
fn gaussian_flow(rng: &mut ChaCha8Rng, cases: usize) -> Result<(f64, f64)> {
    let (mut drift, mut accel) = (0.0f64, 0.0f64);
    for _ in 0..cases {
        let s = gaussian_state(rng);
        let tr = integrate_geodesic(&s, 1e-3, 1000)?;
        drift = drift.max(tr.relative_h_drift());
        let fit = tr.mass_fit().expect("enough rows");
        accel = accel.max((fit.a - tr.hamiltonians()[0] / 2.0).abs());
    }
    Ok((drift, accel))
}

fn lower_bound(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    // returns the worst violation; equality cases must be exact
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let s = gaussian_state(rng);
        let h = hamiltonian(&s)?;
        worst = worst.max(0.5 * s.m * s.xi * s.xi - h);
        let flat = GaussianCotangentState::new(s.v.clone(), s.m, SymMatrix::zeros(s.dim()), s.xi)?;
        worst = worst.max((hamiltonian(&flat)? - 0.5 * s.m * s.xi * s.xi).abs());
    }
    Ok(worst)
}

fn mccann(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    let mid = mccann_geodesic(&SpdMatrix::scalar(1.0)?, &SpdMatrix::scalar(4.0)?, 0.5)?;
    worst = worst.max((mid.matrix()[(0, 0)] - 2.25).abs());
    for _ in 0..cases {
        let n = rng.gen_range(1..=4);
        let (u, v) = (random_spd(rng, n), random_spd(rng, n));
        let scale = u.matrix().norm().max(v.matrix().norm());
        worst = worst.max((mccann_geodesic(&u, &v, 0.0)?.matrix() - v.matrix()).norm() / scale);
        worst = worst.max((mccann_geodesic(&u, &v, 1.0)?.matrix() - u.matrix()).norm() / scale);
        let t = rng.gen_range(0.0..1.0);
        let fwd = mccann_geodesic(&u, &v, t)?;
        let back = mccann_geodesic(&v, &u, 1.0 - t)?;
        worst = worst.max((fwd.matrix() - back.matrix()).norm() / scale);
    }
    Ok(worst)
}

fn flat_cone() -> Result<f64> {
    let (q0, w0, a0, ad0) = (0.3, 0.8, 1.0, 0.2);
    let start = ConeState::new(vec![q0], vec![w0], a0, ad0)?;
    let path = cone_path(&start, &ConeProblem::new(1.0, 1e-3, 1000)?, &Circle)?;
    let (c, s) = (f64::cos(q0), f64::sin(q0));
    let (px, py) = (a0 * c, a0 * s);
    let (vx, vy) = (ad0 * c - a0 * w0 * s, ad0 * s + a0 * w0 * c);
    let mut worst = 0.0f64;
    for (k, st) in path.iter().enumerate() {
        let t = k as f64 * 1e-3;
        let (x, y) = (st.alpha * st.q[0].cos(), st.alpha * st.q[0].sin());
        worst = worst.max((x - px - t * vx).hypot(y - py - t * vy));
    }
    Ok(worst)
}

fn shooting() -> Result<f64> {
    let one = SpdMatrix::identity(1);
    let sol = shoot_bvp(&one, 1.0, &one, 4.0, 1e-10)?;
    Ok(sol.p0.matrix().amax().max((sol.xi0 - 2.0).abs()))
}

fn submersion(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(1..=4);
        let a =
            DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)) + DMatrix::identity(n, n) * 2.0;
        let sigma = random_spd(rng, n);
        let s = random_sym(rng, n, 1.0);
        let (g, b) = submersion_consistency(
            &a,
            rng.gen_range(0.5..2.0),
            &s,
            rng.gen_range(-1.0..1.0),
            &sigma,
        )?;
        worst = worst.max((g - b).abs() / g.abs().max(1.0));
    }
    Ok(worst)
}

fn random_pde(rng: &mut ChaCha8Rng, n: usize) -> Result<PdeState> {
    let g = Grid1D::circle(n)?;
    let (a, k) = (rng.gen_range(0.0..0.5), rng.gen_range(1..=3) as f64);
    let (b, c, e) = (
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
    );
    PdeState::new(
        DensityField::from_fn(g, |x| 1.0 + a * (k * x).cos())?,
        PotentialField::from_fn(&g, |x| b * x.sin() + c * (2.0 * x).cos() + e)?,
    )
}

fn mass_law(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let s = random_pde(rng, 32)?;
        let g = *s.grid();
        let m = g.integrate(s.rho.values());
        let xi = xi_of(&s)?;
        worst = worst.max((g.integrate(&small_rhs(&s)?.rho_dot) - xi * m).abs());
        let reaction = g.integrate(
            &s.rho
                .values()
                .iter()
                .zip(s.theta.values())
                .map(|(r, t)| r * t)
                .collect::<Vec<_>>(),
        );
        worst = worst.max((g.integrate(&wfr_rhs(&s)?.rho_dot) - reaction).abs());
    }
    Ok(worst)
}

fn pde_energy(rng: &mut ChaCha8Rng) -> Result<f64> {
    let s = random_pde(rng, 64)?;
    let a = integrate_pde(&s, Model::Small, 1e-3, 200)?.relative_h_drift();
    let b = integrate_pde(&s, Model::Wfr, 1e-3, 200)?.relative_h_drift();
    Ok(a.max(b))
}

fn elliptic() -> Result<f64> {
    let g = Grid1D::circle(128)?;
    let rho = DensityField::from_fn(g, |_| 1.0)?;
    let sine = g.sample(f64::sin);
    let c = 0.7;
    let flat = vec![c; g.n()];
    let tau = std::f64::consts::TAU;
    let pi = std::f64::consts::PI;
    Ok([
        (small_metric_eval(&rho, &sine)? - pi).abs(),
        (gdiv_metric_eval(&rho, &sine)? - tau).abs(),
        (small_metric_eval(&rho, &flat)? - tau * c * c).abs(),
        (gdiv_metric_eval(&rho, &flat)? - tau * c * c).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

/// `(|action − ∫2H dt|, worst (geodesic − perturbed) action)`.
fn action(rng: &mut ChaCha8Rng, seed: u64) -> Result<(f64, f64)> {
    let s = random_pde(rng, 32)?;
    let (dt, steps) = (1e-3, 200);
    let path = pde_path(&s, Model::Small, dt, steps)?;
    let bb = BbPath::from_states(&path, dt)?;
    let a = bb_action(&bb)?;
    let energy = 2.0 * hamiltonian_small(&s)? * dt * steps as f64;
    let mut worst = f64::NEG_INFINITY;
    for p in random_perturbations(&bb, 10, 0.05, seed)? {
        worst = worst.max(a - bb_action(&p)?);
    }
    Ok(((a - energy).abs(), worst))
}

/// Runs every property with `cases` random instances where applicable.
pub fn run_checks(cases: usize, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![outcome(
        "lyapunov_residual",
        lyapunov(&mut rng, cases),
        1e-12,
    )];
    match gaussian_flow(&mut rng, cases) {
        Ok((drift, accel)) => {
            out.push(outcome("gaussian_energy_conservation", Ok(drift), 1e-8));
            out.push(outcome("gaussian_constant_acceleration", Ok(accel), 1e-6));
        }
        Err(e) => {
            out.push(outcome("gaussian_energy_conservation", Err(e.clone()), 0.0));
            out.push(outcome("gaussian_constant_acceleration", Err(e), 0.0));
        }
    }
    out.push(outcome(
        "energy_lower_bound",
        lower_bound(&mut rng, 50 * cases),
        1e-12,
    ));
    out.push(outcome("mccann_oracle", mccann(&mut rng, cases), 1e-12));
    out.push(outcome("flat_cone_over_circle", flat_cone(), 1e-6));
    out.push(outcome("shooting_scaling_case", shooting(), 1e-8));
    out.push(outcome(
        "submersion_matrix_level",
        submersion(&mut rng, cases),
        1e-10,
    ));
    out.push(outcome("pde_mass_law", mass_law(&mut rng, cases), 1e-12));
    out.push(outcome(
        "pde_energy_conservation",
        pde_energy(&mut rng),
        1e-6,
    ));
    out.push(outcome("elliptic_closed_forms", elliptic(), 1e-6));
    match action(&mut rng, seed) {
        Ok((err, gap)) => {
            out.push(outcome("action_matches_energy", Ok(err), 1e-4));
            out.push(CheckResult {
                name: "action_minimal_under_perturbation",
                passed: gap <= 0.0,
                detail: format!("max(geodesic − perturbed) {gap:e}"),
            });
        }
        Err(e) => {
            out.push(outcome("action_matches_energy", Err(e.clone()), 0.0));
            out.push(outcome("action_minimal_under_perturbation", Err(e), 0.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_a_small_budget() {
        let results = run_checks(2, 7);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert_eq!(results.len(), 13);
    }
}
