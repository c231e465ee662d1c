//! Validation of each run into a ready job, and its execution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::check::run_checks;
use super::config::*;
use super::defaults as d;
use super::summary::Convergence;
use crate::cone::{integrate_cone, Circle, ConeProblem, ConeState, Euclidean, Sphere2};
use crate::density::{
    bb_action_with_tol, decompose, gdiv_metric_eval, hamiltonian_small, integrate_pde, pde_path,
    small_metric_eval, BbPath, DensityField, Grid1D, Model, PdeState,
};
use crate::error::{Error, Result};
use crate::gaussian::{
    integrate_geodesic, shoot_bvp_with, BuresWasserstein, GaussianCotangentState, ShootingOptions,
    SpdMatrix, SymMatrix,
};
use crate::trace::GeodesicTrace;

/// A validated run.
#[derive(Debug, Clone)]
pub enum Job {
    GaussGeodesic {
        state: GaussianCotangentState,
        dt: f64,
        steps: usize,
    },
    GaussConnect {
        sigma0: SpdMatrix,
        m0: f64,
        sigma1: SpdMatrix,
        m1: f64,
        tol: f64,
        options: ShootingOptions,
    },
    PdeEvolve {
        state: PdeState,
        model: Model,
        dt: f64,
        steps: usize,
    },
    PdeMetric {
        rho: DensityField,
        rho_dot: Vec<f64>,
        metric: MetricKind,
    },
    FrGeodesic {
        rho0: DensityField,
        rho1: DensityField,
        samples: usize,
    },
    ConeGeodesic {
        base: BaseKind,
        state: ConeState,
        problem: ConeProblem,
    },
    BbAction {
        state: PdeState,
        dt: f64,
        steps: usize,
        perturbations: usize,
        amplitude: f64,
        tol: f64,
        seed: Option<u64>,
    },
    Check {
        cases: usize,
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Output {
    pub trace: Option<GeodesicTrace>,
    pub convergence: Option<Convergence>,
    pub result: Value,
    /// Lines for standard output.
    pub lines: Vec<String>,
    /// False when a `check` property failed.
    pub passed: bool,
}

impl Output {
    fn new(result: Value) -> Self {
        Self {
            result,
            passed: true,
            ..Self::default()
        }
    }
}

fn pde_state(
    n: Option<usize>,
    length: Option<f64>,
    rho: &FieldSpec,
    theta: &FieldSpec,
) -> std::result::Result<PdeState, SchemaError> {
    let grid = grid_for(n, length, &[rho, theta])?;
    let rho = density(&grid, rho, "rho")?;
    let theta = potential(&grid, theta, "theta")?;
    PdeState::new(rho, theta).map_err(|e| SchemaError {
        message: e.to_string(),
        run: None,
    })
}

fn base_dim(base: BaseKind, len: usize) -> std::result::Result<usize, SchemaError> {
    let fail = |msg: String| SchemaError {
        message: msg,
        run: None,
    };
    match base {
        BaseKind::Circle if len != 1 => {
            Err(fail(format!("circle base needs 1 coordinate, got {len}")))
        }
        BaseKind::Sphere2 if len != 2 => {
            Err(fail(format!("sphere2 base needs 2 coordinates, got {len}")))
        }
        BaseKind::Bures | BaseKind::GaussianCone => {
            let n = (len as f64).sqrt().round() as usize;
            if n == 0 || n * n != len {
                Err(fail(format!("Bures base needs n² coordinates, got {len}")))
            } else {
                Ok(n)
            }
        }
        _ if len == 0 => Err(fail("base needs at least one coordinate".into())),
        _ => Ok(len),
    }
}

/// Validates a run; nothing is computed beyond input checks.
pub fn prepare(cfg: &RunConfig) -> std::result::Result<Job, SchemaError> {
    let lib = |e: Error| SchemaError {
        message: e.to_string(),
        run: None,
    };
    Ok(match cfg {
        RunConfig::GaussGeodesic(c) => {
            let v = spd(&c.sigma, "sigma")?;
            let n = v.dim();
            let p = match &c.p {
                Some(p) => sym(p, n, "p")?,
                None => SymMatrix::zeros(n),
            };
            Job::GaussGeodesic {
                state: GaussianCotangentState::new(v, positive(c.m, "m")?, p, c.xi).map_err(lib)?,
                dt: positive(c.dt.unwrap_or(d::TIME_STEP), "dt")?,
                steps: count(c.steps.unwrap_or(d::STEPS), "steps")?,
            }
        }
        RunConfig::GaussConnect(c) => {
            let sigma0 = spd(&c.sigma0, "sigma0")?;
            let sigma1 = spd(&c.sigma1, "sigma1")?;
            if sigma0.dim() != sigma1.dim() {
                return Err(lib(Error::DimensionMismatch {
                    expected: sigma0.dim(),
                    got: sigma1.dim(),
                }));
            }
            Job::GaussConnect {
                sigma0,
                m0: positive(c.m0, "m0")?,
                sigma1,
                m1: positive(c.m1, "m1")?,
                tol: positive(c.tol.unwrap_or(d::TOLERANCE), "tol")?,
                options: ShootingOptions {
                    steps: count(c.steps.unwrap_or(d::STEPS), "steps")?,
                    max_iterations: c.max_iterations.unwrap_or(d::MAX_ITERATIONS),
                    ..ShootingOptions::default()
                },
            }
        }
        RunConfig::PdeEvolve(c) => Job::PdeEvolve {
            state: pde_state(c.n, c.length, &c.rho, &c.theta)?,
            model: c.model,
            dt: positive(c.dt.unwrap_or(d::TIME_STEP), "dt")?,
            steps: count(c.steps.unwrap_or(d::STEPS), "steps")?,
        },
        RunConfig::PdeMetric(c) => {
            let grid = grid_for(c.n, c.length, &[&c.rho, &c.rho_dot])?;
            let rho_dot = c.rho_dot.sample(&grid)?;
            if rho_dot.iter().any(|v| !v.is_finite()) {
                return Err(lib(Error::NonFinite {
                    what: "rho_dot",
                    step: None,
                }));
            }
            Job::PdeMetric {
                rho: density(&grid, &c.rho, "rho")?,
                rho_dot,
                metric: c.metric,
            }
        }
        RunConfig::FrGeodesic(c) => {
            let grid = grid_for(c.n, c.length, &[&c.rho0, &c.rho1])?;
            Job::FrGeodesic {
                rho0: density(&grid, &c.rho0, "rho0")?,
                rho1: density(&grid, &c.rho1, "rho1")?,
                samples: count(c.samples.unwrap_or(d::SAMPLES), "samples")?,
            }
        }
        RunConfig::ConeGeodesic(c) => {
            base_dim(c.base, c.q.len())?;
            if c.q_dot.len() != c.q.len() {
                return Err(lib(Error::DimensionMismatch {
                    expected: c.q.len(),
                    got: c.q_dot.len(),
                }));
            }
            Job::ConeGeodesic {
                base: c.base,
                state: ConeState::new(c.q.clone(), c.q_dot.clone(), c.alpha, c.alpha_dot)
                    .map_err(lib)?,
                problem: ConeProblem::new(
                    c.p.unwrap_or(d::CONE_EXPONENT),
                    positive(c.dt.unwrap_or(d::TIME_STEP), "dt")?,
                    count(c.steps.unwrap_or(d::STEPS), "steps")?,
                )
                .map_err(lib)?,
            }
        }
        RunConfig::BbAction(c) => {
            let amplitude = c.amplitude.unwrap_or(d::PERTURBATION_AMPLITUDE);
            if !(amplitude > 0.0 && amplitude < 1.0) {
                return Err(lib(Error::InvalidInput(format!(
                    "amplitude must lie in (0, 1), got {amplitude}"
                ))));
            }
            Job::BbAction {
                state: pde_state(c.n, c.length, &c.rho, &c.theta)?,
                dt: positive(c.dt.unwrap_or(d::TIME_STEP), "dt")?,
                steps: count(c.steps.unwrap_or(d::STEPS), "steps")?,
                perturbations: c.perturbations.unwrap_or(d::PERTURBATIONS),
                amplitude,
                tol: positive(
                    c.continuity_tol.unwrap_or(d::CONTINUITY_TOL),
                    "continuity_tol",
                )?,
                seed: c.seed,
            }
        }
        RunConfig::Check(c) => Job::Check {
            cases: count(c.cases.unwrap_or(d::CHECK_CASES), "cases")?,
            seed: c.seed,
        },
    })
}

/// Runs a prepared job. `seed` (from `--seed`) overrides seeds in the job.
pub fn execute(job: &Job, seed: Option<u64>) -> Result<Output> {
    match job {
        Job::GaussGeodesic { state, dt, steps } => {
            let trace = integrate_geodesic(state, *dt, *steps)?;
            let mut out = Output::new(json!({ "dim": state.dim() }));
            out.lines.push(format!("integrated {} steps", steps));
            out.trace = Some(trace);
            Ok(out)
        }
        Job::GaussConnect {
            sigma0,
            m0,
            sigma1,
            m1,
            tol,
            options,
        } => gauss_connect(sigma0, *m0, sigma1, *m1, *tol, options),
        Job::PdeEvolve {
            state,
            model,
            dt,
            steps,
        } => {
            let trace = integrate_pde(state, *model, *dt, *steps)?;
            let mut out = Output::new(json!({ "n": state.grid().n(), "model": model }));
            out.lines.push(format!("integrated {} steps", steps));
            out.trace = Some(trace);
            Ok(out)
        }
        Job::PdeMetric {
            rho,
            rho_dot,
            metric,
        } => {
            let parts = decompose(rho, rho_dot)?;
            let value = match metric {
                MetricKind::Small => small_metric_eval(rho, rho_dot)?,
                MetricKind::Gdiv => gdiv_metric_eval(rho, rho_dot)?,
            };
            let mut out = Output::new(json!({
                "metric": match metric { MetricKind::Small => "small", MetricKind::Gdiv => "gdiv" },
                "value": value,
                "xi": parts.xi,
                "mass": parts.mass,
                "transport": parts.transport,
            }));
            out.lines.push(format!("metric value {value:?}"));
            Ok(out)
        }
        Job::FrGeodesic {
            rho0,
            rho1,
            samples,
        } => fr_geodesic(rho0, rho1, *samples),
        Job::ConeGeodesic {
            base,
            state,
            problem,
        } => {
            let trace = match base {
                BaseKind::Circle => integrate_cone(state, problem, &Circle)?,
                BaseKind::Euclidean => {
                    integrate_cone(state, problem, &Euclidean::new(state.q.len()))?
                }
                BaseKind::Sphere2 => integrate_cone(state, problem, &Sphere2)?,
                BaseKind::Bures => integrate_cone(state, problem, &bures(state, 1.0))?,
                BaseKind::GaussianCone => integrate_cone(state, problem, &bures(state, 0.25))?,
            };
            let mut out = Output::new(json!({ "p": problem.p, "dim": state.q.len() }));
            out.lines
                .push(format!("integrated {} steps", problem.steps));
            out.trace = Some(trace);
            Ok(out)
        }
        Job::BbAction {
            state,
            dt,
            steps,
            perturbations,
            amplitude,
            tol,
            seed: job_seed,
        } => bb(
            state,
            *dt,
            *steps,
            *perturbations,
            *amplitude,
            *tol,
            seed.or(*job_seed).unwrap_or(d::SEED),
        ),
        Job::Check {
            cases,
            seed: job_seed,
        } => {
            let seed = seed.or(*job_seed).unwrap_or(d::SEED);
            let results = run_checks(*cases, seed);
            let mut out = Output::new(json!({
                "seed": seed,
                "cases": cases,
                "checks": results,
            }));
            for r in &results {
                out.lines.push(format!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                ));
            }
            out.passed = results.iter().all(|r| r.passed);
            Ok(out)
        }
    }
}

fn bures(state: &ConeState, scale: f64) -> BuresWasserstein {
    let n = (state.q.len() as f64).sqrt().round() as usize;
    BuresWasserstein { n, scale }
}

fn gauss_connect(
    sigma0: &SpdMatrix,
    m0: f64,
    sigma1: &SpdMatrix,
    m1: f64,
    tol: f64,
    options: &ShootingOptions,
) -> Result<Output> {
    let sol = shoot_bvp_with(sigma0, m0, sigma1, m1, tol, options)?;
    let initial = GaussianCotangentState::new(sigma0.clone(), m0, sol.p0.clone(), sol.xi0)?;
    let dt = 1.0 / options.steps as f64;
    let trace = integrate_geodesic(&initial, dt, options.steps)?;
    let n = sigma0.dim();
    let last = trace.last_state().expect("trace has rows");
    let end_sigma = nalgebra::DMatrix::from_row_slice(n, n, &last[..n * n]);
    let end_mass = *trace.masses().last().expect("trace has rows");
    let endpoint_error = (end_sigma - sigma1.matrix()).norm() + (end_mass - m1).abs();
    let masses = trace.masses();
    let min_mass = masses.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = Output::new(json!({
        "p0": sol.p0.to_row_major(),
        "xi0": sol.xi0,
        "endpoint_error": endpoint_error,
        "min_mass": min_mass,
    }));
    out.convergence = Some(Convergence {
        converged: true,
        iterations: sol.iterations,
        residual: sol.residual,
    });
    out.lines.push(format!(
        "converged in {} iterations, residual {:e}, xi0 = {:?}",
        sol.iterations, sol.residual, sol.xi0
    ));
    out.trace = Some(trace);
    Ok(out)
}

fn fr_geodesic(rho0: &DensityField, rho1: &DensityField, samples: usize) -> Result<Output> {
    let grid = *rho0.grid();
    let u0: Vec<f64> = rho0.values().iter().map(|v| v.sqrt()).collect();
    let du: Vec<f64> = rho1
        .values()
        .iter()
        .zip(&u0)
        .map(|(v, a)| v.sqrt() - a)
        .collect();
    // H = ½ ∫ ϱ̇²/ϱ = 2 ∫ u̇², constant along the straight line u(t)
    let energy = 2.0 * grid.integrate(&du.iter().map(|x| x * x).collect::<Vec<_>>());
    let mut trace = GeodesicTrace::new((0..grid.n()).map(|i| format!("rho{i}")));
    for k in 0..=samples {
        let t = k as f64 / samples as f64;
        let rho = crate::density::fisher_rao_cone_geodesic(rho0, rho1, t)?;
        let m = grid.integrate(rho.values());
        let u: Vec<f64> = u0.iter().zip(&du).map(|(a, b)| a + t * b).collect();
        let m_dot =
            2.0 * grid.integrate(&u.iter().zip(&du).map(|(a, b)| a * b).collect::<Vec<_>>());
        trace.push(t, m, m_dot / m, energy, rho.values())?;
    }
    let mut out = Output::new(json!({ "n": grid.n(), "energy": energy }));
    out.lines.push(format!("sampled {} points", samples + 1));
    out.trace = Some(trace);
    Ok(out)
}

fn random_profile(rng: &mut ChaCha8Rng, grid: &Grid1D) -> Vec<f64> {
    let coeffs: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let w = std::f64::consts::TAU / grid.length();
    let raw = grid.sample(|x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let kx = (k + 1) as f64 * w * x;
                a * kx.cos() + b * kx.sin()
            })
            .sum()
    });
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let centred: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let peak = centred.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    centred
        .iter()
        .map(|v| v / peak.max(f64::MIN_POSITIVE))
        .collect()
}

/// Random admissible perturbations of `path`, each scaled so the density
/// stays above `(1 − amplitude)` of its minimum.
pub fn random_perturbations(
    path: &BbPath,
    count: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Vec<BbPath>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor = path
        .slices()
        .iter()
        .flat_map(|s| s.rho_bar.iter())
        .fold(f64::INFINITY, |a, &v| a.min(v));
    (0..count)
        .map(|_| {
            let phi: Vec<f64> = random_profile(&mut rng, path.grid())
                .iter()
                .map(|v| v * amplitude * floor)
                .collect();
            let eps_r = amplitude * rng.gen_range(-1.0..1.0);
            let mode = rng.gen_range(1..=3);
            path.perturbed(&phi, 1.0, eps_r, mode)
        })
        .collect()
}

fn bb(
    state: &PdeState,
    dt: f64,
    steps: usize,
    perturbations: usize,
    amplitude: f64,
    tol: f64,
    seed: u64,
) -> Result<Output> {
    let path = pde_path(state, Model::Small, dt, steps)?;
    let bb_path = BbPath::from_states(&path, dt)?;
    let action = bb_action_with_tol(&bb_path, tol)?;
    // the metric equals 2H along the horizontal flow
    let energies = path
        .iter()
        .map(|s| hamiltonian_small(s).map(|h| 2.0 * h))
        .collect::<Result<Vec<_>>>()?;
    let energy_integral =
        dt * (energies.iter().sum::<f64>() - 0.5 * (energies[0] + energies[steps]));
    let others = random_perturbations(&bb_path, perturbations, amplitude, seed)?
        .iter()
        .map(|p| bb_action_with_tol(p, tol))
        .collect::<Result<Vec<_>>>()?;
    let minimal = others.iter().all(|a| *a >= action);
    let integrand = bb_path.integrand();
    let mut trace = GeodesicTrace::new(["action_density"]);
    for ((k, s), f) in path.iter().enumerate().zip(&integrand) {
        let grid = s.grid();
        let m = grid.integrate(s.rho.values());
        let xi = crate::density::xi_of(s)?;
        trace.push(k as f64 * dt, m, xi, energies[k] / 2.0, &[*f])?;
    }
    let mut out = Output::new(json!({
        "action": action,
        "energy_integral": energy_integral,
        "action_error": (action - energy_integral).abs(),
        "continuity_residual": bb_path.continuity_residual().0,
        "seed": seed,
        "perturbed_actions": others,
        "geodesic_is_minimal": minimal,
    }));
    out.lines.push(format!(
        "action {action:?}, energy integral {energy_integral:?}, minimal among {} perturbations: {minimal}",
        others.len()
    ));
    out.trace = Some(trace);
    Ok(out)
}
