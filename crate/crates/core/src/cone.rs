//! Geodesics of warped-product cones `α^{2p} g + dα²` over a pluggable base.
//!
//! For a geodesic `(q, α)` the equations are
//!
//! ```text
//! q̈ = −Γ_q(q̇, q̇) − (2p/α) α̇ q̇
//! α̈ = p α^{2p−1} g_q(q̇, q̇)
//! ```
//!
//! `p = 1` is the ordinary cone and `p = 0` the product cylinder. The cone
//! energy `α^{2p} g(q̇, q̇) + α̇²` is a first integral.

use crate::error::{ensure_mass, Error, Result};
use crate::ode::{rk4_step, OdeState};
use crate::trace::GeodesicTrace;

/// Riemannian base `(Q, g)` in coordinates.
pub trait BaseManifold {
    fn dim(&self) -> usize;

    /// `g_q(u, v)`.
    fn metric(&self, q: &[f64], u: &[f64], v: &[f64]) -> f64;

    /// The coordinate acceleration of a base geodesic through `(q, q̇)`,
    /// i.e. `−Γ_q(q̇, q̇)`. Must vanish for `q̇ = 0`.
    fn geodesic_acceleration(&self, q: &[f64], q_dot: &[f64]) -> Result<Vec<f64>>;
}

impl<B: BaseManifold + ?Sized> BaseManifold for &B {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn metric(&self, q: &[f64], u: &[f64], v: &[f64]) -> f64 {
        (**self).metric(q, u, v)
    }
    fn geodesic_acceleration(&self, q: &[f64], q_dot: &[f64]) -> Result<Vec<f64>> {
        (**self).geodesic_acceleration(q, q_dot)
    }
}

/// Unit circle in the angle coordinate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Circle;

impl BaseManifold for Circle {
    fn dim(&self) -> usize {
        1
    }
    fn metric(&self, _q: &[f64], u: &[f64], v: &[f64]) -> f64 {
        u[0] * v[0]
    }
    fn geodesic_acceleration(&self, _q: &[f64], _q_dot: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0])
    }
}

/// Flat `ℝⁿ` with metric `scale · ⟨u, v⟩`.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean {
    pub dim: usize,
    pub scale: f64,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Self { dim, scale: 1.0 }
    }
}

impl BaseManifold for Euclidean {
    fn dim(&self) -> usize {
        self.dim
    }
    fn metric(&self, _q: &[f64], u: &[f64], v: &[f64]) -> f64 {
        self.scale * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }
    fn geodesic_acceleration(&self, _q: &[f64], _q_dot: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.dim])
    }
}

/// Unit 2-sphere in polar coordinates `(θ, φ)`, metric `dθ² + sin²θ dφ²`.
/// Valid away from the poles.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sphere2;

impl BaseManifold for Sphere2 {
    fn dim(&self) -> usize {
        2
    }
    fn metric(&self, q: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let s = q[0].sin();
        u[0] * v[0] + s * s * u[1] * v[1]
    }
    fn geodesic_acceleration(&self, q: &[f64], q_dot: &[f64]) -> Result<Vec<f64>> {
        let (s, c) = q[0].sin_cos();
        if s.abs() < 1e-12 {
            return Err(Error::InvalidInput("sphere chart hit a pole".into()));
        }
        Ok(vec![
            s * c * q_dot[1] * q_dot[1],
            -2.0 * c / s * q_dot[0] * q_dot[1],
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeState {
    pub q: Vec<f64>,
    pub q_dot: Vec<f64>,
    pub alpha: f64,
    pub alpha_dot: f64,
}

impl ConeState {
    pub fn new(q: Vec<f64>, q_dot: Vec<f64>, alpha: f64, alpha_dot: f64) -> Result<Self> {
        if q.len() != q_dot.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: q_dot.len(),
            });
        }
        let s = Self {
            q,
            q_dot,
            alpha,
            alpha_dot,
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        let finite = self.alpha.is_finite()
            && self.alpha_dot.is_finite()
            && self.q.iter().chain(&self.q_dot).all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite {
                what: "cone state",
                step: None,
            });
        }
        if self.alpha <= 0.0 {
            return Err(Error::ApexCrossing {
                alpha: self.alpha,
                step: None,
            });
        }
        Ok(())
    }

    /// Flattened as `q, q̇, α, α̇`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.q.clone();
        v.extend_from_slice(&self.q_dot);
        v.push(self.alpha);
        v.push(self.alpha_dot);
        v
    }
}

impl OdeState for ConeState {
    fn add_scaled(&self, k: f64, d: &Self) -> Self {
        Self {
            q: self.q.add_scaled(k, &d.q),
            q_dot: self.q_dot.add_scaled(k, &d.q_dot),
            alpha: self.alpha + k * d.alpha,
            alpha_dot: self.alpha_dot + k * d.alpha_dot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeProblem {
    pub p: f64,
    pub dt: f64,
    pub steps: usize,
}

impl ConeProblem {
    pub fn new(p: f64, dt: f64, steps: usize) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidInput("cone exponent must be finite".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidInput("steps must be positive".into()));
        }
        Ok(Self { p, dt, steps })
    }
}

/// Time derivative `(q̇, q̈, α̇, α̈)` of a cone geodesic.
pub fn cone_rhs<B: BaseManifold>(state: &ConeState, p: f64, base: &B) -> Result<ConeState> {
    state.check()?;
    let accel = base.geodesic_acceleration(&state.q, &state.q_dot)?;
    let g = base.metric(&state.q, &state.q_dot, &state.q_dot);
    let damping = 2.0 * p * state.alpha_dot / state.alpha;
    let q_ddot: Vec<f64> = accel
        .iter()
        .zip(&state.q_dot)
        .map(|(a, v)| a - damping * v)
        .collect();
    let alpha_ddot = p * state.alpha.powf(2.0 * p - 1.0) * g;
    let d = ConeState {
        q: state.q_dot.clone(),
        q_dot: q_ddot,
        alpha: state.alpha_dot,
        alpha_dot: alpha_ddot,
    };
    if !alpha_ddot.is_finite() || d.q_dot.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "cone derivative",
            step: None,
        });
    }
    Ok(d)
}

/// `α^{2p} g(q̇, q̇) + α̇²`.
pub fn cone_energy<B: BaseManifold>(state: &ConeState, p: f64, base: &B) -> f64 {
    state.alpha.powf(2.0 * p) * base.metric(&state.q, &state.q_dot, &state.q_dot)
        + state.alpha_dot * state.alpha_dot
}

/// All `steps + 1` states of the RK4 flow.
pub fn cone_path<B: BaseManifold>(
    initial: &ConeState,
    problem: &ConeProblem,
    base: &B,
) -> Result<Vec<ConeState>> {
    if initial.q.len() != base.dim() || initial.q_dot.len() != base.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: initial.q.len(),
        });
    }
    initial.check()?;
    let rhs = |s: &ConeState| cone_rhs(s, problem.p, base);
    let mut path = Vec::with_capacity(problem.steps + 1);
    path.push(initial.clone());
    for k in 1..=problem.steps {
        let next = rk4_step(&path[k - 1], problem.dt, &rhs)
            .and_then(|s| s.check().map(|_| s))
            .map_err(|e| e.at_step(k))?;
        path.push(next);
    }
    Ok(path)
}

/// RK4 integration recorded as a trace. Diagnostic columns: `m = α²`,
/// `xi = 2α̇/α` (its logarithmic rate) and `H` = cone energy.
pub fn integrate_cone<B: BaseManifold>(
    initial: &ConeState,
    problem: &ConeProblem,
    base: &B,
) -> Result<GeodesicTrace> {
    let path = cone_path(initial, problem, base)?;
    let d = base.dim();
    let names = (0..d)
        .map(|i| format!("q{i}"))
        .chain((0..d).map(|i| format!("qdot{i}")))
        .chain(["alpha".to_string(), "alpha_dot".to_string()]);
    let mut trace = GeodesicTrace::new(names);
    for (k, s) in path.iter().enumerate() {
        trace.push(
            k as f64 * problem.dt,
            s.alpha * s.alpha,
            2.0 * s.alpha_dot / s.alpha,
            cone_energy(s, problem.p, base),
            &s.to_vec(),
        )?;
    }
    Ok(trace)
}

/// Pure-scaling geodesic of total mass: `√m` is affine in `t`.
pub fn radial_mass_geodesic(m0: f64, m1: f64, t: f64) -> Result<f64> {
    ensure_mass(m0)?;
    ensure_mass(m1)?;
    let r = (1.0 - t) * m0.sqrt() + t * m1.sqrt();
    Ok(r * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_base_velocity_is_straight() {
        let s = ConeState::new(vec![0.3], vec![0.0], 2.0, -0.7).unwrap();
        let d = cone_rhs(&s, 1.0, &Circle).unwrap();
        assert_eq!(d.q_dot, vec![0.0]);
        assert_eq!(d.alpha_dot, 0.0);
        assert_eq!(d.alpha, -0.7);
    }

    #[test]
    fn p_zero_decouples() {
        let s = ConeState::new(vec![1.0, 0.5], vec![0.2, -0.4], 3.0, 1.5).unwrap();
        let d = cone_rhs(&s, 0.0, &Sphere2).unwrap();
        let base = Sphere2.geodesic_acceleration(&s.q, &s.q_dot).unwrap();
        assert_eq!(d.q_dot, base);
        assert_eq!(d.alpha_dot, 0.0);
    }

    #[test]
    fn apex_and_nan_are_rejected() {
        let s = ConeState {
            q: vec![0.0],
            q_dot: vec![1.0],
            alpha: 0.0,
            alpha_dot: 0.0,
        };
        assert!(matches!(
            cone_rhs(&s, 1.0, &Circle),
            Err(Error::ApexCrossing { .. })
        ));
        let s = ConeState {
            alpha: f64::NAN,
            ..s
        };
        assert!(matches!(
            cone_rhs(&s, 1.0, &Circle),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn apex_crossing_reports_step() {
        // aimed straight at the apex: α(t) = 1 − 1.05 t
        let s = ConeState::new(vec![0.0], vec![0.0], 1.0, -1.05).unwrap();
        let problem = ConeProblem::new(1.0, 0.1, 20).unwrap();
        let err = integrate_cone(&s, &problem, &Circle).unwrap_err();
        assert_eq!(err.kind(), "apex_crossing");
        assert_eq!(err.step(), Some(10));
    }

    #[test]
    fn stationary_trace_is_constant() {
        let s = ConeState::new(vec![0.4], vec![0.0], 1.3, 0.0).unwrap();
        let problem = ConeProblem::new(1.0, 1e-2, 50).unwrap();
        let trace = integrate_cone(&s, &problem, &Circle).unwrap();
        assert_eq!(trace.len(), 51);
        for row in trace.rows() {
            assert_eq!(&row[1..], &trace.rows()[0][1..]);
        }
    }

    #[test]
    fn radial_mass_examples() {
        assert!((radial_mass_geodesic(3.0, 3.0, 0.37).unwrap() - 3.0).abs() < 1e-14);
        assert!((radial_mass_geodesic(1.0, 4.0, 0.5).unwrap() - 2.25).abs() < 1e-15);
        for &t in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            let a = radial_mass_geodesic(4.0, 1.0, t).unwrap();
            let b = radial_mass_geodesic(1.0, 4.0, 1.0 - t).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        assert!(radial_mass_geodesic(0.0, 1.0, 0.5).is_err());
        assert!(radial_mass_geodesic(1.0, -2.0, 0.5).is_err());
    }

    #[test]
    fn bad_problem_is_rejected() {
        assert!(ConeProblem::new(1.0, 0.0, 10).is_err());
        assert!(ConeProblem::new(1.0, 0.1, 0).is_err());
        assert!(ConeProblem::new(f64::NAN, 0.1, 1).is_err());
    }
}
