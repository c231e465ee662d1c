//! Hamiltonian flows of the density-level models on the periodic grid.
//!
//! Small (conical) model:
//! ```text
//! H  = ½ ∫ |∇θ|² ϱ + (1/2m)(∫ θϱ)²
//! ϱ̇ = −div(ϱ∇θ) + ξϱ,    θ̇ = −½|∇θ|² − ξθ + ξ²/2
//! ```
//! Large (WFR) model:
//! ```text
//! H  = ½ ∫ (|∇θ|² + θ²) ϱ
//! ϱ̇ = −div(ϱ∇θ) + ϱθ,    θ̇ = −½|∇θ|² − θ²/2
//! ```
//! The transport term is discretized as `½ h Σ_f (Aϱ)_f (Dθ)_f²`; the
//! right-hand sides below are its exact discrete canonical equations, so the
//! mass laws and `m̈ = H` hold for the semi-discrete system.

use serde::{Deserialize, Serialize};

use super::grid::{check_positive, raw_xi, Grid1D, PdeState, RawState};
use super::stencil::{divergence, face_average, face_gradient, node_average};
use crate::error::{ensure_mass, Error, Result};
use crate::ode::rk4_step;
use crate::trace::GeodesicTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Small,
    Wfr,
}

/// Stability bound: `dt · (max|Dθ|/h + max|θ| + |ξ|) ≤ CFL_NUMBER`.
pub const CFL_NUMBER: f64 = 0.5;

/// Transport pieces shared by both models.
struct Transport {
    rho_face: Vec<f64>,
    grad: Vec<f64>,
}

impl Transport {
    fn new(grid: &Grid1D, rho: &[f64], theta: &[f64]) -> Result<Self> {
        let rho_face = face_average(rho);
        if let Some((index, &value)) = rho_face.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::PositivityLoss {
                index,
                value,
                step: None,
            });
        }
        Ok(Self {
            rho_face,
            grad: face_gradient(theta, grid.h()),
        })
    }

    /// `½ h Σ_f ρ̂_f g_f²`.
    fn kinetic(&self, grid: &Grid1D) -> f64 {
        0.5 * grid.h()
            * self
                .rho_face
                .iter()
                .zip(&self.grad)
                .map(|(r, g)| r * g * g)
                .sum::<f64>()
    }

    /// `−div(ρ̂ g)`.
    fn transport(&self, grid: &Grid1D) -> Vec<f64> {
        let flux: Vec<f64> = self
            .rho_face
            .iter()
            .zip(&self.grad)
            .map(|(r, g)| r * g)
            .collect();
        divergence(&flux, grid.h())
            .into_iter()
            .map(|d| -d)
            .collect()
    }

    /// Node values of `|∇θ|²` (adjoint average of face squares).
    fn grad_sq(&self) -> Vec<f64> {
        let sq: Vec<f64> = self.grad.iter().map(|g| g * g).collect();
        node_average(&sq)
    }
}

fn mass(grid: &Grid1D, rho: &[f64]) -> Result<f64> {
    ensure_mass(grid.integrate(rho))
}

pub(crate) fn raw_hamiltonian(grid: &Grid1D, s: &RawState, model: Model) -> Result<f64> {
    let tr = Transport::new(grid, &s.rho, &s.theta)?;
    let kinetic = tr.kinetic(grid);
    Ok(match model {
        Model::Small => {
            let m = mass(grid, &s.rho)?;
            let xi = raw_xi(grid, &s.rho, &s.theta, m);
            kinetic + 0.5 * m * xi * xi
        }
        Model::Wfr => {
            let reaction: f64 = s.rho.iter().zip(&s.theta).map(|(r, t)| r * t * t).sum();
            kinetic + 0.5 * grid.h() * reaction
        }
    })
}

pub(crate) fn raw_rhs(grid: &Grid1D, s: &RawState, model: Model) -> Result<RawState> {
    check_positive(&s.rho)?;
    if s.theta.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "potential",
            step: None,
        });
    }
    let tr = Transport::new(grid, &s.rho, &s.theta)?;
    let transport = tr.transport(grid);
    let grad_sq = tr.grad_sq();
    let (rho_dot, theta_dot) = match model {
        Model::Small => {
            let m = mass(grid, &s.rho)?;
            let xi = raw_xi(grid, &s.rho, &s.theta, m);
            let rho_dot = transport
                .iter()
                .zip(&s.rho)
                .map(|(t, r)| t + xi * r)
                .collect();
            let theta_dot = grad_sq
                .iter()
                .zip(&s.theta)
                .map(|(g2, th)| -0.5 * g2 - xi * th + 0.5 * xi * xi)
                .collect();
            (rho_dot, theta_dot)
        }
        Model::Wfr => {
            let rho_dot = transport
                .iter()
                .zip(s.rho.iter().zip(&s.theta))
                .map(|(t, (r, th))| t + r * th)
                .collect();
            let theta_dot = grad_sq
                .iter()
                .zip(&s.theta)
                .map(|(g2, th)| -0.5 * g2 - 0.5 * th * th)
                .collect();
            (rho_dot, theta_dot)
        }
    };
    Ok(RawState {
        rho: rho_dot,
        theta: theta_dot,
    })
}

/// `½∫|∇θ|²ϱ + (1/2m)(∫θϱ)²`.
pub fn hamiltonian_small(state: &PdeState) -> Result<f64> {
    raw_hamiltonian(state.grid(), &RawState::from_state(state), Model::Small)
}

/// `½∫(|∇θ|² + θ²)ϱ`.
pub fn hamiltonian_wfr(state: &PdeState) -> Result<f64> {
    raw_hamiltonian(state.grid(), &RawState::from_state(state), Model::Wfr)
}

pub fn hamiltonian(state: &PdeState, model: Model) -> Result<f64> {
    raw_hamiltonian(state.grid(), &RawState::from_state(state), model)
}

/// Time derivative `(ϱ̇, θ̇)`; returned as plain vectors since `ϱ̇` has no
/// sign.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeVelocity {
    pub rho_dot: Vec<f64>,
    pub theta_dot: Vec<f64>,
}

fn velocity(state: &PdeState, model: Model) -> Result<PdeVelocity> {
    let d = raw_rhs(state.grid(), &RawState::from_state(state), model)?;
    Ok(PdeVelocity {
        rho_dot: d.rho,
        theta_dot: d.theta,
    })
}

pub fn small_rhs(state: &PdeState) -> Result<PdeVelocity> {
    velocity(state, Model::Small)
}

pub fn wfr_rhs(state: &PdeState) -> Result<PdeVelocity> {
    velocity(state, Model::Wfr)
}

/// Largest stable step for `state` under [`CFL_NUMBER`].
pub fn stable_dt(state: &PdeState, model: Model) -> Result<f64> {
    let grid = state.grid();
    let theta = state.theta.values();
    let g_max = face_gradient(theta, grid.h())
        .iter()
        .fold(0.0f64, |a, g| a.max(g.abs()));
    let th_max = theta.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let rate = match model {
        Model::Small => {
            let m = mass(grid, state.rho.values())?;
            g_max / grid.h() + th_max + raw_xi(grid, state.rho.values(), theta, m).abs()
        }
        Model::Wfr => g_max / grid.h() + th_max,
    };
    Ok(if rate > 0.0 {
        CFL_NUMBER / rate
    } else {
        f64::INFINITY
    })
}

/// All `steps + 1` states of the RK4 flow; aborts on positivity loss.
pub fn pde_path(state: &PdeState, model: Model, dt: f64, steps: usize) -> Result<Vec<PdeState>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let limit = stable_dt(state, model)?;
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let grid = *state.grid();
    let rhs = |s: &RawState| raw_rhs(&grid, s, model);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    let mut raw = RawState::from_state(state);
    for k in 1..=steps {
        raw = rk4_step(&raw, dt, &rhs).map_err(|e| e.at_step(k))?;
        let next = raw.clone().into_state(grid).map_err(|e| e.at_step(k))?;
        out.push(next);
    }
    Ok(out)
}

/// RK4 integration recorded as a trace with columns
/// `t, m, xi, H, rho0.., theta0..`. For the WFR model `xi` is still
/// `∫θϱ / m`, which equals `ṁ/m` there as well.
pub fn integrate_pde(
    state: &PdeState,
    model: Model,
    dt: f64,
    steps: usize,
) -> Result<GeodesicTrace> {
    let path = pde_path(state, model, dt, steps)?;
    let n = state.grid().n();
    let names = (0..n)
        .map(|i| format!("rho{i}"))
        .chain((0..n).map(|i| format!("theta{i}")));
    let mut trace = GeodesicTrace::new(names);
    for (k, s) in path.iter().enumerate() {
        let m = mass(s.grid(), s.rho.values())?;
        let xi = raw_xi(s.grid(), s.rho.values(), s.theta.values(), m);
        let h = hamiltonian(s, model)?;
        trace.push(k as f64 * dt, m, xi, h, &s.flatten())?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::grid::{DensityField, PotentialField};
    use std::f64::consts::PI;

    fn state(n: usize, rho: impl Fn(f64) -> f64, theta: impl Fn(f64) -> f64) -> PdeState {
        let g = Grid1D::circle(n).unwrap();
        PdeState::new(
            DensityField::from_fn(g, rho).unwrap(),
            PotentialField::from_fn(&g, theta).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let s = state(64, |_| 1.0, |_| 0.0);
        assert_eq!(hamiltonian_small(&s).unwrap(), 0.0);
        assert_eq!(hamiltonian_wfr(&s).unwrap(), 0.0);
        let s = state(64, |_| 1.0, |_| 1.0);
        assert!((hamiltonian_small(&s).unwrap() - PI).abs() < 1e-13);
        assert!((hamiltonian_wfr(&s).unwrap() - PI).abs() < 1e-13);
        let s = state(256, |_| 1.0, f64::sin);
        assert!((hamiltonian_small(&s).unwrap() - PI / 2.0).abs() < 1e-7);
        assert!((hamiltonian_wfr(&s).unwrap() - PI).abs() < 1e-7);
    }

    #[test]
    fn rhs_examples() {
        let s = state(32, |_| 1.0, |_| 0.0);
        for d in [small_rhs(&s).unwrap(), wfr_rhs(&s).unwrap()] {
            assert!(d.rho_dot.iter().chain(&d.theta_dot).all(|v| *v == 0.0));
        }
        let s = state(32, |_| 1.0, |_| 2.0);
        let d = small_rhs(&s).unwrap();
        assert!(d.rho_dot.iter().all(|v| (v - 2.0).abs() < 1e-14));
        assert!(d.theta_dot.iter().all(|v| (v + 2.0).abs() < 1e-14));
        let c = 0.7;
        let s = state(32, |_| 1.0, |_| c);
        let d = wfr_rhs(&s).unwrap();
        assert!(d.rho_dot.iter().all(|v| (v - c).abs() < 1e-14));
        assert!(d.theta_dot.iter().all(|v| (v + c * c / 2.0).abs() < 1e-14));
    }

    #[test]
    fn step_guard_refuses_large_steps() {
        let s = state(64, |_| 1.0, |x| 3.0 * x.sin());
        let err = integrate_pde(&s, Model::Small, 0.1, 5).unwrap_err();
        assert_eq!(err.kind(), "step_too_large");
    }

    #[test]
    fn frozen_state() {
        let s = state(32, |x| 1.0 + 0.5 * x.cos(), |_| 0.0);
        let tr = integrate_pde(&s, Model::Small, 1e-2, 20).unwrap();
        assert_eq!(tr.rows()[0][1..], tr.rows()[20][1..]);
    }

    #[test]
    fn positivity_loss_reports_step() {
        // strong compression of a thin density eventually drives it negative
        let s = state(16, |x| 0.05 + 0.04 * x.cos(), |x| -4.0 * x.cos());
        let err = integrate_pde(&s, Model::Wfr, 1e-3, 20_000).unwrap_err();
        assert!(err.is_numerical(), "{err}");
        assert!(err.step().is_some());
    }
}
