//! Dynamic (Benamou–Brenier style) action of a path in the variables
//! `ρ̄ = ϱ/m` (unit mass), face flux `w = ρ̄∇θ` and radius `r = √m`:
//!
//! ```text
//! A = ∫ r² Σ_f h w_f² / (Aρ̄)_f + 4ṙ²  dt,     ∂ₜρ̄ + div w = 0
//! ```
//!
//! The functional is convex in `(ρ̄, w, r)`; geodesics minimize it among
//! paths with the same end slices that satisfy the continuity constraint.

use super::elliptic::flux_for_divergence;
use super::grid::{check_positive, Grid1D, PdeState};
use super::stencil::{divergence, face_average, face_gradient};
use crate::error::{ensure_mass, Error, Result};

/// Default bound on `max |∂ₜρ̄ + div w|`.
pub const CONTINUITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct BbSlice {
    /// Unit-mass density at the nodes.
    pub rho_bar: Vec<f64>,
    /// Flux on the faces.
    pub flux: Vec<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbPath {
    grid: Grid1D,
    times: Vec<f64>,
    slices: Vec<BbSlice>,
}

impl BbPath {
    pub fn new(grid: Grid1D, times: Vec<f64>, slices: Vec<BbSlice>) -> Result<Self> {
        if slices.len() < 2 || times.len() != slices.len() {
            return Err(Error::InvalidInput(format!(
                "path needs at least two slices with matching times (got {} slices, {} times)",
                slices.len(),
                times.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput(
                "times must be finite and increasing".into(),
            ));
        }
        for (k, s) in slices.iter().enumerate() {
            grid.check_len(s.rho_bar.len())?;
            grid.check_len(s.flux.len())?;
            check_positive(&s.rho_bar).map_err(|e| e.at_step(k))?;
            if let Some((index, &value)) = face_average(&s.rho_bar)
                .iter()
                .enumerate()
                .find(|(_, v)| !(**v > 0.0))
            {
                return Err(Error::PositivityLoss {
                    index,
                    value,
                    step: Some(k),
                });
            }
            if s.flux.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "flux",
                    step: Some(k),
                });
            }
            if !(s.r > 0.0 && s.r.is_finite()) {
                return Err(Error::ApexCrossing {
                    alpha: s.r,
                    step: Some(k),
                });
            }
        }
        Ok(Self {
            grid,
            times,
            slices,
        })
    }

    /// Path of states sampled at `t_k = k·dt`, with `w = A(ρ̄)·Dθ`.
    pub fn from_states(states: &[PdeState], dt: f64) -> Result<Self> {
        let grid = *states
            .first()
            .ok_or_else(|| Error::InvalidInput("empty path".into()))?
            .grid();
        let mut slices = Vec::with_capacity(states.len());
        for s in states {
            if *s.grid() != grid {
                return Err(Error::InvalidInput("states live on different grids".into()));
            }
            let m = ensure_mass(grid.integrate(s.rho.values()))?;
            let rho_bar: Vec<f64> = s.rho.values().iter().map(|r| r / m).collect();
            let flux = face_average(&rho_bar)
                .iter()
                .zip(face_gradient(s.theta.values(), grid.h()))
                .map(|(a, g)| a * g)
                .collect();
            slices.push(BbSlice {
                rho_bar,
                flux,
                r: m.sqrt(),
            });
        }
        let times = (0..states.len()).map(|k| k as f64 * dt).collect();
        Self::new(grid, times, slices)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[BbSlice] {
        &self.slices
    }

    fn derivative(&self, k: usize, f: impl Fn(usize) -> f64) -> f64 {
        let n = self.times.len();
        if n == 2 {
            return (f(1) - f(0)) / (self.times[1] - self.times[0]);
        }
        let (a, b, c) = if k == 0 {
            (0, 1, 2)
        } else if k == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (k - 1, k, k + 1)
        };
        three_point_derivative(
            [self.times[a], self.times[b], self.times[c]],
            [f(a), f(b), f(c)],
            self.times[k],
        )
    }

    /// `(max_i |∂ₜρ̄ + div w|, slice)` over all slices.
    pub fn continuity_residual(&self) -> (f64, usize) {
        let h = self.grid.h();
        let mut worst = (0.0, 0);
        for (k, s) in self.slices.iter().enumerate() {
            let div = divergence(&s.flux, h);
            for (i, d) in div.iter().enumerate() {
                let rate = self.derivative(k, |j| self.slices[j].rho_bar[i]);
                let res = (rate + d).abs();
                if res > worst.0 {
                    worst = (res, k);
                }
            }
        }
        worst
    }

    /// Integrand `r² h Σ w²/Aρ̄ + 4ṙ²` at each slice.
    pub fn integrand(&self) -> Vec<f64> {
        let h = self.grid.h();
        (0..self.slices.len())
            .map(|k| {
                let s = &self.slices[k];
                let kinetic: f64 = s
                    .flux
                    .iter()
                    .zip(face_average(&s.rho_bar))
                    .map(|(w, a)| w * w / a)
                    .sum();
                let r_dot = self.derivative(k, |j| self.slices[j].r);
                s.r * s.r * h * kinetic + 4.0 * r_dot * r_dot
            })
            .collect()
    }

    /// Admissible perturbation with fixed end slices:
    /// `ρ̄ += ε s(t) φ`, `w −= ε ṡ(t) Ψ` with `div Ψ = φ`, `r *= 1 + ε_r s(t)`,
    /// where `s(t) = sin(kπ τ)` and `τ` is normalized time. `ṡ` is the
    /// path's own discrete time derivative, so the perturbation adds nothing
    /// to the continuity residual. `φ` is re-centred to zero mean.
    pub fn perturbed(&self, phi: &[f64], eps: f64, eps_r: f64, mode: u32) -> Result<Self> {
        self.grid.check_len(phi.len())?;
        let mean = phi.iter().sum::<f64>() / phi.len() as f64;
        let phi: Vec<f64> = phi.iter().map(|p| p - mean).collect();
        let psi = flux_for_divergence(&self.grid, &phi)?;
        let t0 = self.times[0];
        let span = self.times[self.times.len() - 1] - t0;
        let w = mode as f64 * std::f64::consts::PI;
        let last = self.slices.len() - 1;
        // exact zeros at the ends keep the boundary slices fixed
        let bump: Vec<f64> = self
            .times
            .iter()
            .enumerate()
            .map(|(k, t)| {
                if k == 0 || k == last {
                    0.0
                } else {
                    (w * (t - t0) / span).sin()
                }
            })
            .collect();
        let slices = self
            .slices
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let (sv, ds) = (bump[k], self.derivative(k, |j| bump[j]));
                BbSlice {
                    rho_bar: s
                        .rho_bar
                        .iter()
                        .zip(&phi)
                        .map(|(r, p)| r + eps * sv * p)
                        .collect(),
                    flux: s
                        .flux
                        .iter()
                        .zip(&psi)
                        .map(|(f, q)| f - eps * ds * q)
                        .collect(),
                    r: s.r * (1.0 + eps_r * sv),
                }
            })
            .collect();
        Self::new(self.grid, self.times.clone(), slices)
    }
}

/// Derivative at `x` of the quadratic through three points.
fn three_point_derivative(t: [f64; 3], f: [f64; 3], x: f64) -> f64 {
    let l0 = ((x - t[1]) + (x - t[2])) / ((t[0] - t[1]) * (t[0] - t[2]));
    let l1 = ((x - t[0]) + (x - t[2])) / ((t[1] - t[0]) * (t[1] - t[2]));
    let l2 = ((x - t[0]) + (x - t[1])) / ((t[2] - t[0]) * (t[2] - t[1]));
    f[0] * l0 + f[1] * l1 + f[2] * l2
}

fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Action with the default continuity tolerance.
pub fn bb_action(path: &BbPath) -> Result<f64> {
    bb_action_with_tol(path, CONTINUITY_TOL)
}

/// Trapezoidal action; fails if the continuity residual exceeds `tol`.
pub fn bb_action_with_tol(path: &BbPath, tol: f64) -> Result<f64> {
    let (residual, slice) = path.continuity_residual();
    if !(residual <= tol) {
        return Err(Error::ConstraintViolation {
            residual,
            tolerance: tol,
            slice,
        });
    }
    Ok(trapezoid(&path.times, &path.integrand()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn uniform_slices(n: usize, rs: &[f64]) -> Vec<BbSlice> {
        rs.iter()
            .map(|&r| BbSlice {
                rho_bar: vec![1.0 / TAU; n],
                flux: vec![0.0; n],
                r,
            })
            .collect()
    }

    #[test]
    fn constant_path_has_zero_action() {
        let g = Grid1D::circle(16).unwrap();
        let p = BbPath::new(g, vec![0.0, 0.5, 1.0], uniform_slices(16, &[1.0; 3])).unwrap();
        assert_eq!(bb_action(&p).unwrap(), 0.0);
    }

    #[test]
    fn pure_scaling_has_action_four() {
        let g = Grid1D::circle(16).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let rs: Vec<f64> = times.iter().map(|t| 1.0 + t).collect();
        let p = BbPath::new(g, times, uniform_slices(16, &rs)).unwrap();
        assert!((bb_action(&p).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn violated_continuity_is_reported() {
        let g = Grid1D::circle(16).unwrap();
        let mut slices = uniform_slices(16, &[1.0; 3]);
        slices[1].flux = g.sample(f64::sin);
        let p = BbPath::new(g, vec![0.0, 0.5, 1.0], slices).unwrap();
        let err = bb_action(&p).unwrap_err();
        assert_eq!(err.kind(), "constraint_violation");
    }

    #[test]
    fn perturbation_is_admissible_and_costs_energy() {
        let g = Grid1D::circle(32).unwrap();
        let times: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
        let p = BbPath::new(g, times, uniform_slices(32, &[1.0; 201])).unwrap();
        let q = p
            .perturbed(&g.sample(|x| 0.05 * x.cos()), 1.0, 0.1, 1)
            .unwrap();
        for k in [0, 200] {
            assert_eq!(q.slices()[k].rho_bar, p.slices()[k].rho_bar);
            assert_eq!(q.slices()[k].r, p.slices()[k].r);
        }
        assert!(q.continuity_residual().0 < 1e-4);
        assert!(bb_action(&q).unwrap() > 0.0);
    }

    #[test]
    fn path_validation() {
        let g = Grid1D::circle(16).unwrap();
        assert!(BbPath::new(g, vec![0.0], uniform_slices(16, &[1.0])).is_err());
        assert!(BbPath::new(g, vec![0.0, 0.0], uniform_slices(16, &[1.0; 2])).is_err());
        assert!(BbPath::new(g, vec![0.0, 1.0], uniform_slices(16, &[1.0, 0.0])).is_err());
    }
}
