//! Metric evaluation at the density level: recover the potential from a
//! density velocity by a weighted periodic elliptic solve.

use nalgebra::{DMatrix, DVector};

use super::grid::{DensityField, Grid1D, PotentialField};
use super::stencil::{face_average, face_gradient, gradient_stencil};
use crate::error::{ensure_mass, Error, Result};

/// Solves `−div(ρ̂ Dθ) = f` for zero-mean `θ`. `f` must have zero sum.
///
/// The operator is `Dᵀ diag(ρ̂) D`; its kernel is the constants, removed by
/// adding `c·11ᵀ/n`.
pub(crate) fn weighted_poisson(grid: &Grid1D, rho: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = grid.n();
    let rho_face = face_average(rho);
    if rho_face.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::SingularMatrix);
    }
    let stencil = gradient_stencil(grid.h());
    let mut l = DMatrix::zeros(n, n);
    for (f, w) in rho_face.iter().enumerate() {
        for &(a, ca) in &stencil {
            for &(b, cb) in &stencil {
                l[((f + n - 1 + a) % n, (f + n - 1 + b) % n)] += w * ca * cb;
            }
        }
    }
    let scale = l.diagonal().mean();
    l.add_scalar_mut(scale / n as f64);
    let rhs = DVector::from_column_slice(f);
    let chol = l.cholesky().ok_or(Error::SingularMatrix)?;
    let mut theta = chol.solve(&rhs);
    let mean = theta.mean();
    theta.add_scalar_mut(-mean);
    Ok(theta.iter().copied().collect())
}

fn check_velocity(rho: &DensityField, rho_dot: &[f64]) -> Result<f64> {
    rho.grid().check_len(rho_dot.len())?;
    if rho_dot.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "density velocity",
            step: None,
        });
    }
    ensure_mass(rho.grid().integrate(rho.values()))
}

/// Potential data behind a density velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `ξ = ∫ϱ̇ / m` (the multiplier `κ` for the divergence metric).
    pub xi: f64,
    /// Zero-mean solution of `−div(ρ∇θ) = ϱ̇ − ξϱ`.
    pub potential: Vec<f64>,
    /// `h Σ_f ρ̂_f (Dθ)_f²`.
    pub transport: f64,
    pub mass: f64,
}

pub fn decompose(rho: &DensityField, rho_dot: &[f64]) -> Result<Decomposition> {
    let mass = check_velocity(rho, rho_dot)?;
    let grid = rho.grid();
    let xi = grid.integrate(rho_dot) / mass;
    let f: Vec<f64> = rho_dot
        .iter()
        .zip(rho.values())
        .map(|(d, r)| d - xi * r)
        .collect();
    let potential = weighted_poisson(grid, rho.values(), &f)?;
    let transport = grid.h()
        * face_average(rho.values())
            .iter()
            .zip(face_gradient(&potential, grid.h()))
            .map(|(r, g)| r * g * g)
            .sum::<f64>();
    Ok(Decomposition {
        xi,
        potential,
        transport,
        mass,
    })
}

/// `∫(|∇θ|² + ξ²)ϱ` for `ϱ̇ = −div(ρ∇θ) + ξρ`.
pub fn small_metric_eval(rho: &DensityField, rho_dot: &[f64]) -> Result<f64> {
    let d = decompose(rho, rho_dot)?;
    Ok(d.transport + d.mass * d.xi * d.xi)
}

/// `∫|∇S|²ϱ + ∫(ϱ̇/ϱ)²ϱ` with `−div(ρ∇S) = ϱ̇ − κρ`.
pub fn gdiv_metric_eval(rho: &DensityField, rho_dot: &[f64]) -> Result<f64> {
    let d = decompose(rho, rho_dot)?;
    let reaction: f64 = rho_dot
        .iter()
        .zip(rho.values())
        .map(|(v, r)| v * v / r)
        .sum();
    Ok(d.transport + rho.grid().h() * reaction)
}

/// Horizontal potential of the small model: the zero-mean elliptic part
/// plus the constant fixing `∫θϱ = ξm`.
pub fn horizontal_potential(rho: &DensityField, rho_dot: &[f64]) -> Result<PotentialField> {
    let d = decompose(rho, rho_dot)?;
    let grid = rho.grid();
    let weighted: f64 = grid.integrate(
        &d.potential
            .iter()
            .zip(rho.values())
            .map(|(t, r)| t * r)
            .collect::<Vec<_>>(),
    );
    let shift = d.xi - weighted / d.mass;
    PotentialField::new(d.potential.iter().map(|t| t + shift).collect())
}

/// Least-norm face field `Ψ = Dχ` with `div Ψ = φ`; `φ` must sum to zero.
pub fn flux_for_divergence(grid: &Grid1D, phi: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(phi.len())?;
    let ones = vec![1.0; grid.n()];
    // div = −Dᵀ, so −DᵀDχ = φ
    let neg: Vec<f64> = phi.iter().map(|p| -p).collect();
    let chi = weighted_poisson(grid, &ones, &neg)?;
    Ok(face_gradient(&chi, grid.h()))
}
