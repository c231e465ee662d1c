//! Uniform periodic grid on the circle and the fields living on it.

use crate::error::{ensure_mass, Error, Result};
use crate::ode::OdeState;

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {MIN_POINTS} points, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "domain length must be positive, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    /// `n` points on `[0, 2π)`.
    pub fn circle(n: usize) -> Result<Self> {
        Self::new(n, std::f64::consts::TAU)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }

    /// Rectangle rule `h Σ f_i`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.h() * values.iter().sum::<f64>()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

/// Strictly positive density `ϱ` against the uniform reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        check_positive(&values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.sample(f))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn check_positive(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                what: "density",
                step: None,
            });
        }
        if value <= 0.0 {
            return Err(Error::PositivityLoss {
                index,
                value,
                step: None,
            });
        }
    }
    Ok(())
}

/// Dual potential `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    values: Vec<f64>,
}

impl PotentialField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "potential",
                step: None,
            });
        }
        Ok(Self { values })
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.sample(f))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeState {
    pub rho: DensityField,
    pub theta: PotentialField,
}

impl PdeState {
    pub fn new(rho: DensityField, theta: PotentialField) -> Result<Self> {
        rho.grid.check_len(theta.values.len())?;
        Ok(Self { rho, theta })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.rho.grid
    }

    /// Flattened as `ϱ` then `θ`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.rho.values.clone();
        v.extend_from_slice(&self.theta.values);
        v
    }
}

/// Unchecked state used inside the integrator.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawState {
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
}

impl OdeState for RawState {
    fn add_scaled(&self, k: f64, d: &Self) -> Self {
        Self {
            rho: self.rho.add_scaled(k, &d.rho),
            theta: self.theta.add_scaled(k, &d.theta),
        }
    }
}

impl RawState {
    pub fn from_state(s: &PdeState) -> Self {
        Self {
            rho: s.rho.values.clone(),
            theta: s.theta.values.clone(),
        }
    }

    pub fn into_state(self, grid: Grid1D) -> Result<PdeState> {
        PdeState::new(
            DensityField::new(grid, self.rho)?,
            PotentialField::new(self.theta)?,
        )
    }
}

/// `m = ∫ϱ` by the rectangle rule.
pub fn total_mass(rho: &DensityField) -> Result<f64> {
    ensure_mass(rho.grid.integrate(&rho.values))
}

/// `ξ = (∫θϱ) / m`.
pub fn xi_of(state: &PdeState) -> Result<f64> {
    let m = total_mass(&state.rho)?;
    Ok(raw_xi(
        state.grid(),
        &state.rho.values,
        &state.theta.values,
        m,
    ))
}

pub(crate) fn raw_xi(grid: &Grid1D, rho: &[f64], theta: &[f64], m: f64) -> f64 {
    grid.h() * rho.iter().zip(theta).map(|(r, t)| r * t).sum::<f64>() / m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn mass_and_xi() {
        let g = Grid1D::circle(64).unwrap();
        let rho = DensityField::from_fn(g, |_| 1.0).unwrap();
        assert!((total_mass(&rho).unwrap() - TAU).abs() < 1e-13);
        let s = PdeState::new(rho.clone(), PotentialField::from_fn(&g, |_| 2.5).unwrap()).unwrap();
        assert!((xi_of(&s).unwrap() - 2.5).abs() < 1e-14);
        let s = PdeState::new(rho, PotentialField::from_fn(&g, f64::sin).unwrap()).unwrap();
        assert!(xi_of(&s).unwrap().abs() < 1e-15);
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(Grid1D::circle(4).is_err());
        assert!(Grid1D::new(16, -1.0).is_err());
        let g = Grid1D::circle(8).unwrap();
        let mut v = vec![1.0; 8];
        v[3] = 0.0;
        assert!(matches!(
            DensityField::new(g, v),
            Err(Error::PositivityLoss { index: 3, .. })
        ));
        assert!(DensityField::new(g, vec![1.0; 7]).is_err());
        assert!(PotentialField::new(vec![f64::NAN]).is_err());
        let rho = DensityField::new(g, vec![1.0; 8]).unwrap();
        assert!(PdeState::new(rho, PotentialField::new(vec![0.0; 9]).unwrap()).is_err());
    }
}
