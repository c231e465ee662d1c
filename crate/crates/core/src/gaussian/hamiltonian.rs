//! Hamiltonian geodesics of the centred Gaussian model on
//! `T*(Sym₊(n) × ℝ₊)`:
//!
//! ```text
//! H  = (2/m) tr(V P²) + ½ m ξ²
//! V̇  = (2/m)(PV + VP)        ṁ = ξ m
//! Ṗ  = −(2/m) P²             ξ̇ = (2/m²) tr(V P²) − ξ²/2
//! ```
//!
//! This normalization is the Legendre transform of `½ m (tr(VSS) + ξ²)`
//! with `P = mS/2`, so `H` equals half the metric energy and `m̈ = H`.

use nalgebra::DVector;

use super::flow::Phase;
use super::spd::{to_row_major, SpdMatrix, SymMatrix};
use crate::error::{ensure_mass, Error, Result};
use crate::trace::GeodesicTrace;

/// Cotangent state `(V, m, P, ξ)`; `ξ = ṁ/m` is the momentum dual to `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCotangentState {
    pub v: SpdMatrix,
    pub m: f64,
    pub p: SymMatrix,
    pub xi: f64,
}

/// Time derivative of a [`GaussianCotangentState`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVelocity {
    pub v_dot: SymMatrix,
    pub m_dot: f64,
    pub p_dot: SymMatrix,
    pub xi_dot: f64,
}

impl GaussianCotangentState {
    pub fn new(v: SpdMatrix, m: f64, p: SymMatrix, xi: f64) -> Result<Self> {
        ensure_mass(m)?;
        if v.dim() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: v.dim(),
                got: p.dim(),
            });
        }
        if !xi.is_finite() {
            return Err(Error::NonFinite {
                what: "xi",
                step: None,
            });
        }
        Ok(Self { v, m, p, xi })
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub(crate) fn to_phase(&self) -> Phase {
        Phase {
            v: self.v.matrix().clone(),
            m: self.m,
            p: self.p.matrix().clone(),
            xi: self.xi,
            mean: DVector::zeros(0),
            mean_momentum: DVector::zeros(0),
        }
    }

    pub(crate) fn from_phase(ph: &Phase) -> Result<Self> {
        Self::new(
            SpdMatrix::new(ph.v.clone()).map_err(|_| Error::LostDefiniteness { step: None })?,
            ph.m,
            SymMatrix::from_unchecked(ph.p.clone()),
            ph.xi,
        )
    }

    /// Flattened as `V` (row-major), then `P` (row-major).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.v.to_row_major();
        out.extend(self.p.to_row_major());
        out
    }
}

pub fn hamiltonian(state: &GaussianCotangentState) -> Result<f64> {
    ensure_mass(state.m)?;
    Ok(state.to_phase().hamiltonian())
}

pub fn geodesic_rhs(state: &GaussianCotangentState) -> Result<GaussianVelocity> {
    let d = state.to_phase().rhs()?;
    Ok(GaussianVelocity {
        v_dot: SymMatrix::from_unchecked(d.v),
        m_dot: d.m,
        p_dot: SymMatrix::from_unchecked(d.p),
        xi_dot: d.xi,
    })
}

/// All `steps + 1` states of the RK4 flow.
pub fn geodesic_path(
    initial: &GaussianCotangentState,
    dt: f64,
    steps: usize,
) -> Result<Vec<GaussianCotangentState>> {
    check_step(dt)?;
    initial
        .to_phase()
        .path(dt, steps)?
        .iter()
        .enumerate()
        .map(|(k, ph)| GaussianCotangentState::from_phase(ph).map_err(|e| e.at_step(k)))
        .collect()
}

pub(crate) fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "time step must be positive, got {dt}"
        )))
    }
}

pub(crate) fn state_columns(n: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(2 * n * n);
    for name in ["V", "P"] {
        for i in 0..n {
            for j in 0..n {
                cols.push(format!("{name}{i}{j}"));
            }
        }
    }
    cols
}

/// RK4 integration with diagnostics `(m, ξ, H)` per step.
pub fn integrate_geodesic(
    initial: &GaussianCotangentState,
    dt: f64,
    steps: usize,
) -> Result<GeodesicTrace> {
    check_step(dt)?;
    let n = initial.dim();
    let path = initial.to_phase().path(dt, steps)?;
    let mut trace = GeodesicTrace::new(state_columns(n));
    for (k, ph) in path.iter().enumerate() {
        let mut flat = to_row_major(&ph.v);
        flat.extend(to_row_major(&ph.p));
        trace.push(k as f64 * dt, ph.m, ph.xi, ph.hamiltonian(), &flat)?;
    }
    Ok(trace)
}
