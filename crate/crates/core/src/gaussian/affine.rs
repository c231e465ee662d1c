//! Gaussians with non-zero means. With a centred reference measure the
//! metric is the product `m [tr(VSS) + |ḃ|²] + ṁ²/m`, i.e. the cone over
//! `Sym₊(n) × ℝⁿ`. Geodesics move the mean along the segment between the
//! centres, with the speed modulated by the mass (`ḃ = π/m`, `π` constant).

use nalgebra::DVector;

use super::flow::Phase;
use super::hamiltonian::check_step;
use super::shooting::{Endpoints, ShootingOptions};
use super::spd::{to_row_major, SpdMatrix, SymMatrix};
use crate::error::{ensure_mass, Error, Result};
use crate::trace::GeodesicTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineGaussian {
    pub sigma: SpdMatrix,
    pub mean: DVector<f64>,
    pub m: f64,
}

impl AffineGaussian {
    pub fn new(sigma: SpdMatrix, mean: DVector<f64>, m: f64) -> Result<Self> {
        ensure_mass(m)?;
        if mean.len() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: sigma.dim(),
                got: mean.len(),
            });
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "mean",
                step: None,
            });
        }
        Ok(Self { sigma, mean, m })
    }
}

/// Solved affine geodesic: initial momenta plus the sampled path.
#[derive(Debug, Clone)]
pub struct AffineGeodesic {
    pub p0: SymMatrix,
    pub mean_momentum: DVector<f64>,
    pub xi0: f64,
    pub iterations: usize,
    pub residual: f64,
    initial: Phase,
    steps: usize,
}

impl AffineGeodesic {
    pub fn solve(
        g0: &AffineGaussian,
        g1: &AffineGaussian,
        tol: f64,
        opts: &ShootingOptions,
    ) -> Result<Self> {
        let ends = Endpoints {
            sigma0: &g0.sigma,
            mean0: g0.mean.clone(),
            m0: g0.m,
            sigma1: &g1.sigma,
            mean1: g1.mean.clone(),
            m1: g1.m,
        };
        let sol = ends.solve(tol, opts)?;
        Ok(Self {
            p0: SymMatrix::from_unchecked(sol.initial.p.clone()),
            mean_momentum: sol.initial.mean_momentum.clone(),
            xi0: sol.initial.xi,
            iterations: sol.iterations,
            residual: sol.residual,
            initial: sol.initial,
            steps: opts.steps,
        })
    }

    /// Conserved energy `H = (2/m)tr(VP²) + |π|²/(2m) + ½mξ²`.
    pub fn hamiltonian(&self) -> f64 {
        self.initial.hamiltonian()
    }

    /// Point at time `t ∈ [0, 1]`, integrated with the solver's step size.
    pub fn at(&self, t: f64) -> Result<AffineGaussian> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!(
                "t must lie in [0, 1], got {t}"
            )));
        }
        if t == 0.0 {
            return self.to_gaussian(&self.initial);
        }
        let steps = ((t * self.steps as f64).ceil() as usize).max(1);
        let end = self.initial.endpoint(t / steps as f64, steps)?;
        self.to_gaussian(&end)
    }

    fn to_gaussian(&self, ph: &Phase) -> Result<AffineGaussian> {
        AffineGaussian::new(SpdMatrix::new(ph.v.clone())?, ph.mean.clone(), ph.m)
    }

    /// Trace with columns `t, m, xi, H, V.., b.., P.., π..`.
    pub fn trace(&self, dt: f64, steps: usize) -> Result<GeodesicTrace> {
        check_step(dt)?;
        let n = self.initial.v.nrows();
        let mut cols = Vec::new();
        for i in 0..n {
            for j in 0..n {
                cols.push(format!("V{i}{j}"));
            }
        }
        cols.extend((0..n).map(|i| format!("b{i}")));
        for i in 0..n {
            for j in 0..n {
                cols.push(format!("P{i}{j}"));
            }
        }
        cols.extend((0..n).map(|i| format!("pi{i}")));
        let mut trace = GeodesicTrace::new(cols);
        for (k, ph) in self.initial.path(dt, steps)?.iter().enumerate() {
            let mut flat = to_row_major(&ph.v);
            flat.extend(ph.mean.iter());
            flat.extend(to_row_major(&ph.p));
            flat.extend(ph.mean_momentum.iter());
            trace.push(k as f64 * dt, ph.m, ph.xi, ph.hamiltonian(), &flat)?;
        }
        Ok(trace)
    }
}

/// Point at time `t` on the geodesic from `g0` to `g1`.
pub fn affine_geodesic(g0: &AffineGaussian, g1: &AffineGaussian, t: f64) -> Result<AffineGaussian> {
    let geo = AffineGeodesic::solve(g0, g1, 1e-10, &ShootingOptions::default())?;
    geo.at(t)
}
