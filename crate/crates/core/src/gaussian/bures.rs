//! `Sym₊(n)` with the (scaled) Bures–Wasserstein metric as a cone base.

use nalgebra::DMatrix;

use super::metric::bures_quadratic;
use super::spd::{from_row_major, lyapunov_raw, to_row_major};
use crate::cone::BaseManifold;
use crate::error::{Error, Result};

/// Points and velocities are `n × n` matrices flattened row-major. The
/// metric is `scale · tr(S_u V S_v)` with `S_u V + V S_u = u`.
///
/// With `scale = 1/4` and radial coordinate `α = 2√m`, the cone over this
/// base is the centred Gaussian model: `m tr(VSS) + ṁ²/m = (α²/4) tr(VSS) + α̇²`.
#[derive(Debug, Clone, Copy)]
pub struct BuresWasserstein {
    pub n: usize,
    pub scale: f64,
}

impl BuresWasserstein {
    pub fn new(n: usize) -> Self {
        Self { n, scale: 1.0 }
    }

    /// The base whose cone is the centred Gaussian model.
    pub fn gaussian_cone_base(n: usize) -> Self {
        Self { n, scale: 0.25 }
    }

    fn unpack(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let v = from_row_major(self.n, q)?;
        if v.clone().cholesky().is_none() {
            return Err(Error::LostDefiniteness { step: None });
        }
        Ok(v)
    }
}

impl BaseManifold for BuresWasserstein {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn metric(&self, q: &[f64], u: &[f64], w: &[f64]) -> f64 {
        let eval = || -> Result<f64> {
            let v = self.unpack(q)?;
            let u = from_row_major(self.n, u)?;
            let w = from_row_major(self.n, w)?;
            bures_quadratic(&v, &u, &w)
        };
        self.scale * eval().unwrap_or(f64::NAN)
    }

    /// `V̈ = 2 S V S` for `V̇ = SV + VS`.
    fn geodesic_acceleration(&self, q: &[f64], q_dot: &[f64]) -> Result<Vec<f64>> {
        let v = self.unpack(q)?;
        let x = from_row_major(self.n, q_dot)?;
        let s = lyapunov_raw(&v, &x)?;
        Ok(to_row_major(&((&s * &v * &s) * 2.0)))
    }
}
