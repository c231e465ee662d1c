//! Canonical flow on `T*(Sym₊(n) × ℝⁿ × ℝ₊)` shared by the centred and the
//! affine models. With mean momentum `π` the Hamiltonian is
//!
//! ```text
//! H = (2/m) tr(V P²) + |π|²/(2m) + ½ m ξ²
//! ```
//!
//! and the centred model is the case of an empty mean.

use nalgebra::{DMatrix, DVector};

use super::spd::symmetrize;
use crate::error::{Error, Result};
use crate::ode::{rk4_step, OdeState};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Phase {
    pub v: DMatrix<f64>,
    pub m: f64,
    pub p: DMatrix<f64>,
    pub xi: f64,
    pub mean: DVector<f64>,
    pub mean_momentum: DVector<f64>,
}

impl OdeState for Phase {
    fn add_scaled(&self, k: f64, d: &Self) -> Self {
        Phase {
            v: symmetrize(&(&self.v + &d.v * k)),
            m: self.m + k * d.m,
            p: symmetrize(&(&self.p + &d.p * k)),
            xi: self.xi + k * d.xi,
            mean: &self.mean + &d.mean * k,
            mean_momentum: &self.mean_momentum + &d.mean_momentum * k,
        }
    }
}

impl Phase {
    pub fn check(&self) -> Result<()> {
        let finite = self.m.is_finite()
            && self.xi.is_finite()
            && self.v.iter().chain(self.p.iter()).all(|x| x.is_finite())
            && self
                .mean
                .iter()
                .chain(self.mean_momentum.iter())
                .all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite {
                what: "Gaussian state",
                step: None,
            });
        }
        if self.m <= 0.0 {
            return Err(Error::NonPositiveMass(self.m));
        }
        if self.v.clone().cholesky().is_none() {
            return Err(Error::LostDefiniteness { step: None });
        }
        Ok(())
    }

    /// `tr(V P²)`.
    fn kinetic_trace(&self) -> f64 {
        (&self.v * &self.p * &self.p).trace()
    }

    pub fn hamiltonian(&self) -> f64 {
        let m = self.m;
        2.0 / m * self.kinetic_trace()
            + self.mean_momentum.norm_squared() / (2.0 * m)
            + 0.5 * m * self.xi * self.xi
    }

    pub fn rhs(&self) -> Result<Phase> {
        self.check()?;
        let m = self.m;
        let (v, p) = (&self.v, &self.p);
        let v_dot = (p * v + v * p) * (2.0 / m);
        let p_dot = (p * p) * (-2.0 / m);
        let xi_dot = 2.0 / (m * m) * self.kinetic_trace()
            + self.mean_momentum.norm_squared() / (2.0 * m * m)
            - 0.5 * self.xi * self.xi;
        Ok(Phase {
            v: symmetrize(&v_dot),
            m: self.xi * m,
            p: symmetrize(&p_dot),
            xi: xi_dot,
            mean: &self.mean_momentum / m,
            mean_momentum: DVector::zeros(self.mean_momentum.len()),
        })
    }

    pub fn endpoint(&self, dt: f64, steps: usize) -> Result<Phase> {
        let mut s = self.clone();
        for k in 1..=steps {
            s = step(&s, dt).map_err(|e| e.at_step(k))?;
        }
        Ok(s)
    }

    pub fn path(&self, dt: f64, steps: usize) -> Result<Vec<Phase>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(self.clone());
        for k in 1..=steps {
            let next = step(&out[k - 1], dt).map_err(|e| e.at_step(k))?;
            out.push(next);
        }
        Ok(out)
    }
}

fn step(s: &Phase, dt: f64) -> Result<Phase> {
    let next = rk4_step(s, dt, &|x: &Phase| x.rhs())?;
    next.check()?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Phase {
        Phase {
            v: DMatrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0]),
            m: 1.3,
            p: DMatrix::from_row_slice(2, 2, &[0.3, -0.2, -0.2, 0.5]),
            xi: 0.4,
            mean: DVector::from_vec(vec![0.1, -0.3]),
            mean_momentum: DVector::from_vec(vec![0.7, 0.2]),
        }
    }

    /// Hamilton's equations checked against central differences of H.
    #[test]
    fn rhs_is_canonical() {
        let s = sample();
        let d = s.rhs().unwrap();
        let h = 1e-6;
        let dh = |f: &dyn Fn(&mut Phase, f64)| {
            let mut plus = s.clone();
            let mut minus = s.clone();
            f(&mut plus, h);
            f(&mut minus, -h);
            (plus.hamiltonian() - minus.hamiltonian()) / (2.0 * h)
        };
        // ṁ = ∂H/∂ξ, ξ̇ = −∂H/∂m
        assert!((d.m - dh(&|x, e| x.xi += e)).abs() < 1e-8);
        assert!((d.xi + dh(&|x, e| x.m += e)).abs() < 1e-8);
        // V̇ = ∂H/∂P and Ṗ = −∂H/∂V along symmetric directions E
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let mut e = DMatrix::zeros(2, 2);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            let e2 = e.clone();
            let dp = dh(&move |x, t| x.p += &e2 * t);
            assert!(((&d.v * &e).trace() - dp).abs() < 1e-8);
            let e3 = e.clone();
            let dv = dh(&move |x, t| x.v += &e3 * t);
            assert!(((&d.p * &e).trace() + dv).abs() < 1e-8);
        }
        for i in 0..2 {
            let db = dh(&move |x, t| x.mean_momentum[i] += t);
            assert!((d.mean[i] - db).abs() < 1e-8);
        }
    }

    #[test]
    fn lost_definiteness_is_detected() {
        let mut s = sample();
        s.v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(s.rhs(), Err(Error::LostDefiniteness { .. })));
        let mut s = sample();
        s.m = -1.0;
        assert!(matches!(s.rhs(), Err(Error::NonPositiveMass(_))));
    }
}
