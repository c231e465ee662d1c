//! Two-point boundary value problem for geodesics of the Gaussian model,
//! solved by shooting: damped Newton on the initial momenta with a
//! finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use super::flow::Phase;
use super::mccann::mccann_log;
use super::spd::{SpdMatrix, SymMatrix};
use crate::error::{ensure_mass, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// RK4 steps over `[0, 1]`.
    pub steps: usize,
    pub max_iterations: usize,
    /// Relative finite-difference increment for the Jacobian.
    pub fd_step: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            steps: 1000,
            max_iterations: 50,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingSolution {
    pub p0: SymMatrix,
    pub xi0: f64,
    pub iterations: usize,
    /// `‖Σ(1) − Σ₁‖_F + |m(1) − m₁|` at the solution.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub measure: f64,
}

/// Damped Newton for `F(x) = 0`. Stops when `measure(F(x)) ≤ tol`; steps
/// are halved until the Euclidean residual decreases.
pub(crate) fn newton_fd<F, M>(
    f: F,
    measure: M,
    x0: Vec<f64>,
    tol: f64,
    max_iterations: usize,
    fd_step: f64,
) -> Result<NewtonReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    M: Fn(&[f64]) -> f64,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let k = x.len();
    if r.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: r.len(),
        });
    }
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for iteration in 0..=max_iterations {
        let current = measure(&r);
        if current <= tol {
            return Ok(NewtonReport {
                x,
                iterations: iteration,
                measure: current,
            });
        }
        if iteration == max_iterations {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(k, k);
        for j in 0..k {
            let h = fd_step * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            let (rp, h) = match f(&xp) {
                Ok(rp) => (rp, h),
                Err(_) => {
                    xp[j] = x[j] - h;
                    (f(&xp)?, -h)
                }
            };
            for i in 0..k {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        let rhs = -DVector::from_column_slice(&r);
        let delta = match jac.clone().lu().solve(&rhs) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => jac
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .map_err(|e| Error::InvalidInput(e.to_string()))?,
        };
        let base = norm(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x
                .iter()
                .zip(delta.iter())
                .map(|(a, d)| a + lambda * d)
                .collect();
            if let Ok(rt) = f(&trial) {
                if norm(&rt) < base || measure(&rt) <= tol {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, rt)) => {
                x = xt;
                r = rt;
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: iteration + 1,
                    residual: current,
                })
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
        residual: measure(&r),
    })
}

/// Endpoint data for a (possibly affine) shooting problem.
pub(crate) struct Endpoints<'a> {
    pub sigma0: &'a SpdMatrix,
    pub mean0: DVector<f64>,
    pub m0: f64,
    pub sigma1: &'a SpdMatrix,
    pub mean1: DVector<f64>,
    pub m1: f64,
}

pub(crate) struct PhaseSolution {
    pub initial: Phase,
    pub iterations: usize,
    pub residual: f64,
}

impl Endpoints<'_> {
    fn n(&self) -> usize {
        self.sigma0.dim()
    }

    fn nb(&self) -> usize {
        self.mean0.len()
    }

    fn unknowns(&self) -> usize {
        let n = self.n();
        n * (n + 1) / 2 + self.nb() + 1
    }

    fn unpack(&self, x: &[f64]) -> Phase {
        let n = self.n();
        let tri = n * (n + 1) / 2;
        let p = SymMatrix::from_upper(n, &x[..tri])
            .expect("length checked")
            .into_matrix();
        Phase {
            v: self.sigma0.matrix().clone(),
            m: self.m0,
            p,
            xi: x[x.len() - 1],
            mean: self.mean0.clone(),
            mean_momentum: DVector::from_column_slice(&x[tri..tri + self.nb()]),
        }
    }

    /// `[ΔΣ upper (off-diagonals × √2), Δb, Δm]`, so its 2-norm restricted
    /// to the first block is the Frobenius norm.
    fn residual(&self, end: &Phase) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(self.unknowns());
        let d = &end.v - self.sigma1.matrix();
        for i in 0..n {
            for j in i..n {
                let w = if i == j {
                    1.0
                } else {
                    std::f64::consts::SQRT_2
                };
                out.push(w * d[(i, j)]);
            }
        }
        out.extend((&end.mean - &self.mean1).iter());
        out.push(end.m - self.m1);
        out
    }

    fn measure(&self, r: &[f64]) -> f64 {
        let (head, last) = r.split_at(r.len() - 1);
        head.iter().map(|a| a * a).sum::<f64>().sqrt() + last[0].abs()
    }

    fn initial_guess(&self) -> Result<Vec<f64>> {
        let s = mccann_log(self.sigma1, self.sigma0)?;
        let mut x: Vec<f64> = s.upper().iter().map(|v| 0.5 * self.m0 * v).collect();
        let pi = (&self.mean1 - &self.mean0) * (self.m0 * self.m1).sqrt();
        x.extend(pi.iter());
        x.push(2.0 * ((self.m1 / self.m0).sqrt() - 1.0));
        Ok(x)
    }

    pub fn solve(&self, tol: f64, opts: &ShootingOptions) -> Result<PhaseSolution> {
        ensure_mass(self.m0)?;
        ensure_mass(self.m1)?;
        if self.sigma1.dim() != self.n() || self.mean1.len() != self.nb() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: self.sigma1.dim(),
            });
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if opts.steps == 0 {
            return Err(Error::InvalidInput("steps must be positive".into()));
        }
        let dt = 1.0 / opts.steps as f64;
        let f = |x: &[f64]| -> Result<Vec<f64>> {
            let end = self.unpack(x).endpoint(dt, opts.steps)?;
            Ok(self.residual(&end))
        };
        let report = newton_fd(
            f,
            |r| self.measure(r),
            self.initial_guess()?,
            tol,
            opts.max_iterations,
            opts.fd_step,
        )?;
        Ok(PhaseSolution {
            initial: self.unpack(&report.x),
            iterations: report.iterations,
            residual: report.measure,
        })
    }
}

/// Initial momenta `(P₀, ξ₀)` of the geodesic from `(Σ₀, m₀)` to `(Σ₁, m₁)`.
pub fn shoot_bvp(
    sigma0: &SpdMatrix,
    m0: f64,
    sigma1: &SpdMatrix,
    m1: f64,
    tol: f64,
) -> Result<ShootingSolution> {
    shoot_bvp_with(sigma0, m0, sigma1, m1, tol, &ShootingOptions::default())
}

pub fn shoot_bvp_with(
    sigma0: &SpdMatrix,
    m0: f64,
    sigma1: &SpdMatrix,
    m1: f64,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<ShootingSolution> {
    let ends = Endpoints {
        sigma0,
        mean0: DVector::zeros(0),
        m0,
        sigma1,
        mean1: DVector::zeros(0),
        m1,
    };
    let sol = ends.solve(tol, opts)?;
    Ok(ShootingSolution {
        p0: SymMatrix::from_unchecked(sol.initial.p),
        xi0: sol.initial.xi,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_solves_a_small_system() {
        // x² + y² = 4, x = y
        let f = |x: &[f64]| Ok(vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]]);
        let rep = newton_fd(
            f,
            |r| r.iter().map(|a| a.abs()).sum(),
            vec![1.0, 0.5],
            1e-12,
            50,
            1e-7,
        )
        .unwrap();
        assert!((rep.x[0] - 2f64.sqrt()).abs() < 1e-10);
        assert!((rep.x[1] - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn newton_reports_non_convergence() {
        let f = |x: &[f64]| Ok(vec![x[0] * x[0] + 1.0]);
        let err = newton_fd(f, |r| r[0].abs(), vec![1.0], 1e-12, 20, 1e-7).unwrap_err();
        assert_eq!(err.kind(), "non_convergence");
    }

    #[test]
    fn constant_geodesic() {
        let s = SpdMatrix::from_row_major(2, &[2.0, 0.3, 0.3, 1.0]).unwrap();
        let sol = shoot_bvp(&s, 1.5, &s, 1.5, 1e-10).unwrap();
        assert!(sol.p0.matrix().amax() < 1e-12);
        assert!(sol.xi0.abs() < 1e-12);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn pure_scaling() {
        let one = SpdMatrix::identity(1);
        let sol = shoot_bvp(&one, 1.0, &one, 4.0, 1e-10).unwrap();
        assert!(sol.p0.matrix().amax() < 1e-8);
        assert!((sol.xi0 - 2.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_mass() {
        let one = SpdMatrix::identity(1);
        assert!(shoot_bvp(&one, 0.0, &one, 4.0, 1e-10).is_err());
        assert!(shoot_bvp(&one, 1.0, &one, 1.0, 0.0).is_err());
    }
}
