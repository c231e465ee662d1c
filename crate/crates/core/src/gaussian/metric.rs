//! Metrics of the finite-dimensional model: the direct-product metric on
//! `GL(n) × ℝ₊` and the submersed metric `m (tr(V S S) + ξ²)` on
//! `Sym₊(n) × ℝ₊`, with the Legendre transform between them.

use nalgebra::DMatrix;

use super::spd::{lyapunov_raw, lyapunov_solve, SpdMatrix, SymMatrix};
use crate::error::{ensure_mass, Error, Result};

fn check_invertible(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("A must be square".into()));
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let det = a.clone().lu().determinant();
    // relative determinant test, scale-invariant in A
    if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(a.nrows() as i32) {
        return Err(Error::SingularMatrix);
    }
    Ok(())
}

/// `m · tr(Σ ȦᵀȦ) + ṁ²/m`: the Gaussian integral `m ∫ ‖Ȧx‖² dN(0, Σ)` plus
/// the radial term.
pub fn group_metric_eval(
    a: &DMatrix<f64>,
    m: f64,
    a_dot: &DMatrix<f64>,
    m_dot: f64,
    sigma: &SpdMatrix,
) -> Result<f64> {
    ensure_mass(m)?;
    check_invertible(a)?;
    if a.shape() != a_dot.shape() || a.nrows() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            got: a_dot.nrows(),
        });
    }
    let kinetic = (a_dot * sigma.matrix() * a_dot.transpose()).trace();
    Ok(m * kinetic + m_dot * m_dot / m)
}

/// `m (tr(V S S) + ξ²)` with `S` solving `X = SV + VS`.
pub fn base_metric_eval(v: &SpdMatrix, m: f64, x: &SymMatrix, xi: f64) -> Result<f64> {
    ensure_mass(m)?;
    let s = lyapunov_solve(v, x)?;
    let s = s.matrix();
    Ok(m * ((v.matrix() * s * s).trace() + xi * xi))
}

/// Momentum dual to `V̇ = X` under the pairing `tr(P V̇)`: `P = (m/2) S`.
pub fn legendre_momentum(v: &SpdMatrix, m: f64, x: &SymMatrix) -> Result<SymMatrix> {
    ensure_mass(m)?;
    let s = lyapunov_solve(v, x)?;
    Ok(SymMatrix::from_unchecked(s.into_matrix() * (0.5 * m)))
}

/// Inverse Legendre transform: `V̇ = (2/m)(PV + VP)`.
pub fn velocity_from_momentum(v: &SpdMatrix, m: f64, p: &SymMatrix) -> Result<SymMatrix> {
    ensure_mass(m)?;
    let (v, p) = (v.matrix(), p.matrix());
    Ok(SymMatrix::from_unchecked((p * v + v * p) * (2.0 / m)))
}

/// Horizontal lift of `(S, ξ)` at `(A, m)`: `(S A, ξ m)` with `S` symmetric.
pub fn horizontal_lift(a: &DMatrix<f64>, m: f64, s: &SymMatrix, xi: f64) -> (DMatrix<f64>, f64) {
    (s.matrix() * a, xi * m)
}

/// A vertical vector `W A` at `A`, built from an antisymmetric `K` as
/// `W = K (AΣAᵀ)⁻¹`, so that `W (AΣAᵀ)` is antisymmetric.
pub fn vertical_vector(
    a: &DMatrix<f64>,
    sigma: &SpdMatrix,
    antisymmetric: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_invertible(a)?;
    let k = antisymmetric;
    if (k + k.transpose()).amax() > 1e-12 * k.amax().max(1.0) {
        return Err(Error::InvalidInput(
            "expected an antisymmetric matrix".into(),
        ));
    }
    let base = SpdMatrix::new(a * sigma.matrix() * a.transpose())?;
    Ok(k * base.inverse().matrix() * a)
}

/// Projection `dπ(Ȧ) = Ȧ Σ Aᵀ + A Σ Ȧᵀ` of a group velocity.
pub fn project_velocity(a: &DMatrix<f64>, a_dot: &DMatrix<f64>, sigma: &SpdMatrix) -> SymMatrix {
    let half = a_dot * sigma.matrix() * a.transpose();
    SymMatrix::from_unchecked(&half + half.transpose())
}

/// Evaluates both sides of the submersion identity for the horizontal lift
/// of `(S, ξ)` at `(A, m)`: the group metric of the lift and the base metric
/// of its projection `X = S V + V S`, `V = AΣAᵀ`.
pub fn submersion_consistency(
    a: &DMatrix<f64>,
    m: f64,
    theta_s: &SymMatrix,
    xi: f64,
    sigma: &SpdMatrix,
) -> Result<(f64, f64)> {
    ensure_mass(m)?;
    check_invertible(a)?;
    let (a_dot, m_dot) = horizontal_lift(a, m, theta_s, xi);
    let group_value = group_metric_eval(a, m, &a_dot, m_dot, sigma)?;
    let v = SpdMatrix::new(a * sigma.matrix() * a.transpose())?;
    let x = project_velocity(a, &a_dot, sigma);
    let base_value = base_metric_eval(&v, m, &x, m_dot / m)?;
    Ok((group_value, base_value))
}

/// `tr(V S S)` for `S` solving `SV + VS = X`, on raw matrices.
pub(crate) fn bures_quadratic(v: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    let sx = lyapunov_raw(v, x)?;
    let sy = if std::ptr::eq(x, y) {
        sx.clone()
    } else {
        lyapunov_raw(v, y)?
    };
    Ok((&sx * v * &sy).trace())
}
