//! Closed-form Wasserstein (Bures) geodesics between centred Gaussians.

use nalgebra::DMatrix;

use super::spd::{symmetrize, SpdMatrix, SymMatrix};
use crate::error::{Error, Result};

fn same_dim(u: &SpdMatrix, v: &SpdMatrix) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: v.dim(),
        });
    }
    Ok(())
}

/// Optimal map `T = U^{1/2} (U^{1/2} V U^{1/2})^{−1/2} U^{1/2}`, which pushes
/// `N(0, V)` onto `N(0, U)`: `T V T = U`.
pub fn transport_map(u: &SpdMatrix, v: &SpdMatrix) -> Result<SpdMatrix> {
    same_dim(u, v)?;
    let ru = u.sqrt();
    let inner = SpdMatrix::new(symmetrize(&(ru.matrix() * v.matrix() * ru.matrix())))?;
    let t = ru.matrix() * inner.inv_sqrt().matrix() * ru.matrix();
    SpdMatrix::new(symmetrize(&t))
}

/// `W(t) = [(1−t)E + tT] V [(1−t)E + tT]`, running from `W(0) = V` to
/// `W(1) = U`.
pub fn mccann_geodesic(u: &SpdMatrix, v: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    let tm = transport_map(u, v)?;
    let n = u.dim();
    let lift = DMatrix::<f64>::identity(n, n) * (1.0 - t) + tm.matrix() * t;
    let w = symmetrize(&(&lift * v.matrix() * &lift));
    SpdMatrix::new(w)
}

/// Initial Bures velocity at `V` towards `U`, as the symmetric `S = T − E`
/// with `V̇ = SV + VS`.
pub fn mccann_log(u: &SpdMatrix, v: &SpdMatrix) -> Result<SymMatrix> {
    let tm = transport_map(u, v)?;
    let n = u.dim();
    Ok(SymMatrix::from_unchecked(
        tm.into_matrix() - DMatrix::identity(n, n),
    ))
}

/// Bures–Wasserstein distance
/// `(tr U + tr V − 2 tr (U^{1/2} V U^{1/2})^{1/2})^{1/2}`.
pub fn bures_distance(u: &SpdMatrix, v: &SpdMatrix) -> Result<f64> {
    same_dim(u, v)?;
    let ru = u.sqrt();
    let inner = SpdMatrix::new(symmetrize(&(ru.matrix() * v.matrix() * ru.matrix())))?;
    let cross = inner.sqrt().matrix().trace();
    Ok((u.matrix().trace() + v.matrix().trace() - 2.0 * cross)
        .max(0.0)
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_endpoints_are_fixed() {
        let a = SpdMatrix::from_row_major(2, &[2.0, 0.3, 0.3, 1.0]).unwrap();
        for &t in &[0.0, 0.3, 1.0] {
            let w = mccann_geodesic(&a, &a, t).unwrap();
            assert!((w.matrix() - a.matrix()).amax() < 1e-14);
        }
    }

    #[test]
    fn scalar_midpoint() {
        let u = SpdMatrix::scalar(1.0).unwrap();
        let v = SpdMatrix::scalar(4.0).unwrap();
        let t = transport_map(&u, &v).unwrap();
        assert!((t.matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        let w = mccann_geodesic(&u, &v, 0.5).unwrap();
        assert!((w.matrix()[(0, 0)] - 2.25).abs() < 1e-14);
        for &s in &[0.1, 0.7] {
            let w = mccann_geodesic(&u, &v, s).unwrap().matrix()[(0, 0)];
            assert!((w - 4.0 * (1.0 - s / 2.0).powi(2)).abs() < 1e-14);
        }
        assert!((bures_distance(&u, &v).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions() {
        assert!(mccann_geodesic(&SpdMatrix::identity(2), &SpdMatrix::identity(3), 0.5).is_err());
    }
}
