//! Symmetric and symmetric positive-definite matrices, spectral functions,
//! and the continuous Lyapunov solve `X = SV + VS`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Entrywise symmetry tolerance, relative to `max(1, max|a_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::InvalidInput(format!(
            "expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "matrix",
            step: None,
        });
    }
    Ok(())
}

pub(crate) fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let scale = a.amax().max(1.0);
    (a - a.transpose()).amax() / scale
}

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub(crate) fn from_row_major(n: usize, entries: &[f64]) -> Result<DMatrix<f64>> {
    if entries.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: entries.len(),
        });
    }
    Ok(DMatrix::from_row_slice(n, n, entries))
}

pub(crate) fn to_row_major(a: &DMatrix<f64>) -> Vec<f64> {
    a.transpose().as_slice().to_vec()
}

/// Symmetric matrix; stored exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        check_square(&a)?;
        let asym = asymmetry(&a);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self(symmetrize(&a)))
    }

    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        Self::new(from_row_major(n, entries)?)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Symmetrizes without checking; for values produced by the crate's own
    /// arithmetic.
    pub(crate) fn from_unchecked(a: DMatrix<f64>) -> Self {
        Self(symmetrize(&a))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        to_row_major(&self.0)
    }

    /// Upper-triangular entries, row by row.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn from_upper(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * (n + 1) / 2 {
            return Err(Error::DimensionMismatch {
                expected: n * (n + 1) / 2,
                got: entries.len(),
            });
        }
        let mut a = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                a[(i, j)] = entries[k];
                a[(j, i)] = entries[k];
                k += 1;
            }
        }
        Ok(Self(a))
    }
}

/// Symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let s = SymMatrix::new(a)?.0;
        if s.clone().cholesky().is_none() {
            let min = s.clone().symmetric_eigenvalues().min();
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        Ok(Self(s))
    }

    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        Self::new(from_row_major(n, entries)?)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, x))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        to_row_major(&self.0)
    }

    pub fn as_sym(&self) -> SymMatrix {
        SymMatrix(self.0.clone())
    }

    pub fn eigen(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        self.0.clone().symmetric_eigen()
    }

    /// `f(A)` through the eigendecomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        spectral_map(&self.0, f)
    }

    pub fn sqrt(&self) -> SpdMatrix {
        SpdMatrix(symmetrize(&self.map_spectrum(f64::sqrt)))
    }

    pub fn inv_sqrt(&self) -> SpdMatrix {
        SpdMatrix(symmetrize(&self.map_spectrum(|l| 1.0 / l.sqrt())))
    }

    pub fn inverse(&self) -> SpdMatrix {
        SpdMatrix(symmetrize(&self.map_spectrum(|l| 1.0 / l)))
    }
}

pub(crate) fn spectral_map(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, l) in eig.eigenvalues.iter().enumerate() {
        let fl = f(*l);
        scaled.column_mut(j).scale_mut(fl);
    }
    scaled * q.transpose()
}

/// Solves `SV + VS = X` for symmetric `S` on raw matrices; `v` must be SPD.
/// One step of residual correction is applied.
pub(crate) fn lyapunov_raw(v: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = v.clone().symmetric_eigen();
    let lambda = &eig.eigenvalues;
    if lambda.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lambda.min(),
        });
    }
    let q = &eig.eigenvectors;
    let solve = |rhs: &DMatrix<f64>| {
        let mut t = q.transpose() * rhs * q;
        let n = t.nrows();
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] /= lambda[i] + lambda[j];
            }
        }
        symmetrize(&(q * t * q.transpose()))
    };
    let s = solve(x);
    let residual = x - (&s * v + v * &s);
    Ok(s + solve(&residual))
}

/// Symmetric solution of the continuous Lyapunov equation `X = SV + VS`.
pub fn lyapunov_solve(v: &SpdMatrix, x: &SymMatrix) -> Result<SymMatrix> {
    if v.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: x.dim(),
        });
    }
    Ok(SymMatrix(lyapunov_raw(&v.0, &x.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn identity_base() {
        let v = SpdMatrix::identity(2);
        let x = SymMatrix::from_row_major(2, &[2.0, 0.0, 0.0, 4.0]).unwrap();
        let s = lyapunov_solve(&v, &x).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert!(close(s.matrix(), &expect, 1e-15));
    }

    #[test]
    fn diagonal_base() {
        let v = SpdMatrix::from_row_major(2, &[1.0, 0.0, 0.0, 3.0]).unwrap();
        let x = SymMatrix::from_row_major(2, &[2.0, 4.0, 4.0, 12.0]).unwrap();
        let s = lyapunov_solve(&v, &x).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]);
        assert!(close(s.matrix(), &expect, 1e-14));
    }

    #[test]
    fn scalar_case() {
        let v = SpdMatrix::scalar(2.0).unwrap();
        let x = SymMatrix::from_row_major(1, &[8.0]).unwrap();
        let s = lyapunov_solve(&v, &x).unwrap();
        assert!((s.matrix()[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            SpdMatrix::from_row_major(2, &[1.0, 0.0, 0.0, -1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            SymMatrix::from_row_major(2, &[1.0, 2.0, 0.0, 1.0]),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(SpdMatrix::from_row_major(2, &[1.0, 0.0, 0.0]).is_err());
        let v = SpdMatrix::identity(2);
        let x = SymMatrix::identity(3);
        assert!(lyapunov_solve(&v, &x).is_err());
    }

    #[test]
    fn square_root_squares_back() {
        let a =
            SpdMatrix::from_row_major(3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]).unwrap();
        let r = a.sqrt();
        assert!(close(&(r.matrix() * r.matrix()), a.matrix(), 1e-13));
        let ri = a.inv_sqrt();
        assert!(close(
            &(ri.matrix() * a.matrix() * ri.matrix()),
            &DMatrix::identity(3, 3),
            1e-13
        ));
    }

    #[test]
    fn upper_round_trip() {
        let s =
            SymMatrix::from_row_major(3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]).unwrap();
        assert_eq!(s.upper(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(SymMatrix::from_upper(3, &s.upper()).unwrap(), s);
    }
}
