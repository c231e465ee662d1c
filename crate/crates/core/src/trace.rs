//! Time series of integrated states with the fixed diagnostic columns
//! `t, m, xi, H` followed by the flattened state.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DIAGNOSTIC_COLUMNS: [&str; 4] = ["t", "m", "xi", "H"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicTrace {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl GeodesicTrace {
    /// `state_columns` are appended after the diagnostic columns.
    pub fn new<I, S>(state_columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let columns = DIAGNOSTIC_COLUMNS
            .iter()
            .map(|c| c.to_string())
            .chain(state_columns.into_iter().map(Into::into))
            .collect();
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// Appends a row; `t` must strictly increase and every entry be finite.
    pub fn push(&mut self, t: f64, m: f64, xi: f64, h: f64, state: &[f64]) -> Result<()> {
        if 4 + state.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len() - 4,
                got: state.len(),
            });
        }
        if let Some(last) = self.rows.last() {
            if t <= last[0] {
                return Err(Error::InvalidInput(format!(
                    "trace time must increase ({t} after {})",
                    last[0]
                )));
            }
        }
        let mut row = Vec::with_capacity(self.columns.len());
        row.extend_from_slice(&[t, m, xi, h]);
        row.extend_from_slice(state);
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "trace row",
                step: Some(self.rows.len()),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[1]).collect()
    }

    pub fn hamiltonians(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[3]).collect()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.rows.last().map(|r| &r[4..])
    }

    /// max_k |H_k − H_0| / max(|H_0|, tiny).
    pub fn relative_h_drift(&self) -> f64 {
        relative_drift(&self.hamiltonians())
    }

    /// Least-squares quadratic through the `m` column.
    pub fn mass_fit(&self) -> Option<QuadraticFit> {
        QuadraticFit::fit(&self.times(), &self.masses())
    }

    /// CSV with a header row; floats in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_float(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn relative_drift(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else {
        return 0.0;
    };
    let scale = first.abs().max(f64::MIN_POSITIVE);
    values
        .iter()
        .map(|v| (v - first).abs() / scale)
        .fold(0.0, f64::max)
}

/// `y ≈ a t² + b t + c`, fitted in a centred and scaled time variable for
/// conditioning; `max_residual` is the largest pointwise misfit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub max_residual: f64,
}

impl QuadraticFit {
    pub fn fit(t: &[f64], y: &[f64]) -> Option<Self> {
        if t.len() != y.len() || t.len() < 3 {
            return None;
        }
        let n = t.len() as f64;
        let t0 = t.iter().sum::<f64>() / n;
        let half = t
            .iter()
            .map(|x| (x - t0).abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        // normal equations in s = (t - t0) / half
        let mut g = nalgebra::Matrix3::<f64>::zeros();
        let mut r = nalgebra::Vector3::<f64>::zeros();
        for (&ti, &yi) in t.iter().zip(y) {
            let s = (ti - t0) / half;
            let basis = nalgebra::Vector3::new(s * s, s, 1.0);
            g += basis * basis.transpose();
            r += basis * yi;
        }
        let coef = g.lu().solve(&r)?;
        let (qa, qb, qc) = (coef[0], coef[1], coef[2]);
        let a = qa / (half * half);
        let b = qb / half - 2.0 * a * t0;
        let c = qc - qb * t0 / half + a * t0 * t0;
        let max_residual = t
            .iter()
            .zip(y)
            .map(|(&ti, &yi)| {
                let s = (ti - t0) / half;
                (qa * s * s + qb * s + qc - yi).abs()
            })
            .fold(0.0, f64::max);
        Some(Self {
            a,
            b,
            c,
            max_residual,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }
}
