//! JSON summary written next to every trace. The schema is documented in
//! `docs/summary-schema.md`.

use serde::Serialize;
use serde_json::Value;

use crate::error::Error;
use crate::trace::GeodesicTrace;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reason {
    pub kind: String,
    pub message: String,
    pub step: Option<usize>,
}

impl Reason {
    pub fn from_error(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
            step: e.step(),
        }
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self {
            kind: "schema_error".into(),
            message: message.into(),
            step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub max_residual: f64,
    /// `H(0)/2`, the value `a` should take for a geodesic.
    pub expected_a: f64,
    pub a_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub h_initial: f64,
    pub h_final: f64,
    pub h_drift: f64,
    pub mass_fit: Option<MassFit>,
}

impl Diagnostics {
    pub fn of(trace: &GeodesicTrace) -> Option<Self> {
        let h = trace.hamiltonians();
        let (&h0, &h1) = (h.first()?, h.last()?);
        let mass_fit = trace.mass_fit().map(|f| MassFit {
            a: f.a,
            b: f.b,
            c: f.c,
            max_residual: f.max_residual,
            expected_a: h0 / 2.0,
            a_error: (f.a - h0 / 2.0).abs(),
        });
        Some(Self {
            h_initial: h0,
            h_final: h1,
            h_drift: trace.relative_h_drift(),
            mass_fit,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalState {
    pub columns: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub name: String,
    pub command: String,
    pub status: Status,
    pub reason: Option<Reason>,
    pub trace_file: Option<String>,
    pub rows: usize,
    pub final_state: Option<FinalState>,
    pub diagnostics: Option<Diagnostics>,
    pub convergence: Option<Convergence>,
    pub result: Value,
}

impl Summary {
    pub fn new(name: &str, command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.to_string(),
            command: command.to_string(),
            status: Status::Ok,
            reason: None,
            trace_file: None,
            rows: 0,
            final_state: None,
            diagnostics: None,
            convergence: None,
            result: Value::Null,
        }
    }

    pub fn failed(mut self, reason: Reason) -> Self {
        self.status = Status::Error;
        self.reason = Some(reason);
        self
    }

    pub fn with_trace(mut self, trace: &GeodesicTrace, file: String) -> Self {
        self.rows = trace.len();
        self.trace_file = Some(file);
        self.final_state = trace.rows().last().map(|row| FinalState {
            columns: trace.columns().to_vec(),
            values: row.clone(),
        });
        self.diagnostics = Diagnostics::of(trace);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}
