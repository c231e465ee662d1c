use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the numerical routines.
///
/// Integrators attach the step index at which a failure occurred via
/// [`Error::at_step`]; the CLI maps [`Error::kind`] into its JSON summaries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("radial coordinate reached the apex (alpha = {alpha}){}", fmt_step(.step))]
    ApexCrossing { alpha: f64, step: Option<usize> },

    #[error("density lost positivity at grid point {index} (value {value}){}", fmt_step(.step))]
    PositivityLoss {
        index: usize,
        value: f64,
        step: Option<usize>,
    },

    #[error("covariance left the SPD cone{}", fmt_step(.step))]
    LostDefiniteness { step: Option<usize> },

    #[error("non-finite value in {what}{}", fmt_step(.step))]
    NonFinite {
        what: &'static str,
        step: Option<usize>,
    },

    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("continuity constraint violated (residual {residual:e} > {tolerance:e}) at time slice {slice}")]
    ConstraintViolation {
        residual: f64,
        tolerance: f64,
        slice: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

fn fmt_step(step: &Option<usize>) -> String {
    match step {
        Some(k) => format!(" at step {k}"),
        None => String::new(),
    }
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::SingularMatrix => "singular_matrix",
            Error::NonPositiveMass(_) => "nonpositive_mass",
            Error::ApexCrossing { .. } => "apex_crossing",
            Error::PositivityLoss { .. } => "positivity_loss",
            Error::LostDefiniteness { .. } => "lost_definiteness",
            Error::NonFinite { .. } => "non_finite",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::NonConvergence { .. } => "non_convergence",
            Error::ConstraintViolation { .. } => "constraint_violation",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
        }
    }

    pub fn step(&self) -> Option<usize> {
        match self {
            Error::ApexCrossing { step, .. }
            | Error::PositivityLoss { step, .. }
            | Error::LostDefiniteness { step }
            | Error::NonFinite { step, .. } => *step,
            _ => None,
        }
    }

    /// Tags a step-local failure with the integration step where it happened.
    pub fn at_step(self, k: usize) -> Self {
        match self {
            Error::ApexCrossing { alpha, .. } => Error::ApexCrossing {
                alpha,
                step: Some(k),
            },
            Error::PositivityLoss { index, value, .. } => Error::PositivityLoss {
                index,
                value,
                step: Some(k),
            },
            Error::LostDefiniteness { .. } | Error::NotPositiveDefinite { .. } => {
                Error::LostDefiniteness { step: Some(k) }
            }
            Error::NonFinite { what, .. } => Error::NonFinite {
                what,
                step: Some(k),
            },
            Error::NonPositiveMass(_) => Error::ApexCrossing {
                alpha: 0.0,
                step: Some(k),
            },
            other => other,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ApexCrossing { .. }
                | Error::PositivityLoss { .. }
                | Error::LostDefiniteness { .. }
                | Error::NonFinite { .. }
                | Error::NonConvergence { .. }
                | Error::ConstraintViolation { .. }
                | Error::StepTooLarge { .. }
                | Error::SingularMatrix
        )
    }
}

pub(crate) fn ensure_mass(m: f64) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::NonFinite {
            what: "mass",
            step: None,
        });
    }
    if m <= 0.0 {
        return Err(Error::NonPositiveMass(m));
    }
    Ok(m)
}
