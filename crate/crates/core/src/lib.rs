//! Geodesics, Hamiltonians and invariants of the conical extension of the
//! diffeomorphism group used for unbalanced optimal transport.
//!
//! * [`cone`]: warped-product cones `α^{2p} g + dα²` over a pluggable base.
//! * [`gaussian`]: the finite-dimensional model on `Sym₊(n) × ℝ₊`.
//! * [`density`]: the density-level model on a periodic 1D grid, with the
//!   Wasserstein–Fisher–Rao model and Fisher–Rao cone for comparison.
//! * [`cli`]: JSON-configured runs writing CSV traces and JSON summaries.

pub mod cli;
pub mod cone;
pub mod density;
pub mod error;
pub mod gaussian;
pub mod ode;
pub mod trace;

pub use error::{Error, Result};
pub use trace::{GeodesicTrace, QuadraticFit};
