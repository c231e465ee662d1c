//! Density-level models on a uniform periodic grid over the circle.
//!
//! Densities are strictly positive node values; potentials live on the same
//! nodes. Transport terms use a staggered fourth-order stencil in flux form,
//! so discrete mass laws hold to roundoff.

pub mod bb;
pub mod elliptic;
pub mod fisher_rao;
pub mod flow;
pub mod grid;
pub mod stencil;

pub use bb::{bb_action, bb_action_with_tol, BbPath, BbSlice, CONTINUITY_TOL};
pub use elliptic::{
    decompose, flux_for_divergence, gdiv_metric_eval, horizontal_potential, small_metric_eval,
    Decomposition,
};
pub use fisher_rao::fisher_rao_cone_geodesic;
pub use flow::{
    hamiltonian, hamiltonian_small, hamiltonian_wfr, integrate_pde, pde_path, small_rhs, stable_dt,
    wfr_rhs, Model, PdeVelocity, CFL_NUMBER,
};
pub use grid::{total_mass, xi_of, DensityField, Grid1D, PdeState, PotentialField};
