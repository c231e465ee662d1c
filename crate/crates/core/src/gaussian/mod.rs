//! Finite-dimensional conical model on scaled centred (and affine) Gaussian
//! densities, parametrized by covariance and total mass.

pub mod affine;
pub mod bures;
mod flow;
pub mod hamiltonian;
pub mod mccann;
pub mod metric;
pub mod shooting;
pub mod spd;

pub use affine::{affine_geodesic, AffineGaussian, AffineGeodesic};
pub use bures::BuresWasserstein;
pub use hamiltonian::{
    geodesic_path, geodesic_rhs, hamiltonian, integrate_geodesic, GaussianCotangentState,
    GaussianVelocity,
};
pub use mccann::{bures_distance, mccann_geodesic, mccann_log, transport_map};
pub use metric::{
    base_metric_eval, group_metric_eval, horizontal_lift, legendre_momentum, project_velocity,
    submersion_consistency, velocity_from_momentum, vertical_vector,
};
pub use shooting::{shoot_bvp, shoot_bvp_with, ShootingOptions, ShootingSolution};
pub use spd::{lyapunov_solve, SpdMatrix, SymMatrix};
