//! Every default used by the command line, in one place.
//!
//! | key                | value      | used by                                  |
//! |--------------------|------------|------------------------------------------|
//! | `n`                | 256        | grid points for density commands         |
//! | `length`           | 2π         | periodic domain length                   |
//! | `dt`               | 1e-3       | RK4 step for every integrator            |
//! | `steps`            | 1000       | RK4 steps (ODE/PDE) and shooting steps   |
//! | `tol`              | 1e-8       | shooting tolerance                       |
//! | `max_iterations`   | 50         | Newton iterations for shooting           |
//! | `p`                | 1          | cone warping exponent                    |
//! | `samples`          | 100        | time samples for closed-form geodesics   |
//! | `perturbations`    | 10         | perturbed paths for `bb-action`          |
//! | `amplitude`        | 0.05       | relative size of those perturbations     |
//! | `continuity_tol`   | 1e-4       | continuity residual bound in `bb-action` |
//! | `cases`            | 20         | random cases per property in `check`     |
//! | `seed`             | 0          | RNG seed (`--seed` overrides)            |

pub const GRID_POINTS: usize = 256;
pub const DOMAIN_LENGTH: f64 = std::f64::consts::TAU;
pub const TIME_STEP: f64 = 1e-3;
pub const STEPS: usize = 1000;
pub const TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 50;
pub const CONE_EXPONENT: f64 = 1.0;
pub const SAMPLES: usize = 100;
pub const PERTURBATIONS: usize = 10;
pub const PERTURBATION_AMPLITUDE: f64 = 0.05;
pub const CONTINUITY_TOL: f64 = crate::density::CONTINUITY_TOL;
pub const CHECK_CASES: usize = 20;
pub const SEED: u64 = 0;
