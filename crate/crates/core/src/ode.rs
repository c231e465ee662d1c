//! Fixed-step classical Runge–Kutta shared by every flow in the crate.

use crate::error::Result;

/// A state that can be combined linearly with a derivative of the same shape.
pub trait OdeState: Sized {
    /// Returns `self + k * d`.
    fn add_scaled(&self, k: f64, d: &Self) -> Self;
}

/// One RK4 step. The right-hand side may fail (apex, positivity, ...); the
/// error is returned untouched so the caller can tag it with the step index.
pub fn rk4_step<S, F>(state: &S, dt: f64, rhs: &F) -> Result<S>
where
    S: OdeState,
    F: Fn(&S) -> Result<S>,
{
    let k1 = rhs(state)?;
    let k2 = rhs(&state.add_scaled(0.5 * dt, &k1))?;
    let k3 = rhs(&state.add_scaled(0.5 * dt, &k2))?;
    let k4 = rhs(&state.add_scaled(dt, &k3))?;
    Ok(state
        .add_scaled(dt / 6.0, &k1)
        .add_scaled(dt / 3.0, &k2)
        .add_scaled(dt / 3.0, &k3)
        .add_scaled(dt / 6.0, &k4))
}

impl OdeState for Vec<f64> {
    fn add_scaled(&self, k: f64, d: &Self) -> Self {
        self.iter().zip(d).map(|(a, b)| a + k * b).collect()
    }
}

impl OdeState for f64 {
    fn add_scaled(&self, k: f64, d: &Self) -> Self {
        self + k * d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let rhs = |y: &f64| Ok(-*y);
        let run = |steps: usize| {
            let dt = 1.0 / steps as f64;
            let mut y = 1.0;
            for _ in 0..steps {
                y = rk4_step(&y, dt, &rhs).unwrap();
            }
            (y - (-1.0f64).exp()).abs()
        };
        let ratio = run(20) / run(40);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }
}
