//! Staggered fourth-order operators on the periodic grid.
//!
//! Face `i` sits at `x_{i+1/2}`. The gradient `D` maps nodes to faces, the
//! average `A` maps a node density to faces, and the divergence is the
//! negative `h`-adjoint of `D`, so `Σ_i div(F)_i = 0` exactly and
//! `h Σ_i θ_i div(F)_i = −h Σ_f (Dθ)_f F_f`.

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// `(Dθ)_{i+1/2} = [27(θ_{i+1} − θ_i) − (θ_{i+2} − θ_{i−1})] / 24h`.
pub fn face_gradient(theta: &[f64], h: f64) -> Vec<f64> {
    let n = theta.len();
    (0..n as isize)
        .map(|i| {
            let t = |k: isize| theta[wrap(i + k, n)];
            (27.0 * (t(1) - t(0)) - (t(2) - t(-1))) / (24.0 * h)
        })
        .collect()
}

/// `(Aϱ)_{i+1/2} = [9(ϱ_i + ϱ_{i+1}) − (ϱ_{i−1} + ϱ_{i+2})] / 16`.
pub fn face_average(rho: &[f64]) -> Vec<f64> {
    let n = rho.len();
    (0..n as isize)
        .map(|i| {
            let r = |k: isize| rho[wrap(i + k, n)];
            (9.0 * (r(0) + r(1)) - (r(-1) + r(2))) / 16.0
        })
        .collect()
}

/// Adjoint of [`face_average`]: faces back to nodes, preserving sums.
pub fn node_average(faces: &[f64]) -> Vec<f64> {
    let n = faces.len();
    (0..n as isize)
        .map(|i| {
            // face i−1/2 has index i−1
            let f = |k: isize| faces[wrap(i + k, n)];
            (9.0 * (f(0) + f(-1)) - (f(1) + f(-2))) / 16.0
        })
        .collect()
}

/// Conservative divergence of a face flux:
/// `[27(F_{i+1/2} − F_{i−1/2}) − (F_{i+3/2} − F_{i−3/2})] / 24h`.
pub fn divergence(flux: &[f64], h: f64) -> Vec<f64> {
    let n = flux.len();
    (0..n as isize)
        .map(|i| {
            let f = |k: isize| flux[wrap(i + k, n)];
            (27.0 * (f(0) - f(-1)) - (f(1) - f(-2))) / (24.0 * h)
        })
        .collect()
}

/// Weights of [`face_gradient`] at face `i+1/2`, keyed by node offset
/// from `i−1` (so offsets `0..=3` cover nodes `i−1 ..= i+2`).
pub(crate) fn gradient_stencil(h: f64) -> [(usize, f64); 4] {
    let c = 1.0 / (24.0 * h);
    [(0, c), (1, -27.0 * c), (2, 27.0 * c), (3, -c)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid(n: usize) -> (Vec<f64>, f64) {
        let h = TAU / n as f64;
        ((0..n).map(|i| i as f64 * h).collect(), h)
    }

    #[test]
    fn gradient_is_fourth_order() {
        let err = |n: usize| {
            let (x, h) = grid(n);
            let th: Vec<f64> = x.iter().map(|v| v.sin()).collect();
            face_gradient(&th, h)
                .iter()
                .zip(&x)
                .map(|(g, xi)| (g - (xi + 0.5 * h).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 15.0 && ratio < 17.0, "ratio {ratio}");
    }

    #[test]
    fn adjointness() {
        let (x, h) = grid(16);
        let th: Vec<f64> = x.iter().map(|v| (2.0 * v).cos() + v.sin()).collect();
        let flux: Vec<f64> = x.iter().map(|v| (3.0 * v).sin() + 0.3).collect();
        let lhs: f64 = th
            .iter()
            .zip(divergence(&flux, h))
            .map(|(a, b)| a * b)
            .sum();
        let rhs: f64 = face_gradient(&th, h)
            .iter()
            .zip(&flux)
            .map(|(a, b)| a * b)
            .sum();
        assert!((lhs + rhs).abs() < 1e-12);
        assert!(divergence(&flux, h).iter().sum::<f64>().abs() < 1e-12);

        let rho: Vec<f64> = x.iter().map(|v| 2.0 + v.cos()).collect();
        let y: Vec<f64> = x.iter().map(|v| (2.0 * v).sin() + 1.0).collect();
        let l: f64 = face_average(&rho).iter().zip(&y).map(|(a, b)| a * b).sum();
        let r: f64 = rho.iter().zip(node_average(&y)).map(|(a, b)| a * b).sum();
        assert!((l - r).abs() < 1e-12);
    }

    #[test]
    fn constants_have_no_gradient() {
        let g = face_gradient(&[3.5; 12], 0.1);
        assert!(g.iter().all(|v| *v == 0.0));
        let th: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let direct = face_gradient(&th, 0.1);
        for (f, want) in direct.iter().enumerate() {
            let got: f64 = gradient_stencil(0.1)
                .iter()
                .map(|&(o, c)| c * th[(f + 11 + o) % 12])
                .sum();
            assert!((got - want).abs() < 1e-12);
        }
    }
}
