//! Geodesics of the cone over the Fisher–Rao sphere. In the coordinate
//! `√ϱ` the cone is a flat quadrant, so geodesics are straight lines.

use super::grid::DensityField;
use crate::error::{Error, Result};

/// `((1−t)√ϱ₀ + t√ϱ₁)²`, pointwise.
pub fn fisher_rao_cone_geodesic(
    rho0: &DensityField,
    rho1: &DensityField,
    t: f64,
) -> Result<DensityField> {
    if rho0.grid() != rho1.grid() {
        return Err(Error::InvalidInput(
            "endpoint densities live on different grids".into(),
        ));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!(
            "t must lie in [0, 1], got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    if t == 1.0 {
        return Ok(rho1.clone());
    }
    let values = rho0
        .values()
        .iter()
        .zip(rho1.values())
        .map(|(&a, &b)| {
            if a == b {
                return a;
            }
            let r = (1.0 - t) * a.sqrt() + t * b.sqrt();
            r * r
        })
        .collect();
    DensityField::new(*rho0.grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::radial_mass_geodesic;
    use crate::density::grid::{total_mass, Grid1D};

    #[test]
    fn examples() {
        let g = Grid1D::circle(16).unwrap();
        let one = DensityField::from_fn(g, |_| 1.0).unwrap();
        let four = DensityField::from_fn(g, |_| 4.0).unwrap();
        let nine = DensityField::from_fn(g, |_| 9.0).unwrap();
        let mid = fisher_rao_cone_geodesic(&one, &four, 0.5).unwrap();
        assert!(mid.values().iter().all(|v| *v == 2.25));
        let ratio = total_mass(&mid).unwrap() / total_mass(&one).unwrap();
        assert_eq!(ratio, radial_mass_geodesic(1.0, 4.0, 0.5).unwrap());
        let mid = fisher_rao_cone_geodesic(&one, &nine, 0.5).unwrap();
        assert!(mid.values().iter().all(|v| *v == 4.0));
        assert_eq!(fisher_rao_cone_geodesic(&nine, &nine, 0.3).unwrap(), nine);
    }

    #[test]
    fn endpoints_are_exact() {
        let g = Grid1D::circle(32).unwrap();
        let a = DensityField::from_fn(g, |x| 1.0 + 0.5 * x.sin()).unwrap();
        let b = DensityField::from_fn(g, |x| 2.0 + x.cos()).unwrap();
        assert_eq!(fisher_rao_cone_geodesic(&a, &b, 0.0).unwrap(), a);
        assert_eq!(fisher_rao_cone_geodesic(&a, &b, 1.0).unwrap(), b);
        assert!(fisher_rao_cone_geodesic(&a, &b, 1.5).is_err());
    }
}
