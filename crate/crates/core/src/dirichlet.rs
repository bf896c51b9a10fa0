//! Weighted Dirichlet energy `D_ω(f) = ∫ |f'|² ω dA`.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::quadrature::{integrate_real, DiskGrid};
use crate::series::TaylorSeries;
use crate::weights::Weight;

/// Slack allowed when checking that dilation energies are nondecreasing.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-8;

pub fn energy(f: &TaylorSeries, w: &Weight, grid: &DiskGrid) -> Result<f64> {
    let df = f.derivative();
    integrate_real(grid, |z| df.evaluate(z).norm_sqr() * w.eval_unchecked(z))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilationReport {
    /// `(r, D_ω(f_r))` in the order the radii were given.
    pub energies: Vec<(f64, f64)>,
    /// Largest drop `D_ω(f_{r_i}) - D_ω(f_{r_{i+1}})`, or 0.
    pub worst_decrease: f64,
    pub nondecreasing: bool,
}

pub fn dilation_report(
    f: &TaylorSeries,
    w: &Weight,
    radii: &[f64],
    grid: &DiskGrid,
) -> Result<DilationReport> {
    if radii.windows(2).any(|p| p[1] <= p[0]) {
        return domain("dilation radii must be strictly increasing");
    }
    let energies = radii
        .iter()
        .map(|&r| Ok((r, energy(&f.dilate(r)?, w, grid)?)))
        .collect::<Result<Vec<_>>>()?;
    let worst_decrease = energies
        .windows(2)
        .map(|p| p[0].1 - p[1].1)
        .fold(0.0, f64::max);
    Ok(DilationReport {
        nondecreasing: worst_decrease <= MONOTONICITY_TOLERANCE,
        energies,
        worst_decrease,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> DiskGrid {
        DiskGrid::new(120, 256).unwrap()
    }

    #[test]
    fn energy_examples() {
        let g = grid();
        let u = Weight::uniform();
        let z = TaylorSeries::from_real(&[0.0, 1.0]);
        assert_abs_diff_eq!(energy(&z, &u, &g).unwrap(), 1.0, epsilon = 1e-12);
        let z2 = TaylorSeries::from_real(&[0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(energy(&z2, &u, &g).unwrap(), 2.0, epsilon = 1e-10);
        let h = Weight::harmonic_boundary(Complex64::from_polar(1.0, 0.4)).unwrap();
        assert_abs_diff_eq!(energy(&z, &h, &g).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn energy_is_quadratic_and_vanishes_on_constants() {
        let g = DiskGrid::new(40, 64).unwrap();
        let w = Weight::log_green(c(0.0, 0.0)).unwrap();
        let f = TaylorSeries::new(vec![c(1.0, 0.0), c(0.3, -0.2), c(0.0, 0.5)]);
        let k = c(-1.5, 2.0);
        let e = energy(&f, &w, &g).unwrap();
        let ek = energy(&f.scale(k), &w, &g).unwrap();
        assert_abs_diff_eq!(ek, k.norm_sqr() * e, epsilon = 1e-12 * ek);
        assert_eq!(
            energy(&TaylorSeries::constant(c(4.0, 1.0), 0), &w, &g).unwrap(),
            0.0
        );
        assert!(e > 0.0);
    }

    #[test]
    fn dilation_examples() {
        let g = grid();
        let u = Weight::uniform();
        let z = TaylorSeries::from_real(&[0.0, 1.0]);
        let r = dilation_report(&z, &u, &[0.5, 0.9], &g).unwrap();
        assert_abs_diff_eq!(r.energies[0].1, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(r.energies[1].1, 0.81, epsilon = 1e-12);
        assert!(r.nondecreasing);

        let h = Weight::harmonic_boundary(c(1.0, 0.0)).unwrap();
        let e = TaylorSeries::exp(32);
        let r = dilation_report(&e, &h, &[0.3, 0.6, 0.9], &g).unwrap();
        assert!(r.nondecreasing, "{r:?}");

        let full = energy(&e, &h, &g).unwrap();
        let near = energy(&e.dilate(0.999).unwrap(), &h, &g).unwrap();
        assert!((full - near).abs() / full < 1e-2);

        assert!(dilation_report(&e, &h, &[0.6, 0.3], &g).is_err());
    }
}
