use rayon::prelude::*;

use super::orbital::{wrapped, OrbitalField};
use crate::error::{Error, Result};
use crate::model::PhysicalConstants;
use crate::C64;

/// Minimum grid points per magnetic length `1/√b`.
pub const MIN_POINTS_PER_LENGTH: f64 = 8.0;

const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];

/// `H₁ f = (ħ²/2m)[-∂₁²f - ∂₂²f + 2ib x₁ ∂₂f + b² x₁² f]` with fourth-order
/// central differences. Stencils reaching past the box edges use the
/// magnetic-periodic extension of `f`.
pub fn apply_landau_hamiltonian(field: &OrbitalField, constants: &PhysicalConstants) -> Result<OrbitalField> {
    let g = field.grid;
    let b = constants.b();
    let sb = b.sqrt();
    let coarsest = g.h1().max(g.h2());
    let per_length = 1.0 / (sb * coarsest);
    if per_length < MIN_POINTS_PER_LENGTH || g.g1 < 5 || g.g2 < 5 {
        return Err(Error::GridTooCoarse {
            points_per_length: per_length,
        });
    }
    let (inv11, inv22, inv2) = (1.0 / (g.h1() * g.h1()), 1.0 / (g.h2() * g.h2()), 1.0 / g.h2());
    let scale = constants.hbar * constants.hbar / (2.0 * constants.mass);
    let values = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = ((idx / g.g2) as isize, (idx % g.g2) as isize);
            let mut d11 = C64::new(0.0, 0.0);
            let mut d22 = C64::new(0.0, 0.0);
            let mut d2 = C64::new(0.0, 0.0);
            for (k, off) in (-2isize..=2).enumerate() {
                d11 += wrapped(field, b, i + off, j) * D2[k];
                let v = wrapped(field, b, i, j + off);
                d22 += v * D2[k];
                d2 += v * D1[k];
            }
            let x1 = g.x1(i as usize);
            let f = field.values[idx];
            let out = -d11 * inv11 - d22 * inv22 + C64::new(0.0, 2.0 * b * x1) * d2 * inv2 + f * (b * b * x1 * x1);
            out * scale
        })
        .collect();
    OrbitalField::from_values(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landau::{finite_volume_orbital, landau_level};
    use crate::model::{inner_product, DomainConfig, Grid};

    fn residual(n: usize, m: usize, grid: &Grid, d: &DomainConfig, c: &PhysicalConstants) -> f64 {
        let f = finite_volume_orbital(n, m, grid, c, d, None).unwrap();
        let hf = apply_landau_hamiltonian(&f, c).unwrap();
        let e = landau_level(n, c);
        let diff = hf
            .values
            .iter()
            .zip(&f.values)
            .map(|(a, b)| (a - b * e).norm_sqr())
            .sum::<f64>();
        (diff * grid.weight()).sqrt()
    }

    #[test]
    fn ground_eigenresidual_converges_at_fourth_order() {
        let d = DomainConfig::square_unit_field(1);
        let c = PhysicalConstants::natural(&d);
        let g = Grid::new(32, 32, &d).unwrap();
        let coarse = residual(0, 0, &g, &d, &c);
        let fine = residual(0, 0, &g.refined(), &d, &c);
        assert!(coarse / fine >= 12.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn first_excited_level_expectation() {
        let d = DomainConfig::square_unit_field(2);
        let c = PhysicalConstants::natural(&d);
        let g = Grid::new(256, 256, &d).unwrap();
        let f = finite_volume_orbital(1, 0, &g, &c, &d, None).unwrap();
        let e = inner_product(&f, &apply_landau_hamiltonian(&f, &c).unwrap()).unwrap();
        assert!((e.re - landau_level(1, &c)).abs() < 1e-4);
        assert!(e.im.abs() < 1e-8);
    }

    #[test]
    fn constant_input_sees_only_the_vector_potential() {
        let d = DomainConfig::square_unit_field(1);
        let c = PhysicalConstants::natural(&d);
        let g = Grid::new(24, 24, &d).unwrap();
        let f = OrbitalField::from_values(g, vec![C64::new(1.0, 0.0); g.len()]).unwrap();
        let hf = apply_landau_hamiltonian(&f, &c).unwrap();
        let b = c.b();
        // away from the x1 edges no stencil point wraps
        for i in 2..g.g1 - 2 {
            for j in 0..g.g2 {
                let x1 = g.x1(i);
                let expect = 0.5 * b * b * x1 * x1;
                assert!((hf.at(i, j) - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let d = DomainConfig::square_unit_field(4);
        let c = PhysicalConstants::natural(&d);
        let g = Grid::new(16, 64, &d).unwrap();
        let f = OrbitalField::from_values(g, vec![C64::new(0.0, 0.0); g.len()]).unwrap();
        assert!(matches!(
            apply_landau_hamiltonian(&f, &c),
            Err(Error::GridTooCoarse { .. })
        ));
    }
}
