use nalgebra::DMatrix;
use rayon::prelude::*;

use super::hamiltonian::apply_landau_hamiltonian;
use super::landau_level;
use super::orbital::{check_magnetic_bc, LandauOrbital, OrbitalField};
use crate::error::{Error, Result};
use crate::model::{inner_product_values, DomainConfig, Grid, PhysicalConstants, SimulationConfig};
use crate::C64;

/// The `(n_max + 1)·M` orbitals `φ_{n,m}` in `(n, m)` lexicographic order,
/// with their Gram matrix and Landau energies.
#[derive(Debug, Clone)]
pub struct OrbitalSet {
    pub orbitals: Vec<OrbitalField>,
    pub labels: Vec<(usize, usize)>,
    pub energies: Vec<f64>,
    pub gram: DMatrix<C64>,
    pub n_max: usize,
    pub flux_quanta: usize,
    pub constants: PhysicalConstants,
    pub grid: Grid,
}

impl OrbitalSet {
    pub fn build(
        grid: &Grid,
        constants: &PhysicalConstants,
        domain: &DomainConfig,
        n_max: usize,
        lattice_cut: Option<usize>,
        gram_tolerance: f64,
    ) -> Result<Self> {
        if grid.l1 != domain.l1 || grid.l2 != domain.l2 {
            return Err(Error::GridMismatch);
        }
        let m = domain.flux_quanta;
        let labels: Vec<(usize, usize)> = (0..=n_max).flat_map(|n| (0..m).map(move |k| (n, k))).collect();
        let generators = labels
            .iter()
            .map(|&(n, k)| LandauOrbital::new(n, k, constants, domain, lattice_cut))
            .collect::<Result<Vec<_>>>()?;
        let orbitals: Vec<OrbitalField> = generators.par_iter().map(|o| o.field(grid)).collect();
        let gram = gram_matrix(&orbitals);
        let set = Self {
            energies: labels.iter().map(|&(n, _)| landau_level(n, constants)).collect(),
            orbitals,
            labels,
            gram,
            n_max,
            flux_quanta: m,
            constants: *constants,
            grid: *grid,
        };
        let deviation = set.gram_deviation();
        if deviation > gram_tolerance {
            let (row, col, worst) = set.worst_gram_entry();
            return Err(Error::OrthonormalityFailure {
                row,
                col,
                deviation: worst.max(deviation),
            });
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }

    /// Position of `φ_{n,m}` in the set.
    pub fn index_of(&self, n: usize, m: usize) -> usize {
        n * self.flux_quanta + m
    }

    /// `‖G - I‖_F`.
    pub fn gram_deviation(&self) -> f64 {
        (&self.gram - DMatrix::<C64>::identity(self.len(), self.len())).norm()
    }

    /// Largest `|G - I|` entry and its position.
    pub fn worst_gram_entry(&self) -> (usize, usize, f64) {
        let k = self.len();
        let mut worst = (0, 0, 0.0);
        for r in 0..k {
            for c in 0..k {
                let target = if r == c { 1.0 } else { 0.0 };
                let d = (self.gram[(r, c)] - target).norm();
                if d > worst.2 {
                    worst = (r, c, d);
                }
            }
        }
        worst
    }

    /// `‖H₁φ - E_nφ‖₂` for every orbital.
    pub fn eigenresiduals(&self) -> Result<Vec<f64>> {
        self.orbitals
            .par_iter()
            .zip(&self.energies)
            .map(|(f, &e)| {
                let hf = apply_landau_hamiltonian(f, &self.constants)?;
                let sq: f64 = hf
                    .values
                    .iter()
                    .zip(&f.values)
                    .map(|(a, b)| (a - b * e).norm_sqr())
                    .sum();
                Ok((sq * self.grid.weight()).sqrt())
            })
            .collect()
    }

    pub fn bc_residuals(&self) -> Vec<f64> {
        self.orbitals
            .iter()
            .map(|f| check_magnetic_bc(f, &self.constants).max())
            .collect()
    }
}

fn gram_matrix(orbitals: &[OrbitalField]) -> DMatrix<C64> {
    let k = orbitals.len();
    let w = orbitals.first().map(|f| f.grid.weight()).unwrap_or(0.0);
    let entries: Vec<C64> = (0..k * k)
        .into_par_iter()
        .map(|idx| inner_product_values(&orbitals[idx / k].values, &orbitals[idx % k].values) * w)
        .collect();
    DMatrix::from_row_slice(k, k, &entries)
}

pub fn build_orbital_set(config: &SimulationConfig) -> Result<OrbitalSet> {
    OrbitalSet::build(
        &config.grid(),
        &config.constants,
        &config.domain,
        config.n_max,
        config.lattice_cut,
        config.tolerances.gram,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n_max: usize, m: usize, g: usize) -> OrbitalSet {
        let d = DomainConfig::square_unit_field(m);
        let c = PhysicalConstants::natural(&d);
        OrbitalSet::build(&Grid::new(g, g, &d).unwrap(), &c, &d, n_max, None, 1e-8).unwrap()
    }

    #[test]
    fn nine_orbitals_with_level_energies() {
        let s = set(2, 3, 96);
        assert_eq!(s.len(), 9);
        assert!(s.gram_deviation() < 1e-8);
        let expect = [0.5, 0.5, 0.5, 1.5, 1.5, 1.5, 2.5, 2.5, 2.5];
        for (e, x) in s.energies.iter().zip(expect) {
            assert!((e - x).abs() < 1e-14);
        }
        assert_eq!(s.labels[4], (1, 1));
        assert_eq!(s.index_of(1, 1), 4);
    }

    #[test]
    fn single_orbital_set() {
        let s = set(0, 1, 64);
        assert_eq!(s.len(), 1);
        assert!((s.orbitals[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coarse_grid_fails_orthonormality() {
        let d = DomainConfig::square_unit_field(2);
        let c = PhysicalConstants::natural(&d);
        let err = OrbitalSet::build(&Grid::new(4, 4, &d).unwrap(), &c, &d, 3, None, 1e-8).unwrap_err();
        assert!(matches!(err, Error::OrthonormalityFailure { .. }));
    }
}
