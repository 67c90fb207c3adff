use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::determinants::DeterminantBasis;
use crate::error::{Error, Result};
use crate::linalg::{determinant, gram, identity_deviation};
use crate::C64;

/// Coefficients of an `N`-particle state over a determinant basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    pub coefficients: DVector<C64>,
}

impl ManyBodyState {
    pub fn new(coefficients: DVector<C64>) -> Self {
        Self { coefficients }
    }

    /// The single determinant with the given occupations.
    pub fn determinant(basis: &DeterminantBasis, occupation: &[usize]) -> Result<Self> {
        let idx = basis.index_of(occupation).ok_or_else(|| Error::IndexOutOfRange {
            index: occupation.iter().copied().max().unwrap_or(0),
            len: basis.k,
        })?;
        let mut c = DVector::zeros(basis.len());
        c[idx] = C64::new(1.0, 0.0);
        Ok(Self::new(c))
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.norm()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.coefficients.dotc(&other.coefficients)
    }
}

/// `⟨ψ_1 ∧ … ∧ ψ_N | φ_1 ∧ … ∧ φ_N⟩ = det[⟨ψ_i|φ_j⟩]`.
pub fn slater_overlap(a: &[DVector<C64>], b: &[DVector<C64>]) -> Result<C64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if let Some(bad) = a.iter().chain(b).find(|v| v.len() != a[0].len()) {
        return Err(Error::DimensionMismatch(format!(
            "orbital of length {} among length {}",
            bad.len(),
            a[0].len()
        )));
    }
    let n = a.len();
    Ok(determinant(&DMatrix::from_fn(n, n, |i, j| a[i].dotc(&b[j]))))
}

/// Coefficients of `φ_1 ∧ … ∧ φ_N` (columns of `c`) on every determinant:
/// the minors `det c[D, :]`. No orthonormality is assumed.
pub fn wedge_coefficients(c: &DMatrix<C64>, basis: &DeterminantBasis) -> DVector<C64> {
    let n = c.ncols();
    let out: Vec<C64> = (0..basis.len())
        .into_par_iter()
        .map(|idx| {
            let occ = basis.occupation(idx);
            determinant(&DMatrix::from_fn(n, n, |r, col| c[(occ[r], col)]))
        })
        .collect();
    DVector::from_vec(out)
}

/// `a · φ_1 ∧ … ∧ φ_N` in the determinant basis.
pub fn embed_slater(phase: C64, orbitals: &DMatrix<C64>, basis: &DeterminantBasis) -> Result<ManyBodyState> {
    if orbitals.nrows() != basis.k || orbitals.ncols() != basis.n {
        return Err(Error::DimensionMismatch(format!(
            "orbitals are {}x{}, basis expects {}x{}",
            orbitals.nrows(),
            orbitals.ncols(),
            basis.k,
            basis.n
        )));
    }
    let dev = identity_deviation(&gram(orbitals));
    if dev > 1e-6 {
        return Err(Error::NotOrthonormal(dev));
    }
    Ok(ManyBodyState::new(wedge_coefficients(orbitals, basis) * phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lowdin;
    use crate::many_body::enumerate_determinants;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn columns(m: &DMatrix<C64>) -> Vec<DVector<C64>> {
        m.column_iter().map(|c| c.into_owned()).collect()
    }

    #[test]
    fn overlap_of_orthonormal_set_is_one() {
        let (q, _) = lowdin(&random(6, 3, 2));
        let o = slater_overlap(&columns(&q), &columns(&q)).unwrap();
        assert!((o - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn swapping_orbitals_flips_sign() {
        let a = columns(&random(5, 3, 4));
        let b = columns(&random(5, 3, 5));
        let mut swapped = b.clone();
        swapped.swap(0, 2);
        let o = slater_overlap(&a, &b).unwrap();
        assert!((slater_overlap(&a, &swapped).unwrap() + o).norm() < 1e-12);
    }

    #[test]
    fn overlap_length_mismatch() {
        let a = columns(&random(4, 2, 1));
        let b = columns(&random(4, 3, 1));
        assert!(matches!(slater_overlap(&a, &b), Err(Error::LengthMismatch(2, 3))));
    }

    #[test]
    fn first_orbitals_embed_to_first_determinant() {
        let basis = enumerate_determinants(5, 2, 100).unwrap();
        let c = DMatrix::from_fn(5, 2, |r, col| {
            if r == col {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let s = embed_slater(C64::new(1.0, 0.0), &c, &basis).unwrap();
        assert_eq!(s.coefficients[0], C64::new(1.0, 0.0));
        assert!(s.coefficients.iter().skip(1).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn embedding_has_norm_of_phase() {
        let basis = enumerate_determinants(7, 3, 100).unwrap();
        let (q, _) = lowdin(&random(7, 3, 8));
        let phase = C64::from_polar(0.8, 1.1);
        let s = embed_slater(phase, &q, &basis).unwrap();
        assert!((s.norm() - 0.8).abs() < 1e-9);
    }

    #[test]
    fn non_orthonormal_orbitals_are_rejected() {
        let basis = enumerate_determinants(4, 2, 100).unwrap();
        assert!(matches!(
            embed_slater(C64::new(1.0, 0.0), &random(4, 2, 3), &basis),
            Err(Error::NotOrthonormal(_))
        ));
    }

    #[test]
    fn unitary_mixing_scales_by_its_determinant() {
        let basis = enumerate_determinants(6, 3, 100).unwrap();
        let (q, _) = lowdin(&random(6, 3, 11));
        let (u, _) = lowdin(&random(3, 3, 12));
        let before = wedge_coefficients(&q, &basis);
        let after = wedge_coefficients(&(&q * &u), &basis);
        let det = determinant(&u);
        assert!((after - before * det).norm() < 1e-12);
    }
}
