use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::determinants::DeterminantBasis;
use super::tensor::InteractionTensor;
use crate::error::{Error, Result};
use crate::C64;

/// Hermitian matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian {
    pub dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseHermitian {
    pub fn from_rows(rows: Vec<Vec<(usize, C64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (self.cols[i], self.vals[i]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map_or(C64::new(0.0, 0.0), |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        let out: Vec<C64> = (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect();
        DVector::from_vec(out)
    }

    /// `⟨x|H|x⟩`, real part.
    pub fn expectation(&self, x: &DVector<C64>) -> f64 {
        x.dotc(&self.mul_vec(x)).re
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// Largest `|H_rc - conj H_cr|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|r| self.row(r).all(|(c, v)| c == r || v == C64::new(0.0, 0.0)))
    }
}

/// `(-1)^{#occupied below p}`.
#[inline]
fn sign_below(mask: u64, p: usize) -> f64 {
    if (mask & ((1u64 << p) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `H_N = Σ_i E_i a†_i a_i + ½ Σ v[αβγδ] a†_α a†_β a_δ a_γ` on the
/// determinant basis.
pub fn assemble_hamiltonian(
    basis: &DeterminantBasis,
    energies: &[f64],
    tensor: &InteractionTensor,
) -> Result<SparseHermitian> {
    let k = basis.k;
    if energies.len() != k || tensor.k != k {
        return Err(Error::DimensionMismatch(format!(
            "basis has K = {k}, energies {}, tensor {}",
            energies.len(),
            tensor.k
        )));
    }
    let interacting = !tensor.is_zero();
    let rows: Vec<Vec<(usize, C64)>> = (0..basis.len())
        .into_par_iter()
        .map(|col| {
            let mut entries = column(basis, energies, tensor, col, interacting);
            // ⟨D_col|H|D_row⟩ = conj ⟨D_row|H|D_col⟩
            for e in entries.iter_mut() {
                e.1 = e.1.conj();
            }
            entries
        })
        .collect();
    Ok(SparseHermitian::from_rows(rows))
}

/// Nonzero entries `(row, ⟨D_row|H|D_col⟩)` sorted by row, duplicates summed
/// in a fixed order.
fn column(
    basis: &DeterminantBasis,
    energies: &[f64],
    tensor: &InteractionTensor,
    col: usize,
    interacting: bool,
) -> Vec<(usize, C64)> {
    let k = basis.k;
    let mask = basis.mask(col);
    let occ = basis.occupation(col);
    let diag: f64 = occ.iter().map(|&i| energies[i]).sum();
    let mut raw = vec![(col, C64::new(diag, 0.0))];
    if interacting {
        for &g in occ {
            for &d in occ {
                if g == d {
                    continue;
                }
                // a_γ acts first, then a_δ
                let s1 = sign_below(mask, g);
                let m1 = mask & !(1 << g);
                let s2 = sign_below(m1, d);
                let m2 = m1 & !(1 << d);
                for b in 0..k {
                    if m2 & (1 << b) != 0 {
                        continue;
                    }
                    let s3 = sign_below(m2, b);
                    let m3 = m2 | (1 << b);
                    for a in 0..k {
                        if m3 & (1 << a) != 0 {
                            continue;
                        }
                        let v = tensor.get(a, b, g, d);
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let s4 = sign_below(m3, a);
                        let target = m3 | (1 << a);
                        let row = basis.index_of_mask(target).expect("particle number is conserved");
                        raw.push((row, v * (0.5 * s1 * s2 * s3 * s4)));
                    }
                }
            }
        }
    }
    raw.sort_by_key(|e| e.0);
    let mut merged: Vec<(usize, C64)> = Vec::with_capacity(raw.len());
    for (r, v) in raw {
        match merged.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => merged.push((r, v)),
        }
    }
    merged
}
