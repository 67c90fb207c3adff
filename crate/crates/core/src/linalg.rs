//! Small dense linear-algebra helpers over `Complex64`.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub fn determinant(m: &DMatrix<C64>) -> C64 {
    match m.nrows() {
        0 => C64::new(1.0, 0.0),
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.clone().lu().determinant(),
    }
}

/// `C†C`.
pub fn gram(c: &DMatrix<C64>) -> DMatrix<C64> {
    c.adjoint() * c
}

/// `‖A - I‖_F`.
pub fn identity_deviation(a: &DMatrix<C64>) -> f64 {
    let mut sum = 0.0;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let t = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            sum += (a[(r, c)] - t).norm_sqr();
        }
    }
    sum.sqrt()
}

/// Largest entry of `|A - A†|`.
pub fn hermiticity_deviation(a: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..a.nrows() {
        for c in r..a.ncols() {
            worst = worst.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    let herm = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Symmetric orthogonalization `C S^{-1/2}` with `S = C†C`; also returns
/// `det S^{1/2}`, the factor by which the wedge of the columns shrinks.
pub fn lowdin(c: &DMatrix<C64>) -> (DMatrix<C64>, f64) {
    let s = gram(c);
    let (values, vectors) = hermitian_eigen(&s);
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| C64::new(1.0 / l.sqrt(), 0.0)),
    ));
    let s_inv_half = &vectors * inv_sqrt * vectors.adjoint();
    let det_half = values.iter().map(|l| l.sqrt()).product();
    (c * s_inv_half, det_half)
}

/// Extends the orthonormal columns of `c` (K×N) to a K×K unitary whose first
/// N columns are `c`, by Gram–Schmidt over the canonical basis.
pub fn complete_unitary(c: &DMatrix<C64>) -> DMatrix<C64> {
    let k = c.nrows();
    let mut cols: Vec<DVector<C64>> = c.column_iter().map(|v| v.into_owned()).collect();
    for e in 0..k {
        if cols.len() == k {
            break;
        }
        let mut v = DVector::from_fn(k, |r, _| if r == e { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        for _ in 0..2 {
            for u in &cols {
                let p = u.dotc(&v);
                v -= u * p;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            cols.push(v / C64::new(n, 0.0));
        }
    }
    DMatrix::from_columns(&cols)
}

/// `C(n, k)` with exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
