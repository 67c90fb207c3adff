use nalgebra::{DMatrix, DVector};

use super::hamiltonian::SparseHermitian;
use super::slater::ManyBodyState;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::C64;

/// Largest dimension propagated by full diagonalization.
pub const DENSE_LIMIT: usize = 2000;

const KRYLOV_DIM: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMethod {
    Auto,
    Dense,
    Krylov,
}

/// `ψ ↦ e^{-iHt/ħ} ψ` for a fixed Hamiltonian.
#[derive(Debug, Clone)]
pub enum ExactPropagator<'a> {
    Dense {
        hbar: f64,
        eigenvalues: Vec<f64>,
        eigenvectors: DMatrix<C64>,
    },
    Krylov {
        hbar: f64,
        hamiltonian: &'a SparseHermitian,
        tolerance: f64,
    },
}

impl<'a> ExactPropagator<'a> {
    pub fn new(h: &'a SparseHermitian, hbar: f64, tolerance: f64, method: PropagationMethod) -> Self {
        let dense = match method {
            PropagationMethod::Auto => h.dim <= DENSE_LIMIT,
            PropagationMethod::Dense => true,
            PropagationMethod::Krylov => false,
        };
        if dense {
            let (eigenvalues, eigenvectors) = hermitian_eigen(&h.to_dense());
            ExactPropagator::Dense {
                hbar,
                eigenvalues,
                eigenvectors,
            }
        } else {
            ExactPropagator::Krylov {
                hbar,
                hamiltonian: h,
                tolerance,
            }
        }
    }

    pub fn evolve(&self, state: &ManyBodyState, t: f64) -> Result<ManyBodyState> {
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("state norm {norm} is not 1")));
        }
        if t == 0.0 {
            return Ok(state.clone());
        }
        match self {
            ExactPropagator::Dense {
                hbar,
                eigenvalues,
                eigenvectors,
            } => {
                let mut c = eigenvectors.adjoint() * &state.coefficients;
                for (ci, &e) in c.iter_mut().zip(eigenvalues) {
                    *ci *= C64::from_polar(1.0, -e * t / hbar);
                }
                Ok(ManyBodyState::new(eigenvectors * c))
            }
            ExactPropagator::Krylov {
                hbar,
                hamiltonian,
                tolerance,
            } => krylov(hamiltonian, &state.coefficients, t / hbar, *tolerance).map(ManyBodyState::new),
        }
    }
}

/// `e^{-iHt/ħ} ψ`, choosing dense or Krylov by dimension.
pub fn evolve_exact(state: &ManyBodyState, h: &SparseHermitian, t: f64, hbar: f64) -> Result<ManyBodyState> {
    ExactPropagator::new(h, hbar, 1e-10, PropagationMethod::Auto).evolve(state, t)
}

struct Lanczos {
    basis: Vec<DVector<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// `β_m`, coupling out of the subspace; zero on breakdown.
    residual: f64,
}

fn lanczos(h: &SparseHermitian, v0: &DVector<C64>, max_dim: usize) -> Lanczos {
    let mut basis = vec![v0.clone()];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut residual = 0.0;
    for j in 0..max_dim {
        let mut w = h.mul_vec(&basis[j]);
        let a = basis[j].dotc(&w).re;
        alpha.push(a);
        w -= &basis[j] * C64::new(a, 0.0);
        if j > 0 {
            w -= &basis[j - 1] * C64::new(beta[j - 1], 0.0);
        }
        for _ in 0..2 {
            for v in &basis {
                let p = v.dotc(&w);
                w -= v * p;
            }
        }
        let b = w.norm();
        if b < 1e-13 {
            residual = 0.0;
            break;
        }
        residual = b;
        if j + 1 == max_dim {
            break;
        }
        beta.push(b);
        basis.push(w / C64::new(b, 0.0));
    }
    basis.truncate(alpha.len());
    Lanczos {
        basis,
        alpha,
        beta,
        residual,
    }
}

/// `exp(-i T τ) e_1` for the tridiagonal `T`.
fn tridiagonal_exp(alpha: &[f64], beta: &[f64], tau: f64) -> DVector<C64> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let q = &eig.eigenvectors;
    DVector::from_fn(m, |r, _| {
        (0..m)
            .map(|k| C64::from_polar(q[(r, k)] * q[(0, k)], -eig.eigenvalues[k] * tau))
            .sum()
    })
}

fn krylov(h: &SparseHermitian, psi: &DVector<C64>, total: f64, tol: f64) -> Result<DVector<C64>> {
    let mut psi = psi.clone();
    let mut done = 0.0;
    let mut tau = total;
    while (total - done).abs() > 0.0 {
        let norm = psi.norm();
        let space = lanczos(h, &(&psi / C64::new(norm, 0.0)), KRYLOV_DIM.min(h.dim));
        let mut step = tau.abs().min((total - done).abs()) * total.signum();
        loop {
            let y = tridiagonal_exp(&space.alpha, &space.beta, step);
            let err = space.residual * y[y.len() - 1].norm() * norm;
            if err < tol {
                let mut next = DVector::zeros(psi.len());
                for (v, c) in space.basis.iter().zip(y.iter()) {
                    next += v * *c;
                }
                psi = next * C64::new(norm, 0.0);
                done += step;
                tau = step * 2.0;
                break;
            }
            step *= 0.5;
            if step.abs() < 1e-14 * total.abs().max(1.0) {
                return Err(Error::ConvergenceFailure(format!(
                    "Krylov estimate {err:e} above {tol:e} at t = {done}"
                )));
            }
        }
        if (total - done).abs() <= 1e-15 * total.abs() {
            break;
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> SparseHermitian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        SparseHermitian::from_rows((0..n).map(|r| (0..n).map(|c| (c, h[(r, c)])).collect()).collect())
    }

    fn random_state(n: usize, seed: u64) -> ManyBodyState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let n = v.norm();
        ManyBodyState::new(v / C64::new(n, 0.0))
    }

    #[test]
    fn zero_time_is_identity() {
        let h = random_hermitian(6, 1);
        let s = random_state(6, 2);
        assert_eq!(evolve_exact(&s, &h, 0.0, 1.0).unwrap(), s);
    }

    #[test]
    fn eigenvector_acquires_phase() {
        let h = random_hermitian(8, 3);
        let (vals, vecs) = hermitian_eigen(&h.to_dense());
        let s = ManyBodyState::new(vecs.column(2).into_owned());
        let t = 1.7;
        let out = evolve_exact(&s, &h, t, 1.3).unwrap();
        let expect = &s.coefficients * C64::from_polar(1.0, -vals[2] * t / 1.3);
        assert!((out.coefficients - expect).norm() < 1e-9);
    }

    #[test]
    fn krylov_agrees_with_dense() {
        let h = random_hermitian(20, 5);
        let s = random_state(20, 6);
        for t in [0.3, 2.0, -1.1] {
            let d = ExactPropagator::new(&h, 1.0, 1e-10, PropagationMethod::Dense)
                .evolve(&s, t)
                .unwrap();
            let k = ExactPropagator::new(&h, 1.0, 1e-10, PropagationMethod::Krylov)
                .evolve(&s, t)
                .unwrap();
            assert!((&d.coefficients - &k.coefficients).norm() < 1e-8);
            assert!((k.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let h = random_hermitian(4, 1);
        let s = ManyBodyState::new(DVector::from_element(4, C64::new(1.0, 0.0)));
        assert!(matches!(evolve_exact(&s, &h, 1.0, 1.0), Err(Error::Precondition(_))));
    }
}
