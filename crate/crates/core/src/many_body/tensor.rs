use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::landau::OrbitalSet;
use crate::model::Grid;
use crate::potential::PotentialSpec;
use crate::C64;

/// Two-body matrix elements `v[α,β,γ,δ] = ⟨φ_α ⊗ φ_β | V₁₂ | φ_γ ⊗ φ_δ⟩`,
/// stored densely with `δ` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTensor {
    pub k: usize,
    data: Vec<C64>,
}

impl InteractionTensor {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            data: vec![C64::new(0.0, 0.0); k.pow(4)],
        }
    }

    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize, usize, usize) -> C64) -> Self {
        let mut t = Self::zeros(k);
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        t.data[((a * k + b) * k + c) * k + d] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        self.data[((a * self.k + b) * self.k + c) * self.k + d]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == C64::new(0.0, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Largest `|v[α,β,γ,δ] - v[β,α,δ,γ]|`.
    pub fn exchange_deviation(&self) -> f64 {
        self.worst(|a, b, c, d| self.get(b, a, d, c))
    }

    /// Largest `|v[α,β,γ,δ] - conj v[γ,δ,α,β]|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.worst(|a, b, c, d| self.get(c, d, a, b).conj())
    }

    fn worst(&self, partner: impl Fn(usize, usize, usize, usize) -> C64) -> f64 {
        let k = self.k;
        let mut worst = 0.0f64;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        worst = worst.max((self.get(a, b, c, d) - partner(a, b, c, d)).norm());
                    }
                }
            }
        }
        worst
    }

    /// Averages over the exchange and Hermitian-conjugation images.
    pub fn symmetrized(&self) -> Self {
        let k = self.k;
        Self::from_fn(k, |a, b, c, d| {
            (self.get(a, b, c, d) + self.get(b, a, d, c) + self.get(c, d, a, b).conj() + self.get(d, c, b, a).conj())
                * 0.25
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            k: self.k,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Assembles the tensor for `potential` over the orbitals of `set`.
pub fn two_body_tensor(potential: &PotentialSpec, set: &OrbitalSet) -> Result<InteractionTensor> {
    let k = set.len();
    let grid = set.grid;
    let raw = match potential {
        PotentialSpec::Zero => return Ok(InteractionTensor::zeros(k)),
        PotentialSpec::SeparableCosine { strength, mode1, mode2 } => {
            let k1 = 2.0 * PI * *mode1 as f64 / grid.l1;
            let k2 = 2.0 * PI * *mode2 as f64 / grid.l2;
            let g: Vec<f64> = grid.points().map(|x| (k1 * x[0] + k2 * x[1]).cos()).collect();
            let a = one_body_matrix(set, &g);
            InteractionTensor::from_fn(k, |p, q, r, s| a[(p, r)] * a[(q, s)] * *strength)
        }
        PotentialSpec::PeriodicGaussian { strength, sigma } => fourier_tensor(set, *strength, *sigma),
        PotentialSpec::Tabulated(_) => two_body_tensor_raw(&potential.sample_matrix(&grid), set),
    };
    finish(raw, potential.sup_norm(grid.l1, grid.l2))
}

/// Quadrature against an explicit kernel matrix on grid × grid.
pub fn two_body_tensor_from_kernel(kernel: &DMatrix<f64>, set: &OrbitalSet) -> Result<InteractionTensor> {
    if kernel.nrows() != set.grid.len() || kernel.ncols() != set.grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "kernel is {}x{}, grid has {} points",
            kernel.nrows(),
            kernel.ncols(),
            set.grid.len()
        )));
    }
    let sup = kernel.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let asymmetry = (kernel - kernel.transpose()).amax();
    if asymmetry >= 1e-8 * sup.max(1.0) {
        return Err(Error::SymmetryViolation(asymmetry));
    }
    finish(two_body_tensor_raw(kernel, set), sup)
}

fn finish(raw: InteractionTensor, sup: f64) -> Result<InteractionTensor> {
    let deviation = raw.exchange_deviation().max(raw.hermiticity_deviation());
    if deviation >= 1e-8 * sup.max(1.0) {
        return Err(Error::SymmetryViolation(deviation));
    }
    Ok(raw.symmetrized())
}

/// Pair densities `ρ_{αγ}(x) = conj φ_α(x) φ_γ(x)`, one column per `(α, γ)`.
fn pair_densities(set: &OrbitalSet) -> Vec<Vec<C64>> {
    let k = set.len();
    (0..k * k)
        .into_par_iter()
        .map(|ac| {
            let (fa, fc) = (&set.orbitals[ac / k].values, &set.orbitals[ac % k].values);
            fa.iter().zip(fc).map(|(a, c)| a.conj() * c).collect()
        })
        .collect()
}

/// `A[α,γ] = ⟨φ_α | g φ_γ⟩`.
fn one_body_matrix(set: &OrbitalSet, g: &[f64]) -> DMatrix<C64> {
    let k = set.len();
    let w = set.grid.weight();
    let entries: Vec<C64> = (0..k * k)
        .into_par_iter()
        .map(|ac| {
            let (fa, fc) = (&set.orbitals[ac / k].values, &set.orbitals[ac % k].values);
            fa.iter()
                .zip(fc)
                .zip(g)
                .map(|((a, c), gx)| a.conj() * c * *gx)
                .sum::<C64>()
                * w
        })
        .collect();
    DMatrix::from_row_slice(k, k, &entries)
}

fn two_body_tensor_raw(kernel: &DMatrix<f64>, set: &OrbitalSet) -> InteractionTensor {
    let k = set.len();
    let p = set.grid.len();
    let w = set.grid.weight();
    let rho = pair_densities(set);
    let re = DMatrix::from_fn(p, k * k, |x, ac| rho[ac][x].re);
    let im = DMatrix::from_fn(p, k * k, |x, ac| rho[ac][x].im);
    let (vre, vim) = (kernel * &re, kernel * &im);
    // v[(αγ),(βδ)] = Σ_x ρ_αγ(x) (Vρ_βδ)(x) w²
    let rr = re.transpose() * &vre - im.transpose() * &vim;
    let ri = re.transpose() * &vim + im.transpose() * &vre;
    InteractionTensor::from_fn(k, |a, b, c, d| {
        C64::new(rr[(a * k + c, b * k + d)], ri[(a * k + c, b * k + d)]) * (w * w)
    })
}

/// Periodic Gaussian through its Fourier series,
/// `v = Σ_q ŵ_q R_αγ(-q) R_βδ(q)` with `R(q) = ∫ ρ e^{-iq·x}` and
/// `ŵ_q = s·2πσ²/(L1L2)·e^{-σ²|q|²/2}`.
fn fourier_tensor(set: &OrbitalSet, strength: f64, sigma: f64) -> InteractionTensor {
    let grid = set.grid;
    let k = set.len();
    let rho = pair_densities(set);
    let spectra: Vec<Vec<C64>> = rho.into_par_iter().map(|r| fft2(&grid, r)).collect();
    let modes = retained_modes(&grid, strength, sigma);
    let w = grid.weight();
    let x0 = [grid.x1(0), grid.x2(0)];
    // R(q) for the retained modes, as (minus q, plus q) pairs
    let sampled: Vec<(Vec<C64>, Vec<C64>)> = spectra
        .par_iter()
        .map(|s| {
            let at = |k1: i64, k2: i64| {
                let idx = k1.rem_euclid(grid.g1 as i64) as usize * grid.g2 + k2.rem_euclid(grid.g2 as i64) as usize;
                let q = [2.0 * PI * k1 as f64 / grid.l1, 2.0 * PI * k2 as f64 / grid.l2];
                s[idx] * C64::from_polar(w, -(q[0] * x0[0] + q[1] * x0[1]))
            };
            let minus = modes.iter().map(|&(k1, k2, _)| at(-k1, -k2)).collect();
            let plus = modes.iter().map(|&(k1, k2, _)| at(k1, k2)).collect();
            (minus, plus)
        })
        .collect();
    let rows: Vec<Vec<C64>> = (0..k * k)
        .into_par_iter()
        .map(|ac| {
            let minus = &sampled[ac].0;
            (0..k * k)
                .map(|bd| {
                    let plus = &sampled[bd].1;
                    modes.iter().enumerate().map(|(i, m)| minus[i] * plus[i] * m.2).sum()
                })
                .collect()
        })
        .collect();
    InteractionTensor::from_fn(k, |a, b, c, d| rows[a * k + c][b * k + d])
}

fn retained_modes(grid: &Grid, strength: f64, sigma: f64) -> Vec<(i64, i64, f64)> {
    let pref = strength * 2.0 * PI * sigma * sigma / (grid.l1 * grid.l2);
    let half1 = (grid.g1 as i64 - 1) / 2;
    let half2 = (grid.g2 as i64 - 1) / 2;
    let mut modes = Vec::new();
    for k1 in -half1..=half1 {
        for k2 in -half2..=half2 {
            let q1 = 2.0 * PI * k1 as f64 / grid.l1;
            let q2 = 2.0 * PI * k2 as f64 / grid.l2;
            let decay = 0.5 * sigma * sigma * (q1 * q1 + q2 * q2);
            if decay < 45.0 {
                modes.push((k1, k2, pref * (-decay).exp()));
            }
        }
    }
    modes
}

fn fft2(grid: &Grid, mut data: Vec<C64>) -> Vec<C64> {
    let mut planner = FftPlanner::<f64>::new();
    let rows = planner.plan_fft_forward(grid.g2);
    for row in data.chunks_exact_mut(grid.g2) {
        rows.process(row);
    }
    let cols = planner.plan_fft_forward(grid.g1);
    let mut column = vec![C64::new(0.0, 0.0); grid.g1];
    for j in 0..grid.g2 {
        for i in 0..grid.g1 {
            column[i] = data[i * grid.g2 + j];
        }
        cols.process(&mut column);
        for i in 0..grid.g1 {
            data[i * grid.g2 + j] = column[i];
        }
    }
    data
}
