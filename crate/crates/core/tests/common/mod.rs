#![allow(dead_code)]

use landau_hf::linalg::lowdin;
use landau_hf::many_body::InteractionTensor;
use landau_hf::model::parse_config;
use landau_hf::{SimulationConfig, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<C64> {
    let mut r = rng(seed);
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    })
}

pub fn random_orthonormal(rows: usize, cols: usize, seed: u64) -> DMatrix<C64> {
    lowdin(&random_matrix(rows, cols, seed)).0
}

/// A tensor with the symmetries of a real symmetric two-body kernel.
pub fn random_tensor(k: usize, scale: f64, seed: u64) -> InteractionTensor {
    let mut r = rng(seed);
    InteractionTensor::from_fn(k, |_, _, _, _| {
        C64::new(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
    })
    .symmetrized()
}

/// All permutations of `0..n` with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out.into_iter()
        .map(|p| {
            let mut inversions = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            (p, if inversions % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect()
}

/// Square box with `b = 1`.
pub fn config(m: usize, n_max: usize, particles: usize, grid: usize, extra: &str) -> SimulationConfig {
    let side = (2.0 * std::f64::consts::PI * m as f64).sqrt();
    let text = format!(
        "[domain]\nL1 = {side}\nL2 = {side}\nM = {m}\n[basis]\nn_max = {n_max}\nN = {particles}\ngrid1 = {grid}\n{extra}"
    );
    parse_config(&text).unwrap()
}

pub trait MaxAbs {
    /// Largest entry modulus.
    fn max_abs(&self) -> f64;
}

impl MaxAbs for DMatrix<C64> {
    fn max_abs(&self) -> f64 {
        self.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}
