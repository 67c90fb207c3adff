//! Normalized Hermite functions `h_n(z) = (√π 2ⁿ n!)^{-1/2} e^{-z²/2} H_n(z)`.
//!
//! Values come from the three-term recurrence on the normalized functions,
//!
//! ```text
//! h_{n+1}(z) = √(2/(n+1)) z h_n(z) - √(n/(n+1)) h_{n-1}(z),
//! ```
//!
//! which never forms `n!` or `2ⁿ` and stays in range for large degrees.

use crate::error::{Error, Result};

const PI_QUARTER_ROOT_INV: f64 = 0.751_125_544_464_942_5;

#[derive(Debug, Clone, Copy)]
pub struct HermiteEvaluator {
    max_degree: usize,
}

impl HermiteEvaluator {
    pub fn new(max_degree: usize) -> Self {
        Self { max_degree }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn value(&self, n: usize, z: f64) -> Result<f64> {
        if n > self.max_degree {
            return Err(Error::DegreeOutOfRange {
                degree: n,
                max: self.max_degree,
            });
        }
        Ok(hermite_function(n, z))
    }

    /// Fills `out[k] = h_k(z)` for `k ≤ min(max_degree, out.len() - 1)`.
    pub fn values(&self, z: f64, out: &mut [f64]) {
        let top = self.max_degree.min(out.len().saturating_sub(1));
        fill(z, &mut out[..=top]);
    }
}

fn fill(z: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI_QUARTER_ROOT_INV * (-0.5 * z * z).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * z * out[0];
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * z * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// `h_n(z)` without a degree bound.
pub fn hermite_function(n: usize, z: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI_QUARTER_ROOT_INV * (-0.5 * z * z).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Smallest `z*` with `|h_n(z)| < rel_tol · max|h_n|` for all `|z| ≥ z*`.
pub fn tail_radius(n: usize, rel_tol: f64) -> f64 {
    let turning = (2.0 * n as f64 + 1.0).sqrt();
    let step = 1e-3;
    let mut peak = 0.0f64;
    let mut z = 0.0;
    while z <= turning + 1.0 {
        peak = peak.max(hermite_function(n, z).abs());
        z += step;
    }
    // |h_n| decreases monotonically outside the classically allowed region
    let mut z = turning;
    while hermite_function(n, z).abs() >= rel_tol * peak {
        z += 0.01;
    }
    z
}
