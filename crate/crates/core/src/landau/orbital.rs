use std::f64::consts::PI;

use rayon::prelude::*;

use super::hermite::{hermite_function, tail_radius};
use crate::error::{Error, Result};
use crate::model::{DomainConfig, Grid, PhysicalConstants};
use crate::C64;

/// Relative size of the dropped Gaussian tail in the lattice sum.
pub const TAIL_TOLERANCE: f64 = 1e-14;

/// Exact values on the four box edges, sampled at the grid coordinates of the
/// other axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    /// `f(-L1/2, x2_j)`
    pub left: Vec<C64>,
    /// `f(L1/2, x2_j)`
    pub right: Vec<C64>,
    /// `f(x1_i, -L2/2)`
    pub bottom: Vec<C64>,
    /// `f(x1_i, L2/2)`
    pub top: Vec<C64>,
}

/// A complex field sampled at the cell midpoints of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalField {
    pub grid: Grid,
    pub values: Vec<C64>,
    /// Landau labels `(n, m)` for basis orbitals.
    pub label: Option<(usize, usize)>,
    pub trace: Option<BoundaryTrace>,
}

impl OrbitalField {
    pub fn from_values(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch(grid.len(), values.len()));
        }
        Ok(Self {
            grid,
            values,
            label: None,
            trace: None,
        })
    }

    /// Samples `f` on the grid and records its exact boundary trace.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> C64 + Sync) -> Self {
        let values: Vec<C64> = (0..grid.len()).into_par_iter().map(|idx| f(grid.point(idx))).collect();
        let (h1, h2) = (0.5 * grid.l1, 0.5 * grid.l2);
        let trace = BoundaryTrace {
            left: (0..grid.g2).map(|j| f([-h1, grid.x2(j)])).collect(),
            right: (0..grid.g2).map(|j| f([h1, grid.x2(j)])).collect(),
            bottom: (0..grid.g1).map(|i| f([grid.x1(i), -h2])).collect(),
            top: (0..grid.g1).map(|i| f([grid.x1(i), h2])).collect(),
        };
        Self {
            grid,
            values,
            label: None,
            trace: Some(trace),
        }
    }

    pub fn with_label(mut self, n: usize, m: usize) -> Self {
        self.label = Some((n, m));
        self
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[self.grid.index(i, j)]
    }

    /// Discrete `L²` norm.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.weight()).sqrt()
    }

    /// `max |f - g|` over grid points.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm())))
    }
}

/// `b^{1/4} h_n(√b (x1 - k2/b))`.
pub fn infinite_volume_profile(n: usize, k2: f64, x1: f64, b: f64) -> f64 {
    b.powf(0.25) * hermite_function(n, b.sqrt() * (x1 - k2 / b))
}

/// `e^{i k2 x2} b^{1/4} h_n(√b (x1 - k2/b))`.
pub fn infinite_volume_orbital(n: usize, k2: f64, x: [f64; 2], b: f64) -> C64 {
    C64::from_polar(infinite_volume_profile(n, k2, x[0], b), k2 * x[1])
}

/// The finite-volume eigenfunction `φ_{n,m}` as a lattice sum over magnetic
/// translations of `φ^∞_{n, 2πm/L2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauOrbital {
    pub n: usize,
    pub m: usize,
    b: f64,
    l1: f64,
    l2: f64,
    flux_quanta: usize,
    cut: usize,
}

impl LandauOrbital {
    pub fn new(
        n: usize,
        m: usize,
        constants: &PhysicalConstants,
        domain: &DomainConfig,
        lattice_cut: Option<usize>,
    ) -> Result<Self> {
        if m >= domain.flux_quanta {
            return Err(Error::invalid(
                "m",
                format!("degeneracy index {m} must be below M = {}", domain.flux_quanta),
            ));
        }
        let b = constants.b();
        let required = Self::required_cut(n, b, domain.l1);
        let cut = match lattice_cut {
            Some(c) if c < required => {
                return Err(Error::TruncationTooSmall(format!(
                    "lattice_cut {c} leaves a tail above {TAIL_TOLERANCE:e} for n = {n}; need at least {required}"
                )))
            }
            Some(c) => c,
            None => required,
        };
        Ok(Self {
            n,
            m,
            b,
            l1: domain.l1,
            l2: domain.l2,
            flux_quanta: domain.flux_quanta,
            cut,
        })
    }

    /// Smallest cut for which every omitted summand is below the tail
    /// tolerance, given a sum centred on the nearest lattice image.
    pub fn required_cut(n: usize, b: f64, l1: f64) -> usize {
        let z = tail_radius(n, TAIL_TOLERANCE);
        (z / (b.sqrt() * l1) - 0.5).ceil().max(0.0) as usize
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn eval(&self, x: [f64; 2]) -> C64 {
        let mf = self.flux_quanta as f64;
        let shift = self.m as f64 / mf;
        let centre = (shift - x[0] / self.l1).round() as i64;
        let cut = self.cut as i64;
        let sb = self.b.sqrt();
        let mut sum = C64::new(0.0, 0.0);
        for l in (centre - cut)..=(centre + cut) {
            let h = hermite_function(self.n, sb * (x[0] + (l as f64 - shift) * self.l1));
            let k = 2.0 * PI * (self.m as f64 - mf * l as f64) / self.l2;
            sum += C64::from_polar(h, k * x[1]);
        }
        sum * (self.b.powf(0.25) / self.l2.sqrt())
    }

    pub fn field(&self, grid: &Grid) -> OrbitalField {
        OrbitalField::from_fn(*grid, |x| self.eval(x)).with_label(self.n, self.m)
    }
}

/// `φ_{n,m}` sampled on `grid`.
pub fn finite_volume_orbital(
    n: usize,
    m: usize,
    grid: &Grid,
    constants: &PhysicalConstants,
    domain: &DomainConfig,
    lattice_cut: Option<usize>,
) -> Result<OrbitalField> {
    if grid.l1 != domain.l1 || grid.l2 != domain.l2 {
        return Err(Error::GridMismatch);
    }
    Ok(LandauOrbital::new(n, m, constants, domain, lattice_cut)?.field(grid))
}

/// Value of `f` at grid index `(i, j)` extended beyond the box by the
/// magnetic-periodic conditions.
#[inline]
pub(crate) fn wrapped(field: &OrbitalField, b: f64, i: isize, j: isize) -> C64 {
    let g = &field.grid;
    let k1 = i.div_euclid(g.g1 as isize);
    let ii = i.rem_euclid(g.g1 as isize) as usize;
    let jj = j.rem_euclid(g.g2 as isize) as usize;
    let v = field.values[g.index(ii, jj)];
    if k1 == 0 {
        v
    } else {
        v * C64::from_polar(1.0, k1 as f64 * b * g.l1 * g.x2(jj))
    }
}

/// `(T^m_a f)(x) = e^{-i b a1 x2} f(x + a)` for a displacement that is a
/// whole number of cells along each axis.
pub fn magnetic_translate(field: &OrbitalField, a: [f64; 2], constants: &PhysicalConstants) -> Result<OrbitalField> {
    let g = field.grid;
    let cells = |d: f64, h: f64| -> Option<isize> {
        let s = d / h;
        let r = s.round();
        ((s - r).abs() <= 1e-9 * r.abs().max(1.0)).then_some(r as isize)
    };
    let (s1, s2) = match (cells(a[0], g.h1()), cells(a[1], g.h2())) {
        (Some(s1), Some(s2)) => (s1, s2),
        _ => return Err(Error::OffGridDisplacement(a[0], a[1])),
    };
    let b = constants.b();
    let values = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / g.g2, idx % g.g2);
            let x2 = g.x2(j);
            C64::from_polar(1.0, -b * a[0] * x2) * wrapped(field, b, i as isize + s1, j as isize + s2)
        })
        .collect();
    OrbitalField::from_values(g, values)
}

/// Boundary mismatch of the magnetic-periodic conditions, per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcResidual {
    /// `max_j |f(-L1/2, x2_j) - e^{-i b L1 x2_j} f(L1/2, x2_j)|`
    pub x1: f64,
    /// `max_i |f(x1_i, -L2/2) - f(x1_i, L2/2)|`
    pub x2: f64,
}

impl BcResidual {
    pub fn max(&self) -> f64 {
        self.x1.max(self.x2)
    }
}

/// Uses the exact boundary trace when present, otherwise extrapolates the
/// samples to the edges with six-point one-sided Lagrange stencils.
pub fn check_magnetic_bc(field: &OrbitalField, constants: &PhysicalConstants) -> BcResidual {
    let g = &field.grid;
    let b = constants.b();
    let owned;
    let trace = match &field.trace {
        Some(t) => t,
        None => {
            owned = extrapolated_trace(field);
            &owned
        }
    };
    let x1 = (0..g.g2).fold(0.0f64, |m, j| {
        let phase = C64::from_polar(1.0, -b * g.l1 * g.x2(j));
        m.max((trace.left[j] - phase * trace.right[j]).norm())
    });
    let x2 = (0..g.g1).fold(0.0f64, |m, i| m.max((trace.bottom[i] - trace.top[i]).norm()));
    BcResidual { x1, x2 }
}

fn extrapolated_trace(field: &OrbitalField) -> BoundaryTrace {
    let g = &field.grid;
    let k1 = EDGE_NODES.min(g.g1);
    let k2 = EDGE_NODES.min(g.g2);
    let wa = edge_weights_n(k1);
    let wb = edge_weights_n(k2);
    BoundaryTrace {
        left: (0..g.g2)
            .map(|j| (0..k1).map(|k| field.at(k, j) * wa[k]).sum())
            .collect(),
        right: (0..g.g2)
            .map(|j| (0..k1).map(|k| field.at(g.g1 - 1 - k, j) * wa[k]).sum())
            .collect(),
        bottom: (0..g.g1)
            .map(|i| (0..k2).map(|k| field.at(i, k) * wb[k]).sum())
            .collect(),
        top: (0..g.g1)
            .map(|i| (0..k2).map(|k| field.at(i, g.g2 - 1 - k) * wb[k]).sum())
            .collect(),
    }
}

const EDGE_NODES: usize = 6;

/// Lagrange weights evaluating at 0 the interpolant through nodes `k + ½`.
fn edge_weights_n(count: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (0..count).map(|k| k as f64 + 0.5).collect();
    (0..count)
        .map(|k| {
            (0..count)
                .filter(|&j| j != k)
                .map(|j| -nodes[j] / (nodes[k] - nodes[j]))
                .product()
        })
        .collect()
}
