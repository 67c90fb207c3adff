//! Bounded two-body kernels `V(x; y)`, symmetric under exchange and
//! periodic in each argument.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::Grid;

/// Values of a kernel on grid × grid, constant on each pair of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    pub g1: usize,
    pub g2: usize,
    pub l1: f64,
    pub l2: f64,
    values: Arc<DMatrix<f64>>,
}

impl TabulatedKernel {
    pub fn new(grid: &Grid, values: DMatrix<f64>) -> Result<Self> {
        let p = grid.len();
        if values.nrows() != p || values.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "tabulated kernel is {}x{}, grid has {p} points",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table", "kernel contains non-finite values"));
        }
        Ok(Self {
            g1: grid.g1,
            g2: grid.g2,
            l1: grid.l1,
            l2: grid.l2,
            values: Arc::new(values),
        })
    }

    /// Samples `f(x, y)` on every pair of grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2], [f64; 2]) -> f64) -> Result<Self> {
        let p = grid.len();
        let values = DMatrix::from_fn(p, p, |a, b| f(grid.point(a), grid.point(b)));
        Self::new(grid, values)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    fn cell(&self, x: [f64; 2]) -> usize {
        let wrap = |v: f64, l: f64, g: usize| {
            let u = (v / l + 0.5).rem_euclid(1.0);
            ((u * g as f64).floor() as usize).min(g - 1)
        };
        wrap(x[0], self.l1, self.g1) * self.g2 + wrap(x[1], self.l2, self.g2)
    }

    fn asymmetry(&self) -> f64 {
        let v = &*self.values;
        let mut worst = 0.0f64;
        for a in 0..v.nrows() {
            for b in 0..a {
                worst = worst.max((v[(a, b)] - v[(b, a)]).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    /// `s · cos(k·x) · cos(k·y)` with `k = 2π(mode1/L1, mode2/L2)`.
    SeparableCosine {
        strength: f64,
        mode1: i64,
        mode2: i64,
    },
    /// `s · Σ_ℓ exp(-|x - y + ℓ∘L|² / 2σ²)`, the Gaussian periodized over the
    /// lattice of box translations.
    PeriodicGaussian {
        strength: f64,
        sigma: f64,
    },
    Tabulated(TabulatedKernel),
}

impl PotentialSpec {
    pub(crate) fn from_document<'a>(
        get: impl Fn(&str) -> Option<&'a str>,
        grid: &Grid,
        base: Option<&Path>,
    ) -> Result<Self> {
        let float = |key: &str, default: Option<f64>| -> Result<f64> {
            match get(key) {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(key, format!("`{v}` is not a decimal number"))),
                None => default.ok_or_else(|| Error::invalid(key, "missing required key in [potential]")),
            }
        };
        let int = |key: &str, default: i64| -> Result<i64> {
            match get(key) {
                Some(v) => v
                    .parse::<i64>()
                    .map_err(|_| Error::invalid(key, format!("`{v}` is not an integer"))),
                None => Ok(default),
            }
        };
        let kind = get("kind").unwrap_or("zero");
        let spec = match kind {
            "zero" => PotentialSpec::Zero,
            "separable-cosine" => PotentialSpec::SeparableCosine {
                strength: float("strength", None)?,
                mode1: int("mode1", 1)?,
                mode2: int("mode2", 0)?,
            },
            "periodic-gaussian" => PotentialSpec::PeriodicGaussian {
                strength: float("strength", None)?,
                sigma: float("sigma", None)?,
            },
            "tabulated" => {
                let rel = get("table").ok_or_else(|| Error::invalid("table", "tabulated potential needs `table`"))?;
                let path = match base {
                    Some(dir) => dir.join(rel),
                    None => Path::new(rel).to_path_buf(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                PotentialSpec::Tabulated(parse_table(&text, grid)?)
            }
            other => {
                return Err(Error::invalid(
                    "kind",
                    format!("unknown potential `{other}` (zero | separable-cosine | periodic-gaussian | tabulated)"),
                ))
            }
        };
        Ok(spec)
    }

    pub(crate) fn validate(&self, grid: &Grid) -> Result<()> {
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::SeparableCosine { strength, .. } => check_finite("strength", *strength),
            PotentialSpec::PeriodicGaussian { strength, sigma } => {
                check_finite("strength", *strength)?;
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::invalid("sigma", "must be positive"));
                }
                Ok(())
            }
            PotentialSpec::Tabulated(table) => {
                if table.g1 != grid.g1 || table.g2 != grid.g2 {
                    return Err(Error::invalid(
                        "table",
                        format!(
                            "tabulated on {}x{}, basis grid is {}x{}",
                            table.g1, table.g2, grid.g1, grid.g2
                        ),
                    ));
                }
                let asym = table.asymmetry();
                if asym > 1e-12 * self.sup_norm(grid.l1, grid.l2).max(1.0) {
                    return Err(Error::SymmetryViolation(asym));
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::SeparableCosine { strength, .. } | PotentialSpec::PeriodicGaussian { strength, .. } => {
                *strength == 0.0
            }
            PotentialSpec::Tabulated(t) => t.values.iter().all(|v| *v == 0.0),
        }
    }

    /// `V(x; y)`. Positions may lie outside the box; every kind is periodic.
    pub fn eval(&self, x: [f64; 2], y: [f64; 2], l1: f64, l2: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SeparableCosine { strength, mode1, mode2 } => {
                let k1 = 2.0 * PI * *mode1 as f64 / l1;
                let k2 = 2.0 * PI * *mode2 as f64 / l2;
                strength * (k1 * x[0] + k2 * x[1]).cos() * (k1 * y[0] + k2 * y[1]).cos()
            }
            PotentialSpec::PeriodicGaussian { strength, sigma } => {
                strength * periodized_gaussian([x[0] - y[0], x[1] - y[1]], *sigma, l1, l2)
            }
            PotentialSpec::Tabulated(t) => t.values[(t.cell(x), t.cell(y))],
        }
    }

    /// `‖V‖_∞` over `Λ × Λ` for a box of sides `l1 × l2`.
    pub fn sup_norm(&self, l1: f64, l2: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            // cos(k·x) reaches ±1 inside the box for every mode.
            PotentialSpec::SeparableCosine { strength, .. } => strength.abs(),
            // positive Fourier coefficients put the maximum at zero separation
            PotentialSpec::PeriodicGaussian { strength, sigma } => {
                strength.abs() * periodized_gaussian([0.0, 0.0], *sigma, l1, l2)
            }
            PotentialSpec::Tabulated(t) => t.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }

    /// `factor · V`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::SeparableCosine { strength, mode1, mode2 } => PotentialSpec::SeparableCosine {
                strength: strength * factor,
                mode1: *mode1,
                mode2: *mode2,
            },
            PotentialSpec::PeriodicGaussian { strength, sigma } => PotentialSpec::PeriodicGaussian {
                strength: strength * factor,
                sigma: *sigma,
            },
            PotentialSpec::Tabulated(t) => PotentialSpec::Tabulated(TabulatedKernel {
                values: Arc::new(&*t.values * factor),
                ..t.clone()
            }),
        }
    }

    /// Kernel sampled on grid × grid.
    pub fn sample_matrix(&self, grid: &Grid) -> DMatrix<f64> {
        match self {
            PotentialSpec::Tabulated(t) if t.g1 == grid.g1 && t.g2 == grid.g2 => (*t.values).clone(),
            _ => {
                let p = grid.len();
                DMatrix::from_fn(p, p, |a, b| self.eval(grid.point(a), grid.point(b), grid.l1, grid.l2))
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PotentialSpec::Zero => "zero",
            PotentialSpec::SeparableCosine { .. } => "separable-cosine",
            PotentialSpec::PeriodicGaussian { .. } => "periodic-gaussian",
            PotentialSpec::Tabulated(_) => "tabulated",
        }
    }
}

fn check_finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(key, "must be finite"))
    }
}

/// `Σ_ℓ exp(-|r + ℓ∘L|² / 2σ²)` over `ℓ ∈ Z²`.
pub fn periodized_gaussian(r: [f64; 2], sigma: f64, l1: f64, l2: f64) -> f64 {
    let reduce = |v: f64, l: f64| v - l * (v / l).round();
    let r1 = reduce(r[0], l1);
    let r2 = reduce(r[1], l2);
    // exp(-x²/2σ²) < 1e-18 once x > 9.1σ
    let reach = |l: f64| (9.2 * sigma / l).ceil() as i64 + 1;
    let (n1, n2) = (reach(l1), reach(l2));
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut sum = 0.0;
    for a in -n1..=n1 {
        let d1 = r1 + a as f64 * l1;
        let e1 = (-d1 * d1 * inv).exp();
        if e1 == 0.0 {
            continue;
        }
        for b in -n2..=n2 {
            let d2 = r2 + b as f64 * l2;
            sum += e1 * (-d2 * d2 * inv).exp();
        }
    }
    sum
}

fn parse_table(text: &str, grid: &Grid) -> Result<TabulatedKernel> {
    let p = grid.len();
    let mut values = Vec::with_capacity(p * p);
    for (row, line) in text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .enumerate()
    {
        let before = values.len();
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            values.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::invalid("table", format!("row {row}: `{tok}` is not a number")))?,
            );
        }
        if values.len() - before != p {
            return Err(Error::invalid(
                "table",
                format!("row {row} has {} values, expected {p}", values.len() - before),
            ));
        }
    }
    if values.len() != p * p {
        return Err(Error::invalid(
            "table",
            format!("expected {p} rows, found {}", values.len() / p.max(1)),
        ));
    }
    TabulatedKernel::new(grid, DMatrix::from_row_slice(p, p, &values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainConfig;

    fn grid() -> Grid {
        Grid::new(6, 5, &DomainConfig::square_unit_field(2)).unwrap()
    }

    #[test]
    fn analytic_kernels_are_symmetric_on_grid() {
        let g = grid();
        for spec in [
            PotentialSpec::SeparableCosine {
                strength: 0.3,
                mode1: 1,
                mode2: 2,
            },
            PotentialSpec::PeriodicGaussian {
                strength: -0.7,
                sigma: 0.6,
            },
        ] {
            let m = spec.sample_matrix(&g);
            assert!((&m - m.transpose()).amax() < 1e-15);
            assert!(m.amax() <= spec.sup_norm(g.l1, g.l2) + 1e-15);
        }
    }

    #[test]
    fn periodized_gaussian_is_periodic_and_peaks_at_origin() {
        let (l1, l2, s) = (3.0, 4.0, 0.9);
        let w0 = periodized_gaussian([0.0, 0.0], s, l1, l2);
        for r in [[0.3, -1.2], [1.4, 2.0], [-1.5, 1.9]] {
            let w = periodized_gaussian(r, s, l1, l2);
            assert!(w < w0);
            let shifted = periodized_gaussian([r[0] + 2.0 * l1, r[1] - l2], s, l1, l2);
            assert!((w - shifted).abs() < 1e-14);
        }
    }

    #[test]
    fn table_round_trip_and_symmetry_check() {
        let g = grid();
        let spec = PotentialSpec::PeriodicGaussian {
            strength: 1.0,
            sigma: 0.5,
        };
        let m = spec.sample_matrix(&g);
        let text: String = m
            .row_iter()
            .map(|r| r.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(",") + "\n")
            .collect();
        let t = parse_table(&text, &g).unwrap();
        assert_eq!(t.values(), &m);
        let tab = PotentialSpec::Tabulated(t);
        tab.validate(&g).unwrap();
        // piecewise-constant lookup reproduces the sampled values at grid points
        assert_eq!(tab.eval(g.point(4), g.point(17), g.l1, g.l2), m[(4, 17)]);

        let mut bad = m.clone();
        bad[(0, 1)] += 1e-3;
        let bad = PotentialSpec::Tabulated(TabulatedKernel::new(&g, bad).unwrap());
        assert!(matches!(bad.validate(&g), Err(Error::SymmetryViolation(_))));
    }
}
