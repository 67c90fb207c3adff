//! Physical constants, torus geometry, the midpoint quadrature grid and the
//! simulation configuration.
//!
//! The reduced field `b = qB/(ħc)` is never read from input: it is derived from
//! the flux quantum number `M` and the box as `b = 2πM/(L1·L2)`, so every
//! accepted configuration satisfies flux quantization by construction.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::landau::OrbitalField;
use crate::potential::PotentialSpec;
use crate::C64;

/// Physical constants of a charged particle in a uniform perpendicular field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
    pub light_speed: f64,
    /// Magnetic field strength `B`.
    pub field: f64,
    reduced_field: f64,
}

impl PhysicalConstants {
    /// Derives `B` from the flux quantum number of `domain`.
    pub fn derive(hbar: f64, mass: f64, charge: f64, light_speed: f64, domain: &DomainConfig) -> Result<Self> {
        for (key, value) in [
            ("hbar", hbar),
            ("mass", mass),
            ("charge", charge),
            ("light_speed", light_speed),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(key, format!("must be finite and positive, got {value}")));
            }
        }
        let reduced_field = domain.reduced_field();
        let field = reduced_field * hbar * light_speed / charge;
        Ok(Self {
            hbar,
            mass,
            charge,
            light_speed,
            field,
            reduced_field,
        })
    }

    /// Unit system ħ = m = q = c = 1 on the given torus.
    pub fn natural(domain: &DomainConfig) -> Self {
        Self::derive(1.0, 1.0, 1.0, 1.0, domain).expect("unit constants are valid")
    }

    /// `b = qB/(ħc)`, the inverse squared magnetic length.
    pub fn b(&self) -> f64 {
        self.reduced_field
    }

    /// `ω_c = ħb/m`.
    pub fn cyclotron_frequency(&self) -> f64 {
        self.hbar * self.reduced_field / self.mass
    }

    pub fn magnetic_length(&self) -> f64 {
        1.0 / self.reduced_field.sqrt()
    }

    /// Returns a copy with a different Planck constant, keeping `b` fixed.
    pub fn with_hbar(&self, hbar: f64) -> Self {
        Self {
            hbar,
            field: self.reduced_field * hbar * self.light_speed / self.charge,
            ..*self
        }
    }
}

/// The box `Λ = [-L1/2, L1/2] × [-L2/2, L2/2]` threaded by `M` flux quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainConfig {
    pub l1: f64,
    pub l2: f64,
    pub flux_quanta: usize,
}

impl DomainConfig {
    pub fn new(l1: f64, l2: f64, flux_quanta: usize) -> Result<Self> {
        if !(l1.is_finite() && l1 > 0.0) {
            return Err(Error::invalid("L1", format!("must be positive, got {l1}")));
        }
        if !(l2.is_finite() && l2 > 0.0) {
            return Err(Error::invalid("L2", format!("must be positive, got {l2}")));
        }
        if flux_quanta == 0 {
            return Err(Error::invalid("M", "must be at least 1"));
        }
        Ok(Self { l1, l2, flux_quanta })
    }

    /// Square box with `b = 1`.
    pub fn square_unit_field(flux_quanta: usize) -> Self {
        let side = (2.0 * PI * flux_quanta as f64).sqrt();
        Self {
            l1: side,
            l2: side,
            flux_quanta,
        }
    }

    /// `2πM/(L1·L2)`.
    pub fn reduced_field(&self) -> f64 {
        2.0 * PI * self.flux_quanta as f64 / (self.l1 * self.l2)
    }

    pub fn area(&self) -> f64 {
        self.l1 * self.l2
    }
}

/// Uniform cell-midpoint grid on the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub g1: usize,
    pub g2: usize,
    pub l1: f64,
    pub l2: f64,
}

impl Grid {
    pub fn new(g1: usize, g2: usize, domain: &DomainConfig) -> Result<Self> {
        if g1 == 0 {
            return Err(Error::invalid("grid1", "must be positive"));
        }
        if g2 == 0 {
            return Err(Error::invalid("grid2", "must be positive"));
        }
        Ok(Self {
            g1,
            g2,
            l1: domain.l1,
            l2: domain.l2,
        })
    }

    pub fn len(&self) -> usize {
        self.g1 * self.g2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h1(&self) -> f64 {
        self.l1 / self.g1 as f64
    }

    pub fn h2(&self) -> f64 {
        self.l2 / self.g2 as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        -0.5 * self.l1 + (i as f64 + 0.5) * self.h1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        -0.5 * self.l2 + (j as f64 + 0.5) * self.h2()
    }

    /// Flat index; x1 is the slow axis.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.g2 + j
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.x1(idx / self.g2), self.x2(idx % self.g2)]
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(move |idx| self.point(idx))
    }

    pub fn weight(&self) -> f64 {
        self.l1 * self.l2 / (self.g1 * self.g2) as f64
    }

    /// Same box, twice the points along each axis.
    pub fn refined(&self) -> Self {
        Self {
            g1: 2 * self.g1,
            g2: 2 * self.g2,
            ..*self
        }
    }
}

/// Discrete `L²(Λ)` inner product, conjugate-linear in `f`.
pub fn inner_product(f: &OrbitalField, g: &OrbitalField) -> Result<C64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    Ok(inner_product_values(&f.values, &g.values) * f.grid.weight())
}

pub(crate) fn inner_product_values(f: &[C64], g: &[C64]) -> C64 {
    f.iter().zip(g).map(|(a, b)| a.conj() * b).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorScheme {
    Rk4,
    Rk4Reorth,
}

impl std::str::FromStr for IntegratorScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rk4" => Ok(Self::Rk4),
            "rk4+reorth" => Ok(Self::Rk4Reorth),
            other => Err(Error::invalid(
                "integrator",
                format!("unknown scheme `{other}` (rk4 | rk4+reorth)"),
            )),
        }
    }
}

impl std::fmt::Display for IntegratorScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Rk4 => "rk4",
            Self::Rk4Reorth => "rk4+reorth",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest Frobenius deviation of the orbital Gram matrix from identity.
    pub gram: f64,
    pub krylov: f64,
    pub max_determinants: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gram: 1e-8,
            krylov: 1e-10,
            max_determinants: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub constants: PhysicalConstants,
    pub domain: DomainConfig,
    pub n_max: usize,
    pub particles: usize,
    pub potential: PotentialSpec,
    pub grid1: usize,
    pub grid2: usize,
    pub dt: f64,
    pub t_final: f64,
    pub integrator: IntegratorScheme,
    /// Lattice-sum cutoff for the finite-volume orbitals; `None` picks the
    /// Gaussian-tail bound per orbital.
    pub lattice_cut: Option<usize>,
    /// Record every `sample_every` integrator steps.
    pub sample_every: usize,
    pub tolerances: Tolerances,
}

impl SimulationConfig {
    /// Single-particle dimension `(n_max + 1)·M`.
    pub fn single_particle_dim(&self) -> usize {
        (self.n_max + 1) * self.domain.flux_quanta
    }

    pub fn grid(&self) -> Grid {
        Grid {
            g1: self.grid1,
            g2: self.grid2,
            l1: self.domain.l1,
            l2: self.domain.l2,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        let k = self.single_particle_dim();
        if self.particles > k {
            return Err(Error::invalid(
                "N",
                format!("{} particles do not fit in (n_max+1)*M = {k} orbitals", self.particles),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::invalid("t_final", "must be non-negative"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every", "must be at least 1"));
        }
        if self.grid1 == 0 || self.grid2 == 0 {
            return Err(Error::invalid("grid1", "grid sizes must be positive"));
        }
        self.potential.validate(&self.grid())
    }
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("constants", &["hbar", "mass", "charge", "light_speed"]),
    ("domain", &["L1", "L2", "M"]),
    (
        "basis",
        &[
            "n_max",
            "N",
            "grid1",
            "grid2",
            "lattice_cut",
            "gram_tol",
            "max_determinants",
        ],
    ),
    (
        "dynamics",
        &["dt", "t_final", "integrator", "sample_every", "krylov_tol"],
    ),
    ("potential", &["kind", "strength", "mode1", "mode2", "sigma", "table"]),
];

struct Document {
    values: BTreeMap<(String, String), (usize, String)>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::MalformedConfig {
                    line: line_no,
                    message: format!("unterminated section header `{line}`"),
                })?;
                let name = name.trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(Error::MalformedConfig {
                        line: line_no,
                        message: format!("unknown section [{name}]"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedConfig {
                line: line_no,
                message: format!("expected key = value, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let sec = section.clone().ok_or_else(|| Error::MalformedConfig {
                line: line_no,
                message: format!("key `{key}` outside of any section"),
            })?;
            let allowed = SCHEMA.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(Error::invalid(key, format!("unknown key in [{sec}]")));
            }
            if values
                .insert((sec.clone(), key.to_string()), (line_no, value.to_string()))
                .is_some()
            {
                return Err(Error::MalformedConfig {
                    line: line_no,
                    message: format!("duplicate key `{key}` in [{sec}]"),
                });
            }
        }
        Ok(Self { values })
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(|(_, v)| v.as_str())
    }

    fn float(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.raw(section, key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::invalid(key, format!("`{v}` is not a decimal number")))
            })
            .transpose()
    }

    fn float_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.float(section, key)?.unwrap_or(default))
    }

    fn required_float(&self, section: &str, key: &str) -> Result<f64> {
        self.float(section, key)?
            .ok_or_else(|| Error::invalid(key, format!("missing required key in [{section}]")))
    }

    fn int(&self, section: &str, key: &str) -> Result<Option<i64>> {
        self.raw(section, key)
            .map(|v| {
                v.parse::<i64>()
                    .map_err(|_| Error::invalid(key, format!("`{v}` is not an integer")))
            })
            .transpose()
    }

    fn count(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.int(section, key)? {
            Some(v) if v < 0 => Err(Error::invalid(key, format!("must be non-negative, got {v}"))),
            Some(v) => Ok(Some(v as usize)),
            None => Ok(None),
        }
    }

    fn required_count(&self, section: &str, key: &str) -> Result<usize> {
        self.count(section, key)?
            .ok_or_else(|| Error::invalid(key, format!("missing required key in [{section}]")))
    }
}

/// Parses a configuration document. Relative `table` paths resolve against
/// the current directory; see [`parse_config_with_base`].
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    parse_config_with_base(text, None)
}

pub fn parse_config_with_base(text: &str, base: Option<&Path>) -> Result<SimulationConfig> {
    let doc = Document::parse(text)?;

    let domain = DomainConfig::new(
        doc.required_float("domain", "L1")?,
        doc.required_float("domain", "L2")?,
        doc.required_count("domain", "M")?,
    )?;
    let constants = PhysicalConstants::derive(
        doc.float_or("constants", "hbar", 1.0)?,
        doc.float_or("constants", "mass", 1.0)?,
        doc.float_or("constants", "charge", 1.0)?,
        doc.float_or("constants", "light_speed", 1.0)?,
        &domain,
    )?;

    let n_max = doc.required_count("basis", "n_max")?;
    let particles = doc.required_count("basis", "N")?;
    let grid1 = doc.count("basis", "grid1")?.unwrap_or(64);
    let grid2 = doc.count("basis", "grid2")?.unwrap_or(grid1);
    let lattice_cut = doc.count("basis", "lattice_cut")?;

    let mut tolerances = Tolerances::default();
    if let Some(tol) = doc.float("basis", "gram_tol")? {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::invalid("gram_tol", "must be positive"));
        }
        tolerances.gram = tol;
    }
    if let Some(cap) = doc.count("basis", "max_determinants")? {
        tolerances.max_determinants = cap;
    }
    if let Some(tol) = doc.float("dynamics", "krylov_tol")? {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::invalid("krylov_tol", "must be positive"));
        }
        tolerances.krylov = tol;
    }

    let dt = doc.float_or("dynamics", "dt", 1e-3)?;
    let t_final = doc.float_or("dynamics", "t_final", 1.0)?;
    let integrator = match doc.raw("dynamics", "integrator") {
        Some(v) => v.parse()?,
        None => IntegratorScheme::Rk4,
    };
    let sample_every = doc.count("dynamics", "sample_every")?.unwrap_or(1);

    let potential = PotentialSpec::from_document(
        |key| doc.raw("potential", key),
        &Grid::new(grid1.max(1), grid2.max(1), &domain)?,
        base,
    )?;

    let config = SimulationConfig {
        constants,
        domain,
        n_max,
        particles,
        potential,
        grid1,
        grid2,
        dt,
        t_final,
        integrator,
        lattice_cut,
        sample_every,
        tolerances,
    };
    config.validate()?;
    Ok(config)
}

/// Reads and parses a configuration file; `table` paths resolve relative to
/// the file's directory.
pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_with_base(&text, path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "
[domain]
L1 = 3.5449077018110318
L2 = 3.5449077018110318
M = 2
[basis]
n_max = 2
N = 3
";

    fn ulps_apart(a: f64, b: f64) -> u64 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    #[test]
    fn unit_flux_on_two_pi_box() {
        let two_pi = 2.0 * PI;
        let text = format!("[domain]\nL1 = {two_pi}\nL2 = {two_pi}\nM = 1\n[basis]\nn_max = 0\nN = 1\n");
        let cfg = parse_config(&text).unwrap();
        assert!((cfg.constants.b() - 1.0 / two_pi).abs() < 1e-15);
        assert!((cfg.constants.field - 1.0 / two_pi).abs() < 1e-15);
    }

    #[test]
    fn two_flux_quanta_on_sqrt_four_pi_box_gives_unit_field() {
        let cfg = parse_config(BASE).unwrap();
        assert!((cfg.constants.b() - 1.0).abs() < 1e-15);
        assert!((cfg.constants.field - 1.0).abs() < 1e-15);
        assert_eq!(cfg.single_particle_dim(), 6);
    }

    #[test]
    fn missing_particle_count_names_key() {
        let text = BASE.replace("N = 3\n", "");
        match parse_config(&text) {
            Err(Error::InvalidValue { key, .. }) => assert_eq!(key, "N"),
            other => panic!("expected InvalidValue(N), got {other:?}"),
        }
    }

    #[test]
    fn too_many_particles_rejected() {
        let text = BASE.replace("N = 3", "N = 7");
        match parse_config(&text) {
            Err(Error::InvalidValue { key, .. }) => assert_eq!(key, "N"),
            other => panic!("expected InvalidValue(N), got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_sections_are_errors() {
        let text = format!("{BASE}[dynamics]\nfoo = 1\n");
        assert!(matches!(parse_config(&text), Err(Error::InvalidValue { key, .. }) if key == "foo"));
        let text = format!("{BASE}[extras]\n");
        assert!(matches!(parse_config(&text), Err(Error::MalformedConfig { .. })));
        let text = format!("{BASE}dt 0.1\n");
        assert!(matches!(parse_config(&text), Err(Error::MalformedConfig { .. })));
    }

    #[test]
    fn nondefault_constants_keep_quantization() {
        let text = format!("[constants]\nhbar = 0.7\ncharge = 1.3\nlight_speed = 2.9\nmass = 0.4\n{BASE}");
        let cfg = parse_config(&text).unwrap();
        let c = cfg.constants;
        let b = c.charge * c.field / (c.hbar * c.light_speed);
        let target = 2.0 * PI * 2.0 / (cfg.domain.l1 * cfg.domain.l2);
        assert!(ulps_apart(b, target) <= 4, "{b} vs {target}");
        assert!((c.cyclotron_frequency() - c.hbar * c.b() / c.mass).abs() < 1e-15);
    }

    #[test]
    fn scheme_and_dynamics_keys() {
        let text = format!("{BASE}[dynamics]\ndt = 0.01\nt_final = 0.5\nintegrator = rk4+reorth\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.integrator, IntegratorScheme::Rk4Reorth);
        assert_eq!(cfg.steps(), 50);
        let bad = format!("{BASE}[dynamics]\ndt = -1\n");
        assert!(matches!(parse_config(&bad), Err(Error::InvalidValue { key, .. }) if key == "dt"));
    }

    #[test]
    fn grid_midpoints_and_weights() {
        let domain = DomainConfig::new(2.0, 4.0, 1).unwrap();
        let grid = Grid::new(4, 8, &domain).unwrap();
        assert!((grid.x1(0) + 0.75).abs() < 1e-15);
        assert!((grid.x2(7) - 1.75).abs() < 1e-15);
        let total: f64 = (0..grid.len()).map(|_| grid.weight()).sum();
        assert_eq!(total, 8.0);
    }

    proptest::proptest! {
        #[test]
        fn quantization_within_four_ulps(l1 in 0.5f64..20.0, l2 in 0.5f64..20.0, m in 1usize..40,
                                         hbar in 0.1f64..5.0, q in 0.1f64..5.0, c in 0.1f64..5.0) {
            let domain = DomainConfig::new(l1, l2, m).unwrap();
            let k = PhysicalConstants::derive(hbar, 1.0, q, c, &domain).unwrap();
            let b_from_field = k.charge * k.field / (k.hbar * k.light_speed);
            let b_from_flux = 2.0 * PI * m as f64 / (l1 * l2);
            proptest::prop_assert!(ulps_apart(k.b(), b_from_flux) == 0);
            proptest::prop_assert!(ulps_apart(b_from_field, b_from_flux) <= 4);
        }
    }
}
