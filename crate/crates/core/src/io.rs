//! Deterministic CSV and JSON emitters and the run manifest.
//!
//! Floats are written in scientific notation with 17 significant digits, so
//! every value round-trips exactly through binary64. JSON objects are emitted
//! with sorted keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::ComparisonRecord;
use crate::error::{Error, Result};
use crate::model::SimulationConfig;
use crate::potential::PotentialSpec;

pub const TIMESERIES_HEADER: &str = "t,error_norm,apriori_bound,defect_bound,energy_exact,energy_hf,rdm_trace_dist";

/// `{:.16e}`: 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a CSV table with LF line endings.
pub fn csv_string(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(header.len() + 1 + rows.len() * 24 * rows.first().map_or(0, |r| r.len()));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    write_text(path, &csv_string(header, rows))
}

pub fn timeseries_string(records: &[ComparisonRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Precondition("no records to write".into()));
    }
    if let Some(w) = records.windows(2).find(|w| w[1].t <= w[0].t) {
        return Err(Error::Precondition(format!(
            "times out of order: {} then {}",
            w[0].t, w[1].t
        )));
    }
    let rows: Vec<Vec<f64>> = records
        .iter()
        .map(|r| {
            vec![
                r.t,
                r.error_norm,
                r.apriori_bound,
                r.defect_bound,
                r.energy_exact,
                r.energy_hf,
                r.rdm_trace_dist,
            ]
        })
        .collect();
    Ok(csv_string(TIMESERIES_HEADER, &rows))
}

/// Writes the comparison time series; nothing is written when the records
/// are empty or out of order.
pub fn write_timeseries(records: &[ComparisonRecord], path: &Path) -> Result<()> {
    let text = timeseries_string(records)?;
    write_text(path, &text)
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    // round-trip through Value so object keys come out sorted
    let v = serde_json::to_value(value).map_err(|e| Error::Precondition(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Precondition(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &json_string(value)?)
}

/// The parsed configuration as JSON.
pub fn config_echo(config: &SimulationConfig) -> Value {
    let c = &config.constants;
    let d = &config.domain;
    let potential = match &config.potential {
        PotentialSpec::Zero => json!({ "kind": "zero" }),
        PotentialSpec::SeparableCosine { strength, mode1, mode2 } => {
            json!({ "kind": "separable-cosine", "strength": strength, "mode1": mode1, "mode2": mode2 })
        }
        PotentialSpec::PeriodicGaussian { strength, sigma } => {
            json!({ "kind": "periodic-gaussian", "strength": strength, "sigma": sigma })
        }
        PotentialSpec::Tabulated(t) => json!({ "kind": "tabulated", "points": t.g1 * t.g2 }),
    };
    json!({
        "constants": { "hbar": c.hbar, "mass": c.mass, "charge": c.charge, "light_speed": c.light_speed, "B": c.field, "b": c.b() },
        "domain": { "L1": d.l1, "L2": d.l2, "M": d.flux_quanta },
        "basis": { "n_max": config.n_max, "N": config.particles, "grid1": config.grid1, "grid2": config.grid2,
                   "lattice_cut": config.lattice_cut },
        "dynamics": { "dt": config.dt, "t_final": config.t_final, "integrator": config.integrator.to_string(),
                      "sample_every": config.sample_every },
        "potential": potential,
    })
}

/// Record of one CLI run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
    pub validations: BTreeMap<String, bool>,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<&SimulationConfig>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.map_or(Value::Null, config_echo),
            timings: BTreeMap::new(),
            outputs: Vec::new(),
            validations: BTreeMap::new(),
        }
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.timings.insert(phase.to_string(), start.elapsed().as_secs_f64());
        out
    }

    /// Registers an output, given either relative to the run directory or
    /// inside it.
    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.to_string_lossy().into_owned());
    }

    pub fn passed(&self) -> bool {
        self.validations.values().all(|v| *v)
    }

    /// Writes the manifest next to the outputs; fails if a listed output is
    /// missing or empty.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        for out in &mut self.outputs {
            if let Ok(rel) = Path::new(out.as_str()).strip_prefix(dir) {
                *out = rel.to_string_lossy().into_owned();
            }
        }
        for out in &self.outputs {
            let p = dir.join(out);
            let len = std::fs::metadata(&p).map_err(|e| Error::io(&p, e))?.len();
            if len == 0 {
                return Err(Error::Precondition(format!("output {} is empty", p.display())));
            }
        }
        let path = dir.join("manifest.json");
        self.outputs.push("manifest.json".into());
        write_json(&path, self)?;
        Ok(path)
    }
}
