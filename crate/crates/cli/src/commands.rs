use std::path::Path;

use landau_hf::analysis::{self, Problem, SECTOR_TOLERANCE};
use landau_hf::hartree_fock::{integrate_hf, IntegrationOptions};
use landau_hf::io::{format_float, write_csv, write_json, write_text, RunManifest};
use landau_hf::landau::{build_orbital_set, landau_level};
use landau_hf::linalg::{gram, identity_deviation};
use landau_hf::many_body::{embed_slater, noninteracting_ground_state, FillingSpec, PropagationMethod};
use landau_hf::model::load_config;
use landau_hf::{Error, HFState, Result, Scheme, SimulationConfig, C64};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

/// Largest tolerated drift of `⟨Ψ|H|Ψ⟩` under exact propagation.
const EXACT_ENERGY_TOL: f64 = 1e-9;
const HF_NORM_TOL: f64 = 1e-8;
const HF_ENERGY_TOL: f64 = 1e-6;
const HF_GRAM_TOL: f64 = 1e-6;
const BC_TOL: f64 = 1e-10;
const RDM_START_TOL: f64 = 1e-8;

pub struct HfOverrides {
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub scheme: Option<String>,
    pub initial: String,
    pub snapshots: bool,
}

fn finish(mut manifest: RunManifest, out: &Path) -> Result<bool> {
    manifest.write(out)?;
    Ok(manifest.passed())
}

pub fn basis(config: &Path, out: &Path, orbitals: bool) -> Result<bool> {
    let cfg = load_config(config)?;
    let mut manifest = RunManifest::new("basis", Some(&cfg));
    let set = manifest.time("orbitals", || build_orbital_set(&cfg))?;
    let eigen = manifest.time("eigenresiduals", || set.eigenresiduals());
    let bc = set.bc_residuals();
    let (row, col, worst) = set.worst_gram_entry();

    if orbitals {
        let written = manifest.time("write", || -> Result<Vec<std::path::PathBuf>> {
            let mut written = Vec::new();
            for (f, &(n, m)) in set.orbitals.iter().zip(&set.labels) {
                let rows: Vec<Vec<f64>> = (0..set.grid.len())
                    .map(|idx| {
                        let x = set.grid.point(idx);
                        vec![x[0], x[1], f.values[idx].re, f.values[idx].im]
                    })
                    .collect();
                let rel = Path::new("orbitals").join(format!("orbital_n{n}_m{m}.csv"));
                write_csv(&out.join(&rel), "x1,x2,re,im", &rows)?;
                written.push(rel);
            }
            Ok(written)
        })?;
        for rel in &written {
            manifest.add_output(rel);
        }
    }

    let bc_max = bc.iter().fold(0.0f64, |m, r| m.max(*r));
    let mut report = json!({
        "labels": set.labels,
        "energies": set.energies,
        "gram_max_dev": worst,
        "gram_max_entry": [row, col],
        "gram_frobenius_dev": set.gram_deviation(),
        "bc_residuals": bc,
        "bc_max": bc_max,
    });
    match &eigen {
        Ok(r) => report["eigenresiduals"] = json!(r),
        Err(e) => {
            report["eigenresiduals"] = Value::Null;
            report["eigenresidual_error"] = json!(e.to_string());
        }
    }
    let path = out.join("basis_report.json");
    write_json(&path, &report)?;
    manifest.add_output(&path);
    manifest
        .validations
        .insert("gram".into(), set.gram_deviation() <= cfg.tolerances.gram);
    manifest.validations.insert("magnetic_bc".into(), bc_max <= BC_TOL);
    finish(manifest, out)
}

fn u128_json(x: u128) -> Value {
    u64::try_from(x).map_or_else(|_| json!(x.to_string()), |v| json!(v))
}

pub fn groundstate(config: &Path, out: &Path) -> Result<bool> {
    let cfg = load_config(config)?;
    let mut manifest = RunManifest::new("groundstate", Some(&cfg));
    let m = cfg.domain.flux_quanta;
    let energies: Vec<f64> = (0..=cfg.n_max)
        .flat_map(|n| std::iter::repeat_n(landau_level(n, &cfg.constants), m))
        .collect();
    let filling = FillingSpec::new(cfg.particles, m)?;
    let gs = manifest.time("groundstate", || noninteracting_ground_state(&filling, &energies))?;
    let report = json!({
        "N": cfg.particles,
        "M": m,
        "energy": gs.energy,
        "nu": gs.nu,
        "remainder": gs.remainder,
        "degeneracy": u128_json(gs.degeneracy),
        "occupations": gs.occupations,
    });
    let path = out.join("groundstate.json");
    write_json(&path, &report)?;
    manifest.add_output(&path);
    print!("{}", landau_hf::io::json_string(&report)?);
    finish(manifest, out)
}

fn sample_times(cfg: &SimulationConfig) -> Vec<f64> {
    let steps = cfg.steps();
    let every = cfg.sample_every.max(1);
    (0..=steps)
        .filter(|&s| s % every == 0 || s == steps)
        .map(|s| s as f64 * cfg.dt)
        .collect()
}

pub fn evolve_exact(config: &Path, out: &Path, method: PropagationMethod) -> Result<bool> {
    let cfg = load_config(config)?;
    let mut manifest = RunManifest::new("evolve-exact", Some(&cfg));
    let problem = manifest.time("assembly", || Problem::build(&cfg))?;
    let init = problem.initial_hf()?;
    let psi0 = embed_slater(init.phase, &init.orbitals, &problem.basis)?;
    let propagator = problem.propagator(method);
    let times = sample_times(&cfg);
    let rows = manifest.time("propagation", || {
        times
            .par_iter()
            .map(|&t| -> Result<Vec<f64>> {
                let psi = propagator.evolve(&psi0, t)?;
                Ok(vec![t, problem.hamiltonian.expectation(&psi.coefficients), psi.norm()])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let path = out.join("exact.csv");
    write_csv(&path, "t,energy,norm", &rows)?;
    manifest.add_output(&path);
    let e0 = rows[0][1];
    let drift = rows.iter().fold(0.0f64, |m, r| m.max((r[1] - e0).abs()));
    manifest
        .validations
        .insert("energy_conservation".into(), drift <= EXACT_ENERGY_TOL);
    finish(manifest, out)
}

/// Orbital coefficients as CSV: one row per basis index, a `re,im` column
/// pair per orbital.
fn orbitals_csv(c: &DMatrix<C64>) -> String {
    let header: Vec<String> = (1..=c.ncols())
        .flat_map(|l| [format!("re_{l}"), format!("im_{l}")])
        .collect();
    let mut s = header.join(",");
    s.push('\n');
    for r in 0..c.nrows() {
        let row: Vec<String> = (0..c.ncols())
            .flat_map(|l| [format_float(c[(r, l)].re), format_float(c[(r, l)].im)])
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn read_orbitals(path: &Path, k: usize, n: usize) -> Result<DMatrix<C64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::MalformedConfig {
                    line: i + 1,
                    message: format!("{}: non-numeric orbital entry", path.display()),
                })
            }
        }
    }
    if rows.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} has {} rows, basis has {k}",
            path.display(),
            rows.len()
        )));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != 2 * n) {
        return Err(Error::DimensionMismatch(format!(
            "{} has a row of {} columns, expected {} for N = {n}",
            path.display(),
            bad.len(),
            2 * n
        )));
    }
    let c = DMatrix::from_fn(k, n, |r, l| C64::new(rows[r][2 * l], rows[r][2 * l + 1]));
    let dev = identity_deviation(&gram(&c));
    if dev > 1e-6 {
        return Err(Error::NotOrthonormal(dev));
    }
    Ok(c)
}

pub fn evolve_hf(config: &Path, out: &Path, o: HfOverrides) -> Result<bool> {
    let mut cfg = load_config(config)?;
    if let Some(dt) = o.dt {
        cfg.dt = dt;
    }
    if let Some(t) = o.t_final {
        cfg.t_final = t;
    }
    if let Some(s) = &o.scheme {
        cfg.integrator = s.parse::<Scheme>()?;
    }
    let mut manifest = RunManifest::new("evolve-hf", Some(&cfg));
    let problem = manifest.time("assembly", || Problem::build(&cfg))?;
    let initial = if o.initial == "nigs-ground" {
        problem.initial_hf()?
    } else {
        let c = read_orbitals(Path::new(&o.initial), problem.orbitals.len(), cfg.particles)?;
        HFState::new(C64::new(1.0, 0.0), c, problem.energies(), &problem.tensor)?
    };
    let opts = IntegrationOptions {
        dt: cfg.dt,
        t_final: cfg.t_final,
        scheme: cfg.integrator,
        sample_every: cfg.sample_every,
    };
    let traj = manifest.time("integration", || {
        integrate_hf(&initial, &opts, problem.energies(), &problem.tensor, &cfg.constants)
    })?;
    let rows: Vec<Vec<f64>> = traj
        .states
        .iter()
        .zip(&traj.diagnostics)
        .map(|(s, d)| vec![s.time, s.phase.re, s.phase.im, d.energy, d.norm, d.gram_drift])
        .collect();
    let path = out.join("hf.csv");
    write_csv(&path, "t,re_a,im_a,energy,norm,orth_drift", &rows)?;
    manifest.add_output(&path);
    if o.snapshots {
        for (i, s) in traj.states.iter().enumerate() {
            let rel = Path::new("snapshots").join(format!("orbitals_{i:06}.csv"));
            write_text(&out.join(&rel), &orbitals_csv(&s.orbitals))?;
            manifest.add_output(&rel);
        }
    }
    manifest
        .validations
        .insert("norm".into(), traj.max_norm_drift() <= HF_NORM_TOL);
    manifest
        .validations
        .insert("energy".into(), traj.max_energy_drift() <= HF_ENERGY_TOL);
    manifest
        .validations
        .insert("orthonormality".into(), traj.max_gram_drift() <= HF_GRAM_TOL);
    finish(manifest, out)
}

pub fn compare(config: &Path, out: &Path, method: PropagationMethod) -> Result<bool> {
    let cfg = load_config(config)?;
    let mut manifest = RunManifest::new("compare", Some(&cfg));
    let problem = manifest.time("assembly", || Problem::build(&cfg))?;
    let cmp = manifest.time("comparison", || analysis::compare(&problem, method))?;
    let ts = out.join("timeseries.csv");
    landau_hf::io::write_timeseries(&cmp.records, &ts)?;
    manifest.add_output(&ts);
    let summary = out.join("summary.json");
    write_json(&summary, &cmp.summary)?;
    manifest.add_output(&summary);

    let s = &cmp.summary;
    let v = &mut manifest.validations;
    v.insert("apriori_bound".into(), s.apriori_violations == 0);
    v.insert("defect_bound".into(), s.defect_violations == 0);
    v.insert(
        "sector_purity".into(),
        s.max_sector_zero <= SECTOR_TOLERANCE
            && s.max_sector_one <= SECTOR_TOLERANCE
            && s.max_sector_higher <= SECTOR_TOLERANCE,
    );
    v.insert("triangle".into(), s.max_error_norm <= 2.0 + 1e-12);
    v.insert("rdm_at_start".into(), cmp.records[0].rdm_trace_dist <= RDM_START_TOL);
    finish(manifest, out)
}

pub fn validate(config: &Path) -> Result<bool> {
    let cfg = load_config(config)?;
    let k = cfg.single_particle_dim();
    let dets = landau_hf::linalg::binomial(k, cfg.particles);
    if dets > cfg.tolerances.max_determinants as u128 {
        return Err(Error::TooLarge {
            size: dets,
            cap: cfg.tolerances.max_determinants,
        });
    }
    let filling = FillingSpec::new(cfg.particles, cfg.domain.flux_quanta)?;
    println!(
        "ok: K = {k}, determinants = {dets}, nu = {}, r = {}, b = {}",
        filling.nu,
        filling.remainder,
        format_float(cfg.constants.b())
    );
    Ok(true)
}
