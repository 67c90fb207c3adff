//! Exact versus Hartree–Fock dynamics: error norms, the a-priori and
//! a-posteriori bounds, reduced density matrices and mean-field rescaling.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hartree_fock::{hf_energy, hf_rhs, integrate_hf, HFState, HFTrajectory, IntegrationOptions};
use crate::landau::{build_orbital_set, OrbitalSet};
use crate::linalg::{complete_unitary, hermitian_eigen, hermiticity_deviation};
use crate::many_body::{
    assemble_hamiltonian, embed_slater, enumerate_determinants, noninteracting_ground_state, two_body_tensor,
    wedge_coefficients, DeterminantBasis, ExactPropagator, FillingSpec, GroundState, InteractionTensor, ManyBodyState,
    PropagationMethod, SparseHermitian,
};
use crate::model::{PhysicalConstants, SimulationConfig};
use crate::potential::PotentialSpec;
use crate::C64;

/// Largest norm tolerated in the 0-, 1- and ≥3-replacement sectors of the
/// defect.
pub const SECTOR_TOLERANCE: f64 = 1e-8;

/// `‖Ψ - a φ_1 ∧ … ∧ φ_N‖`.
pub fn error_norm(exact: &ManyBodyState, hf: &HFState, basis: &DeterminantBasis) -> Result<f64> {
    if exact.dim() != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} coefficients, basis {}",
            exact.dim(),
            basis.len()
        )));
    }
    let u = embed_slater(hf.phase, &hf.orbitals, basis)?;
    Ok((&exact.coefficients - &u.coefficients).norm())
}

/// `(1/ħ) √(N(N-1)) ‖V‖_∞ t`.
pub fn apriori_bound(particles: usize, v_norm: f64, constants: &PhysicalConstants, t: f64) -> f64 {
    let n = particles as f64;
    (n * (n - 1.0)).sqrt() * v_norm * t / constants.hbar
}

/// Norms of the defect projected on determinants built from the current
/// orbitals with 0, 1, 2 and more orbitals replaced.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SectorNorms {
    pub zero: f64,
    pub one: f64,
    pub two: f64,
    pub higher: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Defect {
    pub vector: DVector<C64>,
    pub norm: f64,
    pub sectors: SectorNorms,
}

/// `u̇ - H_N u/(iħ)` for the Hartree–Fock trajectory through `state`,
/// with its sector decomposition.
pub fn defect(
    state: &HFState,
    hamiltonian: &SparseHermitian,
    basis: &DeterminantBasis,
    energies: &[f64],
    tensor: &InteractionTensor,
    constants: &PhysicalConstants,
) -> Result<Defect> {
    if hamiltonian.dim != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian dimension {}, basis {}",
            hamiltonian.dim,
            basis.len()
        )));
    }
    let (da, dc) = hf_rhs(state, energies, tensor, constants)?;
    let c = &state.orbitals;
    let wedge = wedge_coefficients(c, basis);
    let mut udot = &wedge * da;
    for l in 0..c.ncols() {
        let mut replaced = c.clone();
        replaced.set_column(l, &dc.column(l));
        udot += wedge_coefficients(&replaced, basis) * state.phase;
    }
    let hu = hamiltonian.mul_vec(&(&wedge * state.phase));
    let vector = udot + hu * C64::new(0.0, 1.0 / constants.hbar);
    let sectors = sector_norms(c, &vector, basis);
    Ok(Defect {
        norm: vector.norm(),
        vector,
        sectors,
    })
}

/// `‖u̇ - H_N u/(iħ)‖`, failing when the defect leaves the two-replacement
/// sector.
pub fn defect_norm(
    state: &HFState,
    hamiltonian: &SparseHermitian,
    basis: &DeterminantBasis,
    energies: &[f64],
    tensor: &InteractionTensor,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let d = defect(state, hamiltonian, basis, energies, tensor, constants)?;
    check_support(&d.sectors)?;
    Ok(d.norm)
}

fn check_support(s: &SectorNorms) -> Result<()> {
    for (sector, weight) in [(0usize, s.zero), (1, s.one), (3, s.higher)] {
        if weight > SECTOR_TOLERANCE {
            return Err(Error::SupportViolation { sector, weight });
        }
    }
    Ok(())
}

fn combinations(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    if items.len() < r {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], r - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn sector_norms(c: &DMatrix<C64>, vector: &DVector<C64>, basis: &DeterminantBasis) -> SectorNorms {
    let (k, n) = (c.nrows(), c.ncols());
    let w = complete_unitary(c);
    let occupied: Vec<usize> = (0..n).collect();
    let virtuals: Vec<usize> = (n..k).collect();
    let mut norms = [0.0f64; 3];
    let mut residual = vector.clone();
    for (s, slot) in norms.iter_mut().enumerate() {
        for kept in combinations(&occupied, n.saturating_sub(s)) {
            for added in combinations(&virtuals, s) {
                let cols: Vec<usize> = kept.iter().chain(&added).copied().collect();
                if cols.len() != n {
                    continue;
                }
                let rotated = wedge_coefficients(&w.select_columns(&cols), basis);
                let coef = rotated.dotc(vector);
                *slot += coef.norm_sqr();
                residual -= rotated * coef;
            }
        }
    }
    SectorNorms {
        zero: norms[0].sqrt(),
        one: norms[1].sqrt(),
        two: norms[2].sqrt(),
        higher: residual.norm(),
    }
}

/// `ω[α,γ] = ⟨Ψ| a†_γ a_α |Ψ⟩`.
pub fn rdm_exact(state: &ManyBodyState, basis: &DeterminantBasis) -> DMatrix<C64> {
    let k = basis.k;
    let psi = &state.coefficients;
    let mut omega = DMatrix::zeros(k, k);
    let sign = |mask: u64, p: usize| {
        if (mask & ((1u64 << p) - 1)).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    };
    for idx in 0..basis.len() {
        let amp = psi[idx];
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        let mask = basis.mask(idx);
        for &a in basis.occupation(idx) {
            let s1 = sign(mask, a);
            let m1 = mask & !(1 << a);
            for g in 0..k {
                if m1 & (1 << g) != 0 {
                    continue;
                }
                let target = basis
                    .index_of_mask(m1 | (1 << g))
                    .expect("particle number is conserved");
                omega[(a, g)] += psi[target].conj() * amp * (s1 * sign(m1, g));
            }
        }
    }
    omega
}

/// `Σ_ℓ c_ℓ c_ℓ†`.
pub fn rdm_slater(state: &HFState) -> DMatrix<C64> {
    &state.orbitals * state.orbitals.adjoint()
}

/// Trace norm of `a - b`.
pub fn trace_norm_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    for m in [a, b] {
        let dev = hermiticity_deviation(m);
        if dev > 1e-8 {
            return Err(Error::NotHermitian(dev));
        }
    }
    let (values, _) = hermitian_eigen(&(a - b));
    Ok(values.iter().map(|v| v.abs()).sum())
}

/// The coupled mean-field and semiclassical scaling `ħ → ħ/√N`, `V → V/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub base: SimulationConfig,
    pub hbar_eff: f64,
    pub potential_eff: PotentialSpec,
}

pub fn rescale_mean_field(config: &SimulationConfig) -> ScalingConfig {
    let n = config.particles as f64;
    ScalingConfig {
        base: config.clone(),
        hbar_eff: config.constants.hbar / n.sqrt(),
        potential_eff: config.potential.scaled(1.0 / n),
    }
}

impl ScalingConfig {
    pub fn effective_config(&self) -> SimulationConfig {
        SimulationConfig {
            constants: self.base.constants.with_hbar(self.hbar_eff),
            potential: self.potential_eff.clone(),
            ..self.base.clone()
        }
    }

    /// The a-priori bound evaluated with the effective constants.
    pub fn bound(&self, t: f64) -> f64 {
        let d = &self.base.domain;
        let v = self.potential_eff.sup_norm(d.l1, d.l2);
        apriori_bound(self.base.particles, v, &self.base.constants.with_hbar(self.hbar_eff), t)
    }

    /// `(1/ħ) √(N-1) ‖V‖_∞ t` in the original units.
    pub fn analytic_bound(&self, t: f64) -> f64 {
        let d = &self.base.domain;
        let n = self.base.particles as f64;
        (n - 1.0).sqrt() * self.base.potential.sup_norm(d.l1, d.l2) * t / self.base.constants.hbar
    }
}

/// Everything derived from a configuration before any time stepping.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: SimulationConfig,
    pub orbitals: OrbitalSet,
    pub tensor: InteractionTensor,
    pub basis: DeterminantBasis,
    pub hamiltonian: SparseHermitian,
    pub filling: FillingSpec,
    pub ground: GroundState,
    pub v_norm: f64,
}

impl Problem {
    pub fn build(config: &SimulationConfig) -> Result<Self> {
        let orbitals = build_orbital_set(config)?;
        let tensor = two_body_tensor(&config.potential, &orbitals)?;
        let basis = enumerate_determinants(orbitals.len(), config.particles, config.tolerances.max_determinants)?;
        let hamiltonian = assemble_hamiltonian(&basis, &orbitals.energies, &tensor)?;
        let filling = FillingSpec::new(config.particles, config.domain.flux_quanta)?;
        let ground = noninteracting_ground_state(&filling, &orbitals.energies)?;
        Ok(Self {
            v_norm: config.potential.sup_norm(config.domain.l1, config.domain.l2),
            config: config.clone(),
            orbitals,
            tensor,
            basis,
            hamiltonian,
            filling,
            ground,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.orbitals.energies
    }

    /// Hartree–Fock data on the first non-interacting ground-state
    /// determinant.
    pub fn initial_hf(&self) -> Result<HFState> {
        HFState::from_occupation(
            self.orbitals.len(),
            &self.ground.occupations[0],
            self.energies(),
            &self.tensor,
        )
    }

    pub fn integration_options(&self) -> IntegrationOptions {
        IntegrationOptions {
            dt: self.config.dt,
            t_final: self.config.t_final,
            scheme: self.config.integrator,
            sample_every: self.config.sample_every,
        }
    }

    pub fn propagator(&self, method: PropagationMethod) -> ExactPropagator<'_> {
        ExactPropagator::new(
            &self.hamiltonian,
            self.config.constants.hbar,
            self.config.tolerances.krylov,
            method,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub t: f64,
    pub error_norm: f64,
    pub apriori_bound: f64,
    /// Trapezoid integral of the defect norm up to `t`.
    pub defect_bound: f64,
    pub energy_exact: f64,
    pub energy_hf: f64,
    pub rdm_trace_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub particles: usize,
    pub single_particle_dim: usize,
    pub determinant_dim: usize,
    pub v_norm: f64,
    pub samples: usize,
    pub t_final: f64,
    pub max_error_norm: f64,
    pub max_error_over_apriori: f64,
    pub max_error_over_defect_bound: f64,
    pub max_defect_bound_over_apriori: f64,
    pub apriori_violations: usize,
    pub defect_violations: usize,
    /// Defect norm at `t = 0`, the initial slope of the error.
    pub initial_defect: f64,
    pub max_defect: f64,
    pub max_sector_zero: f64,
    pub max_sector_one: f64,
    pub max_sector_higher: f64,
    pub hf_energy_drift: f64,
    pub exact_energy_drift: f64,
    pub hf_norm_drift: f64,
    pub hf_gram_drift: f64,
    pub max_rdm_trace_dist: f64,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub records: Vec<ComparisonRecord>,
    pub defects: Vec<f64>,
    pub sectors: Vec<SectorNorms>,
    pub trajectory: HFTrajectory,
    pub summary: ComparisonSummary,
}

/// Slack in the bound checks.
pub const BOUND_SLACK: f64 = 1e-7;

/// Runs exact and Hartree–Fock dynamics from the same Slater determinant and
/// compares them at every recorded sample.
pub fn compare(problem: &Problem, method: PropagationMethod) -> Result<Comparison> {
    let constants = problem.config.constants;
    let energies = problem.energies();
    let initial = problem.initial_hf()?;
    let psi0 = embed_slater(initial.phase, &initial.orbitals, &problem.basis)?;
    let trajectory = integrate_hf(
        &initial,
        &problem.integration_options(),
        energies,
        &problem.tensor,
        &constants,
    )?;
    let propagator = problem.propagator(method);

    struct Sample {
        error: f64,
        defect: Defect,
        energy_exact: f64,
        energy_hf: f64,
        rdm: f64,
    }
    let samples = trajectory
        .states
        .par_iter()
        .map(|s| -> Result<Sample> {
            let psi = propagator.evolve(&psi0, s.time)?;
            let d = defect(
                s,
                &problem.hamiltonian,
                &problem.basis,
                energies,
                &problem.tensor,
                &constants,
            )?;
            let rdm = trace_norm_diff(&rdm_exact(&psi, &problem.basis), &rdm_slater(s))?;
            Ok(Sample {
                error: error_norm(&psi, s, &problem.basis)?,
                energy_exact: problem.hamiltonian.expectation(&psi.coefficients),
                energy_hf: hf_energy(s, energies, &problem.tensor),
                defect: d,
                rdm,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(samples.len());
    let mut integral = 0.0;
    for (i, (s, smp)) in trajectory.states.iter().zip(&samples).enumerate() {
        if i > 0 {
            let dt = s.time - trajectory.states[i - 1].time;
            integral += 0.5 * dt * (samples[i - 1].defect.norm + smp.defect.norm);
        }
        records.push(ComparisonRecord {
            t: s.time,
            error_norm: smp.error,
            apriori_bound: apriori_bound(problem.config.particles, problem.v_norm, &constants, s.time),
            defect_bound: integral,
            energy_exact: smp.energy_exact,
            energy_hf: smp.energy_hf,
            rdm_trace_dist: smp.rdm,
        });
    }
    let sectors: Vec<SectorNorms> = samples.iter().map(|s| s.defect.sectors).collect();
    let defects: Vec<f64> = samples.iter().map(|s| s.defect.norm).collect();
    let summary = summarize(problem, &records, &defects, &sectors, &trajectory);
    Ok(Comparison {
        records,
        defects,
        sectors,
        trajectory,
        summary,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn summarize(
    problem: &Problem,
    records: &[ComparisonRecord],
    defects: &[f64],
    sectors: &[SectorNorms],
    trajectory: &HFTrajectory,
) -> ComparisonSummary {
    let fold = |f: &dyn Fn(&ComparisonRecord) -> f64| records.iter().fold(0.0f64, |m, r| m.max(f(r)));
    let max_of = |v: &mut dyn Iterator<Item = f64>| v.fold(0.0f64, f64::max);
    let e0 = records.first().map_or(0.0, |r| r.energy_exact);
    ComparisonSummary {
        particles: problem.config.particles,
        single_particle_dim: problem.orbitals.len(),
        determinant_dim: problem.basis.len(),
        v_norm: problem.v_norm,
        samples: records.len(),
        t_final: records.last().map_or(0.0, |r| r.t),
        max_error_norm: fold(&|r| r.error_norm),
        max_error_over_apriori: fold(&|r| ratio(r.error_norm, r.apriori_bound)),
        max_error_over_defect_bound: fold(&|r| ratio(r.error_norm, r.defect_bound)),
        max_defect_bound_over_apriori: fold(&|r| ratio(r.defect_bound, r.apriori_bound)),
        apriori_violations: records
            .iter()
            .filter(|r| r.error_norm > r.apriori_bound + BOUND_SLACK)
            .count(),
        defect_violations: records
            .iter()
            .filter(|r| r.error_norm > r.defect_bound + BOUND_SLACK)
            .count(),
        initial_defect: defects.first().copied().unwrap_or(0.0),
        max_defect: max_of(&mut defects.iter().copied()),
        max_sector_zero: max_of(&mut sectors.iter().map(|s| s.zero)),
        max_sector_one: max_of(&mut sectors.iter().map(|s| s.one)),
        max_sector_higher: max_of(&mut sectors.iter().map(|s| s.higher)),
        hf_energy_drift: trajectory.max_energy_drift(),
        exact_energy_drift: fold(&|r| (r.energy_exact - e0).abs()),
        hf_norm_drift: trajectory.max_norm_drift(),
        hf_gram_drift: trajectory.max_gram_drift(),
        max_rdm_trace_dist: fold(&|r| r.rdm_trace_dist),
    }
}
