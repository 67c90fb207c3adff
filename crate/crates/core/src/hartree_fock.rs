//! Time-dependent Hartree–Fock in the truncated Landau coefficient space.
//!
//! A Slater state `u = a · φ_1 ∧ … ∧ φ_N` is stored as its phase `a` and the
//! `K×N` matrix `C` of orbital coefficients. With `ρ = C C†` the Fock operator
//!
//! ```text
//! F = diag(E) + J(ρ) - X(ρ),   J_{αγ} = Σ v[αβγδ] ρ_{δβ},   X_{αδ} = Σ v[αβγδ] ρ_{γβ}
//! ```
//!
//! generates the orbital flow `iħ ċ_ℓ = F c_ℓ`. The self-interaction terms
//! `ℓ' = ℓ` of the direct and exchange sums cancel, so the full `ρ` may be used
//! and every orbital sees the same Hermitian generator. The phase follows
//! `iħ ȧ = (ℰ₀ - Σ_ℓ ⟨c_ℓ|F c_ℓ⟩) a`, which makes `⟨u|u̇⟩ = ℰ₀/(iħ)` for
//! every choice of gauge.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{determinant, gram, identity_deviation, lowdin};
use crate::many_body::InteractionTensor;
use crate::model::{IntegratorScheme, PhysicalConstants};
use crate::C64;

pub use crate::model::IntegratorScheme as Scheme;

/// Drift of the orbital Gram matrix tolerated within a single step.
pub const MAX_STEP_DRIFT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct HFState {
    pub time: f64,
    pub phase: C64,
    /// `K×N`, one column per orbital.
    pub orbitals: DMatrix<C64>,
    /// `ℰ₀ = ⟨u(0)|H_N|u(0)⟩`, fixed when the state is created.
    pub e0: f64,
}

impl HFState {
    /// Initial state with `ℰ₀` evaluated from the given data.
    pub fn new(phase: C64, orbitals: DMatrix<C64>, energies: &[f64], tensor: &InteractionTensor) -> Result<Self> {
        check_shapes(&orbitals, energies, tensor)?;
        let mut s = Self {
            time: 0.0,
            phase,
            orbitals,
            e0: 0.0,
        };
        s.e0 = hf_energy(&s, energies, tensor);
        Ok(s)
    }

    /// Orbitals equal to the basis vectors at `occupation`, `a = 1`.
    pub fn from_occupation(
        k: usize,
        occupation: &[usize],
        energies: &[f64],
        tensor: &InteractionTensor,
    ) -> Result<Self> {
        if let Some(&bad) = occupation.iter().find(|&&p| p >= k) {
            return Err(Error::IndexOutOfRange { index: bad, len: k });
        }
        let c = DMatrix::from_fn(k, occupation.len(), |r, l| {
            if r == occupation[l] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(C64::new(1.0, 0.0), c, energies, tensor)
    }

    pub fn particles(&self) -> usize {
        self.orbitals.ncols()
    }

    pub fn orbital(&self, l: usize) -> DVector<C64> {
        self.orbitals.column(l).into_owned()
    }

    /// `‖C†C - I‖_F`.
    pub fn gram_drift(&self) -> f64 {
        identity_deviation(&gram(&self.orbitals))
    }
}

fn check_shapes(c: &DMatrix<C64>, energies: &[f64], tensor: &InteractionTensor) -> Result<()> {
    if c.nrows() != energies.len() || tensor.k != energies.len() {
        return Err(Error::DimensionMismatch(format!(
            "orbitals have {} rows, energies {}, tensor K = {}",
            c.nrows(),
            energies.len(),
            tensor.k
        )));
    }
    Ok(())
}

/// `J_{αγ} = Σ_{βδ} v[αβγδ] ρ_{δβ}`.
fn direct_matrix(tensor: &InteractionTensor, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let k = tensor.k;
    DMatrix::from_fn(k, k, |a, g| {
        let mut s = C64::new(0.0, 0.0);
        for b in 0..k {
            for d in 0..k {
                s += tensor.get(a, b, g, d) * rho[(d, b)];
            }
        }
        s
    })
}

/// `X_{αδ} = Σ_{βγ} v[αβγδ] ρ_{γβ}`.
fn exchange_matrix(tensor: &InteractionTensor, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let k = tensor.k;
    DMatrix::from_fn(k, k, |a, d| {
        let mut s = C64::new(0.0, 0.0);
        for b in 0..k {
            for g in 0..k {
                s += tensor.get(a, b, g, d) * rho[(g, b)];
            }
        }
        s
    })
}

fn density_excluding(c: &DMatrix<C64>, skip: Option<usize>) -> DMatrix<C64> {
    let mut rho = DMatrix::zeros(c.nrows(), c.nrows());
    for l in (0..c.ncols()).filter(|&l| Some(l) != skip) {
        let col = c.column(l);
        rho += col * col.adjoint();
    }
    rho
}

fn check_index(state: &HFState, l: usize) -> Result<()> {
    if l >= state.particles() {
        return Err(Error::IndexOutOfRange {
            index: l,
            len: state.particles(),
        });
    }
    Ok(())
}

/// `K_ℓ φ_ℓ` in coefficient space, summing over `ℓ' ≠ ℓ`.
pub fn direct_potential_action(state: &HFState, tensor: &InteractionTensor, l: usize) -> Result<DVector<C64>> {
    check_index(state, l)?;
    let rho = density_excluding(&state.orbitals, Some(l));
    Ok(direct_matrix(tensor, &rho) * state.orbital(l))
}

/// `Σ_{ℓ'≠ℓ} X_{ℓ,ℓ'} φ_{ℓ'}` in coefficient space.
pub fn exchange_potential_action(state: &HFState, tensor: &InteractionTensor, l: usize) -> Result<DVector<C64>> {
    check_index(state, l)?;
    let rho = density_excluding(&state.orbitals, Some(l));
    Ok(exchange_matrix(tensor, &rho) * state.orbital(l))
}

/// The common generator `diag(E) + J(ρ) - X(ρ)` for the current orbitals.
pub fn fock_matrix(orbitals: &DMatrix<C64>, energies: &[f64], tensor: &InteractionTensor) -> DMatrix<C64> {
    let mut f = if tensor.is_zero() {
        DMatrix::zeros(energies.len(), energies.len())
    } else {
        let rho = density_excluding(orbitals, None);
        direct_matrix(tensor, &rho) - exchange_matrix(tensor, &rho)
    };
    for (i, &e) in energies.iter().enumerate() {
        f[(i, i)] += e;
    }
    f
}

/// Time derivatives `(ȧ, Ċ)`.
pub fn hf_rhs(
    state: &HFState,
    energies: &[f64],
    tensor: &InteractionTensor,
    constants: &PhysicalConstants,
) -> Result<(C64, DMatrix<C64>)> {
    check_shapes(&state.orbitals, energies, tensor)?;
    Ok(rhs(
        state.phase,
        &state.orbitals,
        state.e0,
        energies,
        tensor,
        constants.hbar,
    ))
}

fn rhs(
    a: C64,
    c: &DMatrix<C64>,
    e0: f64,
    energies: &[f64],
    tensor: &InteractionTensor,
    hbar: f64,
) -> (C64, DMatrix<C64>) {
    let fc = fock_matrix(c, energies, tensor) * c;
    let expect: f64 = (0..c.ncols()).map(|l| c.column(l).dotc(&fc.column(l)).re).sum();
    let minus_i_over_hbar = C64::new(0.0, -1.0 / hbar);
    (a * (e0 - expect) * minus_i_over_hbar, fc * minus_i_over_hbar)
}

/// `⟨u|H_N|u⟩ = |a|² (Σ_ℓ ⟨c_ℓ|E c_ℓ⟩ + ½ Σ_ℓ ⟨c_ℓ|(J - X) c_ℓ⟩)`.
pub fn hf_energy(state: &HFState, energies: &[f64], tensor: &InteractionTensor) -> f64 {
    let c = &state.orbitals;
    let rho = density_excluding(c, None);
    let one: f64 = (0..energies.len()).map(|i| energies[i] * rho[(i, i)].re).sum();
    let two = if tensor.is_zero() {
        0.0
    } else {
        let g = direct_matrix(tensor, &rho) - exchange_matrix(tensor, &rho);
        0.5 * (g * &rho).trace().re
    };
    state.phase.norm_sqr() * (one + two)
}

/// `φ'_i = Σ_j φ_j U_ji`, `a' = a / det U`.
pub fn gauge_transform(state: &HFState, u: &DMatrix<C64>) -> Result<HFState> {
    if u.nrows() != state.particles() || u.ncols() != state.particles() {
        return Err(Error::DimensionMismatch(format!(
            "gauge matrix is {}x{}, state has {} orbitals",
            u.nrows(),
            u.ncols(),
            state.particles()
        )));
    }
    let dev = identity_deviation(&gram(u));
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    Ok(HFState {
        phase: state.phase / determinant(u),
        orbitals: &state.orbitals * u,
        ..state.clone()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HFSample {
    pub energy: f64,
    pub norm: f64,
    pub gram_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HFTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<HFState>,
    pub diagnostics: Vec<HFSample>,
}

impl HFTrajectory {
    fn record(&mut self, s: &HFState, energies: &[f64], tensor: &InteractionTensor) {
        self.times.push(s.time);
        self.diagnostics.push(HFSample {
            energy: hf_energy(s, energies, tensor),
            norm: s.phase.norm(),
            gram_drift: s.gram_drift(),
        });
        self.states.push(s.clone());
    }

    pub fn last(&self) -> Option<&HFState> {
        self.states.last()
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.diagnostics.first().map_or(0.0, |d| d.energy);
        self.diagnostics
            .iter()
            .fold(0.0f64, |m, d| m.max((d.energy - e0).abs()))
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.diagnostics.iter().fold(0.0f64, |m, d| m.max((d.norm - 1.0).abs()))
    }

    pub fn max_gram_drift(&self) -> f64 {
        self.diagnostics.iter().fold(0.0f64, |m, d| m.max(d.gram_drift))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: IntegratorScheme,
    /// Record every `sample_every` steps; the final step is always recorded.
    pub sample_every: usize,
}

/// One classical RK4 step of the coupled `(a, C)` system, followed by a
/// symmetric reorthogonalization when the scheme asks for it.
pub fn rk4_step(
    state: &HFState,
    dt: f64,
    scheme: IntegratorScheme,
    energies: &[f64],
    tensor: &InteractionTensor,
    hbar: f64,
) -> HFState {
    let (a, c, e0) = (state.phase, &state.orbitals, state.e0);
    let f = |a: C64, c: &DMatrix<C64>| rhs(a, c, e0, energies, tensor, hbar);
    let h = C64::new(dt, 0.0);
    let half = C64::new(0.5 * dt, 0.0);
    let (ka1, kc1) = f(a, c);
    let (ka2, kc2) = f(a + ka1 * half, &(c + &kc1 * half));
    let (ka3, kc3) = f(a + ka2 * half, &(c + &kc2 * half));
    let (ka4, kc4) = f(a + ka3 * h, &(c + &kc3 * h));
    let sixth = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let mut phase = a + (ka1 + ka2 * two + ka3 * two + ka4) * sixth;
    let mut orbitals = c + (kc1 + kc2 * two + kc3 * two + kc4) * sixth;
    if scheme == IntegratorScheme::Rk4Reorth {
        let (q, det_half) = lowdin(&orbitals);
        orbitals = q;
        phase *= det_half;
    }
    HFState {
        time: state.time + dt,
        phase,
        orbitals,
        e0,
    }
}

pub fn integrate_hf(
    initial: &HFState,
    options: &IntegrationOptions,
    energies: &[f64],
    tensor: &InteractionTensor,
    constants: &PhysicalConstants,
) -> Result<HFTrajectory> {
    check_shapes(&initial.orbitals, energies, tensor)?;
    if !(options.dt.is_finite() && options.dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if !(options.t_final.is_finite() && options.t_final >= 0.0) {
        return Err(Error::invalid("t_final", "must be non-negative"));
    }
    let steps = (options.t_final / options.dt).round() as usize;
    let every = options.sample_every.max(1);
    let mut traj = HFTrajectory::default();
    let mut state = initial.clone();
    traj.record(&state, energies, tensor);
    let mut drift = state.gram_drift();
    for step in 1..=steps {
        let mut next = rk4_step(&state, options.dt, options.scheme, energies, tensor, constants.hbar);
        // keep sample times exact multiples of dt
        next.time = initial.time + step as f64 * options.dt;
        if let Some(bad) = std::iter::once(next.phase)
            .chain(next.orbitals.iter().copied())
            .find(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteValue(if bad.re.is_finite() { bad.im } else { bad.re }));
        }
        let new_drift = next.gram_drift();
        if new_drift - drift > MAX_STEP_DRIFT {
            return Err(Error::StepUnstable {
                time: next.time,
                drift: new_drift,
            });
        }
        drift = new_drift;
        state = next;
        if step % every == 0 || step == steps {
            traj.record(&state, energies, tensor);
        }
    }
    Ok(traj)
}
