//! The finite-volume Landau eigenbasis in the Landau gauge `A = B(0, x1)`.
//!
//! On the torus `Λ` threaded by `M` flux quanta the Landau Hamiltonian
//!
//! ```text
//! H₁ = (ħ²/2m) [ -∂₁² + (-i∂₂ - b x₁)² ]
//! ```
//!
//! acts on functions obeying the magnetic-periodic conditions
//! `f(x₁ + L₁, x₂) = e^{i b L₁ x₂} f(x₁, x₂)` and `f(x₁, x₂ + L₂) = f(x₁, x₂)`.
//! Its spectrum is `E_n = ħω_c(n + ½)`, each level `M`-fold degenerate, with
//! eigenfunctions obtained by summing infinite-volume orbitals over magnetic
//! translations by multiples of `L₁`.

mod basis;
mod hamiltonian;
pub mod hermite;
mod orbital;

pub use basis::{build_orbital_set, OrbitalSet};
pub use hamiltonian::{apply_landau_hamiltonian, MIN_POINTS_PER_LENGTH};
pub use hermite::{hermite_function, HermiteEvaluator};
pub use orbital::{
    check_magnetic_bc, finite_volume_orbital, infinite_volume_orbital, infinite_volume_profile, magnetic_translate,
    BcResidual, BoundaryTrace, LandauOrbital, OrbitalField, TAIL_TOLERANCE,
};

use crate::model::PhysicalConstants;

/// `E_n = (ħ²/2m)·b·(2n+1)`.
pub fn landau_level(n: usize, constants: &PhysicalConstants) -> f64 {
    constants.hbar * constants.hbar / (2.0 * constants.mass) * constants.b() * (2 * n + 1) as f64
}
