//! The antisymmetric `N`-particle space over the truncated Landau basis.
//!
//! Determinants are stored as ascending occupation tuples (and `u64` bit
//! masks), so a single-particle dimension of at most 64 is supported. The
//! second-quantized sign of `a_p` on a determinant is `(-1)^{#occupied < p}`.

mod determinants;
mod hamiltonian;
mod propagate;
mod slater;
mod tensor;

pub use determinants::{
    enumerate_determinants, noninteracting_ground_state, DeterminantBasis, FillingSpec, GroundState,
};
pub use hamiltonian::{assemble_hamiltonian, SparseHermitian};
pub use propagate::{evolve_exact, ExactPropagator, PropagationMethod, DENSE_LIMIT};
pub use slater::{embed_slater, slater_overlap, wedge_coefficients, ManyBodyState};
pub use tensor::{two_body_tensor, two_body_tensor_from_kernel, InteractionTensor};
