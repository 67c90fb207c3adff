//! Landau levels on a magnetic torus, fermionic many-body dynamics in a
//! truncated Slater-determinant space, and time-dependent Hartree–Fock.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] – physical constants, torus geometry, quadrature grid and the
//!   key=value configuration format.
//! * [`potential`] – bounded, doubly periodic two-body kernels.
//! * [`landau`] – Hermite functions, the finite-volume Landau eigenbasis,
//!   magnetic translations and a finite-difference Landau Hamiltonian.
//! * [`many_body`] – determinant enumeration, Slater–Condon assembly,
//!   non-interacting ground states and exact propagation.
//! * [`hartree_fock`] – the nonlinear orbital dynamics and its integrator.
//! * [`analysis`] – exact vs. Hartree–Fock comparison, error bounds and
//!   reduced density matrices.
//! * [`io`] – deterministic CSV/JSON emitters and run manifests.

pub mod analysis;
pub mod error;
pub mod hartree_fock;
pub mod io;
pub mod landau;
pub mod linalg;
pub mod many_body;
pub mod model;
pub mod potential;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use analysis::Problem;
pub use analysis::{ComparisonRecord, ScalingConfig};
pub use hartree_fock::{HFState, HFTrajectory, Scheme};
pub use landau::{OrbitalField, OrbitalSet};
pub use many_body::{DeterminantBasis, FillingSpec, InteractionTensor, ManyBodyState, SparseHermitian};
pub use model::{DomainConfig, Grid, PhysicalConstants, SimulationConfig};
pub use potential::PotentialSpec;
