//! Two-parameter variational principle for the pair boson Hamiltonian:
//! thermodynamic-limit pressure, its optimizer, and a truncated Fock-space
//! oracle for finite-volume checks.
#![no_std]

extern crate alloc;

pub mod error;
pub mod model;
pub mod oracle;
pub mod pressure;
pub mod quad;
pub mod roots;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    coupling_norms, coupling_norms_certified, epsilon, lambda_value, lattice_modes,
    CouplingNorms, CouplingProfile, DecayBound, LatticeSpec, Mode, ModeClass, Model, ProfileKind,
};
