//! Simulation and verification core for a verifier-initiated quantum signature
//! built on a discrete-Heisenberg zero-knowledge protocol.
//!
//! Everything in this crate is a pure computation over small dense complex
//! matrices. It needs only `alloc`; IO, file formats and the command-line
//! driver live in the companion `viqds` crate.
//!
//! Conventions used throughout:
//!
//! * Tensor products are left-factor-major: in `A ⊗ B` the index of `A` is the
//!   most significant digit.
//! * Choi matrices are input-major: `C[E] = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, so that
//!   `Tr[C (A^T ⊗ B)] = Tr[E(A) B]`.
//! * The qudit dimension is a prime `p`; prime powers arise only by
//!   concatenating protocol instances.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adversaries;
pub mod concat;
mod error;
pub mod field;
pub mod heisenberg;
pub mod linalg;
pub(crate) mod math;
pub mod random;
pub mod soundness;
pub mod vis;
pub mod viqds;

pub use error::{Error, Result};
pub use field::FieldElement;
pub use linalg::{CMatrix, StateVector, C64};
