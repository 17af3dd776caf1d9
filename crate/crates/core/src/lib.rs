//! Simulation of two trapped ions sharing a center-of-mass and a stretch mode.
//!
//! The crate covers three jobs:
//!
//! * building the bichromatic sideband, effective dispersive and carrier
//!   Hamiltonians on the space `electronic ⊗ Fock(c.m.) ⊗ Fock(stretch)` and
//!   propagating states under them ([`dynamics`]),
//! * running the pulse protocols that produce the four electronic Bell states
//!   ([`bellgen`]),
//! * the motional-state measurement chain: displacement, synthetic
//!   `P↓↓(τ)` records, non-negative inversion to populations and the
//!   parity-weighted two-mode Wigner function ([`tomography`]).
//!
//! Units: `ħ = 1`, frequencies in units of the trap frequency `ν`, times in
//! units of `1/ν`.

pub mod bellgen;
pub mod diag;
pub mod dynamics;
pub mod error;
pub mod fockspace;
pub mod linalg;
pub mod tomography;

pub use diag::{Diagnosed, Diagnostic};
pub use error::{Error, Result};
pub use fockspace::{
    Electronic, HilbertConfig, JointState, Mode, ModeParams, StateSpec, VibDensity,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Version string embedded into every artifact header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
