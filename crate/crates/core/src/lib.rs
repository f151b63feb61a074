//! Simulator for fast phase gates on a nuclear spin coupled to an NV electron
//! spin, driven by fast/slow rotating electric and magnetic fields.
//!
//! Closed-form results (gate speed, decoherence, systematic error, conditional
//! gate) live next to a brute-force propagator that checks them.

pub mod cli;
pub mod conditional;
pub mod error;
pub mod frames;
pub mod hamiltonian;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod propagate;

pub use error::{Error, Result};

/// Double-precision complex matrix used by the physics modules.
pub type CMatrix = linalg::Matrix<f64>;
/// Double-precision complex vector used by the physics modules.
pub type CVector = linalg::Vector<f64>;
/// Single-precision variants of the linear algebra types.
pub type CMatrix32 = linalg::Matrix<f32>;
pub type CVector32 = linalg::Vector<f32>;
