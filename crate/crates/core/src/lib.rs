//! Transverse-field Ising spin networks on labeled graphs, evaluated as
//! weak-field sensors.
//!
//! Basis convention shared by every module: a basis index `b` in
//! `0..2^n` stores node `i` at bit `n - 1 - i` (node 0 is the most
//! significant bit). A zero bit is spin-up, the `+1` eigenstate of
//! `sigma_z`.

pub mod error;
pub mod ga;
pub mod graph;
pub mod hamiltonian;
pub mod krylov;
pub mod metrology;
pub mod nn;
pub mod phasespace;
pub mod rng;
pub mod spectral;
pub mod thermal;

pub use error::{Error, Result};
pub use ga::{evolve, exhaustive_best, CrossoverMode, GaConfig, GaRunRecord};
pub use graph::{Graph, GraphKind};
pub use hamiltonian::{CouplingScaling, HamiltonianMatrix, SpinSystemParams};
pub use metrology::{Parity, ScalingFit};
pub use spectral::{GroundState, Spectrum};
pub use thermal::{GibbsEnsemble, QfiValue};
