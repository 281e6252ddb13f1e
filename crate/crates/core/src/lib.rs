//! Ground-state tracking for transverse-field Ising problems.
//!
//! The crate simulates an adiabatic sweep H(s) = (1−s)H0 + sH1 from a pure
//! transverse field H0 = −Σ S^x_i to a classical coupling graph
//! H1 = −Σ J_ij S^z_i S^z_j, holding the state as a matrix product state and
//! re-solving the ground state at each schedule point with a two-site sweep
//! algorithm. Along the way it records entanglement spectra, whose entropy
//! and index statistics are the interesting observables: they reveal how
//! large a bond dimension the sweep actually needed.
//!
//! Modules, roughly bottom-up:
//! - [`rng`]: pinned pseudorandom stream for reproducible instances.
//! - [`instance`]: coupling graphs and the classical energy.
//! - [`ordering`]: spin-to-slot paths and graph bandwidth.
//! - [`spectrum`]: entanglement-spectrum statistics.
//! - [`mps`]: matrix-product-state storage and manipulation.
//! - [`mpo`]: Hamiltonian construction as a matrix product operator.
//! - `lanczos` (internal): iterative lowest-eigenpair solver.
//! - [`dmrg`]: two-site ground-state search.
//! - [`anneal`]: the adaptive schedule driver and its telemetry.
//! - [`oracle`]: dense and enumeration-based references for small systems.

pub mod anneal;
mod contract;
pub mod dmrg;
pub mod error;
pub mod instance;
mod lanczos;
mod linalg;
pub mod mpo;
pub mod mps;
pub mod oracle;
pub mod ordering;
pub mod rng;
pub mod spectrum;

pub use error::{Error, Result};
