//! Simulation and analysis toolkit for protected Josephson-junction-array
//! qubits.
//!
//! The array is modelled as a spin-½ per rhombus on the edges of a punctured
//! triangular lattice whose vertices are hexagon centres. The crate builds
//! those lattices, instantiates the stabilizer code of vertex constraints
//! and triangle flips, diagonalises the resulting many-spin Hamiltonians in
//! constrained sectors, measures flux-tuning-induced tunnelling splittings
//! and turns them into logical gate schedules.

pub mod code;
pub mod error;
pub mod gates;
pub mod hamiltonian;
pub mod lanczos;
pub mod lattice;
pub mod pauli;
pub mod presets;
pub mod rhombus;
pub mod spectra;

pub use error::{Error, Result};
