//! Quantum state transfer through a coupled-cavity array in which every
//! cavity holds a two-photon Jaynes-Cummings emitter.
//!
//! In the sector with a single atomic excitation or a single photon pair
//! the array Hamiltonian splits into 2×2 blocks, one per eigenmode of the
//! chain adjacency matrix. [`dynamics`] and [`encoding`] evaluate the
//! resulting closed forms; [`oracle`] evolves the same states by brute-force
//! diagonalization so the two can be compared.

pub mod dynamics;
pub mod encoding;
pub mod error;
pub mod io;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Channel, HoppingPattern, RestrictedState, SystemParams};
