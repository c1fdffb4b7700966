//! Simulation of one-dimensional open quasi-free fermion chains.
//!
//! The state of the chain is the two-point correlation matrix
//! `C_ij = <c_i^† c_j>`, evolved under the Lindblad equation of motion for
//! linear injection/removal jump operators. From `C` the crate builds the
//! information lattice (scale-resolved von Neumann information), the local
//! information currents flowing on it, the noise lattice of particle-number
//! variances, and the fermionic negativity between disjoint regions.
//!
//! Small chains can additionally be lifted to the full `2^N` Fock space
//! ([`fock`]) and unraveled into Monte-Carlo wave-function trajectories
//! ([`trajectory`]), which gives an independent check on the
//! correlation-matrix results.
//!
//! Sites are 1-based at every public entry point that takes a site index
//! (`j = 1..=N`), matching the usual physics labelling. Matrices are 0-based
//! internally.

pub mod chain;
pub mod correlation;
pub mod currents;
pub mod dynamics;
pub mod error;
pub mod exact_n3;
pub mod fock;
pub mod lattice;
pub mod negativity;
pub mod noise;
pub mod spectral;
pub mod trajectory;

pub use chain::{ChainSpec, ReservoirSpec};
pub use correlation::{CorrelationMatrix, PhysicalityReport};
pub use error::{Error, Result};
pub use lattice::{InfoLattice, LatticeCoord, Triangular};

/// Dense complex matrix used for every single-particle quantity.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;

pub use num_complex::Complex64;
