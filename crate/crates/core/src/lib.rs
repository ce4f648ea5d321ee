//! Dense statevector simulation of symmetry operators, symmetry-preserving and
//! symmetry-breaking ansätze, symmetry projectors, and the circuits that
//! restore a broken symmetry on a quantum register.
//!
//! Qubit ordering is little-endian everywhere: qubit `j` holds bit `j` of the
//! basis index, so `|s_{n-1} … s_0⟩` has index `Σ_j s_j 2^j`. Under the
//! Jordan–Wigner mapping a `1` on qubit `j` means orbital `j` is occupied and
//! the all-zero state is the Fock vacuum.
//!
//! Module map:
//! - [`statevec`]: amplitudes, gate application, measurement, sector weights.
//! - [`pauli`]: Pauli strings and sums, Jordan–Wigner operators, symmetry operators.
//! - [`circuit`]: gate set, symmetry blocks, layered and BCS ansätze.
//! - [`symmetry`]: sector labels, sector dimensions, total-spin bookkeeping.
//! - [`projector`]: the projector representations and the oracle built from them.
//! - [`restore`]: the restoration procedures (post-processing, LCU, Grover/Hoyer,
//!   Hadamard + oracle, QPE, iterative Hadamard tests).
//! - [`resources`]: ancilla and gate accounting for each restoration method.

pub mod circuit;
pub mod error;
pub mod math;
pub mod pauli;
pub mod projector;
pub mod resources;
pub mod restore;
pub mod statevec;
pub mod symmetry;

pub use error::{Error, Result};
pub use math::{CMatrix, C64};
pub use statevec::Statevector;
pub use symmetry::{HalfInt, SymmetryKind};
