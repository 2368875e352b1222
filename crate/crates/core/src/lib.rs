//! Exact simulation of a qubit coupled to a single-qubit bath that is
//! continuously cooled to its ground state, together with executable
//! Markovianity witnesses (CP-divisibility via Choi operators and the
//! trace-distance backflow measure).
//!
//! Conventions used throughout:
//!
//! * Operators are expanded in the Pauli basis `σ_i ⊗ σ_j`, `i, j ∈ {0, x, y, z}`,
//!   with raw coefficients: `ρ = Σ v_ij σ_i ⊗ σ_j`. A two-qubit state has
//!   `v_00 = 1/4`, a one-qubit state `w = 1/2`.
//! * The 16-vector is ordered row-major with the system index outer.
//! * The bath ground state `|0ᴮ⟩` is the `σ_z = -1` eigenstate and
//!   `σ₋ᴮ = |0ᴮ⟩⟨1ᴮ|` lowers into it. This is the only convention under which
//!   the generic Lindbladian reproduces the tabulated 16×16 generator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod expm;
pub mod lindblad;
pub mod markovianity;
pub mod ode;
pub mod operator_space;
pub mod verify;

pub use analytic::{BlpValue, IncreaseInterval, Regime};
pub use error::{Error, Result};
pub use lindblad::{GeneratorMatrix, ModelParams, TimeGrid};
pub use markovianity::{MarkovianityReport, PauliTransferMap, QubitState, StatePair};
pub use operator_space::{BlochVector, CoherenceVector16, CoherenceVector4, Pauli};
