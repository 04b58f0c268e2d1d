//! Simulator for transferring an n-qubit GHZ state from operation qutrits
//! onto 2n memory qutrits through a shared cavity mode, with the stored
//! state encoded in a decoherence-free subspace against collective
//! dephasing.
//!
//! The crate is organized bottom-up:
//!
//! * [`hilbert`]: qutrit/cavity product spaces, states, fidelity.
//! * [`operators`]: resonant and dispersive Hamiltonians, pulse unitaries.
//! * [`evolve`]: exponential action, adaptive time-dependent integration and
//!   the closed-form Stark-shift evolution.
//! * [`protocol`]: preparation, the three cavity steps, decoding, the inverse
//!   transfer and the timing/leakage estimates.
//! * [`dephasing`]: collective-dephasing Hamiltonian and phase-kick ensembles.
//! * [`cli`]: configuration parsing and the `run`/`sweep`/`dephase` commands.

pub mod cli;
pub mod dephasing;
pub mod error;
pub mod evolve;
pub mod hilbert;
pub mod operators;
pub mod protocol;
pub mod sparse;
pub mod units;

pub use error::{Error, Result};
pub use hilbert::{HilbertSpace, Level, Role, StateVector};
pub use num_complex::Complex64;
pub use operators::{CouplingParams, OperatorMatrix, PulseKind};
