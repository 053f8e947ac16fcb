//! Simulation of deterministic and sequence-randomized dynamical decoupling.
//!
//! * [`linalg`]: dense complex matrices, exponentials, partial traces, norms.
//! * [`model`]: Pauli algebra and system/bath Hamiltonians.
//! * [`sequences`]: pulse sequences (Hahn, XY4, XY8, CDD, UDD) and randomization.
//! * [`engine`]: compilation to unitaries, channels and error metrics.
//! * [`experiments`]: parameter sweeps, CSV I/O and log-log slope fits.
//! * [`extended`]: double-double arithmetic for sub-1e-15 error resolution.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod extended;
pub mod linalg;
pub mod model;
pub mod sequences;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
