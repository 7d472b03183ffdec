//! Thermalization and decoherence times of quantum systems coupled to
//! blackbody radiation through their electric dipole.
//!
//! Two generators are compared. The dyadic Lindblad construction (`lba`) has
//! one jump operator per ordered pair of eigenstates, with amplitudes fixed by
//! detailed balance; its populations obey a Pauli rate equation. The quantum
//! optical master equation (`qome`) groups dyads by transition frequency and
//! behaves differently whenever levels or gaps are degenerate.

pub mod ensemble;
pub mod error;
pub mod lba;
pub mod linalg;
pub mod model;
pub mod qome;

pub use error::{Error, Result};
