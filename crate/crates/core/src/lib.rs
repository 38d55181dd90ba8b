//! Sequential generation of optimal symmetric quantum-cloner output states.
//!
//! The cloner output for `M` clones of a qubit lives on `2M - 1` qubits. This
//! crate builds that state, writes it as a matrix product state (MPS), reduces
//! the MPS bond dimension, and searches for a sequential circuit of
//! ancilla–qubit interactions that emits the state one qubit at a time.

pub mod compression;
pub mod error;
pub mod experiment;
pub mod gisin_massar;
pub mod linalg;
pub mod mps;
pub mod rng;
pub mod sequential;
pub mod simplex;
pub mod statevector;

pub use compression::{
    fidelity, regularization_scan, svd_truncate_mps, variational_compress, CompressionRequest,
    FidelityReport, Method, ScanOptions,
};
pub use error::{Error, Result};
pub use gisin_massar::{gm_coefficients, gm_state, GmSpec, PureQubit};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
pub use mps::{MatrixProductState, SiteTensor};
pub use sequential::{
    fidelity_vs_target, optimize_schedule, optimize_schedule_with, sequential_generate,
    CouplingSchedule, SynthesisOptions, SynthesisResult,
};
pub use statevector::Statevector;
