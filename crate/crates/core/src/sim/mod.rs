//! Desk-scale quantum simulator.
//!
//! Basis convention: for an `n`-qubit register, basis index `k` has binary
//! expansion `j1 j2 ... jn` with qubit 0 on the most significant bit. Every
//! module in the crate uses this single convention; the `Reverse` benchmark
//! exists to convert between it and the opposite endianness.

mod circuit;
mod density;
mod gate;
mod rng;
mod state;

pub use circuit::{Circuit, Op};
pub use density::{hermitian_eigen, DensityMatrix, HermitianEigen};
pub use gate::Gate;
pub use rng::RandomStream;
pub use state::{MeasurementOutcome, StateVector};

pub use num_complex::Complex64;

use thiserror::Error;

/// Largest register the simulator accepts (128K amplitudes).
pub const MAX_QUBITS: usize = 14;

/// Normalization tolerance used for states and ensembles.
pub const NORM_TOL: f64 = 1e-9;

/// Unitarity tolerance for gate matrices.
pub const UNITARY_TOL: f64 = 1e-12;

/// Reconstruction tolerance for density-matrix spectral decompositions.
pub const DM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("register of {0} qubits exceeds the {MAX_QUBITS}-qubit cap")]
    TooManyQubits(usize),
    #[error("register must have at least one qubit")]
    EmptyRegister,
    #[error("qubit index {index} out of range for {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit {0} appears more than once among controls and targets")]
    OverlappingQubits(usize),
    #[error("gate {gate} acts on {arity} qubits but {given} targets were given")]
    ArityMismatch { gate: String, arity: usize, given: usize },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{0}` requires an angle")]
    MissingAngle(String),
    #[error("gate `{0}` does not take an angle")]
    UnexpectedAngle(String),
    #[error("outcome {outcome} does not fit in {bits} measured bits")]
    OutcomeOutOfRange { outcome: u64, bits: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("ensemble weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("negative ensemble weight {0}")]
    NegativeWeight(f64),
    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("eigenvalue {0:e} is negative beyond tolerance")]
    NegativeEigenvalue(f64),
    #[error("empty ensemble")]
    EmptyEnsemble,
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn check_register_size(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(SimError::EmptyRegister);
    }
    if num_qubits > MAX_QUBITS {
        return Err(SimError::TooManyQubits(num_qubits));
    }
    Ok(())
}
