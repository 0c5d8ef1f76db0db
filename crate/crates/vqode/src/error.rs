//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VqodeError {
    #[error("qubit count {0} not in 1..=24")]
    BadQubitCount(usize),

    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("CNOT control and target are the same qubit {0}")]
    CnotSameQubit(usize),

    #[error("node set invalid: {0}")]
    BadNodeSet(String),

    #[error("theta length {given} does not match slot count {expected}")]
    ThetaLengthMismatch { given: usize, expected: usize },

    #[error("arccos argument {0} outside [-1, 1]")]
    ArccosDomain(f64),

    #[error("encoding derivative diverges: |gamma| = {0} >= 1")]
    EncodingDerivativeDiverges(f64),

    #[error("slot {0} not present in circuit")]
    UnknownSlot(usize),

    #[error("slot {0} bound to a non-rotation gate")]
    SlotNotRotation(usize),

    #[error("empty point list")]
    EmptyPointList,

    #[error("negative loss weight {0}")]
    NegativeWeight(f64),

    #[error("gradient length {given} does not match parameter count {expected}")]
    GradientLengthMismatch { given: usize, expected: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("degenerate interval [{0}, {1}]")]
    DegenerateInterval(f64, f64),

    #[error("discriminant {0} is non-negative; underdamped oracle requires b^2 - 4mk < 0")]
    NotUnderdamped(f64),

    #[error("source term queried exactly at the discontinuity x = {0}")]
    SourceAtMidpoint(f64),

    #[error("training diverged at iteration {iter}: {reason}")]
    Diverged { iter: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for VqodeError {
    fn from(e: std::io::Error) -> Self {
        VqodeError::Io(e.to_string())
    }
}
