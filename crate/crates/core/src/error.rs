//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {{{0},{1}}}")]
    DuplicateEdge(usize, usize),

    #[error("node {0} is isolated: pair selection is undefined")]
    IsolatedNode(usize),

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-finite entry at ({0},{1})")]
    NonFinite(usize, usize),

    #[error("matrix is not Hermitian: max deviation {0:.3e}")]
    NotHermitian(f64),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("negative eigenvalue {0:.3e} beyond tolerance")]
    NegativeEigenvalue(f64),

    #[error("trace is {0}, expected 1 within tolerance")]
    TraceNotOne(f64),

    #[error("distribution sums to {0}, expected 1 within 1e-12")]
    Unnormalized(f64),

    #[error("negative probability {0:.3e}")]
    NegativeProbability(f64),

    #[error("parameter {name} = {value} outside valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown ket symbol '{0}' (expected one of 0, 1, +, -)")]
    UnknownKet(char),

    #[error("qubit pair ({0},{1}) invalid for {2} qubits")]
    BadQubitPair(usize, usize, usize),

    #[error("{what} = {n} exceeds the supported limit of {max}")]
    TooLarge {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("integrator step too large: trace drift {drift:.3e} exceeds {bound:.1e}; reduce the step size")]
    StepTooLarge { drift: f64, bound: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
