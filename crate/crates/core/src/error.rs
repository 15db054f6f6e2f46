use thiserror::Error;

use crate::Complex;

/// Errors raised anywhere in the pipeline.
///
/// Every variant knows which stage produced it ([`Error::module`]) and whether it is an
/// input problem or a numerical failure ([`Error::kind`]); the CLI maps those onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("exponent at line {line}, column {column} is not a non-negative integer literal")]
    InvalidExponent { line: usize, column: usize },
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
    #[error("line direction is zero")]
    ZeroDirection,
    #[error("affine chart does not cover projective group {0:?}")]
    ChartMissingGroup(Vec<String>),
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid tracker configuration: {0}")]
    InvalidConfig(String),
    #[error("singular Jacobian at t = {t}")]
    SingularJacobian { t: Complex },
    #[error("Newton iteration did not converge at t = {t} (residual {residual:e})")]
    NewtonDivergence { t: Complex, residual: f64 },
    #[error("step size underflow near t = {t}")]
    StepUnderflow { t: Complex },
    #[error("path {index} failed: {source}")]
    PathFailure {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("paths {first} and {second} collided near t = {t}")]
    PathCollision {
        first: usize,
        second: usize,
        t: Complex,
    },

    #[error("system is not square: {equations} equations in {variables} unknowns")]
    NotSquare { equations: usize, variables: usize },
    #[error("every one of the {0} homotopy paths failed")]
    AllPathsFailed(usize),

    #[error("restriction to the line is not a finite cover: {0}")]
    NotZeroDimensional(String),
    #[error("branch points {0} and {1} are too close to separate reliably")]
    ClusterAmbiguity(Complex, Complex),
    #[error("no usable branch witness after {0} attempts")]
    WitnessRetriesExhausted(usize),

    #[error("no valid base point after {0} attempts")]
    BasePointRetriesExhausted(usize),
    #[error("epsilon {epsilon} is not smaller than the distance {distance} from the base point")]
    EpsilonTooLarge { epsilon: f64, distance: f64 },
    #[error("endpoint matching failed: {0}")]
    MatchingFailure(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("permutation degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("enumeration of {0} states exceeds the feasibility guard")]
    Infeasible(u128),
    #[error("group is not transitive")]
    Intransitive,

    #[error("trace test certification failed for {0} part(s)")]
    Uncertified(usize),
}

/// Coarse classification used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Syntax { .. }
            | UnknownIdentifier { .. }
            | InvalidExponent { .. }
            | DimensionMismatch { .. }
            | ZeroDirection
            | ChartMissingGroup(_)
            | InvalidInput(_)
            | InvalidConfig(_)
            | NotSquare { .. }
            | InvalidPermutation(_)
            | DegreeMismatch { .. }
            | Infeasible(_)
            | Intransitive
            | EpsilonTooLarge { .. } => ErrorKind::Input,
            _ => ErrorKind::Numeric,
        }
    }

    /// Name of the pipeline stage the error originates from.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            Syntax { .. }
            | UnknownIdentifier { .. }
            | InvalidExponent { .. }
            | DimensionMismatch { .. }
            | NonFinite(_)
            | ZeroDirection
            | ChartMissingGroup(_) => "poly-core",
            InvalidInput(_) => "cli",
            InvalidConfig(_)
            | SingularJacobian { .. }
            | NewtonDivergence { .. }
            | StepUnderflow { .. }
            | PathFailure { .. }
            | PathCollision { .. } => "tracker",
            NotSquare { .. } | AllPathsFailed(_) => "solver",
            NotZeroDimensional(_) | ClusterAmbiguity(..) | WitnessRetriesExhausted(_) => {
                "branch-locus"
            }
            BasePointRetriesExhausted(_) | EpsilonTooLarge { .. } | MatchingFailure(_) => {
                "monodromy"
            }
            InvalidPermutation(_) | DegreeMismatch { .. } | Infeasible(_) | Intransitive => {
                "group-engine"
            }
            Uncertified(_) => "fiber-products",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
