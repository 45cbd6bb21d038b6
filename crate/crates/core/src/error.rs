use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("power series centers differ ({0} vs {1})")]
    CenterMismatch(f64, f64),

    #[error("division by a series whose constant term {0:e} is (numerically) zero")]
    DivisionByZeroConstantTerm(f64),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("series order exhausted: {0}")]
    OrderExhausted(String),

    #[error("provider cannot supply order {requested} (available {available})")]
    InsufficientOrder { requested: usize, available: usize },

    #[error("assumption violated: {which} fails at x = {x:.6} (value {value:e})")]
    AssumptionViolated {
        which: String,
        x: f64,
        value: f64,
    },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("right-hand side has a non-decaying rate {0}")]
    NonDecayingInput(f64),

    #[error("no decaying solution: right-hand side contains a rate-0 component")]
    NoDecayingSolution,

    #[error("layer operator {0}")]
    LayerOperator(String),

    #[error("self-check failed: {0}")]
    SelfCheckFailed(String),

    #[error("quadrature under-resolved: levels give {coarse:e} and {fine:e}")]
    QuadratureUnderResolved { coarse: f64, fine: f64 },

    #[error("singular linear system (pivot {0:e})")]
    SingularSystem(f64),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point {0} outside the domain [0, 1]")]
    OutOfDomain(f64),

    #[error("degenerate fit: {0} usable points, need at least 3")]
    DegenerateFit(usize),

    #[error("reference too coarse: self-convergence gap {gap:e} vs remainder {remainder:e}")]
    ReferenceTooCoarse { gap: f64, remainder: f64 },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
