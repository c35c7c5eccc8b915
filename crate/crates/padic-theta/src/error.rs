use thiserror::Error;

/// Errors surfaced by the exact-arithmetic and pipeline layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quadratic extension constant mismatch: x^2 + {0} vs x^2 + {1}")]
    QuadExtMismatch(String, String),
    #[error("quaternion algebra mismatch")]
    AlgebraMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is singular over Q")]
    SingularMatrix,
    #[error("element has zero reduced norm")]
    ZeroNorm,
    #[error("{0} is not an element of the scalar ring")]
    NotInScalarRing(String),
    #[error("basis does not span a ring closed under multiplication: {0}")]
    NotAnOrder(String),
    #[error("gamma is not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("lattice is not unimodular at {0}")]
    NotUnimodular(u64),
    #[error("positive norm required, got {0}")]
    NonPositiveNorm(String),
    #[error("hensel seed {seed} is not a root of x^2 + {c} mod {p}")]
    BadHenselSeed { seed: u64, c: String, p: u64 },
    #[error("p-adic precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("precision {requested} exceeds the supported maximum {max} for p = {p}")]
    PrecisionTooLarge { requested: u32, max: u32, p: u64 },
    #[error("coefficient ring mismatch: {0}")]
    RingMismatch(String),
    #[error("series bound {have} is insufficient, need at least {need}")]
    InsufficientBound { have: u64, need: u64 },
    #[error("ordinary projection did not stabilize within budget: {0}")]
    NonConvergent(String),
    #[error("eigenvalue collision at working precision: {0}")]
    EigenvalueCollision(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error("enumeration cover is insufficient: {0}")]
    CoverInsufficient(String),
    #[error("integer overflow in enumeration setup: {0}")]
    Overflow(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
