use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("eigenvalue cluster could not be resolved (residual {0:e})")]
    UnresolvedCluster(f64),
    #[error("eigenvalue labeling is not a bijection onto the p-th roots of unity")]
    Labeling,
    #[error("shift action overlap {0} deviates from unit modulus")]
    ShiftOverlap(f64),
    #[error("Born weights sum to {0}, expected 1")]
    BornWeights(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("elements do not sum to the identity (deviation {0:e})")]
    Incomplete(f64),
    #[error("map is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("state trace is {0}, expected 1")]
    Trace(f64),
    #[error("acceptance operator is not between 0 and I")]
    AcceptanceRange,
    #[error("instance exceeds the dimension cap ({dim} > {cap})")]
    DimensionCap { dim: usize, cap: usize },
    #[error("list lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("participant {participant} holds no public key copy for message {message}")]
    MissingPublicKey { participant: usize, message: usize },
    #[error("message {0} is outside the message space")]
    UnknownMessage(usize),
    #[error("forging strategy was created after the keys it attacks")]
    StrategyDependsOnKey,
    #[error("dual certificate leaves a gap of {0:e}")]
    CertificateGap(f64),
    #[error("solver stopped at {value} with certificate gap {gap:e}")]
    NotConverged { value: f64, gap: f64 },
    #[error("invalid parameter: {0}")]
    Invalid(&'static str),
}
