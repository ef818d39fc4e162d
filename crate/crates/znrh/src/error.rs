use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("root matching is ambiguous near {0}")]
    AmbiguousMatching(String),
    #[error("branch points are not pairwise distinct")]
    DuplicatePoints,
    #[error("expected an odd number of branch points, got {0}")]
    BadArity(usize),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("point lies on a cut and no side was given")]
    CutAmbiguity,
    #[error("normalization matrix is singular (condition {0:e})")]
    SingularNormalization(f64),
    #[error("theta parameters ill-conditioned: smallest eigenvalue of Im Pi is {0:e}")]
    IllConditioned(f64),
    #[error("theta[eps,delta](0) = {0:e} relative to theta(0): the Malgrange condition fails and the problem is not solvable")]
    SolvabilityViolation(f64),
    #[error("theta denominator vanishes at the sample point")]
    ThetaDenominatorZero,
    #[error("no admissible characteristic found: {0}")]
    NoneFound(String),
    #[error("characteristics are singular")]
    SingularCharacteristics,
    #[error("half differential vanishes at the sample point")]
    DegenerateH,
    #[error("finite difference step underflow")]
    StepUnderflow,
    #[error("homology convention mismatch: {0}")]
    ConventionMismatch(String),
    #[error("monodromy constant {0} is zero")]
    ZeroConstant(usize),
    #[error("no branch of the algebraic relation matches: {0}")]
    BranchSelection(String),
    #[error("path passes through a branch point")]
    PathThroughBranchPoint,
}

pub type Result<T> = std::result::Result<T, Error>;
