use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite coefficient at degree {degree}")]
    NonFinite { degree: i32 },

    #[error("coefficient of u^-1 is {residue}, the form is not exact")]
    NonzeroResidue { residue: Complex64 },

    #[error("cannot evaluate a polynomial with a polar part at 0")]
    ZeroInPolarPart,

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cycle does not lie inside the curve domain: {0}")]
    CycleOutsideDomain(String),

    #[error("no period-dominating directions found in the monomial dictionary (|m| <= {max_degree})")]
    DominationFailed { max_degree: i32 },

    #[error("paired component {component} is constant")]
    ConstantPairedComponent { component: usize },

    #[error("period matrix is singular")]
    SingularMatrix,

    #[error("period {period} does not vanish")]
    NonvanishingPeriod { period: Complex64 },

    #[error("center curve is not Legendrian (residual {residual:e})")]
    CenterNotLegendrian { residual: f64 },

    #[error("substitution degree N = {n} does not clear poles (need N > {depth})")]
    PoleNotCleared { n: usize, depth: usize },

    #[error("Riemann-Hilbert search did not converge up to N = {n_max}")]
    NotConverged { n_max: usize },

    #[error("boundary family does not match the center curve: {0}")]
    FamilyMismatch(String),

    #[error("plane coefficient a_{index} vanishes")]
    DegeneratePlane { index: usize },

    #[error("normal vector degenerate at boundary sample {sample}")]
    NormalDegenerate { sample: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("boundary bound violated: measured {measured:e} >= bound {bound:e}")]
    PushBoundViolated { measured: f64, bound: f64 },

    #[error("flow diverged (|p| = {norm:e})")]
    Diverged { norm: f64 },

    #[error("kernel basis is degenerate: {0}")]
    BasisDegenerate(String),

    #[error("endpoint derivative at t = {t} is not tangent to the contact distribution")]
    DerivativeNotLegendrianAtEndpoint { t: f64 },

    #[error("path tolerance unreachable with {pieces} pieces")]
    ToleranceUnreachable { pieces: usize },
}
