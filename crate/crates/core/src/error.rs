use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("patch radius must be at least 1, got {0}")]
    InvalidRadius(u32),

    #[error("holes {first} and {second} overlap")]
    OverlappingHoles { first: usize, second: usize },

    #[error("hole {hole} touches the outer boundary")]
    HoleTouchesBoundary { hole: usize },

    #[error("hole index {hole} out of range (lattice has {count} holes)")]
    UnknownHole { hole: usize, count: usize },

    #[error("index {index} out of range for {what} (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("hexagon {vertex} is broken but has no broken neighbour; single flips need two adjacent broken hexagons")]
    IsolatedBrokenHexagon { vertex: usize },

    #[error("operator size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("code invariant violated between {first} and {second}: {reason}")]
    CodeInvariant {
        first: String,
        second: String,
        reason: String,
    },

    #[error("operator {0} is detectable (anticommutes with a generator)")]
    DetectableOperator(String),

    #[error("wells merged at flux detuning {delta_flux}: no pair of separated minima")]
    DegenerateWells { delta_flux: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("wrong perturbation type: {0}")]
    WrongPerturbation(String),

    #[error("term {term} toggles an enforced constraint; use the penalty formulation with that constraint released")]
    HardSectorViolation { term: String },

    #[error("term {term} is not representable as a real matrix (odd number of Y factors)")]
    ComplexTerm { term: String },

    #[error("sector dimension {dim} exceeds cap {cap}")]
    ResourceLimit { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("projection has zero norm: {0}")]
    ZeroNorm(String),

    #[error("zero coefficient {name} cannot realise nonzero angle {angle}")]
    ZeroCoefficient { name: &'static str, angle: f64 },

    #[error("expected {expected} coefficients for {kind}, got {got}")]
    CoefficientCount {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
