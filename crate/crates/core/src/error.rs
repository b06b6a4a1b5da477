use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("undecided player {0}")]
    UndecidedPlayer(usize),
    #[error("normalization defined for affine only (game has degree {0})")]
    NotAffine(usize),
    #[error("profile space has {size} elements, cap is {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("empty equilibrium set")]
    EmptyEquilibriumSet,
    #[error("ratio undefined: optimum is zero while the compared solution costs {0}")]
    UndefinedRatio(f64),
    #[error("best-response dynamics did not converge within {0} steps")]
    NonConvergence(usize),
    #[error("incompatible potential: {0}")]
    IncompatiblePotential(String),
    #[error("degenerate optimum: O has zero social cost, normalization row reads 0 = 1")]
    DegenerateOptimum,
    #[error("concept mismatch: {0}")]
    ConceptMismatch(String),
    #[error("certificate does not match concept: {0}")]
    CertificateMismatch(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("uniqueness condition cost_O(k-1) > cost_K(k) fails for k in {0:?}")]
    UniquenessViolated(Vec<usize>),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
