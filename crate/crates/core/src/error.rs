use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite curvature sample G({t}) = {value}")]
    NonFiniteCurvature { t: f64, value: f64 },

    #[error("mu undefined: h' vanishes at t = {t}")]
    MuUndefined { t: f64 },

    #[error("radius {requested} exceeds model range t_max = {t_max}")]
    OutOfRange { requested: f64, t_max: f64 },

    #[error("Hessian at point {point} is not symmetric (asymmetry {asymmetry:e})")]
    Asymmetric { point: usize, asymmetry: f64 },

    #[error("series not summable: term {term:e} at k = {k}")]
    NotSummable { k: u64, term: f64 },

    #[error("a = {a} exceeds a_bar = {a_bar}")]
    AExceedsABar { a: f64, a_bar: f64 },

    #[error("grid too coarse: {nodes_across:.2} nodes across B_a, need at least 8")]
    GridTooCoarse { nodes_across: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("empty interior after exclusion")]
    EmptyInterior,

    #[error(
        "eigensolver did not converge in {iterations} iterations (best residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("exhaustion is not nested: K_{step} is not contained in K_{next}", next = step + 1)]
    NotNested { step: usize },

    #[error("function not positive where required: {0}")]
    NonPositive(String),

    #[error("intrinsic balls {first} and {second} overlap")]
    OverlappingBalls { first: usize, second: usize },

    #[error("intrinsic ball {index} reaches the boundary of the domain")]
    BallLeavesDomain { index: usize },

    #[error("gauge argument {t} outside validity range [0, {limit})")]
    OutsideValidity { t: f64, limit: f64 },

    #[error("undersampled set: {points_per_set:.2} points per covering set at delta = {delta:e}, need more than 4")]
    Undersampled { delta: f64, points_per_set: f64 },

    #[error("empty escape region")]
    EmptyEscapeRegion,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error reflects a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NotSummable { .. }
                | Error::MuUndefined { .. }
                | Error::NonPositive(_)
                | Error::Undersampled { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
