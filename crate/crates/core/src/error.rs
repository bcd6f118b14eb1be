use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sample must contain at least two records")]
    EmptyOrSingleton,
    #[error("non-finite {field} in record {index}")]
    NonFinite { index: usize, field: &'static str },
    #[error("sigma must be finite and positive (record {index})")]
    NonPositiveSigma { index: usize },
    #[error("record {index} has no membership probability")]
    MissingProbability { index: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("fixed-point iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("invalid pin: {0}")]
    BadPin(String),
    #[error("step-function knots must be positive for log-scale smoothing")]
    NonPositiveKnot,
    #[error("no stars on one side of the bisector")]
    EmptySide,
    #[error("invalid test statistic: {0}")]
    BadStatistic(String),
    #[error("weight function must be positive on [0, tau]")]
    BadWeight,
    #[error("regressor is identically zero at every grid point")]
    DegenerateRegressor,
    #[error("kappa0 is constant; split point undefined")]
    FlatKappa,
    #[error("invalid simulation grid: {0}")]
    BadGrid(String),
    #[error("argument must be positive: {0}")]
    NonPositiveArg(&'static str),
    #[error("nonpositive curvature; the simplified split-point limit is ill-posed")]
    NonPositiveCurvature,
    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
