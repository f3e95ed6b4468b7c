use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid structure spec: {0}")]
    InvalidSpec(String),

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("covariance of component {0} is singular after regularization")]
    SingularCovariance(usize),

    #[error("selection ratio undefined: n_m + n_s = 0")]
    UndefinedRatio,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("graph has no eulerian trail from vertex {start}: {reason}")]
    NotEulerian { start: usize, reason: String },

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("no path found within {iterations} iterations")]
    BudgetExhausted { iterations: usize },

    #[error("invalid planner endpoint: {0}")]
    InvalidEndpoint(String),

    #[error("artifacts have no {0} layer")]
    MissingLayer(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
