use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("sensor {sensor} has no budget row for resolution {resolution}")]
    UnknownResolution { sensor: String, resolution: u8 },

    #[error("penalty curve evaluated at negative elapsed time {0}")]
    NegativeElapsed(f64),

    #[error("scenario is invalid: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    #[error("swath {swath}: degenerate strip (entry equals exit)")]
    DegenerateStrip { swath: usize },

    #[error("swath {swath}: strip width must be positive, got {width}")]
    BadStripWidth { swath: usize, width: f64 },

    #[error("gap range G = {requested} is unsupported; only G = S = {swaths} is modeled")]
    UnsupportedGapRange { requested: usize, swaths: usize },

    #[error("scenario has no swaths")]
    NoSwaths,

    #[error("variable {0} is not part of the model")]
    UnknownVariable(String),

    #[error("assignment is missing variable {0}")]
    MissingVariable(String),

    #[error("assignment is infeasible; violated rows: {}", .0.join(", "))]
    Infeasible(Vec<String>),

    #[error("resolution {resolution} is not usable by swath {swath} (sensor {sensor})")]
    ResolutionOmitted {
        swath: usize,
        sensor: String,
        resolution: u8,
    },

    #[error("instance exceeds search limits: {0}")]
    LimitsExceeded(String),

    #[error("search aborted after {nodes} nodes; the instance is too large for exhaustive search, export the MILP instead")]
    SearchBlowup { nodes: u64 },

    #[error("no plan satisfies the hard constraints of this instance")]
    NoFeasiblePlan,

    #[error("reports describe different scenarios ({0} vs {1})")]
    ScenarioMismatch(String, String),

    #[error("invalid generator spec: {0}")]
    InvalidGenSpec(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
