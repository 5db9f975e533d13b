use sunflower::expansion::ExpansionError;
use sunflower::filtering::FilterError;
use sunflower::graph::GraphError;
use sunflower::qsim::SimError;
use sunflower::ParamError;

/// Exit codes; 2 is left to clap for usage errors.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PARAMS: i32 = 3;
    pub const ARTIFACT_NOT_FOUND: i32 = 4;
    pub const ARTIFACT_INVALID: i32 = 5;
    pub const GRAPH: i32 = 6;
    pub const NUMERIC: i32 = 7;
    pub const SIMULATION: i32 = 8;
    pub const EXPANSION: i32 = 9;
    pub const OUTPUT: i32 = 10;
    pub const CONFIG: i32 = 11;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Params(ParamError),
    #[error("graph artifact not found: {0}")]
    ArtifactNotFound(String),
    #[error(transparent)]
    Graph(GraphError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Sim(SimError),
    #[error(transparent)]
    Expansion(ExpansionError),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("bad config: {0}")]
    Config(String),
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Params(e)
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Params(p) => CliError::Params(p),
            other => CliError::Graph(other),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Graph(g) => g.into(),
            SimError::Filter(f) => CliError::Filter(f),
            other => CliError::Sim(other),
        }
    }
}

impl From<ExpansionError> for CliError {
    fn from(e: ExpansionError) -> Self {
        match e {
            ExpansionError::Graph(g) => g.into(),
            other => CliError::Expansion(other),
        }
    }
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Params(_) => exit::PARAMS,
            CliError::ArtifactNotFound(_) => exit::ARTIFACT_NOT_FOUND,
            CliError::Graph(GraphError::Format(_) | GraphError::ArtifactMismatch(_)) => exit::ARTIFACT_INVALID,
            CliError::Graph(_) => exit::GRAPH,
            CliError::Filter(_) => exit::NUMERIC,
            CliError::Sim(_) => exit::SIMULATION,
            CliError::Expansion(_) => exit::EXPANSION,
            CliError::Output(_) => exit::OUTPUT,
            CliError::Config(_) => exit::CONFIG,
        }
    }
}
