use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown robot `{0}`")]
    UnknownRobot(String),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("unknown trait `{0}`")]
    UnknownTrait(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),

    #[error("alpha = {0} >= 0.5: the makespan gap bound loses significance once it exceeds the largest possible makespan difference")]
    BoundInsignificant(f64),

    #[error("upper bound {ub} must exceed lower bound {lb}")]
    DegenerateBounds { lb: f64, ub: f64 },

    #[error("no robots in the team")]
    NoRobots,

    #[error("roadmap construction failed: {0}")]
    Roadmap(String),

    #[error(
        "instance too large for enumeration: {tasks} tasks x {robots} robots exceeds {limit} cells"
    )]
    TooLarge {
        tasks: usize,
        robots: usize,
        limit: usize,
    },

    #[error("search exhausted: {0}")]
    Exhausted(crate::search::Exhausted),

    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
