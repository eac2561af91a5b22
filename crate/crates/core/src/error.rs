use thiserror::Error;

/// Errors raised by the particle scheme, the reference solver and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the mathematical domain of a map (e.g. a negative density).
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Initial data must carry unit mass.
    #[error("initial density is not normalized: mass = {mass}")]
    Normalization { mass: f64 },

    #[error("mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    /// Two consecutive particles are not strictly ordered.
    #[error("collision between particles {left} and {right} (x = {x_left}, {x_right})")]
    Collision {
        left: usize,
        right: usize,
        x_left: f64,
        x_right: f64,
    },

    /// The ordering guard halved the step below the floor.
    #[error(
        "stiffness at t = {time}: step {dt} fell below floor {floor} (particles {left}, {right})"
    )]
    Stiffness {
        time: f64,
        dt: f64,
        floor: f64,
        left: usize,
        right: usize,
    },

    #[error("maximum principle violated at t = {time}: min spacing {spacing} < bound {bound}")]
    MaximumPrinciple { time: f64, spacing: f64, bound: f64 },

    #[error("reference solver failure: {0}")]
    SolverBug(String),

    /// A sub-run of a study failed.
    #[error("run with n = {n} failed: {source}")]
    Run {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
