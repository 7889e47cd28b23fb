use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel evaluated at a singular point ({0})")]
    SingularInput(String),

    #[error("point ({x1}, {x2}) lies outside the box of half-width {half_width}")]
    OutOfBox { x1: f64, x2: f64, half_width: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("mollifier tail mass {mass:e} outside the box exceeds tolerance {tolerance:e}")]
    TailMass { mass: f64, tolerance: f64 },

    #[error("density is not normalized: mass {0}")]
    NotNormalized(f64),

    #[error("initial density degenerates to a point mass")]
    PointMass,

    #[error("support mismatch: f = {f:e} where g = {g:e} at node ({i}, {j})")]
    SupportMismatch { f: f64, g: f64, i: usize, j: usize },

    #[error("integrability gate: exponent {0} overflows")]
    Integrability(f64),

    #[error("shift ({0}, {1}) is too large for the box")]
    ExcessiveShift(f64, f64),

    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("negative density {min:e} at t = {t}")]
    NegativeDensity { min: f64, t: f64 },

    #[error("boundary mass {mass:e} at t = {t} exceeds tolerance")]
    BoundaryMass { mass: f64, t: f64 },

    #[error("path length mismatch: expected {expected} increments, found {found}")]
    PathLength { expected: usize, found: usize },

    #[error("sample size error: {0}")]
    SampleSize(String),

    #[error("run stopped at tau = {0} before the requested time")]
    StoppedRun(f64),

    #[error("need at least {needed} seeds, got {got}")]
    InsufficientSeeds { needed: usize, got: usize },

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("grid rule violated: {0}")]
    GridRule(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Decode(_) => 2,
            Error::Assumption(_)
            | Error::Inadmissible(_)
            | Error::GridRule(_)
            | Error::TailMass { .. }
            | Error::NotNormalized(_)
            | Error::PointMass
            | Error::InsufficientSeeds { .. } => 3,
            Error::Cfl { .. } | Error::NegativeDensity { .. } | Error::BoundaryMass { .. } => 4,
            Error::SingularInput(_)
            | Error::OutOfBox { .. }
            | Error::SupportMismatch { .. }
            | Error::Integrability(_)
            | Error::ExcessiveShift(..)
            | Error::PathLength { .. }
            | Error::SampleSize(_)
            | Error::StoppedRun(_) => 5,
            Error::Io(_) => 6,
        }
    }
}
