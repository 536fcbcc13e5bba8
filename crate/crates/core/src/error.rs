use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid brick {id}: {reason}")]
    InvalidBrick { id: usize, reason: String },

    #[error("cannot connect brick {0} to itself")]
    SelfConnection(usize),

    #[error("bricks {a} and {b} are not adjacent (closest face gap {gap_mm:.2} mm)")]
    NotAdjacent { a: usize, b: usize, gap_mm: f64 },

    #[error("interface between bricks {a} and {b} has zero area")]
    ZeroArea { a: usize, b: usize },

    #[error("unknown brick {0}")]
    UnknownBrick(usize),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model has no supports")]
    NoSupports,

    #[error("floating component not connected to any support (bricks {bricks:?})")]
    Floating { bricks: Vec<usize> },

    #[error("singular stiffness matrix: {0}")]
    Singular(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidBrick { .. } => "invalid_brick",
            Error::SelfConnection(_) => "self_connection",
            Error::NotAdjacent { .. } => "not_adjacent",
            Error::ZeroArea { .. } => "zero_area",
            Error::UnknownBrick(_) => "unknown_brick",
            Error::InvalidModel(_) => "invalid_model",
            Error::NoSupports => "no_supports",
            Error::Floating { .. } => "floating",
            Error::Singular(_) => "singular",
            Error::Config(_) => "config",
            Error::InvalidPlan(_) => "invalid_plan",
            Error::Optimization(_) => "optimization",
            Error::Io(_) => "io",
        }
    }
}
