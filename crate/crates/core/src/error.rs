use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("word is freely trivial")]
    EmptyAfterReduction,
    #[error("not a Dehn presentation: maximal overlap ratio {ratio} is not below {lambda}")]
    NotDehnPresentation { ratio: String, lambda: String },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("alphabet sizes differ ({0} vs {1})")]
    AlphabetMismatch(usize, usize),
    #[error("reachable product exceeds the cap of {0} states")]
    StateExplosion(usize),
    #[error("transducer is not synchronous")]
    NotSynchronous,
    #[error("transducer state {0} does not permute the alphabet")]
    NotInvertible(String),
    #[error("invalid transducer: {0}")]
    InvalidTransducer(String),
    #[error("invalid prefix map: {0}")]
    InvalidPrefixMap(String),
    #[error("horizon {horizon} is too small for depth {depth}")]
    HorizonTooSmall { depth: usize, horizon: usize },
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error("image cones cannot be separated within depth {0}")]
    DepthInsufficient(usize),
    #[error("map is not injective at depth {0}")]
    NotInjective(usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyAfterReduction => "EmptyAfterReduction",
            Error::NotDehnPresentation { .. } => "NotDehnPresentation",
            Error::InvalidParameters(_) => "InvalidParameters",
            Error::Parse(_) => "Parse",
            Error::AlphabetMismatch(..) => "AlphabetMismatch",
            Error::StateExplosion(_) => "StateExplosion",
            Error::NotSynchronous => "NotSynchronous",
            Error::NotInvertible(_) => "NotInvertible",
            Error::InvalidTransducer(_) => "InvalidTransducer",
            Error::InvalidPrefixMap(_) => "InvalidPrefixMap",
            Error::HorizonTooSmall { .. } => "HorizonTooSmall",
            Error::UnknownFormat(_) => "UnknownFormat",
            Error::DepthInsufficient(_) => "DepthInsufficient",
            Error::NotInjective(_) => "NotInjective",
            Error::Json(_) => "Json",
        }
    }

    /// Whether the error comes from malformed input rather than from the
    /// mathematics of a well-formed request.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Json(_)
                | Error::InvalidTransducer(_)
                | Error::InvalidPrefixMap(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
