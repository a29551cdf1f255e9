use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("room does not fit inside the {extent} m raster extent")]
    RoomTooLarge { extent: f64 },
    #[error("no valid location for category {category}")]
    NoValidLocation { category: usize },
    #[error("model is not trained")]
    Untrained,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("placement rejected: {0}")]
    PlacementRejected(String),
    #[error("no catalog entry for category {0}")]
    NoCatalogEntry(usize),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
