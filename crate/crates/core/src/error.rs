use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid query: {0}")]
    Query(String),
    #[error("cardinality error: {0}")]
    Cardinality(String),
    #[error("{} row(s) violate the schema of {relation}:\n{}", rows.len(), rows.join("\n"))]
    ConstraintViolation { relation: String, rows: Vec<String> },
    #[error("missing data for relation `{0}`")]
    MissingData(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unbounded sensitivity: {0}")]
    Unbounded(String),
    #[error("universe of {size} tuples exceeds the oracle cap of {cap}")]
    UniverseTooLarge { size: String, cap: usize },
    #[error("invalid parameter: {0}")]
    Param(String),
}

pub type Result<T> = std::result::Result<T, Error>;
