use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Geometry(String),
    #[error("singular local block on element {element} ({what})")]
    SingularLocal { element: usize, what: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("level {level}: {source}")]
    Level { level: usize, source: hho_sparse::SparseError },
    #[error(transparent)]
    Sparse(#[from] hho_sparse::SparseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
