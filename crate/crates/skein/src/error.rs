use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("boundary mismatch: {0}")]
    Boundary(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed tangle word: {0}")]
    Word(String),
    #[error("movie frame {frame} not applicable: {msg}")]
    Frame { frame: usize, msg: String },
    #[error("expected a closed diagram, found {0} boundary points")]
    NotClosed(usize),
    #[error("C_k pattern matching failed; unmatched minimal complex has {objects} objects")]
    Pattern { objects: usize, detail: String },
    #[error("not an endomorphism: {0}")]
    NotEndo(String),
    #[error("inconsistent presentation: {0}")]
    Presentation(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("no isotopy equivalence found: {0}")]
    NoEquivalence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
