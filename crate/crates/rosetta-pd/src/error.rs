use std::path::PathBuf;

use rosetta_pd_core::bookshelf::BookshelfError;

/// Errors from reading and writing the supported file formats.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("MISSING_FILE: {0}")]
    MissingFile(PathBuf),
    #[error("HEADER_MISMATCH: {file}: {what} declares {declared}, found {found}")]
    HeaderMismatch {
        file: String,
        what: String,
        declared: usize,
        found: usize,
    },
    #[error("SYNTAX: {file}:{line}:{col}: {msg}")]
    Syntax {
        file: String,
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("UNKNOWN_NODE: net `{net}` references undeclared node `{node}`")]
    UnknownNode { net: String, node: String },
    #[error("UNKNOWN_MASTER: component `{component}` uses macro `{master}` absent from the library")]
    UnknownMaster { component: String, master: String },
    #[error("UNIT_MISMATCH: {0}")]
    UnitMismatch(String),
    #[error("NAME_COLLISION: `{0}` names more than one object after sanitization")]
    NameCollision(String),
    #[error("INVALID_DESIGN: {0}")]
    Invalid(String),
    #[error("IO_FAILURE: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Bookshelf(#[from] BookshelfError),
}

impl FormatError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FormatError::Io { path: path.into(), source }
    }

    pub fn syntax(file: &str, line: usize, col: usize, msg: impl Into<String>) -> Self {
        FormatError::Syntax { file: file.into(), line, col, msg: msg.into() }
    }

    /// Stable upper-case code, the prefix of the display form.
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::MissingFile(_) => "MISSING_FILE",
            FormatError::HeaderMismatch { .. } => "HEADER_MISMATCH",
            FormatError::Syntax { .. } => "SYNTAX",
            FormatError::UnknownNode { .. } => "UNKNOWN_NODE",
            FormatError::UnknownMaster { .. } => "UNKNOWN_MASTER",
            FormatError::UnitMismatch(_) => "UNIT_MISMATCH",
            FormatError::NameCollision(_) => "NAME_COLLISION",
            FormatError::Invalid(_) => "INVALID_DESIGN",
            FormatError::Io { .. } => "IO_FAILURE",
            FormatError::Bookshelf(BookshelfError::ScaleOverflow { .. }) => "SCALE_OVERFLOW",
            FormatError::Bookshelf(BookshelfError::UnknownNode { .. }) => "UNKNOWN_NODE",
            FormatError::Bookshelf(BookshelfError::DuplicateNode(_)) => "DUPLICATE_NODE",
        }
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String, FormatError> {
    match std::fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(FormatError::MissingFile(path.to_path_buf())),
        Err(e) => Err(FormatError::io(path, e)),
    }
}

pub fn write_file(path: &std::path::Path, text: &str) -> Result<(), FormatError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| FormatError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| FormatError::io(path, e))
}
