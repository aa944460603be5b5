use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("non-finite iterate: {0}")]
    NonFinite(String),

    #[error("codebook file not found: {}", .0.display())]
    CodebookNotFound(PathBuf),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{}", format_violations(.0))]
    Invariant(Vec<Violation>),

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Trial {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

/// One failed codebook rule, tied to the UE it was found on (if any).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub ue: Option<usize>,
    pub rule: &'static str,
    pub detail: String,
}

fn format_violations(v: &[Violation]) -> String {
    let items: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("codebook invariant violated: {}", items.join("; "))
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.ue {
            Some(ue) => write!(f, "UE {ue}: {} ({})", self.rule, self.detail),
            None => write!(f, "{} ({})", self.rule, self.detail),
        }
    }
}

impl Error {
    /// Stable machine-readable identifier used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension_mismatch",
            Error::Singular(_) => "singular_system",
            Error::NonFinite(_) => "non_finite",
            Error::CodebookNotFound(_) => "codebook_not_found",
            Error::Schema(_) => "schema",
            Error::Invariant(_) => "codebook_invariant",
            Error::Unsupported(_) => "unsupported",
            Error::Config(_) => "invalid_config",
            Error::Budget(_) => "budget_exceeded",
            Error::Io { .. } => "io",
            Error::Trial { source, .. } => source.kind(),
        }
    }

    /// True for failures caused by bad input rather than by a computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::CodebookNotFound(_)
            | Error::Schema(_)
            | Error::Invariant(_)
            | Error::Unsupported(_)
            | Error::Config(_)
            | Error::Budget(_)
            | Error::Io { .. } => true,
            Error::Dimension(_) | Error::Singular(_) | Error::NonFinite(_) => false,
            Error::Trial { .. } => false,
        }
    }
}
