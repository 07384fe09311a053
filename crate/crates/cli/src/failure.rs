use std::fmt;

/// Reasons a run ends without output, each with a fixed exit code.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration or unusable output path.
    Config(String),
    /// A numerical stage failed (truncation or convergence).
    Numeric(String),
    /// An approximation was used outside its domain.
    Domain(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Domain(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "configuration error: {msg}"),
            Failure::Numeric(msg) => write!(f, "numerical error: {msg}"),
            Failure::Domain(msg) => write!(f, "domain error: {msg}"),
        }
    }
}

impl From<eopm::Error> for Failure {
    fn from(err: eopm::Error) -> Self {
        use eopm::Error;
        match err {
            Error::Convergence { .. } | Error::Truncation { .. } => Failure::Numeric(err.to_string()),
            Error::UnphysicalMode(_) => Failure::Domain(err.to_string()),
            Error::Domain(msg) => Failure::Config(msg),
            Error::NotOnGrid { .. } | Error::NonPositive(_) => Failure::Config(err.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {err}"))
    }
}
