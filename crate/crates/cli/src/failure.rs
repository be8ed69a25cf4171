use std::fmt;

/// Errors carry the process exit code they map to.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, descriptors or config; exit 2.
    Usage(String),
    /// Valid request outside the domain of the valuation; exit 1.
    Domain(String),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Domain(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<starval::Error> for Failure {
    fn from(e: starval::Error) -> Self {
        use starval::Error as E;
        match e {
            E::Domain(_) | E::UnboundedBody { .. } | E::NotStarSet => Failure::Domain(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
