use std::path::Path;

/// Failures mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad netlist or physically invalid request (exit 2).
    Validation(Vec<String>),
    /// A file could not be read or written (exit 3).
    Io(String),
    /// Malformed scenario or manifest (exit 4).
    Schema(Vec<String>),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.as_ref().display()))
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Schema(_) => 4,
        }
    }

    pub fn lines(&self) -> Vec<String> {
        match self {
            CliError::Validation(v) => v.clone(),
            CliError::Io(m) => vec![format!("io error: {m}")],
            CliError::Schema(v) => v.iter().map(|l| format!("schema error: {l}")).collect(),
        }
    }
}

impl From<pathmark_core::Error> for CliError {
    fn from(e: pathmark_core::Error) -> Self {
        CliError::Validation(vec![format!("error: {e}")])
    }
}
