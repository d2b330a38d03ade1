// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use thiserror::Error;

/// Failure of a subcommand, carrying the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag values or combinations.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// The request was well formed but the model rejected it.
    #[error(transparent)]
    Domain(#[from] fluxnet_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let io = CliError::io(Path::new("f"), std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(io.exit_code(), 2);
        assert!(io.to_string().starts_with("f: "));
        let d = CliError::from(fluxnet_core::Error::Fit("no".into()));
        assert_eq!(d.exit_code(), 1);
    }
}
