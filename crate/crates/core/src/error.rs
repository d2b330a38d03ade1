// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::netgraph::Diagnostic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("netlist has {} error(s); first: {}", .0.iter().filter(|d| d.is_error()).count(), first_error(.0))]
    Netlist(Vec<Diagnostic>),

    #[error("event budget exhausted after {0} events")]
    EventBudget(u64),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("training diverged at epoch {epoch} (loss {loss}); try a smaller learning rate")]
    Divergence { epoch: usize, loss: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

fn first_error(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .find(|d| d.is_error())
        .map(|d| d.to_string())
        .unwrap_or_default()
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
