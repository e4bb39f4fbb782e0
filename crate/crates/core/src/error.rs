use std::fmt;

/// Broad failure category; the CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or invalid user input.
    Validation,
    /// A mathematical self-check failed (oracle mismatch, broken invariant).
    Consistency,
}

#[derive(Debug, Clone, thiserror::Error)]
pub struct Error {
    pub kind: ErrorKind,
    pub module: &'static str,
    pub operation: &'static str,
    pub message: String,
    pub datum: Option<String>,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}: {}", self.module, self.operation, self.message)?;
        if let Some(d) = &self.datum {
            write!(f, " [{d}]")?;
        }
        Ok(())
    }
}

impl Error {
    pub fn validation(module: &'static str, operation: &'static str, message: impl Into<String>) -> Self {
        Error { kind: ErrorKind::Validation, module, operation, message: message.into(), datum: None }
    }

    pub fn consistency(module: &'static str, operation: &'static str, message: impl Into<String>) -> Self {
        Error { kind: ErrorKind::Consistency, module, operation, message: message.into(), datum: None }
    }

    pub fn with_datum(mut self, datum: impl fmt::Display) -> Self {
        self.datum = Some(datum.to_string());
        self
    }
}

pub type Result<T> = std::result::Result<T, Error>;
