use std::path::Path;

use serde::Serialize;
use terrace_core::Error;

/// Structured error report; also written as `error.json` into the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub operation: String,
    pub module: String,
    pub message: String,
    pub invalid_input: bool,
}

impl Failure {
    pub fn invalid(module: &str, msg: impl Into<String>) -> Self {
        Failure {
            operation: String::new(),
            module: module.into(),
            message: msg.into(),
            invalid_input: true,
        }
    }

    pub fn from_core(e: Error) -> Self {
        Failure {
            operation: String::new(),
            module: e.module().into(),
            message: e.to_string(),
            invalid_input: e.is_invalid_input(),
        }
    }

    pub fn in_op(mut self, op: &str) -> Self {
        if self.operation.is_empty() {
            self.operation = op.into();
        }
        self
    }

    pub fn exit_code(&self) -> u8 {
        if self.invalid_input {
            2
        } else {
            1
        }
    }

    pub fn emit(&self, out: Option<&Path>) {
        let json = serde_json::to_string_pretty(self).unwrap_or_default();
        eprintln!("{json}");
        if let Some(dir) = out {
            if dir.is_dir() {
                let _ = std::fs::write(dir.join("error.json"), json + "\n");
            }
        }
    }
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::from_core(e.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use terrace_core::error::{SimError, TerraceError};

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let bad: Failure = SimError::Cfl("x".into()).into();
        assert_eq!((bad.exit_code(), bad.module.as_str()), (2, "pdesim"));
        let failed: Failure = TerraceError::CenterContaminated(3.0).into();
        assert_eq!((failed.exit_code(), failed.module.as_str()), (1, "terrace"));
        assert_eq!(failed.in_op("fit").in_op("outer").operation, "fit");
    }
}
