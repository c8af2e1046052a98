use std::path::Path;

use serde_json::json;

use crate::config::ConfigError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(Vec<String>),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m.clone(),
            CliError::Config(p) => format!("invalid configuration ({} problems)", p.len()),
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let mut v = json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.message(),
            }
        });
        if let CliError::Config(p) = self {
            v["error"]["problems"] = json!(p);
        }
        v.to_string()
    }
}

impl From<dhde::Error> for CliError {
    fn from(e: dhde::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

/// Prefixes a library error with what was being processed.
pub trait Context<T> {
    fn context(self, what: impl std::fmt::Display) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, dhde::Error> {
    fn context(self, what: impl std::fmt::Display) -> Result<T, CliError> {
        self.map_err(|e| match CliError::from(e) {
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{what}: {m}")),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_lists_config_problems() {
        let r = CliError::Config(vec!["a".into(), "b".into()]).record();
        let v: serde_json::Value = serde_json::from_str(&r).unwrap();
        assert_eq!(v["error"]["exit_code"], 1);
        assert_eq!(v["error"]["problems"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn numerical_errors_map_to_three() {
        let e = dhde::Error::Degenerate("x".into());
        assert_eq!(CliError::from(e).exit_code(), 3);
        assert_eq!(CliError::from(dhde::Error::NoOverlap).exit_code(), 2);
    }
}
