use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// A single validation finding, naming the entity it concerns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub entity: String,
    pub message: String,
}

impl Issue {
    pub fn new(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Issue { entity: entity.into(), message: message.into() }
    }
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema violation in {path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("scenario failed validation with {} issue(s): {}", .0.len(), join_issues(.0))]
    Invalid(Vec<Issue>),
}

impl LoadError {
    /// Every issue carried by this error, in a form suitable for a structured report.
    pub fn issues(&self) -> Vec<Issue> {
        match self {
            LoadError::Io { path, source } => {
                vec![Issue::new(path.display().to_string(), format!("missing or unreadable file: {source}"))]
            }
            LoadError::Schema { path, message } => vec![Issue::new(path.display().to_string(), message.clone())],
            LoadError::Invalid(issues) => issues.clone(),
        }
    }
}

fn join_issues(issues: &[Issue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("compliance rate {0} outside [0, 1]")]
    ComplianceRate(f64),
    #[error("turning ratios ({0}, {1}) are not a valid partial split")]
    Ratios(f64, f64),
}

#[derive(Debug, Error)]
pub enum DnlError {
    #[error("departure profile has {found} bins for path {path}, expected {expected}")]
    ProfileShape { path: String, expected: usize, found: usize },
    #[error("negative or non-finite departure rate on path {path} bin {bin}")]
    NegativeRate { path: String, bin: usize },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("junction iteration did not converge at node {node}, bin {bin}")]
    JunctionNonconvergent { node: String, bin: usize },
    #[error("node {node} is not on path {path}")]
    NodeNotOnPath { node: String, path: String },
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("network loading failed on day {day}: {source}")]
    Dnl { day: usize, source: DnlError },
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
}

impl From<std::io::Error> for EngineError {
    fn from(e: std::io::Error) -> Self {
        EngineError::Output(e.to_string())
    }
}

impl From<csv::Error> for EngineError {
    fn from(e: csv::Error) -> Self {
        EngineError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for EngineError {
    fn from(e: serde_json::Error) -> Self {
        EngineError::Output(e.to_string())
    }
}
