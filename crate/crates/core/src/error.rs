use alloc::string::String;
use core::fmt;

/// Problems with a configuration space or an assignment within it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceError {
    Syntax { line: usize, column: usize, message: String },
    DuplicateParameter { name: String, line: Option<usize> },
    DuplicateValue { parameter: String, value: String, line: Option<usize> },
    EmptyDomain { parameter: String, line: Option<usize> },
    DefaultNotInDomain { parameter: String, value: String, line: Option<usize> },
    UnknownParameter { name: String, line: Option<usize> },
    UnknownValue { parameter: String, value: String, line: Option<usize> },
    InvalidCondition { message: String },
    InvalidForbidden { message: String },
    CyclicConditions { parameter: String },
    InfeasibleDefault,
    InvalidAssignment { message: String },
    Forbidden { combination: String },
    RejectionLimit { attempts: usize },
}

impl SpaceError {
    pub(crate) fn at_line(self, at: usize) -> Self {
        let line = Some(at);
        match self {
            SpaceError::DuplicateParameter { name, .. } => SpaceError::DuplicateParameter { name, line },
            SpaceError::DuplicateValue { parameter, value, .. } => {
                SpaceError::DuplicateValue { parameter, value, line }
            }
            SpaceError::EmptyDomain { parameter, .. } => SpaceError::EmptyDomain { parameter, line },
            SpaceError::DefaultNotInDomain { parameter, value, .. } => {
                SpaceError::DefaultNotInDomain { parameter, value, line }
            }
            other => other,
        }
    }
}

impl fmt::Display for SpaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on_line = |f: &mut fmt::Formatter<'_>, line: &Option<usize>| match line {
            Some(l) => write!(f, " (line {l})"),
            None => Ok(()),
        };
        match self {
            SpaceError::Syntax { line, column, message } => {
                write!(f, "syntax error at line {line}, column {column}: {message}")
            }
            SpaceError::DuplicateParameter { name, line } => {
                write!(f, "duplicate parameter `{name}`")?;
                on_line(f, line)
            }
            SpaceError::DuplicateValue { parameter, value, line } => {
                write!(f, "value `{value}` appears twice in the domain of `{parameter}`")?;
                on_line(f, line)
            }
            SpaceError::EmptyDomain { parameter, line } => {
                write!(f, "parameter `{parameter}` has an empty domain")?;
                on_line(f, line)
            }
            SpaceError::DefaultNotInDomain { parameter, value, line } => {
                write!(f, "default `{value}` of `{parameter}` is not in its domain")?;
                on_line(f, line)
            }
            SpaceError::UnknownParameter { name, line } => {
                write!(f, "unknown parameter `{name}`")?;
                on_line(f, line)
            }
            SpaceError::UnknownValue { parameter, value, line } => {
                write!(f, "`{value}` is not a value of `{parameter}`")?;
                on_line(f, line)
            }
            SpaceError::InvalidCondition { message } => write!(f, "invalid condition: {message}"),
            SpaceError::InvalidForbidden { message } => write!(f, "invalid forbidden combination: {message}"),
            SpaceError::CyclicConditions { parameter } => {
                write!(f, "conditions form a cycle through `{parameter}`")
            }
            SpaceError::InfeasibleDefault => write!(f, "the default configuration is forbidden"),
            SpaceError::InvalidAssignment { message } => write!(f, "invalid assignment: {message}"),
            SpaceError::Forbidden { combination } => write!(f, "assignment hits forbidden combination {combination}"),
            SpaceError::RejectionLimit { attempts } => {
                write!(f, "no feasible configuration after {attempts} random draws")
            }
        }
    }
}

impl core::error::Error for SpaceError {}

/// Fatal, configuration-independent failure of a run backend
/// (for example the wrapper executable could not be spawned).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendError {
    pub message: String,
}

impl BackendError {
    pub fn new(message: impl Into<String>) -> Self {
        BackendError { message: message.into() }
    }
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "target backend failed: {}", self.message)
    }
}

impl core::error::Error for BackendError {}

/// Why an evaluation stopped before producing an estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    /// A termination criterion fired; the caller keeps the current incumbent.
    BudgetExhausted,
    Backend(BackendError),
    InvalidBound(f64),
    InvalidRunCount,
}

impl From<BackendError> for EngineError {
    fn from(e: BackendError) -> Self {
        EngineError::Backend(e)
    }
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::BudgetExhausted => write!(f, "configuration budget exhausted"),
            EngineError::Backend(e) => e.fmt(f),
            EngineError::InvalidBound(b) => write!(f, "evaluation bound must be positive, got {b}"),
            EngineError::InvalidRunCount => write!(f, "evaluations need at least one run"),
        }
    }
}

impl core::error::Error for EngineError {}
