use alloc::rc::Rc;
use alloc::string::String;
use core::fmt;

use thiserror::Error;

use crate::analyzer::AnalysisError;
use crate::env::InvariantViolation;
use crate::reader::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("{0} not defined")]
    Unbound(Rc<str>),
    #[error("{0}")]
    Type(String),
    #[error("{name} expects {expected} argument(s), got {got}")]
    Arity { name: Rc<str>, expected: usize, got: usize },
    #[error("{0}")]
    Arithmetic(String),
    #[error("cyclic definition{}", .0.as_ref().map(|n| alloc::format!(" of {}", n)).unwrap_or_default())]
    Cyclic(Option<Rc<str>>),
    #[error("{0} used before its definition was evaluated")]
    Uninitialized(Rc<str>),
    #[error("step limit of {0} closure applications exceeded")]
    StepLimit(u64),
    #[error("recursion depth limit of {0} exceeded")]
    DepthLimit(usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl From<InvariantViolation> for Error {
    fn from(v: InvariantViolation) -> Self {
        Error::Internal(v.0)
    }
}

/// Coarse error classes; two runs agree on an error when their categories
/// match, whatever the message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorCategory {
    Syntax,
    Analysis,
    Unbound,
    Type,
    Arity,
    Arithmetic,
    Cyclic,
    Uninitialized,
    LimitExceeded,
    Internal,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Syntax(_) => ErrorCategory::Syntax,
            Error::Analysis(_) => ErrorCategory::Analysis,
            Error::Unbound(_) => ErrorCategory::Unbound,
            Error::Type(_) => ErrorCategory::Type,
            Error::Arity { .. } => ErrorCategory::Arity,
            Error::Arithmetic(_) => ErrorCategory::Arithmetic,
            Error::Cyclic(_) => ErrorCategory::Cyclic,
            Error::Uninitialized(_) => ErrorCategory::Uninitialized,
            Error::StepLimit(_) | Error::DepthLimit(_) => ErrorCategory::LimitExceeded,
            Error::Internal(_) => ErrorCategory::Internal,
        }
    }

    pub fn is_limit(&self) -> bool {
        self.category() == ErrorCategory::LimitExceeded
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorCategory::Syntax => "syntax",
            ErrorCategory::Analysis => "analysis",
            ErrorCategory::Unbound => "unbound",
            ErrorCategory::Type => "type",
            ErrorCategory::Arity => "arity",
            ErrorCategory::Arithmetic => "arithmetic",
            ErrorCategory::Cyclic => "cyclic",
            ErrorCategory::Uninitialized => "uninitialized",
            ErrorCategory::LimitExceeded => "limit-exceeded",
            ErrorCategory::Internal => "internal",
        };
        f.write_str(s)
    }
}
