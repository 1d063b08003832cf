use std::fmt;

use thiserror::Error;

/// Which declaration class an identifier belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    User,
    Role,
    Record,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::User => "user",
            Class::Role => "role",
            Class::Record => "record",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("undeclared {class} `{name}` in {relation}")]
    UndeclaredIdentifier {
        name: String,
        class: Class,
        relation: &'static str,
    },
    #[error("`{name}` is declared more than once ({first} and {second})")]
    DuplicateDeclaration {
        name: String,
        first: Class,
        second: Class,
    },
    #[error("role `{0}` implies itself")]
    SelfImplication(String),
    #[error("invalid threshold: {0}")]
    BadThreshold(String),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("ill-sorted formula: {0}")]
    IllSortedFormula(String),
}

/// Category of a [`SourceError`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceErrorKind {
    Syntax,
    UndeclaredIdentifier,
    DuplicateDeclaration,
    SelfImplication,
    UnknownConstraintKeyword,
    BadThreshold,
    InvalidConstraint,
}

/// A parse or validation failure tied to a position in the input text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SourceError {
    pub kind: SourceErrorKind,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl SourceError {
    /// Multi-line rendering with a caret under the offending column.
    pub fn render(&self, origin: &str) -> String {
        let gutter = self.line.to_string().len();
        format!(
            "error: {msg}\n{pad} --> {origin}:{line}:{col}\n{pad} |\n{line} | {snippet}\n{pad} | {caret:>width$}",
            msg = self.message,
            pad = " ".repeat(gutter),
            line = self.line,
            col = self.column,
            snippet = self.snippet,
            caret = "^",
            width = self.column,
        )
    }
}
