use thiserror::Error;

use super::ast::{ClassName, Label, VarName};

/// Front-end failures: lexing, parsing, name resolution and hierarchy shape.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("class `{0}` is declared more than once")]
    DuplicateClass(ClassName),
    #[error("class `{class}` declares member `{label}` more than once")]
    DuplicateMember { class: ClassName, label: Label },
    #[error("method `{class}.{method}` declares parameter `{param}` more than once")]
    DuplicateParameter {
        class: ClassName,
        method: Label,
        param: VarName,
    },
    #[error("unknown name `{name}` in {site}")]
    UnknownName { name: String, site: String },
    #[error("inheritance cycle through {}", join(.0))]
    InheritanceCycle(Vec<ClassName>),
}

fn join(names: &[ClassName]) -> String {
    names
        .iter()
        .map(ClassName::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

impl SyntaxError {
    pub fn code(&self) -> &'static str {
        match self {
            SyntaxError::Parse { .. } => "SYN001",
            SyntaxError::DuplicateClass(_) => "SYN002",
            SyntaxError::DuplicateMember { .. } => "SYN003",
            SyntaxError::DuplicateParameter { .. } => "SYN004",
            SyntaxError::UnknownName { .. } => "SYN005",
            SyntaxError::InheritanceCycle(_) => "NOM006",
        }
    }
}
