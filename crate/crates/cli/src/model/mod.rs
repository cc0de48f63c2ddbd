//! Declarative model files: syntax, printing and compilation to runnable
//! environments.

pub mod ast;
pub mod compile;
pub mod lexer;
pub mod parser;
pub mod printer;

use std::fmt;
use std::path::{Path, PathBuf};

pub use ast::{ModelFile, Span};
pub use compile::{compile, Model};
pub use parser::{parse_file, parse_str};
pub use printer::print;

/// A problem with a model file, located where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelError {
    pub file: Option<PathBuf>,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ModelError {
    pub fn at(span: Span, message: impl Into<String>) -> Self {
        ModelError {
            file: None,
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, message: impl Into<String>) -> Self {
        ModelError {
            file: Some(path.to_path_buf()),
            line: 0,
            col: 0,
            message: message.into(),
        }
    }

    pub fn in_file(mut self, path: &Path) -> Self {
        if self.file.is_none() {
            self.file = Some(path.to_path_buf());
        }
        self
    }
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{}:", file.display())?;
        }
        if self.line > 0 {
            write!(f, "{}:{}: ", self.line, self.col)?;
        } else if self.file.is_some() {
            f.write_str(" ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ModelError {}

/// Reads, parses and compiles a model file.
pub fn load(path: &Path) -> Result<Model, ModelError> {
    let ast = parse_file(path)?;
    compile(ast).map_err(|e| e.in_file(path))
}
