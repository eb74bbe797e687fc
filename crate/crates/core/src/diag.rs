//! Diagnostics shared by the validators, the ST checker and the safety ladder.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Byte range into some source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn merge(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagCode {
    InitStepError,
    TransitionError,
    DuplicateName,
    BadIdentifier,
    IllegalJump,
    /// Topology that cannot be expressed with divergence/convergence nodes.
    Connectivity,
    StSyntax,
    UndeclaredIdentifier,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::InitStepError => "InitStepError",
            DiagCode::TransitionError => "TransitionError",
            DiagCode::DuplicateName => "DuplicateName",
            DiagCode::BadIdentifier => "BadIdentifier",
            DiagCode::IllegalJump => "IllegalJump",
            DiagCode::Connectivity => "Connectivity",
            DiagCode::StSyntax => "StSyntax",
            DiagCode::UndeclaredIdentifier => "UndeclaredIdentifier",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub severity: Severity,
    /// Name of the offending element (step, edge `A->B`, variable, identifier).
    pub element: String,
    pub message: String,
    /// Location inside the text the diagnostic was produced from, when known.
    pub span: Option<Span>,
}

impl Diagnostic {
    pub fn error(code: DiagCode, element: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: Severity::Error,
            element: element.into(),
            message: message.into(),
            span: None,
        }
    }

    pub fn warning(code: DiagCode, element: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, element, message)
        }
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Compiler-style rendering: `file:line:col: code: message`.
    ///
    /// `source` is the text the span indexes; without a span the location is `1:1`.
    pub fn render(&self, file: &str, source: &str) -> String {
        let (line, col) = match self.span {
            Some(span) => line_col(source, span.start),
            None => (1, 1),
        };
        format!("{file}:{line}:{col}: {}: {}", self.code, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.code, self.message, self.element)
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let mut line = 1;
    let mut line_start = 0;
    for (i, b) in source.bytes().enumerate().take(offset) {
        if b == b'\n' {
            line += 1;
            line_start = i + 1;
        }
    }
    let col = source
        .get(line_start..offset)
        .map(|s| s.chars().count())
        .unwrap_or(offset - line_start)
        + 1;
    (line, col)
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_compiler_style() {
        let src = "a := 1;\nb := ;";
        let d = Diagnostic::error(DiagCode::StSyntax, "b", "expected expression").with_span(Span::new(13, 14));
        assert_eq!(d.render("x.st", src), "x.st:2:6: StSyntax: expected expression");
    }

    #[test]
    fn line_col_counts_chars() {
        assert_eq!(line_col("äb\ncd", 3), (1, 3));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}
