//! Structured Text subset: lexer, parser, printer and symbol checks for
//! step actions and transition guards.

pub mod ast;
pub mod lexer;
mod parser;
pub mod symbols;

use thiserror::Error;

use crate::diag::{DiagCode, Diagnostic, Span};
use crate::model::ReducedSfc;

pub use ast::{print_expr, print_statements, Expr, ExprKind, StAst, Stmt, StmtKind};
pub use parser::{parse_expression, parse_statements, MAX_DEPTH};
pub use symbols::{check_expr_symbols, check_symbols, SymbolTable, DEFAULT_BUILTINS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at {}..{}: expected {}, found {found}", .span.start, .span.end, .expected.join(" or "))]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub fn to_diagnostic(&self, element: &str) -> Diagnostic {
        Diagnostic::error(
            DiagCode::StSyntax,
            element,
            format!("expected {}, found {}", self.expected.join(" or "), self.found),
        )
        .with_span(self.span)
    }
}

/// Parses every action and guard of a chart and resolves their identifiers.
/// Diagnostics name the step or edge (`A->B`) holding the fragment; symbol
/// checks only run on fragments that parsed.
pub fn check_chart(sfc: &ReducedSfc) -> Vec<Diagnostic> {
    let (table, mut diags) = SymbolTable::for_chart(sfc);
    for step in &sfc.steps {
        if let Some(action) = &step.action {
            match parse_statements(action) {
                Ok(ast) => diags.extend(
                    check_symbols(&ast, &table)
                        .into_iter()
                        .map(|d| Diagnostic { element: step.name.clone(), ..d }),
                ),
                Err(e) => diags.push(e.to_diagnostic(&step.name)),
            }
        }
        for edge in &step.children {
            let element = format!("{}->{}", step.name, edge.target);
            match parse_expression(&edge.guard) {
                Ok(expr) => diags.extend(
                    check_expr_symbols(&expr, &table)
                        .into_iter()
                        .map(|d| Diagnostic { element: element.clone(), ..d }),
                ),
                Err(e) => diags.push(e.to_diagnostic(&element)),
            }
        }
    }
    diags
}
