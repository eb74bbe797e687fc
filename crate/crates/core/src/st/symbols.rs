//! Identifier resolution against a chart's variable interface.

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{DiagCode, Diagnostic};
use crate::model::{Interface, ReducedSfc, VarSection, VariableDecl};

use super::ast::*;

/// Standard functions and function blocks callable without a declaration.
pub const DEFAULT_BUILTINS: &[&str] = &[
    "TON", "TOF", "TP", "CTU", "CTD", "CTUD", "R_TRIG", "F_TRIG", "SR", "RS", "ABS", "SQRT", "LN",
    "LOG", "EXP", "EXPT", "SIN", "COS", "TAN", "ASIN", "ACOS", "ATAN", "MIN", "MAX", "LIMIT", "SEL",
    "MUX", "MOVE", "TRUNC", "SHL", "SHR", "ROL", "ROR", "LEN", "LEFT", "RIGHT", "MID", "CONCAT",
    "INSERT", "DELETE", "REPLACE", "FIND",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Symbol {
    Variable(VarSection, VariableDecl),
    /// Step name, usable for step flags such as `S1.X`.
    Step(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    /// Keyed by upper-cased name.
    symbols: BTreeMap<String, Symbol>,
    builtins: BTreeSet<String>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        SymbolTable {
            symbols: BTreeMap::new(),
            builtins: DEFAULT_BUILTINS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SymbolTable {
    /// Merges the three sections. A name declared in more than one section
    /// keeps its first declaration and yields a DuplicateName diagnostic.
    pub fn from_interface(iface: &Interface) -> (SymbolTable, Vec<Diagnostic>) {
        let mut table = SymbolTable::default();
        let mut diags = Vec::new();
        for (section, var) in iface.iter() {
            let key = var.name.to_ascii_uppercase();
            match table.symbols.get(&key) {
                Some(Symbol::Variable(first, _)) if *first != section => diags.push(Diagnostic::error(
                    DiagCode::DuplicateName,
                    &var.name,
                    format!(
                        "variable '{}' declared in both {} and {} sections",
                        var.name,
                        first.as_str(),
                        section.as_str()
                    ),
                )),
                Some(_) => {}
                None => {
                    table.symbols.insert(key, Symbol::Variable(section, var.clone()));
                }
            }
        }
        (table, diags)
    }

    /// Table for a chart: its variables plus its step names.
    pub fn for_chart(sfc: &ReducedSfc) -> (SymbolTable, Vec<Diagnostic>) {
        let (mut table, diags) = SymbolTable::from_interface(&sfc.variables);
        for step in &sfc.steps {
            table
                .symbols
                .entry(step.name.to_ascii_uppercase())
                .or_insert_with(|| Symbol::Step(step.name.clone()));
        }
        (table, diags)
    }

    pub fn insert_variable(&mut self, section: VarSection, var: VariableDecl) {
        self.symbols
            .insert(var.name.to_ascii_uppercase(), Symbol::Variable(section, var));
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(&name.to_ascii_uppercase())
    }

    pub fn allow_builtin(&mut self, name: &str) {
        self.builtins.insert(name.to_ascii_uppercase());
    }

    pub fn is_builtin(&self, name: &str) -> bool {
        let upper = name.to_ascii_uppercase();
        if self.builtins.contains(&upper) || upper.starts_with("TO_") {
            return true;
        }
        // type conversions such as INT_TO_REAL
        match upper.split_once("_TO_") {
            Some((a, b)) => !a.is_empty() && !b.is_empty() && !b.contains("_TO_"),
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// One UndeclaredIdentifier diagnostic per unresolved root identifier occurrence.
pub fn check_symbols(ast: &StAst, table: &SymbolTable) -> Vec<Diagnostic> {
    let mut c = Checker { table, out: Vec::new() };
    c.block(&ast.statements);
    c.out
}

pub fn check_expr_symbols(expr: &Expr, table: &SymbolTable) -> Vec<Diagnostic> {
    let mut c = Checker { table, out: Vec::new() };
    c.expr(expr);
    c.out
}

struct Checker<'a> {
    table: &'a SymbolTable,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn name(&mut self, name: &str, span: crate::diag::Span) {
        if name.starts_with('%') || self.table.lookup(name).is_some() {
            return;
        }
        self.out.push(
            Diagnostic::error(
                DiagCode::UndeclaredIdentifier,
                name,
                format!("undeclared identifier '{name}'"),
            )
            .with_span(span),
        );
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Literal(_) => {}
            ExprKind::Ident(n) => self.name(n, e.span),
            ExprKind::Member(base, _) => self.expr(base),
            ExprKind::Index(base, idx) => {
                self.expr(base);
                idx.iter().for_each(|x| self.expr(x));
            }
            ExprKind::Call(callee, args) => {
                match &callee.kind {
                    ExprKind::Ident(n) if self.table.is_builtin(n) && self.table.lookup(n).is_none() => {}
                    _ => self.expr(callee),
                }
                for a in args {
                    self.expr(&a.value);
                }
            }
            ExprKind::Unary(_, x) => self.expr(x),
            ExprKind::Binary(_, l, r) => {
                self.expr(l);
                self.expr(r);
            }
        }
    }

    fn block(&mut self, body: &[Stmt]) {
        for s in body {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Assign { target, value } => {
                self.expr(target);
                self.expr(value);
            }
            StmtKind::Call(e) => self.expr(e),
            StmtKind::If { branches, else_body } => {
                for (c, b) in branches {
                    self.expr(c);
                    self.block(b);
                }
                if let Some(b) = else_body {
                    self.block(b);
                }
            }
            StmtKind::Case {
                selector,
                arms,
                else_body,
            } => {
                // Labels are constants (integers or enumeration values), not variables.
                self.expr(selector);
                for arm in arms {
                    self.block(&arm.body);
                }
                if let Some(b) = else_body {
                    self.block(b);
                }
            }
            StmtKind::For {
                var,
                from,
                to,
                by,
                body,
            } => {
                self.name(&var.name, var.span);
                self.expr(from);
                self.expr(to);
                if let Some(b) = by {
                    self.expr(b);
                }
                self.block(body);
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.block(body);
            }
            StmtKind::Repeat { body, until } => {
                self.block(body);
                self.expr(until);
            }
            StmtKind::Exit | StmtKind::Return | StmtKind::Empty => {}
        }
    }
}
