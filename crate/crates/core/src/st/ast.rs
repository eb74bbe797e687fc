//! Syntax tree for the Structured Text subset, plus a fully parenthesized printer.

use std::fmt::Write as _;

use crate::diag::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Bool(bool),
    /// Raw source text (`42`, `16#FF`, `1_000`).
    Int(String),
    Real(String),
    /// Raw text including quotes and `$` escapes.
    Str(String),
    /// Prefixed literal such as `T#5s` or `INT#3`, raw text.
    Typed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    Xor,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
}

impl BinaryOp {
    pub fn as_str(self) -> &'static str {
        match self {
            BinaryOp::Or => "OR",
            BinaryOp::Xor => "XOR",
            BinaryOp::And => "AND",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "MOD",
            BinaryOp::Pow => "**",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arg {
    /// Formal parameter for `name := value` or `name => target`.
    pub name: Option<Ident>,
    /// `=>` output binding.
    pub output: bool,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Literal(Literal),
    Ident(String),
    Member(Box<Expr>, Ident),
    Index(Box<Expr>, Vec<Expr>),
    Call(Box<Expr>, Vec<Arg>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseLabel {
    Value(Expr),
    Range(Expr, Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseArm {
    pub labels: Vec<CaseLabel>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign { target: Expr, value: Expr },
    /// Procedure or function block invocation; the expression is always a call.
    Call(Expr),
    If {
        branches: Vec<(Expr, Vec<Stmt>)>,
        else_body: Option<Vec<Stmt>>,
    },
    Case {
        selector: Expr,
        arms: Vec<CaseArm>,
        else_body: Option<Vec<Stmt>>,
    },
    For {
        var: Ident,
        from: Expr,
        to: Expr,
        by: Option<Expr>,
        body: Vec<Stmt>,
    },
    While { cond: Expr, body: Vec<Stmt> },
    Repeat { body: Vec<Stmt>, until: Expr },
    Exit,
    Return,
    /// A lone `;`.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    /// Includes the terminating `;`.
    pub span: Span,
}

/// A parsed statement list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StAst {
    pub statements: Vec<Stmt>,
}

// ---------------------------------------------------------------------------
// Span erasure, for structural comparison of trees from different sources.

impl Expr {
    pub fn erase_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            ExprKind::Literal(_) | ExprKind::Ident(_) => {}
            ExprKind::Member(e, id) => {
                e.erase_spans();
                id.span = Span::default();
            }
            ExprKind::Index(e, idx) => {
                e.erase_spans();
                idx.iter_mut().for_each(Expr::erase_spans);
            }
            ExprKind::Call(e, args) => {
                e.erase_spans();
                for a in args {
                    a.span = Span::default();
                    if let Some(n) = &mut a.name {
                        n.span = Span::default();
                    }
                    a.value.erase_spans();
                }
            }
            ExprKind::Unary(_, e) => e.erase_spans(),
            ExprKind::Binary(_, l, r) => {
                l.erase_spans();
                r.erase_spans();
            }
        }
    }
}

fn erase_block(body: &mut [Stmt]) {
    body.iter_mut().for_each(Stmt::erase_spans);
}

impl Stmt {
    pub fn erase_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            StmtKind::Assign { target, value } => {
                target.erase_spans();
                value.erase_spans();
            }
            StmtKind::Call(e) => e.erase_spans(),
            StmtKind::If { branches, else_body } => {
                for (c, b) in branches {
                    c.erase_spans();
                    erase_block(b);
                }
                if let Some(b) = else_body {
                    erase_block(b);
                }
            }
            StmtKind::Case {
                selector,
                arms,
                else_body,
            } => {
                selector.erase_spans();
                for arm in arms {
                    arm.span = Span::default();
                    for l in &mut arm.labels {
                        match l {
                            CaseLabel::Value(e) => e.erase_spans(),
                            CaseLabel::Range(a, b) => {
                                a.erase_spans();
                                b.erase_spans();
                            }
                        }
                    }
                    erase_block(&mut arm.body);
                }
                if let Some(b) = else_body {
                    erase_block(b);
                }
            }
            StmtKind::For {
                var,
                from,
                to,
                by,
                body,
            } => {
                var.span = Span::default();
                from.erase_spans();
                to.erase_spans();
                if let Some(b) = by {
                    b.erase_spans();
                }
                erase_block(body);
            }
            StmtKind::While { cond, body } => {
                cond.erase_spans();
                erase_block(body);
            }
            StmtKind::Repeat { body, until } => {
                erase_block(body);
                until.erase_spans();
            }
            StmtKind::Exit | StmtKind::Return | StmtKind::Empty => {}
        }
    }
}

impl StAst {
    pub fn erase_spans(&mut self) {
        erase_block(&mut self.statements);
    }
}

// ---------------------------------------------------------------------------
// Printer. Parentheses appear only where the tree differs from what
// precedence and left associativity would give, so printed text never nests
// deeper than the source it came from.

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_literal(out: &mut String, lit: &Literal) {
    match lit {
        Literal::Bool(true) => out.push_str("TRUE"),
        Literal::Bool(false) => out.push_str("FALSE"),
        Literal::Int(s) | Literal::Real(s) | Literal::Str(s) | Literal::Typed(s) => out.push_str(s),
    }
}

impl BinaryOp {
    /// Parser level: 0 OR up to 5 multiplicative; `**` binds tighter than unary operators.
    fn level(self) -> u8 {
        match self {
            BinaryOp::Or => 0,
            BinaryOp::Xor => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 5,
            BinaryOp::Pow => 7,
        }
    }
}

const UNARY: u8 = 6;
const POSTFIX: u8 = 8;

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.level(),
        ExprKind::Unary(..) => UNARY,
        _ => POSTFIX,
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    write_at(out, e, 0);
}

/// Writes `e` where the grammar expects an operand of at least `min` level.
fn write_at(out: &mut String, e: &Expr, min: u8) {
    if level(e) < min {
        out.push('(');
        write_at(out, e, 0);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Literal(l) => write_literal(out, l),
        ExprKind::Ident(n) => out.push_str(n),
        ExprKind::Member(base, field) => {
            write_at(out, base, POSTFIX);
            out.push('.');
            out.push_str(&field.name);
        }
        ExprKind::Index(base, idx) => {
            write_at(out, base, POSTFIX);
            out.push('[');
            for (i, x) in idx.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, x);
            }
            out.push(']');
        }
        ExprKind::Call(callee, args) => {
            write_at(out, callee, POSTFIX);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                if let Some(n) = &a.name {
                    out.push_str(&n.name);
                    out.push_str(if a.output { " => " } else { " := " });
                }
                write_expr(out, &a.value);
            }
            out.push(')');
        }
        ExprKind::Unary(UnaryOp::Not, x) => {
            out.push_str("NOT ");
            write_at(out, x, UNARY);
        }
        ExprKind::Unary(UnaryOp::Neg, x) => {
            out.push('-');
            if matches!(x.kind, ExprKind::Unary(UnaryOp::Neg, _)) {
                out.push(' ');
            }
            write_at(out, x, UNARY);
        }
        ExprKind::Binary(op, l, r) => {
            let lv = op.level();
            let operand = if *op == BinaryOp::Pow { POSTFIX } else { lv + 1 };
            write_at(out, l, lv.min(operand));
            out.push(' ');
            out.push_str(op.as_str());
            out.push(' ');
            write_at(out, r, operand);
        }
    }
}

/// Case labels are constants; negation is written bare since labels admit no parentheses.
fn write_label(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Unary(UnaryOp::Neg, x) => {
            out.push('-');
            write_label(out, x);
        }
        _ => write_expr(out, e),
    }
}

pub fn print_statements(ast: &StAst) -> String {
    let mut out = String::new();
    write_block(&mut out, &ast.statements, 0);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn write_block(out: &mut String, body: &[Stmt], level: usize) {
    for s in body {
        write_stmt(out, s, level);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            write_expr(out, target);
            out.push_str(" := ");
            write_expr(out, value);
            out.push_str(";\n");
        }
        StmtKind::Call(e) => {
            write_expr(out, e);
            out.push_str(";\n");
        }
        StmtKind::If { branches, else_body } => {
            for (i, (cond, body)) in branches.iter().enumerate() {
                if i > 0 {
                    indent(out, level);
                    out.push_str("ELSIF ");
                } else {
                    out.push_str("IF ");
                }
                write_expr(out, cond);
                out.push_str(" THEN\n");
                write_block(out, body, level + 1);
            }
            if let Some(body) = else_body {
                indent(out, level);
                out.push_str("ELSE\n");
                write_block(out, body, level + 1);
            }
            indent(out, level);
            out.push_str("END_IF;\n");
        }
        StmtKind::Case {
            selector,
            arms,
            else_body,
        } => {
            out.push_str("CASE ");
            write_expr(out, selector);
            out.push_str(" OF\n");
            for arm in arms {
                indent(out, level + 1);
                for (i, l) in arm.labels.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    match l {
                        CaseLabel::Value(e) => write_label(out, e),
                        CaseLabel::Range(a, b) => {
                            write_label(out, a);
                            out.push_str("..");
                            write_label(out, b);
                        }
                    }
                }
                out.push_str(":\n");
                write_block(out, &arm.body, level + 2);
            }
            if let Some(body) = else_body {
                indent(out, level);
                out.push_str("ELSE\n");
                write_block(out, body, level + 1);
            }
            indent(out, level);
            out.push_str("END_CASE;\n");
        }
        StmtKind::For {
            var,
            from,
            to,
            by,
            body,
        } => {
            let _ = write!(out, "FOR {} := ", var.name);
            write_expr(out, from);
            out.push_str(" TO ");
            write_expr(out, to);
            if let Some(by) = by {
                out.push_str(" BY ");
                write_expr(out, by);
            }
            out.push_str(" DO\n");
            write_block(out, body, level + 1);
            indent(out, level);
            out.push_str("END_FOR;\n");
        }
        StmtKind::While { cond, body } => {
            out.push_str("WHILE ");
            write_expr(out, cond);
            out.push_str(" DO\n");
            write_block(out, body, level + 1);
            indent(out, level);
            out.push_str("END_WHILE;\n");
        }
        StmtKind::Repeat { body, until } => {
            out.push_str("REPEAT\n");
            write_block(out, body, level + 1);
            indent(out, level);
            out.push_str("UNTIL ");
            write_expr(out, until);
            out.push('\n');
            indent(out, level);
            out.push_str("END_REPEAT;\n");
        }
        StmtKind::Exit => out.push_str("EXIT;\n"),
        StmtKind::Return => out.push_str("RETURN;\n"),
        StmtKind::Empty => out.push_str(";\n"),
    }
}
