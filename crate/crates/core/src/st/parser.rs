//! Recursive-descent parser over the token stream.

use crate::diag::Span;

use super::ast::*;
use super::lexer::{tokenize, Kw, Punct, Tok, Token};
use super::ParseError;

/// Maximum nesting of statements and parenthesized expressions.
pub const MAX_DEPTH: usize = 100;

pub fn parse_statements(src: &str) -> Result<StAst, ParseError> {
    let mut p = Parser::new(src)?;
    let statements = p.block(&[])?;
    p.expect_eof(&["statement"])?;
    Ok(StAst { statements })
}

pub fn parse_expression(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.expect_eof(&["operator"])?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            depth: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn is_kw(&self, kw: Kw) -> bool {
        *self.peek() == Tok::Kw(kw)
    }

    fn is_punct(&self, p: Punct) -> bool {
        *self.peek() == Tok::Punct(p)
    }

    fn eat_kw(&mut self, kw: Kw) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: Kw) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&[kw.as_str()]))
        }
    }

    fn expect_punct(&mut self, p: Punct) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&[p.as_str()]))
        }
    }

    fn expect_eof(&self, expected: &[&str]) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                span: self.span(),
                expected: vec!["shallower nesting".into()],
                found: "nesting too deep".into(),
            });
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    // -- statements ---------------------------------------------------------

    /// Statements until one of `stops` (or end of input when `stops` is empty).
    fn block(&mut self, stops: &[Kw]) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof if stops.is_empty() => return Ok(out),
                Tok::Kw(k) if stops.contains(k) => return Ok(out),
                Tok::Eof => {
                    let mut expected = vec!["statement"];
                    expected.extend(stops.iter().map(|k| k.as_str()));
                    return Err(self.error(&expected));
                }
                _ => out.push(self.statement()?),
            }
        }
    }

    fn terminator(&mut self, start: usize) -> PResult<Span> {
        self.expect_punct(Punct::Semi)?;
        Ok(Span::new(start, self.prev_end()))
    }

    fn statement(&mut self) -> PResult<Stmt> {
        self.enter()?;
        let r = self.statement_inner();
        self.leave();
        r
    }

    fn statement_inner(&mut self) -> PResult<Stmt> {
        let start = self.span().start;
        let kind = match self.peek().clone() {
            Tok::Punct(Punct::Semi) => StmtKind::Empty,
            Tok::Kw(Kw::If) => self.if_stmt()?,
            Tok::Kw(Kw::Case) => self.case_stmt()?,
            Tok::Kw(Kw::For) => self.for_stmt()?,
            Tok::Kw(Kw::While) => {
                self.bump();
                let cond = self.expr()?;
                self.expect_kw(Kw::Do)?;
                let body = self.block(&[Kw::EndWhile])?;
                self.bump();
                StmtKind::While { cond, body }
            }
            Tok::Kw(Kw::Repeat) => {
                self.bump();
                let body = self.block(&[Kw::Until])?;
                self.bump();
                let until = self.expr()?;
                self.expect_kw(Kw::EndRepeat)?;
                StmtKind::Repeat { body, until }
            }
            Tok::Kw(Kw::Exit) => {
                self.bump();
                StmtKind::Exit
            }
            Tok::Kw(Kw::Return) => {
                self.bump();
                StmtKind::Return
            }
            Tok::Ident(_) => {
                let target = self.postfix()?;
                if self.eat_punct(Punct::Assign) {
                    let value = self.expr()?;
                    StmtKind::Assign { target, value }
                } else if matches!(target.kind, ExprKind::Call(..)) {
                    StmtKind::Call(target)
                } else {
                    return Err(self.error(&[":=", "("]));
                }
            }
            _ => return Err(self.error(&["statement"])),
        };
        if kind == StmtKind::Empty {
            self.bump();
            return Ok(Stmt {
                kind,
                span: Span::new(start, self.prev_end()),
            });
        }
        let span = self.terminator(start)?;
        Ok(Stmt { kind, span })
    }

    fn if_stmt(&mut self) -> PResult<StmtKind> {
        self.bump();
        let mut branches = Vec::new();
        let mut else_body = None;
        loop {
            let cond = self.expr()?;
            self.expect_kw(Kw::Then)?;
            let body = self.block(&[Kw::Elsif, Kw::Else, Kw::EndIf])?;
            branches.push((cond, body));
            if self.eat_kw(Kw::Elsif) {
                continue;
            }
            if self.eat_kw(Kw::Else) {
                else_body = Some(self.block(&[Kw::EndIf])?);
            }
            self.expect_kw(Kw::EndIf)?;
            break;
        }
        Ok(StmtKind::If { branches, else_body })
    }

    fn case_stmt(&mut self) -> PResult<StmtKind> {
        self.bump();
        let selector = self.expr()?;
        self.expect_kw(Kw::Of)?;
        let mut arms = Vec::new();
        while self.at_case_label() {
            let start = self.span().start;
            let mut labels = Vec::new();
            loop {
                let a = self.case_value()?;
                if self.eat_punct(Punct::DotDot) {
                    let b = self.case_value()?;
                    labels.push(CaseLabel::Range(a, b));
                } else {
                    labels.push(CaseLabel::Value(a));
                }
                if !self.eat_punct(Punct::Comma) {
                    break;
                }
            }
            self.expect_punct(Punct::Colon)?;
            let mut body = Vec::new();
            while !self.at_case_label() && !self.is_kw(Kw::Else) && !self.is_kw(Kw::EndCase) {
                if *self.peek() == Tok::Eof {
                    return Err(self.error(&["statement", "case label", "ELSE", "END_CASE"]));
                }
                body.push(self.statement()?);
            }
            arms.push(CaseArm {
                labels,
                body,
                span: Span::new(start, self.prev_end()),
            });
        }
        if arms.is_empty() {
            return Err(self.error(&["case label"]));
        }
        let else_body = if self.eat_kw(Kw::Else) {
            Some(self.block(&[Kw::EndCase])?)
        } else {
            None
        };
        self.expect_kw(Kw::EndCase)?;
        Ok(StmtKind::Case {
            selector,
            arms,
            else_body,
        })
    }

    /// Lookahead: `label (.. label)? (, label (.. label)?)* :` where label is a
    /// possibly negated integer, an identifier or a typed literal.
    fn at_case_label(&self) -> bool {
        let mut n = 0;
        loop {
            for _ in 0..2 {
                if *self.peek_at(n) == Tok::Punct(Punct::Minus) {
                    n += 1;
                }
                match self.peek_at(n) {
                    Tok::Int(_) | Tok::Ident(_) | Tok::Typed(_) => n += 1,
                    _ => return false,
                }
                if *self.peek_at(n) == Tok::Punct(Punct::DotDot) {
                    n += 1;
                } else {
                    break;
                }
            }
            match self.peek_at(n) {
                Tok::Punct(Punct::Comma) => n += 1,
                Tok::Punct(Punct::Colon) => return true,
                _ => return false,
            }
        }
    }

    fn case_value(&mut self) -> PResult<Expr> {
        let start = self.span().start;
        if self.eat_punct(Punct::Minus) {
            let inner = self.case_value()?;
            return Ok(Expr {
                kind: ExprKind::Unary(UnaryOp::Neg, Box::new(inner)),
                span: Span::new(start, self.prev_end()),
            });
        }
        match self.peek() {
            Tok::Int(_) | Tok::Ident(_) | Tok::Typed(_) => self.primary(),
            _ => Err(self.error(&["case label"])),
        }
    }

    fn for_stmt(&mut self) -> PResult<StmtKind> {
        self.bump();
        let var = match self.peek().clone() {
            Tok::Ident(name) => Ident {
                name,
                span: self.bump().span,
            },
            _ => return Err(self.error(&["identifier"])),
        };
        self.expect_punct(Punct::Assign)?;
        let from = self.expr()?;
        self.expect_kw(Kw::To)?;
        let to = self.expr()?;
        let by = if self.eat_kw(Kw::By) {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect_kw(Kw::Do)?;
        let body = self.block(&[Kw::EndFor])?;
        self.bump();
        Ok(StmtKind::For {
            var,
            from,
            to,
            by,
            body,
        })
    }

    // -- expressions --------------------------------------------------------

    pub fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.binary_level(0);
        self.leave();
        r
    }

    fn binary_op(&self, level: usize) -> Option<BinaryOp> {
        let t = self.peek();
        let op = match (level, t) {
            (0, Tok::Kw(Kw::Or)) => BinaryOp::Or,
            (1, Tok::Kw(Kw::Xor)) => BinaryOp::Xor,
            (2, Tok::Kw(Kw::And)) | (2, Tok::Punct(Punct::Amp)) => BinaryOp::And,
            (3, Tok::Punct(Punct::Eq)) => BinaryOp::Eq,
            (3, Tok::Punct(Punct::Ne)) => BinaryOp::Ne,
            (3, Tok::Punct(Punct::Lt)) => BinaryOp::Lt,
            (3, Tok::Punct(Punct::Le)) => BinaryOp::Le,
            (3, Tok::Punct(Punct::Gt)) => BinaryOp::Gt,
            (3, Tok::Punct(Punct::Ge)) => BinaryOp::Ge,
            (4, Tok::Punct(Punct::Plus)) => BinaryOp::Add,
            (4, Tok::Punct(Punct::Minus)) => BinaryOp::Sub,
            (5, Tok::Punct(Punct::Star)) => BinaryOp::Mul,
            (5, Tok::Punct(Punct::Slash)) => BinaryOp::Div,
            (5, Tok::Kw(Kw::Mod)) => BinaryOp::Mod,
            _ => return None,
        };
        Some(op)
    }

    /// Levels 0..=5: OR, XOR, AND, comparison, additive, multiplicative.
    fn binary_level(&mut self, level: usize) -> PResult<Expr> {
        if level == 6 {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        while let Some(op) = self.binary_op(level) {
            self.bump();
            let rhs = self.binary_level(level + 1)?;
            let span = lhs.span.merge(rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span().start;
        let op = match self.peek() {
            Tok::Kw(Kw::Not) => UnaryOp::Not,
            Tok::Punct(Punct::Minus) => UnaryOp::Neg,
            _ => return self.power(),
        };
        self.bump();
        self.enter()?;
        let inner = self.unary();
        self.leave();
        let inner = inner?;
        let span = Span::new(start, inner.span.end);
        Ok(Expr {
            kind: ExprKind::Unary(op, Box::new(inner)),
            span,
        })
    }

    fn power(&mut self) -> PResult<Expr> {
        let mut lhs = self.postfix()?;
        while self.eat_punct(Punct::Power) {
            let rhs = self.postfix()?;
            let span = lhs.span.merge(rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary(BinaryOp::Pow, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            let start = e.span.start;
            // no member or bit access on constants; `1 .0` would print as a REAL
            if !matches!(e.kind, ExprKind::Literal(_)) && self.eat_punct(Punct::Dot) {
                let field = match self.peek().clone() {
                    Tok::Ident(name) | Tok::Int(name) => Ident {
                        name,
                        span: self.bump().span,
                    },
                    _ => return Err(self.error(&["member name"])),
                };
                e = Expr {
                    span: Span::new(start, field.span.end),
                    kind: ExprKind::Member(Box::new(e), field),
                };
            } else if self.eat_punct(Punct::LBracket) {
                let mut idx = vec![self.expr()?];
                while self.eat_punct(Punct::Comma) {
                    idx.push(self.expr()?);
                }
                self.expect_punct(Punct::RBracket)?;
                e = Expr {
                    kind: ExprKind::Index(Box::new(e), idx),
                    span: Span::new(start, self.prev_end()),
                };
            } else if self.is_punct(Punct::LParen) && matches!(e.kind, ExprKind::Ident(_) | ExprKind::Member(..)) {
                self.bump();
                let args = self.args()?;
                e = Expr {
                    kind: ExprKind::Call(Box::new(e), args),
                    span: Span::new(start, self.prev_end()),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn args(&mut self) -> PResult<Vec<Arg>> {
        let mut args = Vec::new();
        if self.eat_punct(Punct::RParen) {
            return Ok(args);
        }
        loop {
            let start = self.span().start;
            let named = matches!(self.peek(), Tok::Ident(_))
                && matches!(self.peek_at(1), Tok::Punct(Punct::Assign | Punct::Arrow));
            let arg = if named {
                let Tok::Ident(name) = self.peek().clone() else { unreachable!() };
                let name = Ident {
                    name,
                    span: self.bump().span,
                };
                let output = self.bump().tok == Tok::Punct(Punct::Arrow);
                let value = self.expr()?;
                Arg {
                    span: Span::new(start, value.span.end),
                    name: Some(name),
                    output,
                    value,
                }
            } else {
                let value = self.expr()?;
                Arg {
                    span: value.span,
                    name: None,
                    output: false,
                    value,
                }
            };
            args.push(arg);
            if self.eat_punct(Punct::Comma) {
                continue;
            }
            if self.eat_punct(Punct::RParen) {
                return Ok(args);
            }
            return Err(self.error(&[",", ")"]));
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Kw(Kw::True) => ExprKind::Literal(Literal::Bool(true)),
            Tok::Kw(Kw::False) => ExprKind::Literal(Literal::Bool(false)),
            Tok::Int(s) => ExprKind::Literal(Literal::Int(s)),
            Tok::Real(s) => ExprKind::Literal(Literal::Real(s)),
            Tok::Str(s) => ExprKind::Literal(Literal::Str(s)),
            Tok::Typed(s) => ExprKind::Literal(Literal::Typed(s)),
            Tok::Ident(s) => ExprKind::Ident(s),
            Tok::Punct(Punct::LParen) => {
                self.bump();
                let mut inner = self.expr()?;
                self.expect_punct(Punct::RParen)?;
                // No paren node: widen the span to include the parentheses.
                inner.span = Span::new(span.start, self.prev_end());
                return Ok(inner);
            }
            _ => return Err(self.error(&["expression"])),
        };
        self.bump();
        Ok(Expr { kind, span })
    }
}
