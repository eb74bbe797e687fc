//! Tokenizer for the Structured Text subset.

use std::fmt;

use crate::diag::Span;

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    If,
    Then,
    Elsif,
    Else,
    EndIf,
    Case,
    Of,
    EndCase,
    For,
    To,
    By,
    Do,
    EndFor,
    While,
    EndWhile,
    Repeat,
    Until,
    EndRepeat,
    Exit,
    Return,
    Not,
    And,
    Or,
    Xor,
    Mod,
    True,
    False,
}

const KEYWORDS: &[(&str, Kw)] = &[
    ("IF", Kw::If),
    ("THEN", Kw::Then),
    ("ELSIF", Kw::Elsif),
    ("ELSE", Kw::Else),
    ("END_IF", Kw::EndIf),
    ("CASE", Kw::Case),
    ("OF", Kw::Of),
    ("END_CASE", Kw::EndCase),
    ("FOR", Kw::For),
    ("TO", Kw::To),
    ("BY", Kw::By),
    ("DO", Kw::Do),
    ("END_FOR", Kw::EndFor),
    ("WHILE", Kw::While),
    ("END_WHILE", Kw::EndWhile),
    ("REPEAT", Kw::Repeat),
    ("UNTIL", Kw::Until),
    ("END_REPEAT", Kw::EndRepeat),
    ("EXIT", Kw::Exit),
    ("RETURN", Kw::Return),
    ("NOT", Kw::Not),
    ("AND", Kw::And),
    ("OR", Kw::Or),
    ("XOR", Kw::Xor),
    ("MOD", Kw::Mod),
    ("TRUE", Kw::True),
    ("FALSE", Kw::False),
];

impl Kw {
    pub fn as_str(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).map(|(s, _)| *s).unwrap_or("?")
    }

    fn lookup(word: &str) -> Option<Kw> {
        KEYWORDS
            .iter()
            .find(|(s, _)| s.eq_ignore_ascii_case(word))
            .map(|(_, k)| *k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Punct {
    Assign,
    Arrow,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    DotDot,
    Dot,
    Plus,
    Minus,
    Star,
    Power,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Amp,
}

impl Punct {
    pub fn as_str(self) -> &'static str {
        match self {
            Punct::Assign => ":=",
            Punct::Arrow => "=>",
            Punct::LParen => "(",
            Punct::RParen => ")",
            Punct::LBracket => "[",
            Punct::RBracket => "]",
            Punct::Comma => ",",
            Punct::Semi => ";",
            Punct::Colon => ":",
            Punct::DotDot => "..",
            Punct::Dot => ".",
            Punct::Plus => "+",
            Punct::Minus => "-",
            Punct::Star => "*",
            Punct::Power => "**",
            Punct::Slash => "/",
            Punct::Eq => "=",
            Punct::Ne => "<>",
            Punct::Lt => "<",
            Punct::Le => "<=",
            Punct::Gt => ">",
            Punct::Ge => ">=",
            Punct::Amp => "&",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Kw(Kw),
    Int(String),
    Real(String),
    /// Quoted string, raw text including quotes.
    Str(String),
    /// `T#5s`, `INT#3`, `16#FF`-style prefixed literal, raw text.
    Typed(String),
    Punct(Punct),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Int(s) | Tok::Real(s) | Tok::Str(s) | Tok::Typed(s) => write!(f, "'{s}'"),
            Tok::Kw(k) => write!(f, "'{}'", k.as_str()),
            Tok::Punct(p) => write!(f, "'{}'", p.as_str()),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const TIME_PREFIXES: &[&str] = &["T", "TIME", "LT", "LTIME"];
const DATE_PREFIXES: &[&str] = &[
    "D",
    "DATE",
    "LD",
    "LDATE",
    "TOD",
    "TIME_OF_DAY",
    "LTOD",
    "DT",
    "DATE_AND_TIME",
    "LDT",
];

fn lex_error(start: usize, end: usize, expected: &[&str], found: impl Into<String>) -> ParseError {
    ParseError {
        span: Span::new(start, end),
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.into(),
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        // comments
        if b[i..].starts_with(b"(*") {
            match src[i + 2..].find("*)") {
                Some(end) => i += 2 + end + 2,
                None => return Err(lex_error(start, b.len(), &["'*)'"], "end of input")),
            }
            continue;
        }
        if b[i..].starts_with(b"/*") {
            match src[i + 2..].find("*/") {
                Some(end) => i += 2 + end + 2,
                None => return Err(lex_error(start, b.len(), &["'*/'"], "end of input")),
            }
            continue;
        }
        if b[i..].starts_with(b"//") {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            if i < b.len() && b[i] == b'#' {
                i = typed_literal(src, start, i)?;
                Tok::Typed(src[start..i].to_string())
            } else if let Some(kw) = Kw::lookup(word) {
                Tok::Kw(kw)
            } else {
                Tok::Ident(word.to_string())
            }
        } else if c.is_ascii_digit() {
            number(src, &mut i)?
        } else if c == b'\'' || c == b'"' {
            i = string(src, i)?;
            Tok::Str(src[start..i].to_string())
        } else if c == b'%' {
            // Direct address, kept as an opaque identifier.
            i += 1;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'.') {
                i += 1;
            }
            if i == start + 1 {
                return Err(lex_error(start, start + 1, &["direct address"], "'%'"));
            }
            Tok::Ident(src[start..i].to_string())
        } else {
            let two = b.get(i..i + 2).unwrap_or(&[]);
            let p = match two {
                b":=" => Some(Punct::Assign),
                b"=>" => Some(Punct::Arrow),
                b".." => Some(Punct::DotDot),
                b"**" => Some(Punct::Power),
                b"<>" => Some(Punct::Ne),
                b"<=" => Some(Punct::Le),
                b">=" => Some(Punct::Ge),
                _ => None,
            };
            if let Some(p) = p {
                i += 2;
                Tok::Punct(p)
            } else {
                let p = match c {
                    b'(' => Punct::LParen,
                    b')' => Punct::RParen,
                    b'[' => Punct::LBracket,
                    b']' => Punct::RBracket,
                    b',' => Punct::Comma,
                    b';' => Punct::Semi,
                    b':' => Punct::Colon,
                    b'.' => Punct::Dot,
                    b'+' => Punct::Plus,
                    b'-' => Punct::Minus,
                    b'*' => Punct::Star,
                    b'/' => Punct::Slash,
                    b'=' => Punct::Eq,
                    b'<' => Punct::Lt,
                    b'>' => Punct::Gt,
                    b'&' => Punct::Amp,
                    _ => {
                        let ch = src[i..].chars().next().unwrap_or('?');
                        return Err(lex_error(i, i + ch.len_utf8(), &["token"], format!("'{ch}'")));
                    }
                };
                i += 1;
                Tok::Punct(p)
            }
        };
        out.push(Token {
            tok,
            span: Span::new(start, i),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(b.len(), b.len()),
    });
    Ok(out)
}

fn digits(b: &[u8], i: &mut usize, ok: impl Fn(u8) -> bool) -> bool {
    let start = *i;
    while *i < b.len() && (ok(b[*i]) || (b[*i] == b'_' && *i > start)) {
        *i += 1;
    }
    *i > start && b[*i - 1] != b'_'
}

fn number(src: &str, i: &mut usize) -> Result<Tok, ParseError> {
    let b = src.as_bytes();
    let start = *i;
    digits(b, i, |c| c.is_ascii_digit());
    if *i < b.len() && b[*i] == b'#' {
        // based integer: 2#, 8#, 16#
        let base = &src[start..*i];
        let radix: u32 = match base {
            "2" => 2,
            "8" => 8,
            "16" => 16,
            _ => return Err(lex_error(start, *i + 1, &["2#", "8#", "16#"], format!("'{base}#'"))),
        };
        *i += 1;
        if !digits(b, i, |c| (c as char).is_digit(radix)) {
            return Err(lex_error(start, *i, &["digit"], found_at(src, *i)));
        }
        return Ok(Tok::Int(src[start..*i].to_string()));
    }
    if b[*i - 1] == b'_' {
        return Err(lex_error(start, *i, &["digit"], "'_'"));
    }
    let mut real = false;
    if *i + 1 < b.len() && b[*i] == b'.' && b[*i + 1].is_ascii_digit() {
        *i += 1;
        digits(b, i, |c| c.is_ascii_digit());
        real = true;
    }
    if *i < b.len() && (b[*i] == b'e' || b[*i] == b'E') {
        let mut j = *i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            *i = j;
            digits(b, i, |c| c.is_ascii_digit());
            real = true;
        }
    }
    if *i < b.len() && (b[*i].is_ascii_alphabetic() || b[*i] == b'_') {
        return Err(lex_error(*i, *i + 1, &["operator", "delimiter"], found_at(src, *i)));
    }
    let text = src[start..*i].to_string();
    Ok(if real { Tok::Real(text) } else { Tok::Int(text) })
}

fn found_at(src: &str, i: usize) -> String {
    match src[i..].chars().next() {
        Some(c) => format!("'{c}'"),
        None => "end of input".to_string(),
    }
}

/// `prefix#value`; `hash` is the index of `#`. Returns the end offset.
fn typed_literal(src: &str, start: usize, hash: usize) -> Result<usize, ParseError> {
    let b = src.as_bytes();
    let prefix = src[start..hash].to_ascii_uppercase();
    let mut i = hash + 1;
    let value_start = i;
    if TIME_PREFIXES.contains(&prefix.as_str()) {
        if i < b.len() && b[i] == b'-' {
            i += 1;
        }
        while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'.') {
            i += 1;
        }
    } else if DATE_PREFIXES.contains(&prefix.as_str()) {
        while i < b.len() && (b[i].is_ascii_digit() || matches!(b[i], b'_' | b'.' | b':' | b'-')) {
            i += 1;
        }
    } else {
        if i < b.len() && (b[i] == b'-' || b[i] == b'+') {
            i += 1;
        }
        if i < b.len() && (b[i] == b'\'' || b[i] == b'"') {
            i = string(src, i)?;
        } else {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || matches!(b[i], b'_' | b'.' | b'#')) {
                i += 1;
            }
        }
    }
    let value = &src[value_start..i];
    if value.trim_start_matches(['-', '+']).is_empty() {
        return Err(lex_error(start, i, &["literal value"], found_at(src, i)));
    }
    Ok(i)
}

/// Quoted string with `$` escapes. Returns the end offset after the closing quote.
fn string(src: &str, start: usize) -> Result<usize, ParseError> {
    let b = src.as_bytes();
    let quote = b[start];
    let wide = quote == b'"';
    let mut i = start + 1;
    loop {
        match b.get(i) {
            None => return Err(lex_error(start, b.len(), &["closing quote"], "end of input")),
            Some(b'\n') => return Err(lex_error(start, i, &["closing quote"], "line break")),
            Some(&c) if c == quote => return Ok(i + 1),
            Some(b'$') => {
                let n = if wide { 4 } else { 2 };
                match b.get(i + 1) {
                    Some(b'$' | b'\'' | b'"' | b'L' | b'l' | b'N' | b'n' | b'P' | b'p' | b'R' | b'r' | b'T' | b't') => i += 2,
                    Some(c) if c.is_ascii_hexdigit() => {
                        let hex = b.get(i + 1..i + 1 + n).unwrap_or(&[]);
                        if hex.len() != n || !hex.iter().all(u8::is_ascii_hexdigit) {
                            return Err(lex_error(i, i + 1 + hex.len(), &["hex escape"], found_at(src, i + 1)));
                        }
                        i += 1 + n;
                    }
                    _ => return Err(lex_error(i, i + 1, &["escape after '$'"], found_at(src, i + 1))),
                }
            }
            Some(_) => {
                i += src[i..].chars().next().map_or(1, char::len_utf8);
            }
        }
    }
}
