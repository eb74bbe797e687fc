//! Canonical textual encoding of a [`ReducedSfc`].
//!
//! The document is JSON with a fixed field order, two-space indentation and
//! LF line endings. [`serialize_reduced`] emits exactly one document per
//! chart; [`parse_reduced`] tolerates any JSON whitespace but insists on the
//! canonical field order; the [`recognizer`] accepts canonical bytes only.

mod grammar;
mod layout;
pub mod recognizer;

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::diag::Diagnostic;
use crate::model::{validate_reduced, Edge, Interface, ReducedSfc, StepNode, VarSection, VariableDecl};

pub use grammar::{grammar, Grammar, Production, Symbol};
pub use recognizer::{classify, feed, recognize, recognizer_start, Classification, Rejected, RecognizerState};

/// JSON schema of the canonical document, for schema-constrained requests.
pub const REDUCED_SCHEMA: &str = include_str!("../../schema/reduced-sfc.schema.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("refusing to serialize an invalid chart: {}", join_diags(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join_diags(d: &[Diagnostic]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Canonical document plus the byte range of every step entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerializedChart {
    pub text: String,
    /// One range per step, in chart order, from the entry's indentation to its closing brace.
    pub step_spans: Vec<Range<usize>>,
}

pub fn serialize_reduced(sfc: &ReducedSfc) -> Result<String, CodecError> {
    Ok(serialize_with_spans(sfc)?.text)
}

pub fn serialize_with_spans(sfc: &ReducedSfc) -> Result<SerializedChart, CodecError> {
    let errors: Vec<Diagnostic> = validate_reduced(sfc, true)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(CodecError::Invalid(errors));
    }
    Ok(write_document(sfc))
}

/// Serializes without validating. Used for corrupt fixtures and diagnostics.
pub fn serialize_unchecked(sfc: &ReducedSfc) -> String {
    write_document(sfc).text
}

fn write_document(sfc: &ReducedSfc) -> SerializedChart {
    let mut out = String::with_capacity(256 + sfc.steps.len() * 256);
    out.push_str("{\n  \"pou_name\": ");
    push_json_string(&mut out, &sfc.pou_name);
    out.push_str(",\n  \"variables\": {\n");
    for (i, section) in VarSection::ALL.into_iter().enumerate() {
        out.push_str("    \"");
        out.push_str(section.as_str());
        out.push_str("\": ");
        let vars = sfc.variables.section(section);
        if vars.is_empty() {
            out.push_str("[]");
        } else {
            out.push_str("[\n");
            for (j, v) in vars.iter().enumerate() {
                if j > 0 {
                    out.push_str(",\n");
                }
                out.push_str("      {\n        \"name\": ");
                push_json_string(&mut out, &v.name);
                out.push_str(",\n        \"type\": ");
                push_json_string(&mut out, &v.data_type);
                out.push_str(",\n        \"default\": ");
                push_nullable(&mut out, v.default_value.as_deref());
                out.push_str("\n      }");
            }
            out.push_str("\n    ]");
        }
        out.push_str(if i < 2 { ",\n" } else { "\n" });
    }
    out.push_str("  },\n  \"steps\": ");
    let mut spans = Vec::with_capacity(sfc.steps.len());
    if sfc.steps.is_empty() {
        out.push_str("[]");
    } else {
        out.push_str("[\n");
        for (i, step) in sfc.steps.iter().enumerate() {
            if i > 0 {
                out.push_str(",\n");
            }
            let start = out.len();
            write_step(&mut out, step);
            spans.push(start..out.len());
        }
        out.push_str("\n  ]");
    }
    out.push_str("\n}\n");
    SerializedChart {
        text: out,
        step_spans: spans,
    }
}

fn write_step(out: &mut String, step: &StepNode) {
    out.push_str("    {\n      \"name\": ");
    push_json_string(out, &step.name);
    out.push_str(",\n      \"initial\": ");
    out.push_str(if step.is_initial { "true" } else { "false" });
    out.push_str(",\n      \"action\": ");
    push_nullable(out, step.action.as_deref());
    out.push_str(",\n      \"comment\": ");
    push_nullable(out, step.comment.as_deref());
    out.push_str(",\n      \"children\": ");
    if step.children.is_empty() {
        out.push_str("[]");
    } else {
        out.push_str("[\n");
        for (i, e) in step.children.iter().enumerate() {
            if i > 0 {
                out.push_str(",\n");
            }
            out.push_str("        {\n          \"target\": ");
            push_json_string(out, &e.target);
            out.push_str(",\n          \"guard\": ");
            push_json_string(out, &e.guard);
            out.push_str(",\n          \"jump\": ");
            out.push_str(if e.is_jump { "true" } else { "false" });
            out.push_str("\n        }");
        }
        out.push_str("\n      ]");
    }
    out.push_str("\n    }");
}

fn push_nullable(out: &mut String, value: Option<&str>) {
    match value {
        Some(v) => push_json_string(out, v),
        None => out.push_str("null"),
    }
}

/// JSON string with the minimal escape set: short escapes where JSON has
/// them, `\u00XX` (lowercase) for the remaining control characters.
pub fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("schema error at byte {position}: field '{field}': {message}")]
    Schema {
        position: usize,
        field: String,
        message: String,
    },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. } | ParseError::Schema { position, .. } => *position,
        }
    }
}

/// Parses a reduced document. Whitespace between tokens is free; fields must
/// appear exactly once and in canonical order.
pub fn parse_reduced(doc: &str) -> Result<ReducedSfc, ParseError> {
    let mut p = JsonParser { src: doc.as_bytes(), text: doc, pos: 0, depth: 0 };
    p.skip_ws();
    let value = p.value()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax_error(&["end of input"]));
    }
    chart_from_value(&value)
}

// ---------------------------------------------------------------------------
// Generic JSON layer with byte positions.

#[derive(Debug, Clone, PartialEq)]
enum Json {
    Null,
    Bool(bool),
    Number,
    Str(String),
    Array(Vec<Spanned>),
    Object(Vec<(String, usize, Spanned)>),
}

#[derive(Debug, Clone, PartialEq)]
struct Spanned {
    pos: usize,
    value: Json,
}

const MAX_DEPTH: usize = 64;

struct JsonParser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    depth: usize,
}

impl<'a> JsonParser<'a> {
    fn skip_ws(&mut self) {
        while let Some(b' ' | b'\t' | b'\n' | b'\r') = self.src.get(self.pos) {
            self.pos += 1;
        }
    }

    fn found(&self) -> String {
        match self.text.get(self.pos..).and_then(|s| s.chars().next()) {
            Some(c) => format!("{c:?}"),
            None if self.pos >= self.src.len() => "end of input".to_string(),
            None => format!("byte 0x{:02x}", self.src[self.pos]),
        }
    }

    fn syntax_error(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.found(),
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        for &b in word.as_bytes() {
            if !self.eat(b) {
                return Err(self.syntax_error(&[word]));
            }
        }
        Ok(())
    }

    fn value(&mut self) -> Result<Spanned, ParseError> {
        let pos = self.pos;
        let value = match self.src.get(self.pos) {
            Some(b'{') => self.object()?,
            Some(b'[') => self.array()?,
            Some(b'"') => Json::Str(self.string()?),
            Some(b't') => {
                self.keyword("true")?;
                Json::Bool(true)
            }
            Some(b'f') => {
                self.keyword("false")?;
                Json::Bool(false)
            }
            Some(b'n') => {
                self.keyword("null")?;
                Json::Null
            }
            Some(b'-' | b'0'..=b'9') => {
                self.number()?;
                Json::Number
            }
            _ => return Err(self.syntax_error(&["value"])),
        };
        Ok(Spanned { pos, value })
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::Syntax {
                position: self.pos,
                expected: vec!["shallower nesting".into()],
                found: "nesting too deep".into(),
            });
        }
        Ok(())
    }

    fn object(&mut self) -> Result<Json, ParseError> {
        self.enter()?;
        self.pos += 1;
        let mut members = Vec::new();
        self.skip_ws();
        if self.eat(b'}') {
            self.depth -= 1;
            return Ok(Json::Object(members));
        }
        loop {
            self.skip_ws();
            if self.src.get(self.pos) != Some(&b'"') {
                return Err(self.syntax_error(&["field name"]));
            }
            let key_pos = self.pos;
            let key = self.string()?;
            self.skip_ws();
            if !self.eat(b':') {
                return Err(self.syntax_error(&["':'"]));
            }
            self.skip_ws();
            let v = self.value()?;
            members.push((key, key_pos, v));
            self.skip_ws();
            if self.eat(b',') {
                continue;
            }
            if self.eat(b'}') {
                break;
            }
            return Err(self.syntax_error(&["','", "'}'"]));
        }
        self.depth -= 1;
        Ok(Json::Object(members))
    }

    fn array(&mut self) -> Result<Json, ParseError> {
        self.enter()?;
        self.pos += 1;
        let mut items = Vec::new();
        self.skip_ws();
        if self.eat(b']') {
            self.depth -= 1;
            return Ok(Json::Array(items));
        }
        loop {
            self.skip_ws();
            items.push(self.value()?);
            self.skip_ws();
            if self.eat(b',') {
                continue;
            }
            if self.eat(b']') {
                break;
            }
            return Err(self.syntax_error(&["','", "']'"]));
        }
        self.depth -= 1;
        Ok(Json::Array(items))
    }

    fn number(&mut self) -> Result<(), ParseError> {
        self.eat(b'-');
        if !self.eat(b'0') {
            if !matches!(self.src.get(self.pos), Some(b'1'..=b'9')) {
                return Err(self.syntax_error(&["digit"]));
            }
            while matches!(self.src.get(self.pos), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        if self.eat(b'.') {
            if !matches!(self.src.get(self.pos), Some(b'0'..=b'9')) {
                return Err(self.syntax_error(&["digit"]));
            }
            while matches!(self.src.get(self.pos), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            self.pos += 1;
            if !self.eat(b'+') {
                self.eat(b'-');
            }
            if !matches!(self.src.get(self.pos), Some(b'0'..=b'9')) {
                return Err(self.syntax_error(&["digit"]));
            }
            while matches!(self.src.get(self.pos), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        Ok(())
    }

    fn hex4(&mut self) -> Result<u32, ParseError> {
        let mut v = 0u32;
        for _ in 0..4 {
            let d = match self.src.get(self.pos) {
                Some(b @ b'0'..=b'9') => b - b'0',
                Some(b @ b'a'..=b'f') => b - b'a' + 10,
                Some(b @ b'A'..=b'F') => b - b'A' + 10,
                _ => return Err(self.syntax_error(&["hex digit"])),
            };
            v = v * 16 + d as u32;
            self.pos += 1;
        }
        Ok(v)
    }

    fn string(&mut self) -> Result<String, ParseError> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            let start = self.pos;
            while let Some(&b) = self.src.get(self.pos) {
                if b == b'"' || b == b'\\' || b < 0x20 {
                    break;
                }
                self.pos += 1;
            }
            // Input is a &str and we only stop on ASCII bytes, so this slice is on char boundaries.
            out.push_str(&self.text[start..self.pos]);
            match self.src.get(self.pos) {
                Some(b'"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let c = match self.src.get(self.pos) {
                        Some(b'"') => '"',
                        Some(b'\\') => '\\',
                        Some(b'/') => '/',
                        Some(b'b') => '\u{8}',
                        Some(b'f') => '\u{c}',
                        Some(b'n') => '\n',
                        Some(b'r') => '\r',
                        Some(b't') => '\t',
                        Some(b'u') => {
                            self.pos += 1;
                            let esc = self.pos - 2;
                            let hi = self.hex4()?;
                            let code = if (0xD800..0xDC00).contains(&hi) {
                                if !(self.eat(b'\\') && self.eat(b'u')) {
                                    return Err(self.syntax_error(&["low surrogate escape"]));
                                }
                                let lo = self.hex4()?;
                                if !(0xDC00..0xE000).contains(&lo) {
                                    self.pos -= 6;
                                    return Err(self.syntax_error(&["low surrogate escape"]));
                                }
                                0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
                            } else {
                                hi
                            };
                            match char::from_u32(code) {
                                Some(c) => out.push(c),
                                None => {
                                    self.pos = esc;
                                    return Err(self.syntax_error(&["valid unicode escape"]));
                                }
                            }
                            continue;
                        }
                        _ => return Err(self.syntax_error(&["escape character"])),
                    };
                    self.pos += 1;
                    out.push(c);
                }
                Some(_) => return Err(self.syntax_error(&["string character", "'\"'"])),
                None => return Err(self.syntax_error(&["string character", "'\"'"])),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Schema layer.

fn schema(pos: usize, field: &str, message: impl Into<String>) -> ParseError {
    ParseError::Schema {
        position: pos,
        field: field.to_string(),
        message: message.into(),
    }
}

/// Checks an object's keys against the canonical field list and returns the
/// values in that order.
fn fields<'v>(
    v: &'v Spanned,
    what: &str,
    expected: &[&'static str],
) -> Result<Vec<&'v Spanned>, ParseError> {
    let Json::Object(members) = &v.value else {
        return Err(schema(v.pos, what, "expected an object"));
    };
    for (i, (key, key_pos, _)) in members.iter().enumerate() {
        if !expected.contains(&key.as_str()) {
            return Err(schema(*key_pos, key, format!("unknown field in {what}")));
        }
        if members[..i].iter().any(|(k, _, _)| k == key) {
            return Err(schema(*key_pos, key, format!("duplicated field in {what}")));
        }
    }
    for name in expected {
        if !members.iter().any(|(k, _, _)| k == name) {
            return Err(schema(v.pos, name, format!("missing required field in {what}")));
        }
    }
    for (i, (key, key_pos, _)) in members.iter().enumerate() {
        if key != expected[i] {
            return Err(schema(
                *key_pos,
                key,
                format!("field out of order in {what}; expected '{}'", expected[i]),
            ));
        }
    }
    Ok(members.iter().map(|(_, _, v)| v).collect())
}

fn string_field(v: &Spanned, field: &str) -> Result<String, ParseError> {
    match &v.value {
        Json::Str(s) => Ok(s.clone()),
        _ => Err(schema(v.pos, field, "expected a string")),
    }
}

fn nullable_field(v: &Spanned, field: &str) -> Result<Option<String>, ParseError> {
    match &v.value {
        Json::Str(s) => Ok(Some(s.clone())),
        Json::Null => Ok(None),
        _ => Err(schema(v.pos, field, "expected a string or null")),
    }
}

fn bool_field(v: &Spanned, field: &str) -> Result<bool, ParseError> {
    match &v.value {
        Json::Bool(b) => Ok(*b),
        _ => Err(schema(v.pos, field, "expected true or false")),
    }
}

fn array_field<'v>(v: &'v Spanned, field: &str) -> Result<&'v [Spanned], ParseError> {
    match &v.value {
        Json::Array(items) => Ok(items),
        _ => Err(schema(v.pos, field, "expected an array")),
    }
}

fn chart_from_value(v: &Spanned) -> Result<ReducedSfc, ParseError> {
    let top = fields(v, "document", &["pou_name", "variables", "steps"])?;
    let pou_name = string_field(top[0], "pou_name")?;
    let sections = fields(top[1], "variables", &["input", "output", "local"])?;
    let mut variables = Interface::default();
    for (section, value) in VarSection::ALL.into_iter().zip(sections) {
        for item in array_field(value, section.as_str())? {
            let f = fields(item, "variable", &["name", "type", "default"])?;
            variables.section_mut(section).push(VariableDecl {
                name: string_field(f[0], "name")?,
                data_type: string_field(f[1], "type")?,
                default_value: nullable_field(f[2], "default")?,
            });
        }
    }
    let mut steps = Vec::new();
    for item in array_field(top[2], "steps")? {
        let f = fields(item, "step", &["name", "initial", "action", "comment", "children"])?;
        let mut children = Vec::new();
        for child in array_field(f[4], "children")? {
            let c = fields(child, "child", &["target", "guard", "jump"])?;
            children.push(Edge {
                target: string_field(c[0], "target")?,
                guard: string_field(c[1], "guard")?,
                is_jump: bool_field(c[2], "jump")?,
            });
        }
        steps.push(StepNode {
            name: string_field(f[0], "name")?,
            is_initial: bool_field(f[1], "initial")?,
            action: nullable_field(f[2], "action")?,
            comment: nullable_field(f[3], "comment")?,
            children,
        });
    }
    Ok(ReducedSfc {
        pou_name,
        variables,
        steps,
    })
}

impl fmt::Display for SerializedChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
