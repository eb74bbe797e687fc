//! Minimal XML tree on top of quick-xml, with a deterministic writer.

use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XmlNode {
    Element(Element),
    Text(String),
    CData(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    /// Qualified name as written (`xhtml:p`).
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<XmlNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed XML at byte {position}: {message}")]
pub struct XmlSyntaxError {
    pub position: usize,
    pub message: String,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Element {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn attr(mut self, key: &str, value: impl Into<String>) -> Self {
        self.attrs.push((key.to_string(), value.into()));
        self
    }

    pub fn child(mut self, child: Element) -> Self {
        self.children.push(XmlNode::Element(child));
        self
    }

    pub fn push(&mut self, child: Element) {
        self.children.push(XmlNode::Element(child));
    }

    pub fn text(mut self, text: impl Into<String>) -> Self {
        self.children.push(XmlNode::Text(text.into()));
        self
    }

    pub fn cdata(mut self, text: impl Into<String>) -> Self {
        self.children.push(XmlNode::CData(text.into()));
        self
    }

    /// Name without namespace prefix.
    pub fn local_name(&self) -> &str {
        self.name.rsplit(':').next().unwrap_or(&self.name)
    }

    pub fn get_attr(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|c| match c {
            XmlNode::Element(e) => Some(e),
            _ => None,
        })
    }

    /// Child elements with the given local name.
    pub fn find_all<'a>(&'a self, local: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.elements().filter(move |e| e.local_name() == local)
    }

    pub fn find(&self, local: &str) -> Option<&Element> {
        self.elements().find(|e| e.local_name() == local)
    }

    /// Follows a path of local names.
    pub fn path(&self, locals: &[&str]) -> Option<&Element> {
        locals.iter().try_fold(self, |e, l| e.find(l))
    }

    /// Concatenated text and CDATA content, recursively.
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        self.collect_text(&mut out);
        out
    }

    fn collect_text(&self, out: &mut String) {
        for c in &self.children {
            match c {
                XmlNode::Text(t) | XmlNode::CData(t) => out.push_str(t),
                XmlNode::Element(e) => e.collect_text(out),
            }
        }
    }
}

fn start_element(s: &BytesStart<'_>, pos: usize) -> Result<Element, XmlSyntaxError> {
    let err = |m: String| XmlSyntaxError {
        position: pos,
        message: m,
    };
    let name = std::str::from_utf8(s.name().as_ref())
        .map_err(|e| err(e.to_string()))?
        .to_string();
    let mut el = Element::new(name);
    for a in s.attributes() {
        let a = a.map_err(|e| err(e.to_string()))?;
        let key = std::str::from_utf8(a.key.as_ref())
            .map_err(|e| err(e.to_string()))?
            .to_string();
        let value = a.unescape_value().map_err(|e| err(e.to_string()))?.into_owned();
        el.attrs.push((key, value));
    }
    Ok(el)
}

/// Parses a document and returns its root element. Whitespace-only text
/// between elements is dropped; comments and processing instructions are ignored.
pub fn parse_document(xml: &str) -> Result<Element, XmlSyntaxError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().check_end_names = true;
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let pos = reader.buffer_position() as usize;
        let ev = reader.read_event().map_err(|e| XmlSyntaxError {
            position: reader.error_position() as usize,
            message: e.to_string(),
        })?;
        let misplaced = |what: &str| XmlSyntaxError {
            position: pos,
            message: format!("{what} outside the root element"),
        };
        match ev {
            Event::Start(s) => {
                if root.is_some() {
                    return Err(misplaced("element"));
                }
                stack.push(start_element(&s, pos)?);
            }
            Event::Empty(s) => {
                let el = start_element(&s, pos)?;
                match stack.last_mut() {
                    Some(parent) => parent.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(misplaced("element")),
                }
            }
            Event::End(_) => {
                let el = stack.pop().expect("reader checks nesting");
                match stack.last_mut() {
                    Some(parent) => parent.push(el),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| XmlSyntaxError {
                    position: pos,
                    message: e.to_string(),
                })?;
                match stack.last_mut() {
                    Some(parent) => {
                        if !text.trim().is_empty() {
                            parent.children.push(XmlNode::Text(text.into_owned()));
                        }
                    }
                    None if text.trim().is_empty() => {}
                    None => return Err(misplaced("text")),
                }
            }
            Event::CData(c) => {
                let text = String::from_utf8(c.into_inner().into_owned()).map_err(|e| XmlSyntaxError {
                    position: pos,
                    message: e.to_string(),
                })?;
                match stack.last_mut() {
                    // Rejoin sections split around "]]>".
                    Some(parent) => match parent.children.last_mut() {
                        Some(XmlNode::CData(prev)) => prev.push_str(&text),
                        _ => parent.children.push(XmlNode::CData(text)),
                    },
                    None => return Err(misplaced("CDATA")),
                }
            }
            Event::Eof => break,
            Event::Decl(_) | Event::PI(_) | Event::Comment(_) | Event::DocType(_) => {}
        }
    }
    if !stack.is_empty() {
        return Err(XmlSyntaxError {
            position: xml.len(),
            message: format!("unclosed element <{}>", stack.last().map_or("", |e| e.name.as_str())),
        });
    }
    root.ok_or(XmlSyntaxError {
        position: 0,
        message: "no root element".into(),
    })
}

pub fn escape_text(s: &str) -> String {
    quick_xml::escape::escape(s).into_owned()
}

/// Writes `root` with two-space indentation. Elements holding text or CDATA
/// are written on one line so content is preserved exactly.
pub fn write_document(root: &Element) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
    write_element(&mut out, root, 0);
    out
}

fn write_element(out: &mut String, e: &Element, level: usize) {
    let pad = "  ".repeat(level);
    let _ = write!(out, "{pad}<{}", e.name);
    for (k, v) in &e.attrs {
        let _ = write!(out, " {k}=\"{}\"", escape_text(v));
    }
    if e.children.is_empty() {
        out.push_str("/>\n");
        return;
    }
    let inline = e.children.iter().any(|c| !matches!(c, XmlNode::Element(_)));
    if inline {
        out.push('>');
        for c in &e.children {
            write_inline(out, c);
        }
        let _ = writeln!(out, "</{}>", e.name);
        return;
    }
    out.push_str(">\n");
    for c in &e.children {
        if let XmlNode::Element(child) = c {
            write_element(out, child, level + 1);
        }
    }
    let _ = writeln!(out, "{pad}</{}>", e.name);
}

fn write_inline(out: &mut String, node: &XmlNode) {
    match node {
        XmlNode::Text(t) => out.push_str(&escape_text(t)),
        XmlNode::CData(t) => {
            // "]]>" cannot appear inside one CDATA section; split it across two.
            out.push_str("<![CDATA[");
            out.push_str(&t.replace("]]>", "]]]]><![CDATA[>"));
            out.push_str("]]>");
        }
        XmlNode::Element(e) => {
            let _ = write!(out, "<{}", e.name);
            for (k, v) in &e.attrs {
                let _ = write!(out, " {k}=\"{}\"", escape_text(v));
            }
            if e.children.is_empty() {
                out.push_str("/>");
            } else {
                out.push('>');
                for c in &e.children {
                    write_inline(out, c);
                }
                let _ = write!(out, "</{}>", e.name);
            }
        }
    }
}
