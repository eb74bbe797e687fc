//! Machine-readable grammar of the canonical reduced document.
//!
//! Built from the same layout table as the recognizer. The text form uses one
//! production per line:
//!
//! ```text
//! name ::= alt | alt
//! ```
//!
//! where an alternative is a space-separated sequence of quoted terminals
//! (`"..."` with `\n`, `\"`, `\\` escapes), byte classes (`[#x20-#x21#x23]`),
//! nonterminal names, or `""` for the empty sequence.

use std::fmt;

use super::layout::{Item, DOCUMENT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Symbol {
    /// Exact byte sequence (always ASCII here).
    Lit(String),
    /// One byte from any of the inclusive ranges.
    Class(Vec<(u8, u8)>),
    Nt(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub name: String,
    /// An empty alternative matches the empty string.
    pub alternatives: Vec<Vec<Symbol>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub start: String,
    pub productions: Vec<Production>,
}

impl Grammar {
    pub fn production(&self, name: &str) -> Option<&Production> {
        self.productions.iter().find(|p| p.name == name)
    }
}

fn lit(s: &str) -> Symbol {
    Symbol::Lit(s.to_string())
}

fn nt(s: &str) -> Symbol {
    Symbol::Nt(s.to_string())
}

fn class(ranges: &[(u8, u8)]) -> Symbol {
    Symbol::Class(ranges.to_vec())
}

struct Builder {
    productions: Vec<Production>,
}

impl Builder {
    fn add(&mut self, name: &str, alternatives: Vec<Vec<Symbol>>) {
        if self.productions.iter().all(|p| p.name != name) {
            self.productions.push(Production {
                name: name.to_string(),
                alternatives,
            });
        }
    }

    fn sequence(&mut self, items: &[Item]) -> Vec<Symbol> {
        items
            .iter()
            .map(|item| match item {
                Item::Lit(s) => lit(s),
                Item::Str => nt("string"),
                Item::NullableStr => nt("nullable_string"),
                Item::Bool => nt("bool"),
                Item::List { name, indent, entry } => {
                    self.list(name, *indent, entry);
                    nt(&format!("{name}_list"))
                }
            })
            .collect()
    }

    fn list(&mut self, name: &str, indent: usize, entry: &[Item]) {
        let list = format!("{name}_list");
        if self.productions.iter().any(|p| p.name == list) {
            return;
        }
        let items = format!("{name}_items");
        let close = format!("\n{}]", " ".repeat(indent));
        self.add(
            &list,
            vec![vec![lit("[]")], vec![lit("[\n"), nt(&items), lit(&close)]],
        );
        self.add(
            &items,
            vec![vec![nt(name)], vec![nt(name), lit(",\n"), nt(&items)]],
        );
        let body = self.sequence(entry);
        self.add(name, vec![body]);
    }
}

/// Grammar accepted by [`super::recognizer`].
pub fn grammar() -> Grammar {
    let mut b = Builder { productions: Vec::new() };
    // Reserve the start symbol's slot so it is printed first.
    b.productions.push(Production {
        name: "document".into(),
        alternatives: Vec::new(),
    });
    let body = b.sequence(DOCUMENT);
    b.productions[0].alternatives = vec![body];

    b.add("nullable_string", vec![vec![nt("string")], vec![lit("null")]]);
    b.add("bool", vec![vec![lit("true")], vec![lit("false")]]);
    b.add("string", vec![vec![lit("\""), nt("chars"), lit("\"")]]);
    b.add("chars", vec![vec![], vec![nt("char"), nt("chars")]]);
    b.add(
        "char",
        vec![
            vec![class(&[(0x20, 0x21), (0x23, 0x5B), (0x5D, 0x7F)])],
            vec![lit("\\"), nt("escape")],
            vec![nt("utf8_2")],
            vec![nt("utf8_3")],
            vec![nt("utf8_4")],
        ],
    );
    b.add(
        "escape",
        vec![
            vec![class(&[
                (b'"', b'"'),
                (b'\\', b'\\'),
                (b'b', b'b'),
                (b'f', b'f'),
                (b'n', b'n'),
                (b'r', b'r'),
                (b't', b't'),
            ])],
            // Control characters that have no short escape.
            vec![lit("u000"), class(&[(b'0', b'7'), (b'b', b'b'), (b'e', b'f')])],
            vec![lit("u001"), class(&[(b'0', b'9'), (b'a', b'f')])],
        ],
    );
    b.add("tail", vec![vec![class(&[(0x80, 0xBF)])]]);
    b.add("utf8_2", vec![vec![class(&[(0xC2, 0xDF)]), nt("tail")]]);
    b.add(
        "utf8_3",
        vec![
            vec![class(&[(0xE0, 0xE0)]), class(&[(0xA0, 0xBF)]), nt("tail")],
            vec![class(&[(0xE1, 0xEC), (0xEE, 0xEF)]), nt("tail"), nt("tail")],
            vec![class(&[(0xED, 0xED)]), class(&[(0x80, 0x9F)]), nt("tail")],
        ],
    );
    b.add(
        "utf8_4",
        vec![
            vec![class(&[(0xF0, 0xF0)]), class(&[(0x90, 0xBF)]), nt("tail"), nt("tail")],
            vec![class(&[(0xF1, 0xF3)]), nt("tail"), nt("tail"), nt("tail")],
            vec![class(&[(0xF4, 0xF4)]), class(&[(0x80, 0x8F)]), nt("tail"), nt("tail")],
        ],
    );
    Grammar {
        start: "document".into(),
        productions: b.productions,
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Lit(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '\n' => f.write_str("\\n")?,
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Symbol::Class(ranges) => {
                f.write_str("[")?;
                for &(lo, hi) in ranges {
                    if lo == hi {
                        write!(f, "#x{lo:02X}")?;
                    } else {
                        write!(f, "#x{lo:02X}-#x{hi:02X}")?;
                    }
                }
                f.write_str("]")
            }
            Symbol::Nt(n) => f.write_str(n),
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.productions {
            write!(f, "{} ::=", p.name)?;
            for (i, alt) in p.alternatives.iter().enumerate() {
                if i > 0 {
                    f.write_str(" |")?;
                }
                if alt.is_empty() {
                    f.write_str(" \"\"")?;
                }
                for sym in alt {
                    write!(f, " {sym}")?;
                }
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_nonterminal_is_defined() {
        let g = grammar();
        for p in &g.productions {
            for alt in &p.alternatives {
                for s in alt {
                    if let Symbol::Nt(n) = s {
                        assert!(g.production(n).is_some(), "undefined {n}");
                    }
                }
            }
        }
    }

    #[test]
    fn text_form() {
        let text = grammar().to_string();
        assert!(text.starts_with("document ::= \"{\\n  \\\"pou_name\\\": \" string"));
        assert!(text.contains("variable_list ::= \"[]\" | \"[\\n\" variable_items \"\\n    ]\"\n"));
        assert!(text.contains("chars ::= \"\" | char chars\n"));
        assert!(text.contains("tail ::= [#x80-#xBF]\n"));
        assert_eq!(text.lines().count(), grammar().productions.len());
    }
}
