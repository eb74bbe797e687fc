//! Incremental byte-level recognizer for canonical reduced documents.
//!
//! The recognizer is a deterministic pushdown automaton driven by the same
//! layout table the grammar export uses. Every reachable state can still be
//! completed to a full document, so a byte is rejected exactly when no
//! continuation exists.

use std::fmt;

use super::layout::{Item, DOCUMENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    ValidPrefix,
    ValidComplete,
}

/// The input cannot be extended to a canonical document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("rejected at byte {position}")]
pub struct Rejected {
    /// Offset of the first byte that has no valid continuation.
    pub position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StrState {
    Body,
    Escape,
    /// Inside `\u`: hex digits seen so far and the third digit once known.
    Unicode(u8, u8),
    /// Continuation bytes of a UTF-8 sequence: remaining count and allowed range for the next.
    Utf8 { remaining: u8, lo: u8, hi: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sub {
    Start,
    Lit(usize),
    Str(StrState),
    Word(&'static [u8], usize),
    ListOpened,
    ListInEntry,
    ListAfterEntry,
    ListComma,
    ListClosing(usize),
}

#[derive(Clone, PartialEq, Eq)]
struct Frame {
    prog: &'static [Item],
    idx: usize,
    sub: Sub,
}

/// Recognizer state. Cheap to clone, so beams can be advanced independently.
#[derive(Clone, PartialEq, Eq)]
pub struct RecognizerState {
    stack: Vec<Frame>,
    consumed: usize,
}

impl fmt::Debug for RecognizerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RecognizerState")
            .field("depth", &self.stack.len())
            .field("consumed", &self.consumed)
            .field("complete", &self.is_complete())
            .finish()
    }
}

impl Default for RecognizerState {
    fn default() -> Self {
        Self::start()
    }
}

enum Step {
    Consumed,
    /// Consumed the final byte of the current item.
    Finished,
    Reject,
}

const NULL: &[u8] = b"null";
const TRUE: &[u8] = b"true";
const FALSE: &[u8] = b"false";

impl RecognizerState {
    pub fn start() -> Self {
        RecognizerState {
            stack: vec![Frame {
                prog: DOCUMENT,
                idx: 0,
                sub: Sub::Start,
            }],
            consumed: 0,
        }
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn is_complete(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn classify(&self) -> Classification {
        if self.is_complete() {
            Classification::ValidComplete
        } else {
            Classification::ValidPrefix
        }
    }

    /// Feeds bytes, returning the advanced state. `self` is left untouched.
    pub fn feed(&self, bytes: &[u8]) -> Result<RecognizerState, Rejected> {
        let mut next = self.clone();
        for &b in bytes {
            next.feed_byte(b)?;
        }
        Ok(next)
    }

    /// Advances in place. On rejection the state is unchanged.
    pub fn feed_byte(&mut self, b: u8) -> Result<(), Rejected> {
        let mut trial = self.clone();
        if trial.step(b) {
            trial.consumed += 1;
            *self = trial;
            Ok(())
        } else {
            Err(Rejected {
                position: self.consumed,
            })
        }
    }

    /// Whether `b` may come next.
    pub fn accepts(&self, b: u8) -> bool {
        self.clone().step(b)
    }

    /// Byte-level legality mask for the next position.
    pub fn allowed_bytes(&self) -> [bool; 256] {
        let mut mask = [false; 256];
        for (b, slot) in mask.iter_mut().enumerate() {
            *slot = self.accepts(b as u8);
        }
        mask
    }

    /// Token mask: a token is allowed when all of its bytes are accepted in sequence.
    pub fn mask_tokens<T: AsRef<[u8]>>(&self, tokens: &[T]) -> Vec<bool> {
        tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                !t.is_empty() && self.feed(t).is_ok()
            })
            .collect()
    }

    fn step(&mut self, b: u8) -> bool {
        let Some(top) = self.stack.last_mut() else {
            return false;
        };
        let outcome = match &top.prog[top.idx] {
            Item::Lit(s) => step_lit(&mut top.sub, s.as_bytes(), b),
            Item::Str => step_str(&mut top.sub, b, false),
            Item::NullableStr => step_str(&mut top.sub, b, true),
            Item::Bool => step_bool(&mut top.sub, b),
            Item::List { indent, entry, .. } => match top.sub {
                Sub::Start if b == b'[' => {
                    top.sub = Sub::ListOpened;
                    Step::Consumed
                }
                Sub::ListOpened if b == b']' => Step::Finished,
                Sub::ListOpened | Sub::ListComma if b == b'\n' => {
                    top.sub = Sub::ListInEntry;
                    let entry: &'static [Item] = entry;
                    self.stack.push(Frame {
                        prog: entry,
                        idx: 0,
                        sub: Sub::Start,
                    });
                    return true;
                }
                Sub::ListAfterEntry if b == b',' => {
                    top.sub = Sub::ListComma;
                    Step::Consumed
                }
                Sub::ListAfterEntry if b == b'\n' => {
                    top.sub = Sub::ListClosing(0);
                    Step::Consumed
                }
                Sub::ListClosing(n) if n < *indent && b == b' ' => {
                    top.sub = Sub::ListClosing(n + 1);
                    Step::Consumed
                }
                Sub::ListClosing(n) if n == *indent && b == b']' => Step::Finished,
                _ => Step::Reject,
            },
        };
        match outcome {
            Step::Consumed => true,
            Step::Reject => false,
            Step::Finished => {
                self.finish_item();
                true
            }
        }
    }

    /// Moves past the finished item, collapsing completed entry frames so
    /// completion is visible right after the last byte.
    fn finish_item(&mut self) {
        let top = self.stack.last_mut().expect("active frame");
        top.idx += 1;
        top.sub = Sub::Start;
        while let Some(top) = self.stack.last() {
            if top.idx < top.prog.len() {
                break;
            }
            self.stack.pop();
            match self.stack.last_mut() {
                Some(parent) => parent.sub = Sub::ListAfterEntry,
                None => break,
            }
        }
    }
}

fn step_lit(sub: &mut Sub, lit: &[u8], b: u8) -> Step {
    let pos = match *sub {
        Sub::Start => 0,
        Sub::Lit(p) => p,
        _ => unreachable!("literal in foreign state"),
    };
    if lit[pos] != b {
        return Step::Reject;
    }
    if pos + 1 == lit.len() {
        return Step::Finished;
    }
    *sub = Sub::Lit(pos + 1);
    Step::Consumed
}

fn step_word(sub: &mut Sub, b: u8) -> Step {
    let Sub::Word(word, pos) = *sub else {
        unreachable!()
    };
    if word[pos] != b {
        return Step::Reject;
    }
    if pos + 1 == word.len() {
        return Step::Finished;
    }
    *sub = Sub::Word(word, pos + 1);
    Step::Consumed
}

fn step_bool(sub: &mut Sub, b: u8) -> Step {
    match *sub {
        Sub::Start => {
            *sub = match b {
                b't' => Sub::Word(TRUE, 1),
                b'f' => Sub::Word(FALSE, 1),
                _ => return Step::Reject,
            };
            Step::Consumed
        }
        Sub::Word(..) => step_word(sub, b),
        _ => unreachable!(),
    }
}

fn step_str(sub: &mut Sub, b: u8, nullable: bool) -> Step {
    use StrState::*;
    let state = match *sub {
        Sub::Start => {
            *sub = match b {
                b'"' => Sub::Str(Body),
                b'n' if nullable => Sub::Word(NULL, 1),
                _ => return Step::Reject,
            };
            return Step::Consumed;
        }
        Sub::Word(..) => return step_word(sub, b),
        Sub::Str(s) => s,
        _ => unreachable!(),
    };
    let next = match state {
        Body => match b {
            b'"' => return Step::Finished,
            b'\\' => Escape,
            0x00..=0x1F => return Step::Reject,
            0x20..=0x7F => Body,
            0xC2..=0xDF => Utf8 { remaining: 1, lo: 0x80, hi: 0xBF },
            0xE0 => Utf8 { remaining: 2, lo: 0xA0, hi: 0xBF },
            0xE1..=0xEC | 0xEE..=0xEF => Utf8 { remaining: 2, lo: 0x80, hi: 0xBF },
            0xED => Utf8 { remaining: 2, lo: 0x80, hi: 0x9F },
            0xF0 => Utf8 { remaining: 3, lo: 0x90, hi: 0xBF },
            0xF1..=0xF3 => Utf8 { remaining: 3, lo: 0x80, hi: 0xBF },
            0xF4 => Utf8 { remaining: 3, lo: 0x80, hi: 0x8F },
            _ => return Step::Reject,
        },
        Utf8 { remaining, lo, hi } => {
            if b < lo || b > hi {
                return Step::Reject;
            }
            if remaining == 1 {
                Body
            } else {
                Utf8 { remaining: remaining - 1, lo: 0x80, hi: 0xBF }
            }
        }
        Escape => match b {
            b'"' | b'\\' | b'b' | b'f' | b'n' | b'r' | b't' => Body,
            b'u' => Unicode(0, 0),
            _ => return Step::Reject,
        },
        // Only control characters without a short escape are written as \u00XX.
        Unicode(n @ (0 | 1), _) if b == b'0' => Unicode(n + 1, 0),
        Unicode(2, _) if b == b'0' || b == b'1' => Unicode(3, b),
        Unicode(3, b'0') if matches!(b, b'0'..=b'7' | b'b' | b'e' | b'f') => Body,
        Unicode(3, b'1') if matches!(b, b'0'..=b'9' | b'a'..=b'f') => Body,
        Unicode(..) => return Step::Reject,
    };
    *sub = Sub::Str(next);
    Step::Consumed
}

pub fn recognizer_start() -> RecognizerState {
    RecognizerState::start()
}

pub fn feed(state: &RecognizerState, bytes: &[u8]) -> Result<RecognizerState, Rejected> {
    state.feed(bytes)
}

pub fn classify(state: &RecognizerState) -> Classification {
    state.classify()
}

/// Runs the recognizer over a whole input.
pub fn recognize(input: &[u8]) -> Result<Classification, Rejected> {
    Ok(RecognizerState::start().feed(input)?.classify())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReducedSfc, StepNode, VarSection, VariableDecl};
    use crate::reduced::serialize_reduced;

    fn doc() -> String {
        let c = ReducedSfc::new("Main")
            .with_var(VarSection::Input, VariableDecl::new("x", "BOOL").with_default("TRUE"))
            .with_step(StepNode::initial("S0").with_action("y := 1;").edge("x", "S1"))
            .with_step(StepNode::new("S1").with_comment("fin \"é\"\n\u{1}").jump("NOT x", "S0"));
        serialize_reduced(&c).unwrap()
    }

    #[test]
    fn full_document_is_complete() {
        assert_eq!(recognize(doc().as_bytes()), Ok(Classification::ValidComplete));
    }

    #[test]
    fn every_prefix_is_valid() {
        let d = doc();
        let mut s = recognizer_start();
        assert_eq!(s.classify(), Classification::ValidPrefix);
        for (i, b) in d.bytes().enumerate() {
            s.feed_byte(b).unwrap_or_else(|e| panic!("byte {i}: {e}"));
            let expect = if i + 1 == d.len() {
                Classification::ValidComplete
            } else {
                Classification::ValidPrefix
            };
            assert_eq!(s.classify(), expect, "at {i}");
        }
    }

    #[test]
    fn closing_brace_first_is_rejected() {
        assert_eq!(recognize(b"}"), Err(Rejected { position: 0 }));
    }

    #[test]
    fn nothing_after_completion() {
        let mut d = doc().into_bytes();
        let n = d.len();
        d.push(b' ');
        assert_eq!(recognize(&d), Err(Rejected { position: n }));
    }

    #[test]
    fn non_canonical_whitespace_rejected() {
        let d = doc().replacen("\"pou_name\": ", "\"pou_name\":", 1);
        assert!(recognize(d.as_bytes()).is_err());
    }

    #[test]
    fn non_canonical_escapes_rejected() {
        for bad in [r#""\/""#, r#""\u0041""#, r#""\u0008""#, r#""\u00""#] {
            let d = doc().replacen(r#""Main""#, bad, 1);
            assert!(recognize(d.as_bytes()).is_err(), "{bad}");
        }
        let ok = doc().replacen(r#""Main""#, r#""\u000b\u001f""#, 1);
        assert!(recognize(ok.as_bytes()).is_ok());
    }

    #[test]
    fn invalid_utf8_rejected() {
        let mut d = doc().into_bytes();
        let pos = d.windows(4).position(|w| w == b"Main").unwrap();
        for seq in [&[0xC0u8, 0x80][..], &[0xED, 0xA0, 0x80], &[0xF5, 0x80], &[0x80]] {
            let mut m = d.clone();
            m.splice(pos..pos + 1, seq.iter().copied());
            assert_eq!(recognize(&m), Err(Rejected { position: pos + if seq[0] == 0xED { 1 } else { 0 } }));
        }
        d.splice(pos..pos + 1, "€".bytes());
        assert!(recognize(&d).is_ok());
    }

    #[test]
    fn state_is_value_like() {
        let d = doc();
        let (a, b) = d.as_bytes().split_at(40);
        let s1 = recognizer_start().feed(a).unwrap();
        let s2 = s1.clone();
        let whole = s1.feed(b).unwrap();
        assert_eq!(s2.consumed(), 40);
        assert_eq!(whole.classify(), Classification::ValidComplete);
    }

    #[test]
    fn token_mask() {
        let s = recognizer_start().feed(b"{\n  \"pou_name\": ").unwrap();
        let mask = s.mask_tokens(&["\"Ma", "null", "\"", "", " "]);
        assert_eq!(mask, vec![true, false, true, false, false]);
    }
}
