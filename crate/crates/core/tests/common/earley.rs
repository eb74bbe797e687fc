//! Generic Earley recognizer over the exported grammar, byte by byte.
//!
//! Shares nothing with the production recognizer beyond the grammar value,
//! so agreement between the two checks the automaton against its own
//! published grammar.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use sfcgen_core::reduced::{Grammar, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Sym {
    Byte(Vec<(u8, u8)>),
    Nt(usize),
}

pub struct Earley {
    rules: Vec<(usize, Vec<Sym>)>,
    by_lhs: Vec<Vec<usize>>,
    nullable: Vec<bool>,
    start: usize,
}

type Item = (usize, usize, usize); // rule, dot, origin

impl Earley {
    pub fn new(g: &Grammar) -> Self {
        let ids: HashMap<&str, usize> = g.productions.iter().enumerate().map(|(i, p)| (p.name.as_str(), i)).collect();
        let mut rules = Vec::new();
        for (lhs, p) in g.productions.iter().enumerate() {
            for alt in &p.alternatives {
                let mut rhs = Vec::new();
                for s in alt {
                    match s {
                        Symbol::Lit(text) => rhs.extend(text.bytes().map(|b| Sym::Byte(vec![(b, b)]))),
                        Symbol::Class(ranges) => rhs.push(Sym::Byte(ranges.clone())),
                        Symbol::Nt(name) => rhs.push(Sym::Nt(*ids.get(name.as_str()).unwrap_or_else(|| panic!("undefined {name}")))),
                    }
                }
                rules.push((lhs, rhs));
            }
        }
        let mut by_lhs = vec![Vec::new(); g.productions.len()];
        for (i, (lhs, _)) in rules.iter().enumerate() {
            by_lhs[*lhs].push(i);
        }
        let mut nullable = vec![false; g.productions.len()];
        loop {
            let mut changed = false;
            for (lhs, rhs) in &rules {
                if !nullable[*lhs] && rhs.iter().all(|s| matches!(s, Sym::Nt(n) if nullable[*n])) {
                    nullable[*lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Earley {
            rules,
            by_lhs,
            nullable,
            start: ids[g.start.as_str()],
        }
    }

    fn closure(&self, sets: &mut [Vec<Item>], seen: &mut [HashSet<Item>], k: usize) {
        let mut i = 0;
        while i < sets[k].len() {
            let (r, dot, origin) = sets[k][i];
            let rhs = &self.rules[r].1;
            if dot == rhs.len() {
                let lhs = self.rules[r].0;
                let waiting: Vec<Item> = sets[origin]
                    .iter()
                    .copied()
                    .filter(|&(r2, d2, _)| matches!(self.rules[r2].1.get(d2), Some(Sym::Nt(n)) if *n == lhs))
                    .collect();
                for (r2, d2, o2) in waiting {
                    let it = (r2, d2 + 1, o2);
                    if seen[k].insert(it) {
                        sets[k].push(it);
                    }
                }
            } else if let Sym::Nt(n) = rhs[dot] {
                for &r2 in &self.by_lhs[n] {
                    let it = (r2, 0, k);
                    if seen[k].insert(it) {
                        sets[k].push(it);
                    }
                }
                if self.nullable[n] {
                    let it = (r, dot + 1, origin);
                    if seen[k].insert(it) {
                        sets[k].push(it);
                    }
                }
            }
            i += 1;
        }
    }

    /// `Err(position)` of the first byte after which no item survives,
    /// otherwise whether the whole input is a sentence.
    pub fn run(&self, input: &[u8]) -> Result<bool, usize> {
        let mut sets: Vec<Vec<Item>> = vec![Vec::new(); input.len() + 1];
        let mut seen: Vec<HashSet<Item>> = vec![HashSet::new(); input.len() + 1];
        for &r in &self.by_lhs[self.start] {
            sets[0].push((r, 0, 0));
            seen[0].insert((r, 0, 0));
        }
        self.closure(&mut sets, &mut seen, 0);
        for (k, &b) in input.iter().enumerate() {
            let next: Vec<Item> = sets[k]
                .iter()
                .copied()
                .filter(|&(r, d, _)| {
                    matches!(self.rules[r].1.get(d), Some(Sym::Byte(ranges)) if ranges.iter().any(|&(lo, hi)| lo <= b && b <= hi))
                })
                .map(|(r, d, o)| (r, d + 1, o))
                .collect();
            if next.is_empty() {
                return Err(k);
            }
            for it in next {
                if seen[k + 1].insert(it) {
                    sets[k + 1].push(it);
                }
            }
            self.closure(&mut sets, &mut seen, k + 1);
        }
        let n = input.len();
        Ok(sets[n]
            .iter()
            .any(|&(r, d, o)| o == 0 && self.rules[r].0 == self.start && d == self.rules[r].1.len()))
    }
}
