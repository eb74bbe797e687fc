//! Golden ST programs and a time-boxed fuzzer for the ST front end.

#![allow(dead_code)]

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfcgen_core::st::{parse_expression, parse_statements, print_expr, print_statements};

/// `(file name, expected to parse, source)` for every `.st` file in `dir`,
/// sorted by name. The first line is `(* expect: ok *)` or `(* expect: error *)`.
pub fn load_cases(dir: &Path) -> Vec<(String, bool, String)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "st"))
        .map(|p| {
            let src = fs::read_to_string(&p).unwrap();
            let header = src.lines().next().unwrap_or_default();
            let ok = match header {
                "(* expect: ok *)" => true,
                "(* expect: error *)" => false,
                other => panic!("{}: bad header {other:?}", p.display()),
            };
            (p.file_name().unwrap().to_string_lossy().into_owned(), ok, src)
        })
        .collect();
    out.sort();
    out
}

/// Printing a parsed program and parsing it again gives the same tree and
/// the same text.
pub fn print_fixpoint(src: &str) -> Result<(), String> {
    let mut ast = parse_statements(src).map_err(|e| e.to_string())?;
    let once = print_statements(&ast);
    let mut again = parse_statements(&once).map_err(|e| format!("re-parse failed: {e}\n{once}"))?;
    let twice = print_statements(&again);
    if once != twice {
        return Err(format!("print is not a fixpoint:\n{once}\n---\n{twice}"));
    }
    ast.erase_spans();
    again.erase_spans();
    if ast != again {
        return Err(format!("re-parsed tree differs:\n{once}"));
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct FuzzStats {
    pub cases: u64,
    pub accepted: u64,
    pub slowest: Duration,
    pub failures: Vec<String>,
}

const WORDS: &[&str] = &[
    "IF", "THEN", "ELSIF", "ELSE", "END_IF", "CASE", "OF", "END_CASE", "FOR", "TO", "BY", "DO", "END_FOR", "WHILE",
    "END_WHILE", "REPEAT", "UNTIL", "END_REPEAT", "EXIT", "RETURN", "AND", "OR", "XOR", "NOT", "MOD", "TRUE",
    "FALSE", ":=", ";", ":", ",", "(", ")", "[", "]", "+", "-", "*", "/", "**", "=", "<>", "<", "<=", ">", ">=",
    "x", "bStart", "iCount", "arr", "fb.out", "1", "0", "16#FF", "2#1010", "3.5e2", "T#5s", "'text'", "\"w\"",
    "'$'", "(*", "*)", "//", "\n", " ", "..", ".", "#", "E", "_", "é",
];

/// Case cost above which a run counts as hung.
pub const HANG: Duration = Duration::from_secs(1);

fn input(rng: &mut ChaCha8Rng, seeds: &[String]) -> String {
    match rng.gen_range(0..5) {
        0 => (0..rng.gen_range(0..64)).map(|_| char::from(rng.gen_range(0u8..128))).collect(),
        1 | 2 => (0..rng.gen_range(1..40)).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect::<Vec<_>>().join(" "),
        3 if !seeds.is_empty() => {
            let mut bytes = seeds[rng.gen_range(0..seeds.len())].clone().into_bytes();
            for _ in 0..rng.gen_range(1..6) {
                if bytes.is_empty() {
                    break;
                }
                let at = rng.gen_range(0..bytes.len());
                match rng.gen_range(0..3) {
                    0 => bytes[at] = rng.gen_range(0u8..128),
                    1 => {
                        bytes.remove(at);
                    }
                    _ => {
                        let w = WORDS[rng.gen_range(0..WORDS.len())].as_bytes();
                        bytes.splice(at..at, w.iter().copied());
                    }
                }
            }
            String::from_utf8_lossy(&bytes).into_owned()
        }
        _ => {
            // nesting well past the parser's depth limit
            let n = rng.gen_range(1..5000);
            let (open, close) = match rng.gen_range(0..3) {
                0 => ("(", ")"),
                1 => ("IF x THEN ", " END_IF;"),
                _ => ("NOT ", ""),
            };
            format!("y := {}1{};", open.repeat(n), close.repeat(n))
        }
    }
}

/// Feeds generated inputs to both entry points for `budget`. A panic, a
/// case slower than [`HANG`] or a broken print fixpoint is a failure.
pub fn fuzz(budget: Duration, seed: u64, seeds: &[String]) -> FuzzStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = FuzzStats::default();
    let start = Instant::now();
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    while start.elapsed() < budget && stats.failures.len() < 10 {
        let src = input(&mut rng, seeds);
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
            let stmt_ok = parse_statements(&src).is_ok();
            if let Ok(e) = parse_expression(&src) {
                let printed = print_expr(&e);
                let back = parse_expression(&printed).map_err(|err| format!("expression re-parse: {err}"))?;
                if print_expr(&back) != printed {
                    return Err("expression print is not a fixpoint".to_string());
                }
            }
            if stmt_ok {
                print_fixpoint(&src)?;
            }
            Ok(stmt_ok)
        }));
        let took = t.elapsed();
        stats.cases += 1;
        stats.slowest = stats.slowest.max(took);
        match outcome {
            Ok(Ok(accepted)) => stats.accepted += u64::from(accepted),
            Ok(Err(msg)) => stats.failures.push(format!("{msg}\ninput: {src:?}")),
            Err(_) => stats.failures.push(format!("panic\ninput: {src:?}")),
        }
        if took > HANG {
            stats.failures.push(format!("took {took:?}\ninput: {}", src.chars().take(200).collect::<String>()));
        }
    }
    panic::set_hook(hook);
    stats
}
