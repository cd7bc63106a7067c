//! Shared fixtures for the CLI tests and the acceptance gate.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::Command;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hamforge")
}

pub struct Invocation {
    pub stdout: Vec<u8>,
    pub stderr: String,
    /// None when the process died from a signal.
    pub code: Option<i32>,
}

pub fn hamforge(args: &[&str]) -> Invocation {
    let out = Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs");
    Invocation {
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        code: out.status.code(),
    }
}

const TOKENS: &[&str] = &[
    "-1",
    "0",
    "3.5",
    "1e400",
    "-0.0",
    "18446744073709551616",
    "4294967296",
    "\"x\"",
    "null",
    "[]",
    "{}",
    "true",
    "\"Q\"",
    "[[1,0]]",
];

const BYTES: &[u8] = b"{}[]\":,0123456789abcdexyzXYZ-.e \n";

fn number_spans(s: &str) -> Vec<(usize, usize)> {
    let b = s.as_bytes();
    let mut out = vec![];
    let mut i = 0;
    while i < b.len() {
        if b[i].is_ascii_digit() || (b[i] == b'-' && i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
            let start = i;
            i += 1;
            while i < b.len() && (b[i].is_ascii_digit() || b"+-.eE".contains(&b[i])) {
                i += 1;
            }
            out.push((start, i));
        } else {
            i += 1;
        }
    }
    out
}

fn mutate_once(text: &str, rng: &mut ChaCha8Rng) -> String {
    let mut bytes = text.as_bytes().to_vec();
    let len = bytes.len().max(1);
    match rng.random_range(0..6) {
        0 => {
            let a = rng.random_range(0..len);
            let b = (a + rng.random_range(1..8)).min(bytes.len());
            bytes.drain(a.min(bytes.len())..b);
        }
        1 => {
            let at = rng.random_range(0..=bytes.len());
            bytes.insert(at, *BYTES.choose(rng).expect("non-empty"));
        }
        2 => {
            let spans = number_spans(text);
            if let Some(&(a, b)) = spans.choose(rng) {
                let tok = TOKENS.choose(rng).expect("non-empty");
                bytes.splice(a..b, tok.bytes());
            }
        }
        3 => bytes.truncate(rng.random_range(0..len)),
        4 => {
            let lines: Vec<&str> = text.lines().collect();
            let k = rng.random_range(0..lines.len().max(1));
            let mut out: Vec<&str> = lines.clone();
            if let Some(l) = lines.get(k) {
                out.insert(k, l);
            }
            bytes = out.join("\n").into_bytes();
        }
        _ => {
            let mut lines: Vec<&str> = text.lines().collect();
            if lines.len() > 1 {
                let a = rng.random_range(0..lines.len());
                let b = rng.random_range(0..lines.len());
                lines.swap(a, b);
            }
            bytes = lines.join("\n").into_bytes();
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

/// `count` mutants of the seed files, each with one to three edits. Deterministic in `seed`.
pub fn fuzz_corpus(seeds: &[(String, String)], count: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let (kind, text) = &seeds[i % seeds.len()];
            let mut t = text.clone();
            for _ in 0..rng.random_range(1..=3) {
                t = mutate_once(&t, &mut rng);
            }
            (kind.clone(), t)
        })
        .collect()
}
