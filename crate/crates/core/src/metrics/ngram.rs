use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::prompt::lexemes;

/// How texts are split into tokens before scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    #[default]
    Whitespace,
    /// LaTeX lexemes, as counted by the prompt token estimate.
    Lexeme,
}

impl Tokenizer {
    pub fn split(self, s: &str) -> Vec<&str> {
        match self {
            Tokenizer::Whitespace => s.split_whitespace().collect(),
            Tokenizer::Lexeme => lexemes(s),
        }
    }
}

fn counts<'a>(t: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut m = HashMap::new();
    if n > 0 && t.len() >= n {
        for w in t.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Clipped n-gram matches and the n-gram totals of both sides.
fn overlap(c: &[&str], r: &[&str], n: usize) -> (usize, usize, usize) {
    let cc = counts(c, n);
    let rc = counts(r, n);
    let matches = cc.iter().map(|(g, &k)| k.min(rc.get(g).copied().unwrap_or(0))).sum();
    (matches, c.len().saturating_sub(n - 1), r.len().saturating_sub(n - 1))
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// ROUGE-N F1. Empty inputs score 0; when neither side is long enough to
/// have an n-gram, identical token lists score 1.
pub fn rouge_n_tokens(c: &[&str], r: &[&str], n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be at least 1");
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let (m, tc, tr) = overlap(c, r, n);
    if tc == 0 && tr == 0 {
        return if c == r { 1.0 } else { 0.0 };
    }
    if m == 0 {
        return 0.0;
    }
    f1(m as f64 / tc as f64, m as f64 / tr as f64)
}

fn lcs(a: &[&str], b: &[&str]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F1 over the longest common subsequence.
pub fn rouge_l_tokens(c: &[&str], r: &[&str]) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs(c, r) as f64;
    f1(l / c.len() as f64, l / r.len() as f64)
}

/// BLEU with brevity penalty. Orders without a match are smoothed to
/// `1 / (total + 1)`.
pub fn bleu_tokens(c: &[&str], r: &[&str], max_n: usize) -> f64 {
    assert!(max_n >= 1, "n-gram order must be at least 1");
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let mut log_p = 0.0;
    for n in 1..=max_n {
        let (m, tc, _) = overlap(c, r, n);
        let p = if m > 0 { m as f64 / tc as f64 } else { 1.0 / (tc as f64 + 1.0) };
        log_p += p.ln() / max_n as f64;
    }
    let (lc, lr) = (c.len() as f64, r.len() as f64);
    let bp = if lc > lr { 1.0 } else { (1.0 - lr / lc).exp() };
    (bp * log_p.exp()).clamp(0.0, 1.0)
}

/// GLEU: the smaller of precision and recall over all 1..=max_n-grams.
pub fn gleu_tokens(c: &[&str], r: &[&str], max_n: usize) -> f64 {
    assert!(max_n >= 1, "n-gram order must be at least 1");
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let (mut m, mut tc, mut tr) = (0, 0, 0);
    for n in 1..=max_n {
        let (a, b, d) = overlap(c, r, n);
        m += a;
        tc += b;
        tr += d;
    }
    (m as f64 / tc as f64).min(m as f64 / tr as f64)
}

pub fn rouge(candidate: &str, reference: &str, order: usize) -> f64 {
    rouge_n_tokens(&Tokenizer::Whitespace.split(candidate), &Tokenizer::Whitespace.split(reference), order)
}

pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    rouge_l_tokens(&Tokenizer::Whitespace.split(candidate), &Tokenizer::Whitespace.split(reference))
}

pub fn bleu(candidate: &str, reference: &str, max_n: usize) -> f64 {
    bleu_tokens(&Tokenizer::Whitespace.split(candidate), &Tokenizer::Whitespace.split(reference), max_n)
}

pub fn gleu(candidate: &str, reference: &str, max_n: usize) -> f64 {
    gleu_tokens(&Tokenizer::Whitespace.split(candidate), &Tokenizer::Whitespace.split(reference), max_n)
}
