//! Brute-force reference implementations of the n-gram metrics over small
//! alphabets, written without the windowed counting of the library.
#![allow(dead_code)]

use std::sync::OnceLock;

pub const ALPHABET: [&str; 3] = ["a", "b", "c"];

/// Every token sequence over `ALPHABET` of length exactly `len`.
pub fn sequences(len: usize) -> Vec<Vec<&'static str>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                ALPHABET.iter().map(move |t| {
                    let mut s = s.clone();
                    s.push(*t);
                    s
                })
            })
            .collect();
    }
    out
}

/// All candidate/reference pairs checked by the oracle: combined length at
/// most 8, plus both sides at most 5.
pub fn pairs() -> Vec<(Vec<&'static str>, Vec<&'static str>)> {
    let by_len: Vec<_> = (0..=8).map(sequences).collect();
    let mut out = Vec::new();
    for lc in 0..=8usize {
        for lr in 0..=8usize {
            if lc + lr <= 8 || (lc <= 5 && lr <= 5) {
                for c in &by_len[lc] {
                    for r in &by_len[lr] {
                        out.push((c.clone(), r.clone()));
                    }
                }
            }
        }
    }
    out
}

fn occurrences(s: &[&str], g: &[&str]) -> usize {
    (0..s.len()).filter(|&i| i + g.len() <= s.len() && s[i..i + g.len()] == *g).count()
}

/// (clipped matches, candidate n-grams, reference n-grams), enumerating every
/// possible n-gram.
pub fn ngram_stats(c: &[&str], r: &[&str], n: usize) -> (usize, usize, usize) {
    static GRAMS: OnceLock<Vec<Vec<Vec<&'static str>>>> = OnceLock::new();
    let grams = GRAMS.get_or_init(|| (0..=4).map(sequences).collect());
    let owned;
    let all = match grams.get(n) {
        Some(g) => g,
        None => {
            owned = sequences(n);
            &owned
        }
    };
    let m = all
        .iter()
        .map(|g| occurrences(c, g).min(occurrences(r, g)))
        .sum();
    let total = |s: &[&str]| if s.len() >= n { s.len() - n + 1 } else { 0 };
    (m, total(c), total(r))
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) }
}

pub fn rouge_n(c: &[&str], r: &[&str], n: usize) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let (m, tc, tr) = ngram_stats(c, r, n);
    if tc == 0 && tr == 0 {
        return if c == r { 1.0 } else { 0.0 };
    }
    if tc == 0 || tr == 0 {
        return 0.0;
    }
    f1(m as f64 / tc as f64, m as f64 / tr as f64)
}

fn is_subsequence(x: &[&str], y: &[&str]) -> bool {
    let mut it = y.iter();
    x.iter().all(|t| it.any(|u| u == t))
}

/// Longest common subsequence by trying every subsequence of `c`.
pub fn lcs(c: &[&str], r: &[&str]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << c.len()) {
        let sub: Vec<&str> = (0..c.len()).filter(|i| mask >> i & 1 == 1).map(|i| c[i]).collect();
        if sub.len() > best && is_subsequence(&sub, r) {
            best = sub.len();
        }
    }
    best
}

pub fn rouge_l(c: &[&str], r: &[&str]) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs(c, r) as f64;
    f1(l / c.len() as f64, l / r.len() as f64)
}

pub fn bleu(c: &[&str], r: &[&str], max_n: usize) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let mut prod = 1.0f64;
    for n in 1..=max_n {
        let (m, tc, _) = ngram_stats(c, r, n);
        let p = if m == 0 { 1.0 / (tc + 1) as f64 } else { m as f64 / tc as f64 };
        prod *= p;
    }
    let bp = if c.len() > r.len() { 1.0 } else { (1.0 - r.len() as f64 / c.len() as f64).exp() };
    bp * prod.powf(1.0 / max_n as f64)
}

pub fn gleu(c: &[&str], r: &[&str], max_n: usize) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let stats: Vec<_> = (1..=max_n).map(|n| ngram_stats(c, r, n)).collect();
    let m: usize = stats.iter().map(|s| s.0).sum();
    let tc: usize = stats.iter().map(|s| s.1).sum();
    let tr: usize = stats.iter().map(|s| s.2).sum();
    (m as f64 / tc as f64).min(m as f64 / tr as f64)
}

/// `alpha * ((1 + 1/alpha)^(w.x) - 1)`.
pub fn manual(x: [bool; 6], w: [f64; 6], alpha: f64) -> f64 {
    let wx: f64 = (0..6).filter(|&i| x[i]).map(|i| w[i]).sum();
    alpha * ((1.0 + 1.0 / alpha).powf(wx) - 1.0)
}

/// Skip is the only category in error: `0.001 * (1001^0.95 - 1)`.
pub const SKIP_ONLY: f64 = 0.707_618_316_071_472_2;
