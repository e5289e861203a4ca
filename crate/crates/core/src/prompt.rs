//! Fine-tuning prompts, targets and few-shot templates.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{equation_to_latex, RenderError, SymbolTable};
use crate::ops::{Derivation, Role};
use crate::record::{DerivationRecord, PerturbationKind, RecordError, SCHEMA_VERSION};

pub const FEWSHOT_HEADER: &str = "The following examples consist of a prompt (denoted by Prompt:) and a mathematical derivation (denoted by Derivation:). Each derivation contains LaTeX equations separated by \"and\".";
pub const FEWSHOT_INSTRUCTION: &str =
    "Now given the following prompt, generate the derivation. Ensure equations are split by the word \"and\".";
pub const FEWSHOT_EXAMPLES: usize = 5;
pub const FEWSHOT_QUALIFYING: usize = 2;

/// Separator between equations in a target.
pub const EQUATION_SEPARATOR: &str = " and ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub schema_version: u32,
    pub id: u64,
    pub static_id: u64,
    pub perturbation: Option<PerturbationKind>,
    pub prompt: String,
    pub target: String,
    pub premises: Vec<usize>,
    pub intermediates: Vec<usize>,
    pub goal: usize,
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("derivation has no goal step")]
    RoleMissing,
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("few-shot pool needs {need_total} records with {need_qualifying} qualifying, found {total} and {qualifying}")]
    InsufficientPool {
        need_total: usize,
        need_qualifying: usize,
        total: usize,
        qualifying: usize,
    },
}

/// LaTeX of every equation, in order.
pub fn equation_texts(d: &Derivation, table: &SymbolTable) -> Result<Vec<String>, RenderError> {
    d.steps.iter().map(|s| equation_to_latex(&s.equation, table)).collect()
}

/// All equations joined by `" and "`, without `$` delimiters.
pub fn build_target(d: &Derivation, table: &SymbolTable) -> Result<String, RenderError> {
    Ok(equation_texts(d, table)?.join(EQUATION_SEPARATOR))
}

/// `Given $P1$ and $P2$, then derive $I1$, then obtain $G$`.
pub fn render_prompt(premises: &[&str], intermediates: &[&str], goal: &str) -> String {
    let mut out = String::from("Given ");
    for (i, p) in premises.iter().enumerate() {
        if i > 0 {
            out.push_str(" and ");
        }
        out.push('$');
        out.push_str(p);
        out.push('$');
    }
    for m in intermediates {
        out.push_str(", then derive $");
        out.push_str(m);
        out.push('$');
    }
    out.push_str(", then obtain $");
    out.push_str(goal);
    out.push('$');
    out
}

pub fn build_prompt(d: &Derivation, id: u64, table: &SymbolTable) -> Result<PromptRecord, PromptError> {
    let goal = d.indices_with_role(Role::Goal).pop().ok_or(PromptError::RoleMissing)?;
    let premises = d.indices_with_role(Role::Premise);
    let intermediates = d.indices_with_role(Role::Intermediate);
    let texts = equation_texts(d, table)?;
    let pick = |ix: &[usize]| ix.iter().map(|&i| texts[i].as_str()).collect::<Vec<_>>();
    let prompt = render_prompt(&pick(&premises), &pick(&intermediates), &texts[goal]);
    Ok(PromptRecord {
        schema_version: SCHEMA_VERSION,
        id,
        static_id: id,
        perturbation: None,
        prompt,
        target: texts.join(EQUATION_SEPARATOR),
        premises,
        intermediates,
        goal,
    })
}

/// Prompt for a stored record, carrying its perturbation lineage. SR
/// records get their "then derive" clauses removed; `None` when such a
/// record has none.
pub fn prompt_for_record(rec: &DerivationRecord, table: &SymbolTable) -> Result<Option<PromptRecord>, PromptError> {
    let d = rec.to_derivation(table)?;
    let mut p = build_prompt(&d, rec.id, table)?;
    p.static_id = rec.static_key();
    p.perturbation = rec.perturbation;
    if rec.perturbation == Some(PerturbationKind::SR) {
        return Ok(crate::perturb::remove_steps(&p));
    }
    Ok(Some(p))
}

/// Deterministic LaTeX lexeme count: each command, letter run, digit run
/// and other non-space character is one token.
pub fn estimate_tokens(s: &str) -> usize {
    lexemes(s).len()
}

/// The lexemes counted by [`estimate_tokens`].
pub fn lexemes(s: &str) -> Vec<&str> {
    let idx: Vec<(usize, char)> = s.char_indices().collect();
    let at = |i: usize| if i < idx.len() { idx[i].0 } else { s.len() };
    let mut out = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let c = idx[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == '\\' {
            i += 1;
            if i < idx.len() && idx[i].1.is_ascii_alphabetic() {
                while i < idx.len() && idx[i].1.is_ascii_alphabetic() {
                    i += 1;
                }
            } else {
                i += 1;
            }
        } else if c.is_alphabetic() {
            while i < idx.len() && idx[i].1.is_alphabetic() {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            while i < idx.len() && idx[i].1.is_ascii_digit() {
                i += 1;
            }
        } else {
            i += 1;
        }
        out.push(&s[at(start)..at(i)]);
    }
    out
}

/// Tokens of the prompt plus its target.
pub fn record_tokens(p: &PromptRecord) -> usize {
    estimate_tokens(&p.prompt) + estimate_tokens(&p.target)
}

/// A training prompt counts towards the few-shot quota when it has an
/// intermediate step and more than one premise.
pub fn qualifies(p: &PromptRecord) -> bool {
    p.prompt.contains("then derive") && p.prompt.contains(" and $")
}

/// Few-shot rendering. Examples are drawn by an RNG keyed on
/// `(seed, p.static_id)`, so every perturbed variant of a static record sees
/// the same examples.
pub fn build_fewshot(p: &PromptRecord, pool: &[PromptRecord], seed: u64) -> Result<String, PromptError> {
    let examples = sample_examples(p.static_id, pool, seed)?;
    let mut out = String::from(FEWSHOT_HEADER);
    out.push_str("\n\n");
    for e in examples {
        out.push_str("Prompt: ");
        out.push_str(&e.prompt);
        out.push_str("\nDerivation: ");
        out.push_str(&e.target);
        out.push_str("\n\n");
    }
    out.push_str(FEWSHOT_INSTRUCTION);
    out.push_str("\n\nPrompt: ");
    out.push_str(&p.prompt);
    Ok(out)
}

/// The five example records chosen for `static_id`.
pub fn sample_examples(
    static_id: u64,
    pool: &[PromptRecord],
    seed: u64,
) -> Result<Vec<&PromptRecord>, PromptError> {
    let candidates: Vec<&PromptRecord> = pool.iter().filter(|r| r.static_id != static_id).collect();
    let qualifying: Vec<usize> = (0..candidates.len()).filter(|&i| qualifies(candidates[i])).collect();
    if candidates.len() < FEWSHOT_EXAMPLES || qualifying.len() < FEWSHOT_QUALIFYING {
        return Err(PromptError::InsufficientPool {
            need_total: FEWSHOT_EXAMPLES,
            need_qualifying: FEWSHOT_QUALIFYING,
            total: candidates.len(),
            qualifying: qualifying.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(static_id);
    let mut chosen: Vec<usize> = qualifying
        .choose_multiple(&mut rng, FEWSHOT_QUALIFYING)
        .copied()
        .collect();
    while chosen.len() < FEWSHOT_EXAMPLES {
        let i = rng.random_range(0..candidates.len());
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen.shuffle(&mut rng);
    Ok(chosen.into_iter().map(|i| candidates[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_estimate_counts_lexemes() {
        assert_eq!(estimate_tokens("\\frac{d}{d x} f{(x)}"), 14);
        assert_eq!(estimate_tokens("Given $x = 12$"), 6);
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(lexemes("\\frac{12}{x_1}"), ["\\frac", "{", "12", "}", "{", "x", "_", "1", "}"]);
    }

    #[test]
    fn prompt_layout() {
        let s = render_prompt(&["a = b", "c = d"], &["e = f"], "g = h");
        assert_eq!(s, "Given $a = b$ and $c = d$, then derive $e = f$, then obtain $g = h$");
        let s = render_prompt(&["a = b"], &[], "g = h");
        assert_eq!(s, "Given $a = b$, then obtain $g = h$");
    }
}
