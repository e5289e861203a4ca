//! The four test-set perturbations: variable renaming (VR), expression
//! exchange (EE), alternative goal (AG) and step removal (SR).

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{SymbolKind, SymbolTable, GREEK_POOL};
use crate::gen::{record_rng, step_from, Focus, GenConfig};
use crate::ops::{check_dag_coherent, Derivation, Role};
use crate::prompt::{build_prompt, record_tokens, render_prompt, PromptError, PromptRecord, EQUATION_SEPARATOR};
use crate::record::{DerivationRecord, PerturbationKind, RecordError};

pub const POOL_SIZE: usize = 11;

/// Out-of-distribution names used by variable renaming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreekPool {
    letters: Vec<String>,
}

impl Default for GreekPool {
    fn default() -> Self {
        GreekPool {
            letters: GREEK_POOL.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl GreekPool {
    pub fn new(letters: Vec<String>) -> Result<GreekPool, PerturbError> {
        let distinct: BTreeSet<&String> = letters.iter().collect();
        if letters.len() != POOL_SIZE || distinct.len() != POOL_SIZE {
            return Err(PerturbError::InvalidPool(format!(
                "expected {POOL_SIZE} distinct letters, got {}",
                letters.len()
            )));
        }
        if letters.iter().any(|l| l.trim().is_empty() || l.contains(char::is_whitespace)) {
            return Err(PerturbError::InvalidPool("letters must be non-empty and contain no spaces".into()));
        }
        Ok(GreekPool { letters })
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    /// Make every letter renderable in `table`. Fails when a letter is part
    /// of the sampling vocabulary.
    pub fn register(&self, table: &mut SymbolTable) -> Result<(), PerturbError> {
        for l in &self.letters {
            if table.entries().iter().any(|e| &e.name == l) {
                return Err(PerturbError::InvalidPool(format!("`{l}` is in the vocabulary")));
            }
            table.add_renderable(l, SymbolKind::Variable);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("{found} distinct symbols, but the pool has {available} letters")]
    TooManySymbols { found: usize, available: usize },
    #[error("invalid pool: {0}")]
    InvalidPool(String),
    #[error("no differing goal found in {attempts} attempts")]
    Exhausted { attempts: usize },
    #[error("derivation has fewer than two steps")]
    TooShort,
    #[error("derivation has no intermediate steps")]
    NoIntermediates,
    #[error("{tokens} tokens exceed the limit of {limit}")]
    TokenLimit { tokens: usize, limit: usize },
    #[error("record is already perturbed ({0:?})")]
    AlreadyPerturbed(PerturbationKind),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Map every symbol and function name injectively onto pool letters.
pub fn rename_variables<R: Rng + ?Sized>(
    d: &Derivation,
    pool: &GreekPool,
    rng: &mut R,
) -> Result<Derivation, PerturbError> {
    let names: Vec<String> = d.used_names().into_iter().collect();
    if names.len() > pool.letters.len() {
        return Err(PerturbError::TooManySymbols {
            found: names.len(),
            available: pool.letters.len(),
        });
    }
    let picks = sample(rng, pool.letters.len(), names.len());
    let map: BTreeMap<String, String> = names
        .into_iter()
        .zip(picks.into_iter().map(|i| pool.letters[i].clone()))
        .collect();
    let f = |s: &str| map.get(s).cloned().unwrap_or_else(|| s.to_string());
    let mut out = d.clone();
    for s in &mut out.steps {
        s.equation = s.equation.map(|e| e.rename(&f));
        s.operand = s.operand.as_ref().map(|o| o.rename(&f));
    }
    Ok(out)
}

/// Swap the sides of every equation.
pub fn exchange_expressions(d: &Derivation) -> Derivation {
    let mut out = d.clone();
    for s in &mut out.steps {
        s.equation = s.equation.swapped();
    }
    out
}

/// Replace the final step with a freshly sampled step on the penultimate
/// equation whose result differs from the old goal.
pub fn alternative_goal<R: Rng + ?Sized>(
    d: &Derivation,
    cfg: &GenConfig,
    table: &SymbolTable,
    rng: &mut R,
) -> Result<Derivation, PerturbError> {
    let n = d.len();
    if n < 2 {
        return Err(PerturbError::TooShort);
    }
    let prefix = Derivation::new(d.steps[..n - 1].to_vec());
    let old = &d.steps[n - 1].equation;
    let target = n - 2;
    // Steps the penultimate equation does not depend on must feed the new
    // goal directly; with two parents at most one such branch can be joined.
    let mut reach = vec![false; n - 1];
    reach[target] = true;
    for i in (0..=target).rev() {
        if reach[i] {
            for &p in &prefix.steps[i].parents {
                reach[p] = true;
            }
        }
    }
    let loose: Vec<usize> = (0..target).filter(|&i| !reach[i]).collect();
    let rule = loose.iter().copied().find(|&j| {
        let mut under = vec![false; n - 1];
        under[j] = true;
        for i in (0..=j).rev() {
            if under[i] {
                for &p in &prefix.steps[i].parents {
                    under[p] = true;
                }
            }
        }
        loose.iter().all(|&k| under[k])
    });
    let joined = Focus { target, rule };
    let alone = Focus { target, rule: None };
    // Evaluation usually dominates, and re-evaluating the penultimate
    // equation mostly reproduces the old goal.
    let cfg = &GenConfig {
        p_evaluate: cfg.p_evaluate.min(1.0),
        ..cfg.clone()
    };
    // The first half of the budget insists on a goal that uses every prefix
    // equation. Branches that only a join of the same two equations can
    // reach are then given up, and the goal follows the penultimate alone.
    let strict = if loose.is_empty() || rule.is_some() { cfg.retry_cap.div_ceil(2) } else { 0 };
    for attempt in 0..cfg.retry_cap {
        let focus = if attempt < strict { joined } else { alone };
        let Some(s) = step_from(&prefix, cfg, table, rng, Some(focus)) else {
            continue;
        };
        if &s.equation == old {
            continue;
        }
        let mut out = prefix.clone();
        out.steps.push(s);
        if attempt < strict && check_dag_coherent(&out).is_err() {
            continue;
        }
        out.assign_roles();
        return Ok(out);
    }
    Err(PerturbError::Exhausted { attempts: cfg.retry_cap })
}

/// Drop every "then derive" clause from the prompt. `None` when there is
/// nothing to drop.
pub fn remove_steps(p: &PromptRecord) -> Option<PromptRecord> {
    if p.intermediates.is_empty() {
        return None;
    }
    let eqs: Vec<&str> = p.target.split(EQUATION_SEPARATOR).collect();
    let premises: Option<Vec<&str>> = p.premises.iter().map(|&i| eqs.get(i).copied()).collect();
    let goal = eqs.get(p.goal)?;
    Some(PromptRecord {
        perturbation: Some(PerturbationKind::SR),
        prompt: render_prompt(&premises?, &[], goal),
        intermediates: Vec::new(),
        ..p.clone()
    })
}

/// Settings shared by record-level perturbations.
#[derive(Debug, Clone, Default)]
pub struct PerturbSettings {
    /// Supplies the AG sampling weights, `retry_cap` and the VR token limit.
    pub gen: GenConfig,
    pub pool: GreekPool,
    pub seed: u64,
}

fn salt(kind: PerturbationKind) -> u64 {
    match kind {
        PerturbationKind::VR => 0x5652,
        PerturbationKind::EE => 0x4545,
        PerturbationKind::AG => 0x4147,
        PerturbationKind::SR => 0x5352,
    }
}

/// Perturb one static record. The output keeps the record id and points
/// back to it through `static_id`. EE applied to an EE record undoes it.
///
/// SR leaves the derivation untouched; the clause removal happens when the
/// prompt is rendered (see [`crate::prompt::prompt_for_record`]).
pub fn perturb_record(
    kind: PerturbationKind,
    rec: &DerivationRecord,
    table: &SymbolTable,
    settings: &PerturbSettings,
) -> Result<DerivationRecord, PerturbError> {
    let undo = match rec.perturbation {
        None => false,
        Some(PerturbationKind::EE) if kind == PerturbationKind::EE => true,
        Some(k) => return Err(PerturbError::AlreadyPerturbed(k)),
    };
    let d = rec.to_derivation(table)?;
    let mut rng = record_rng(settings.seed ^ salt(kind), rec.static_key());
    let out = match kind {
        PerturbationKind::VR => {
            let r = rename_variables(&d, &settings.pool, &mut rng)?;
            let tokens = record_tokens(&build_prompt(&r, rec.id, table)?);
            if tokens > settings.gen.max_prompt_tokens {
                return Err(PerturbError::TokenLimit {
                    tokens,
                    limit: settings.gen.max_prompt_tokens,
                });
            }
            r
        }
        PerturbationKind::EE => exchange_expressions(&d),
        PerturbationKind::AG => alternative_goal(&d, &settings.gen, table, &mut rng)?,
        PerturbationKind::SR => {
            if d.indices_with_role(Role::Intermediate).is_empty() {
                return Err(PerturbError::NoIntermediates);
            }
            d
        }
    };
    let mut r = DerivationRecord::from_derivation(&out, rec.id, rec.seed, table)?;
    if !undo {
        r.perturbation = Some(kind);
        r.static_id = Some(rec.id);
    }
    Ok(r)
}

/// [`perturb_record`] over a batch in parallel; results keep input order.
pub fn perturb_records(
    kind: PerturbationKind,
    recs: &[DerivationRecord],
    table: &SymbolTable,
    settings: &PerturbSettings,
) -> Vec<Result<DerivationRecord, PerturbError>> {
    recs.par_iter()
        .map(|r| perturb_record(kind, r, table, settings))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Equation, Expr};
    use crate::ops::{OpId, Step};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn premise() -> Derivation {
        let eq = Equation::new(
            Expr::sym("E_n"),
            Expr::add([Expr::sym("n"), Expr::sym("x")]),
        );
        Derivation::new(vec![Step::premise(eq)])
    }

    #[test]
    fn renaming_maps_each_symbol_to_a_distinct_letter() {
        let d = premise();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = rename_variables(&d, &GreekPool::default(), &mut rng).unwrap();
        let names = r.used_names();
        assert_eq!(names.len(), 3);
        assert!(names.iter().all(|n| GREEK_POOL.contains(&n.as_str())));
        assert_eq!(r.steps[0].equation.lhs.shape(), d.steps[0].equation.lhs.shape());
        assert_eq!(r.steps[0].equation.rhs.shape(), d.steps[0].equation.rhs.shape());
    }

    #[test]
    fn numeric_derivation_is_not_renamed() {
        let d = Derivation::new(vec![Step::premise(Equation::new(Expr::int(2), Expr::int(2)))]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(rename_variables(&d, &GreekPool::default(), &mut rng).unwrap(), d);
    }

    #[test]
    fn too_many_symbols() {
        let vars: Vec<Expr> = (0..12).map(|i| Expr::sym(format!("v_{i}"))).collect();
        let d = Derivation::new(vec![Step::premise(Equation::new(Expr::sym("y"), Expr::add(vars)))]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = rename_variables(&d, &GreekPool::default(), &mut rng).unwrap_err();
        assert!(matches!(err, PerturbError::TooManySymbols { found: 13, available: 11 }));
    }

    #[test]
    fn exchange_swaps_sides() {
        let d = premise();
        let e = exchange_expressions(&d);
        assert_eq!(e.steps[0].equation.lhs, d.steps[0].equation.rhs);
        assert_eq!(exchange_expressions(&e), d);
    }

    #[test]
    fn pool_must_have_eleven_letters() {
        assert!(GreekPool::new(vec!["\\alpha".into(); 11]).is_err());
        assert!(GreekPool::new(vec!["\\alpha".into()]).is_err());
        assert!(GreekPool::new(GREEK_POOL.iter().map(|s| s.to_string()).collect()).is_ok());
    }

    #[test]
    fn step_removal_drops_intermediates() {
        let p = PromptRecord {
            schema_version: 1,
            id: 3,
            static_id: 3,
            perturbation: None,
            prompt: render_prompt(&["a = b"], &["c = d"], "e = f"),
            target: "a = b and c = d and e = f".into(),
            premises: vec![0],
            intermediates: vec![1],
            goal: 2,
        };
        let r = remove_steps(&p).unwrap();
        assert_eq!(r.prompt, "Given $a = b$, then obtain $e = f$");
        assert_eq!(r.target, p.target);
        assert_eq!(r.perturbation, Some(PerturbationKind::SR));
        let bare = PromptRecord {
            intermediates: vec![],
            ..p
        };
        assert!(remove_steps(&bare).is_none());
    }

    #[test]
    fn alternative_goal_on_single_step_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = alternative_goal(&premise(), &GenConfig::default(), &SymbolTable::default(), &mut rng);
        assert!(matches!(r, Err(PerturbError::TooShort)));
    }

    #[test]
    fn alternative_goal_keeps_prefix() {
        let table = SymbolTable::default();
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut done = 0;
        while done < 10 {
            let Some(d) = crate::gen::generate_derivation(&cfg, &table, &mut rng, None) else {
                continue;
            };
            let Ok(a) = alternative_goal(&d, &cfg, &table, &mut rng) else {
                continue;
            };
            let n = d.len();
            assert_eq!(a.steps[..n - 1], d.steps[..n - 1]);
            assert_ne!(a.steps[n - 1].equation, d.steps[n - 1].equation);
            assert_ne!(a.steps[n - 1].op, OpId::Premise);
            assert!(crate::ops::replay(&a).valid);
            done += 1;
        }
    }
}
