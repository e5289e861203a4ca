use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::expr::{equation_to_latex, SymbolTable};
use crate::prompt::{build_prompt, record_tokens};
use crate::record::DerivationRecord;

use super::{generate_derivation, GenConfig, GenError};

/// Why records are missing from a dataset, summed over all attempts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Shortfall {
    pub requested: usize,
    pub produced: usize,
    /// Attempts that ran out of failure budget.
    pub retry_exhausted: usize,
    /// Attempts rejected by the LaTeX length filter.
    pub latex_filter: usize,
    /// Attempts rejected by the prompt token budget.
    pub token_filter: usize,
    /// Record ids that were never produced.
    pub missing: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct DatasetOutput {
    pub records: Vec<DerivationRecord>,
    pub shortfall: Shortfall,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    retry_exhausted: usize,
    latex_filter: usize,
    token_filter: usize,
}

/// RNG stream for record `index`.
pub fn record_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn attempt_record(cfg: &GenConfig, table: &SymbolTable, id: u64) -> (Option<DerivationRecord>, Tally) {
    let mut rng = record_rng(cfg.seed, id);
    let mut tally = Tally::default();
    for _ in 0..cfg.max_attempts_per_record {
        let Some(d) = generate_derivation(cfg, table, &mut rng, None) else {
            tally.retry_exhausted += 1;
            continue;
        };
        let too_long = d.steps.iter().any(|s| {
            equation_to_latex(&s.equation, table)
                .map(|l| l.chars().count() > cfg.max_latex_chars)
                .unwrap_or(true)
        });
        if too_long {
            tally.latex_filter += 1;
            continue;
        }
        match build_prompt(&d, id, table) {
            Ok(p) if record_tokens(&p) <= cfg.max_prompt_tokens => {}
            _ => {
                tally.token_filter += 1;
                continue;
            }
        }
        match DerivationRecord::from_derivation(&d, id, cfg.seed, table) {
            Ok(r) => return (Some(r), tally),
            Err(_) => tally.latex_filter += 1,
        }
    }
    (None, tally)
}

/// A single record, deterministic in `(cfg.seed, id)`.
pub fn generate_record(cfg: &GenConfig, table: &SymbolTable, id: u64) -> Option<DerivationRecord> {
    attempt_record(cfg, table, id).0
}

/// `n` records generated in parallel with one RNG stream per record id.
/// Output is ordered by id and independent of the worker count.
pub fn generate_dataset(cfg: &GenConfig, table: &SymbolTable, n: usize) -> Result<DatasetOutput, GenError> {
    if n == 0 {
        return Err(GenError::EmptyRequest);
    }
    cfg.validate()?;
    let results: Vec<(u64, Option<DerivationRecord>, Tally)> = (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let (r, t) = attempt_record(cfg, table, id);
            (id, r, t)
        })
        .collect();
    let mut shortfall = Shortfall {
        requested: n,
        ..Shortfall::default()
    };
    let mut records = Vec::with_capacity(n);
    for (id, r, t) in results {
        shortfall.retry_exhausted += t.retry_exhausted;
        shortfall.latex_filter += t.latex_filter;
        shortfall.token_filter += t.token_filter;
        match r {
            Some(r) => records.push(r),
            None => shortfall.missing.push(id),
        }
    }
    shortfall.produced = records.len();
    Ok(DatasetOutput { records, shortfall })
}
