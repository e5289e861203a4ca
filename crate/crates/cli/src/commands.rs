//! One function per subcommand. Each returns a run report; failures of
//! individual records go into the report instead of stopping the run.

use std::path::Path;

use derivkit::expr::SymbolTable;
use derivkit::gen::{generate_dataset, GenConfig};
use derivkit::metrics::{features_csv, score, ExternalScore, MetricConfig, PredictionRecord};
use derivkit::ops::{check_dag_coherent, replay};
use derivkit::perturb::{perturb_records, PerturbError, PerturbSettings};
use derivkit::prompt::{build_fewshot, prompt_for_record, PromptRecord};
use derivkit::record::{DerivationRecord, PerturbationKind, SCHEMA_VERSION};
use derivkit::stats::summarize_records;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{
    Args, Command, GenerateArgs, Mode, PerturbArgs, PromptArgs, QueryArgs, ScoreArgs, StatsArgs, VerifyArgs,
};
use crate::client::{Client, EndpointConfig};
use crate::config::{load_gen_config, load_pool, load_table, load_toml};
use crate::error::{CliError, RunReport};
use crate::io::{read_jsonl, to_json, write_jsonl, write_text};

/// Run a parsed command line and deliver its report. Returns the exit code.
pub fn run(args: &Args) -> Result<u8, CliError> {
    let report = match &args.command {
        Command::Generate(a) => generate(a)?,
        Command::Perturb(a) => perturb(a)?,
        Command::Prompt(a) => prompt(a)?,
        Command::Score(a) => score_cmd(a)?,
        Command::Stats(a) => stats(a)?,
        Command::Verify(a) => verify(a)?,
        Command::Query(a) => query(a)?,
    };
    let text = to_json(&report);
    match &args.report {
        Some(p) => write_text(p, &text)?,
        None => eprint!("{text}"),
    }
    Ok(report.exit_code())
}

/// Parsed records of `path`; unparsable lines are reported.
fn read_records<T: serde::de::DeserializeOwned>(path: &Path, report: &mut RunReport) -> Result<Vec<T>, CliError> {
    let lines = read_jsonl::<T>(path)?;
    report.read = lines.len();
    let mut out = Vec::with_capacity(lines.len());
    for l in lines {
        match l.value {
            Ok(v) => out.push(v),
            Err(e) => report.error(Some(l.line), None, "parse", e),
        }
    }
    Ok(out)
}

/// Generation settings and symbol table shared by the record commands.
fn setup(config: Option<&Path>, pool: Option<&Path>) -> Result<(GenConfig, SymbolTable), CliError> {
    let cfg = load_gen_config(config)?;
    let pool = pool.map(|p| load_pool(Some(p))).transpose()?;
    let table = load_table(&cfg, pool.as_ref())?;
    Ok((cfg, table))
}

pub fn generate(a: &GenerateArgs) -> Result<RunReport, CliError> {
    let mut cfg = load_gen_config(a.config.as_deref())?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let table = load_table(&cfg, None)?;
    let out = generate_dataset(&cfg, &table, a.count as usize).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut report = RunReport::new("generate");
    report.written = write_jsonl(&a.out, &out.records)?;
    for &id in &out.shortfall.missing {
        report.error(None, Some(id), "shortfall", "no record passed the filters within the attempt budget");
    }
    report.shortfall = Some(out.shortfall);
    Ok(report)
}

/// Filter outcomes that drop a record on purpose.
fn skip_reason(e: &PerturbError) -> Option<&'static str> {
    match e {
        PerturbError::TooManySymbols { .. } => Some("too_many_symbols"),
        PerturbError::TokenLimit { .. } => Some("token_limit"),
        PerturbError::Exhausted { .. } => Some("no_alternative_goal"),
        PerturbError::TooShort => Some("too_short"),
        PerturbError::NoIntermediates => Some("no_intermediates"),
        _ => None,
    }
}

pub fn perturb(a: &PerturbArgs) -> Result<RunReport, CliError> {
    let gen = load_gen_config(a.config.as_deref())?;
    let pool = load_pool(a.pool.as_deref())?;
    let table = load_table(&gen, a.pool.as_ref().map(|_| &pool))?;
    let settings = PerturbSettings {
        gen,
        pool,
        seed: a.seed,
    };
    let mut report = RunReport::new("perturb");
    let recs: Vec<DerivationRecord> = read_records(&a.input, &mut report)?;
    let kind = PerturbationKind::from(a.kind);
    let results = perturb_records(kind, &recs, &table, &settings);
    let mut out = Vec::with_capacity(recs.len());
    for (r, res) in recs.iter().zip(results) {
        match res {
            Ok(p) => out.push(p),
            Err(e) => match skip_reason(&e) {
                Some(reason) => report.skip(reason),
                None => report.error(None, Some(r.id), "perturb", e),
            },
        }
    }
    report.written = write_jsonl(&a.out, &out)?;
    Ok(report)
}

/// Prompt records for `recs`; SR records without intermediates are skipped.
fn prompts_of(recs: &[DerivationRecord], table: &SymbolTable, report: &mut RunReport) -> Vec<PromptRecord> {
    let results: Vec<_> = recs.par_iter().map(|r| prompt_for_record(r, table)).collect();
    let mut out = Vec::with_capacity(recs.len());
    for (r, res) in recs.iter().zip(results) {
        match res {
            Ok(Some(p)) => out.push(p),
            Ok(None) => report.skip("no_intermediates"),
            Err(e) => report.error(None, Some(r.id), "prompt", e),
        }
    }
    out
}

pub fn prompt(a: &PromptArgs) -> Result<RunReport, CliError> {
    let (_, table) = setup(a.config.as_deref(), a.pool.as_deref())?;
    let mut report = RunReport::new("prompt");
    let recs: Vec<DerivationRecord> = read_records(&a.input, &mut report)?;
    let prompts = prompts_of(&recs, &table, &mut report);
    let out = match a.mode {
        Mode::Finetune => prompts,
        Mode::Fewshot => {
            let train_path = a.train.as_deref().ok_or_else(|| CliError::Usage("--train is required".into()))?;
            let mut train_report = RunReport::new("train");
            let train: Vec<DerivationRecord> = read_records(train_path, &mut train_report)?;
            let train: Vec<DerivationRecord> = train.into_iter().filter(|r| r.perturbation.is_none()).collect();
            let pool = prompts_of(&train, &table, &mut train_report);
            if !train_report.errors.is_empty() {
                return Err(CliError::config(train_path, format!("{} unusable training records", train_report.errors.len())));
            }
            let rendered: Vec<_> = prompts.par_iter().map(|p| build_fewshot(p, &pool, a.seed)).collect();
            let mut out = Vec::with_capacity(prompts.len());
            for (p, res) in prompts.into_iter().zip(rendered) {
                match res {
                    Ok(text) => out.push(PromptRecord { prompt: text, ..p }),
                    Err(e) => report.error(None, Some(p.id), "fewshot", e),
                }
            }
            out
        }
    };
    report.written = write_jsonl(&a.out, &out)?;
    Ok(report)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Reference {
    Prompt(PromptRecord),
    Derivation(DerivationRecord),
}

pub fn score_cmd(a: &ScoreArgs) -> Result<RunReport, CliError> {
    let (_, table) = setup(a.config.as_deref(), a.pool.as_deref())?;
    let mut report = RunReport::new("score");
    let refs: Vec<Reference> = read_records(&a.reference, &mut report)?;
    let mut targets = Vec::with_capacity(refs.len());
    let mut derived = Vec::new();
    for r in refs {
        match r {
            Reference::Prompt(p) => targets.push(p),
            Reference::Derivation(d) => derived.push(d),
        }
    }
    targets.extend(prompts_of(&derived, &table, &mut report));
    let mut pred_report = RunReport::new("pred");
    let preds: Vec<PredictionRecord> = read_records(&a.pred, &mut pred_report)?;
    report.read += pred_report.read;
    report.errors.extend(pred_report.errors);
    let external: Vec<ExternalScore> = match &a.bleurt {
        Some(p) => {
            let mut r = RunReport::new("bleurt");
            let v = read_records(p, &mut r)?;
            report.errors.extend(r.errors);
            v
        }
        None => Vec::new(),
    };
    let cfg = MetricConfig {
        rouge: a.rouge.into(),
        tokenizer: a.tokenizer.into(),
        ..MetricConfig::default()
    };
    let scored = score(&targets, &preds, &external, &cfg, a.pairs);
    for i in &scored.issues {
        report.error(None, Some(i.id), "score", format!("{:?}: {}", i.perturbation, i.reason));
    }
    write_text(&a.out, &to_json(&scored))?;
    report.written = scored.rows.len();
    if let Some(p) = &a.features {
        write_text(p, &features_csv(&scored))?;
    }
    Ok(report)
}

pub fn stats(a: &StatsArgs) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("stats");
    let recs: Vec<DerivationRecord> = read_records(&a.input, &mut report)?;
    let summary = summarize_records(&recs);
    let text = to_json(&summary);
    match &a.out {
        Some(p) => write_text(p, &text)?,
        None => print!("{text}"),
    }
    report.written = 1;
    Ok(report)
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    schema_version: u32,
    id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbation: Option<PerturbationKind>,
    valid: bool,
    /// Every step feeds the goal. Informational: alternative goals may
    /// leave a branch unused.
    coherent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

pub fn verify(a: &VerifyArgs) -> Result<RunReport, CliError> {
    let (_, table) = setup(a.config.as_deref(), a.pool.as_deref())?;
    let mut report = RunReport::new("verify");
    let recs: Vec<DerivationRecord> = read_records(&a.input, &mut report)?;
    let rows: Vec<VerifyRow> = recs
        .par_iter()
        .map(|r| {
            let (step, reason, coherent) = match r.to_derivation(&table) {
                Ok(d) => {
                    let coherent = check_dag_coherent(&d).is_ok();
                    match replay(&d).failure {
                        None => (None, None, coherent),
                        Some((i, why)) => (Some(i), Some(why), coherent),
                    }
                }
                Err(e) => (None, Some(e.to_string()), false),
            };
            VerifyRow {
                schema_version: SCHEMA_VERSION,
                id: r.id,
                perturbation: r.perturbation,
                valid: reason.is_none(),
                coherent,
                step,
                reason,
            }
        })
        .collect();
    for row in rows.iter().filter(|r| !r.valid) {
        let at = row.step.map(|s| format!("step {s}: ")).unwrap_or_default();
        report.error(None, Some(row.id), "invalid", format!("{at}{}", row.reason.as_deref().unwrap_or("")));
    }
    report.written = match &a.out {
        Some(p) => write_jsonl(p, &rows)?,
        None => 0,
    };
    Ok(report)
}

pub fn query(a: &QueryArgs) -> Result<RunReport, CliError> {
    let cfg: EndpointConfig = load_toml(&a.endpoint)?;
    cfg.validate().map_err(|e| CliError::config(&a.endpoint, e))?;
    let client = Client::new(cfg.clone()).map_err(|e| CliError::config(&a.endpoint, e))?;
    let mut report = RunReport::new("query");
    let prompts: Vec<PromptRecord> = read_records(&a.input, &mut report)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let results: Vec<_> = pool.install(|| prompts.par_iter().map(|p| client.complete(&p.prompt)).collect());
    let mut out = Vec::with_capacity(prompts.len());
    for (p, res) in prompts.iter().zip(results) {
        match res {
            Ok(text) => out.push(PredictionRecord {
                schema_version: SCHEMA_VERSION,
                id: p.id,
                perturbation: p.perturbation,
                prediction: text,
            }),
            Err(e) => {
                log::warn!("record {} ({:?}): {}: {e}", p.id, p.perturbation, e.kind());
                report.error(None, Some(p.id), e.kind(), e);
            }
        }
    }
    report.written = write_jsonl(&a.out, &out)?;
    Ok(report)
}
