//! Derivation generation: premises, stochastic steps, DAG extraction and
//! dataset-scale generation with length and size filters.

mod config;
mod dataset;
mod premise;

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::calculus::{evaluate_derivatives, FreshNames};
use crate::expr::{equation_to_latex, Equation, Expr, SymbolKind, SymbolTable};
use crate::ops::{apply, recency_weights, sample_step, weighted_index, Derivation, OpId, Step, StepKey};

pub use config::{FailureMode, GenConfig, GenError};

pub use dataset::{generate_dataset, generate_record, record_rng, DatasetOutput, Shortfall};
pub use premise::{extend_body, generate_body, generate_premise, random_expr};

/// Fresh names drawn uniformly from the unused part of the vocabulary.
pub struct RngNames<'a, R: Rng + ?Sized> {
    pub table: &'a SymbolTable,
    pub rng: &'a mut R,
}

impl<R: Rng + ?Sized> RngNames<'_, R> {
    fn pick(&mut self, kinds: &[SymbolKind], used: &BTreeSet<String>) -> Option<String> {
        for &k in kinds {
            let pool = self.table.unused(k, used);
            if !pool.is_empty() {
                let i = self.rng.random_range(0..pool.len());
                return Some(pool[i].clone());
            }
        }
        None
    }
}

impl<R: Rng + ?Sized> FreshNames for RngNames<'_, R> {
    fn fresh_constant(&mut self, used: &BTreeSet<String>) -> Option<String> {
        self.pick(&[SymbolKind::Constant, SymbolKind::Variable], used)
    }

    fn fresh_function(&mut self, used: &BTreeSet<String>) -> Option<String> {
        self.pick(&[SymbolKind::FunctionName], used)
    }
}

/// Derivation length drawn from a Gaussian truncated to
/// `[length_min, length_max]`.
pub fn sample_length<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> usize {
    let normal = Normal::new(cfg.length_mean, cfg.length_sigma.max(f64::MIN_POSITIVE))
        .expect("finite length parameters");
    loop {
        let x = normal.sample(rng).round();
        if x >= cfg.length_min as f64 && x <= cfg.length_max as f64 {
            return x as usize;
        }
    }
}

fn has_concrete_integral(e: &Expr) -> bool {
    let mut found = false;
    e.walk(&mut |n| {
        if let Expr::Integral(b, _) = n {
            if !b.has_applied_function() && !b.has_calculus_nodes() {
                found = true;
            }
        }
    });
    found
}

/// Relative weight of each op for a unary step on `eq`. Evaluation is gated
/// on the presence of something to evaluate; otherwise the step chooses
/// between calculus and algebra.
fn unary_weights(eq: &Equation, cfg: &GenConfig) -> Vec<(OpId, f64)> {
    let eval_diff = evaluate_derivatives(eq).is_ok();
    let eval_int = has_concrete_integral(&eq.lhs) || has_concrete_integral(&eq.rhs);
    let mut out = Vec::new();
    if eval_diff || eval_int {
        let k = (eval_diff as u8 + eval_int as u8) as f64;
        if eval_diff {
            out.push((OpId::EvalDiff, cfg.p_evaluate / k));
        }
        if eval_int {
            out.push((OpId::EvalInt, cfg.p_evaluate / k));
        }
        for (op, w) in non_evaluating(cfg) {
            out.push((op, w));
        }
    } else {
        out = non_evaluating(cfg);
    }
    out
}

/// Calculus and algebra ops normalized to a combined weight of one, so
/// that evaluation dominates whenever it is possible.
fn non_evaluating(cfg: &GenConfig) -> Vec<(OpId, f64)> {
    let arith = [OpId::AddExpr, OpId::SubExpr, OpId::MulExpr, OpId::DivExpr, OpId::PowExpr];
    let ext = [OpId::Negate, OpId::SwapSides, OpId::ExpBothSides, OpId::LogBothSides];
    let ext_w = if cfg.extensions { cfg.p_extension } else { 0.0 };
    let alg_total = arith.len() as f64 * cfg.p_arith + ext.len() as f64 * ext_w;
    let gate_total = cfg.p_int_or_diff + cfg.p_algebra;
    let mut out = Vec::new();
    if gate_total <= 0.0 {
        return out;
    }
    let calc_share = cfg.p_int_or_diff / gate_total;
    let diff_share = if cfg.p_diff_vs_int.is_finite() {
        cfg.p_diff_vs_int / (cfg.p_diff_vs_int + 1.0)
    } else {
        1.0
    };
    out.push((OpId::Diff, calc_share * diff_share));
    out.push((OpId::Int, calc_share * (1.0 - diff_share)));
    if alg_total > 0.0 {
        let alg_share = cfg.p_algebra / gate_total;
        for op in arith {
            out.push((op, alg_share * cfg.p_arith / alg_total));
        }
        for op in ext {
            out.push((op, alg_share * ext_w / alg_total));
        }
    }
    out
}

fn nullary_weights(cfg: &GenConfig) -> Vec<(OpId, f64)> {
    let def = if cfg.extensions { cfg.p_define } else { 0.0 };
    vec![(OpId::Rename, cfg.p_renaming), (OpId::DefineFromExpr, def)]
}

fn binary_weights(cfg: &GenConfig) -> Vec<(OpId, f64)> {
    let add = if cfg.extensions { cfg.p_extension } else { 0.0 };
    vec![(OpId::SubstLhs, cfg.p_subs), (OpId::SubstRhs, cfg.p_subs), (OpId::AddEq, add)]
}

fn choose<R: Rng + ?Sized>(rng: &mut R, table: &[(OpId, f64)]) -> Option<OpId> {
    let w: Vec<f64> = table.iter().map(|(_, w)| *w).collect();
    weighted_index(rng, &w).map(|i| table[i].0)
}

/// Anchor for a step: its (target) parent and optionally a forced rule
/// parent, which makes the step binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Focus {
    pub target: usize,
    pub rule: Option<usize>,
}

/// Draw an op, its parents and operand. With a focus, the step is a unary
/// or binary op anchored there. `None` when nothing could be drawn.
fn draw<R: Rng + ?Sized>(
    d: &Derivation,
    cfg: &GenConfig,
    table: &SymbolTable,
    rng: &mut R,
    focus: Option<Focus>,
) -> Option<(OpId, Vec<usize>, Option<Expr>)> {
    let arity = if focus.is_some_and(|f| f.rule.is_some()) {
        2
    } else if focus.is_some() {
        1 + weighted_index(rng, &[cfg.p_arity_1, cfg.p_arity_2])?
    } else if rng.random::<f64>() < cfg.p_premise_injection {
        0
    } else {
        weighted_index(rng, &[cfg.p_arity_0, cfg.p_arity_1, cfg.p_arity_2])?
    };
    match arity {
        0 => {
            let op = choose(rng, &nullary_weights(cfg))?;
            let operand = match op {
                OpId::Rename => {
                    let i = sample_step(d, rng, cfg.p_history)?;
                    let subs: Vec<Expr> = d.steps[i]
                        .equation
                        .subexpressions()
                        .into_iter()
                        .filter(|e| !e.is_atom() && !e.free_variables().is_empty())
                        .collect();
                    if subs.is_empty() {
                        return None;
                    }
                    subs[rng.random_range(0..subs.len())].clone()
                }
                _ => {
                    let i = sample_step(d, rng, cfg.p_history)?;
                    let eq = &d.steps[i].equation;
                    let subs: Vec<Expr> = if rng.random::<f64>() < 0.7 {
                        vec![eq.lhs.clone(), eq.rhs.clone()]
                    } else {
                        eq.subexpressions()
                    };
                    let subs: Vec<Expr> = subs
                        .into_iter()
                        .filter(|e| !e.is_atom() && !e.has_calculus_nodes())
                        .collect();
                    if subs.is_empty() {
                        return None;
                    }
                    let base = subs[rng.random_range(0..subs.len())].clone();
                    let used = d.used_names();
                    let fresh = table.unused(SymbolKind::Variable, &used);
                    let var = if !fresh.is_empty() && rng.random::<f64>() < 0.5 {
                        fresh[rng.random_range(0..fresh.len())].clone()
                    } else {
                        let vars: Vec<String> = base.free_variables().into_iter().collect();
                        if vars.is_empty() {
                            return None;
                        }
                        vars[rng.random_range(0..vars.len())].clone()
                    };
                    extend_body(base, &var, rng)
                }
            };
            Some((op, vec![], Some(operand)))
        }
        1 => {
            let i = match focus {
                Some(f) => f.target,
                None => sample_step(d, rng, cfg.p_history)?,
            };
            let eq = &d.steps[i].equation;
            let op = choose(rng, &unary_weights(eq, cfg))?;
            let operand = match op {
                OpId::Diff | OpId::Int => {
                    let vars: Vec<String> = eq.free_variables().into_iter().collect();
                    if vars.is_empty() {
                        return None;
                    }
                    Some(Expr::Symbol(vars[rng.random_range(0..vars.len())].clone()))
                }
                OpId::PowExpr => {
                    if rng.random::<f64>() < 0.5 {
                        Some(Expr::int(2))
                    } else {
                        let j = sample_step(d, rng, cfg.p_history)?;
                        let vars: Vec<String> = d.steps[j].equation.free_variables().into_iter().collect();
                        if vars.is_empty() {
                            return None;
                        }
                        Some(Expr::Symbol(vars[rng.random_range(0..vars.len())].clone()))
                    }
                }
                op if op.takes_operand() => Some(sample_operand_expr(d, cfg, rng)?),
                _ => None,
            };
            Some((op, vec![i], operand))
        }
        _ => {
            if d.len() < 2 {
                return None;
            }
            let op = choose(rng, &binary_weights(cfg))?;
            let target = match focus {
                Some(f) => f.target,
                None => sample_step(d, rng, cfg.p_history)?,
            };
            let rule = match focus.and_then(|f| f.rule) {
                Some(r) if r != target => r,
                Some(_) => return None,
                None => {
                    let mut w = recency_weights(d.len(), cfg.p_history);
                    w[target] = 0.0;
                    weighted_index(rng, &w)?
                }
            };
            let parents = if op == OpId::AddEq {
                vec![target.min(rule), target.max(rule)]
            } else {
                vec![rule, target]
            };
            Some((op, parents, None))
        }
    }
}

/// Operand for the arithmetic ops: a recency-weighted subexpression that
/// is not a bare number zero and contains no calculus nodes.
fn sample_operand_expr<R: Rng + ?Sized>(d: &Derivation, cfg: &GenConfig, rng: &mut R) -> Option<Expr> {
    let i = sample_step(d, rng, cfg.p_history)?;
    let subs: Vec<Expr> = d.steps[i]
        .equation
        .subexpressions()
        .into_iter()
        .filter(|e| !e.has_calculus_nodes() && !e.is_zero())
        .collect();
    if subs.is_empty() {
        return None;
    }
    Some(subs[rng.random_range(0..subs.len())].clone())
}

/// One stochastic step. `None` when the drawn op is inapplicable, the
/// result exceeds the LaTeX length limit, or it duplicates an earlier
/// equation or name-introducing annotation.
pub fn step<R: Rng + ?Sized>(d: &Derivation, cfg: &GenConfig, table: &SymbolTable, rng: &mut R) -> Option<Step> {
    step_from(d, cfg, table, rng, None)
}

/// [`step`] anchored on `focus` when given.
pub fn step_from<R: Rng + ?Sized>(
    d: &Derivation,
    cfg: &GenConfig,
    table: &SymbolTable,
    rng: &mut R,
    focus: Option<Focus>,
) -> Option<Step> {
    let out_of_range = |f: Focus| f.target >= d.len() || f.rule.is_some_and(|r| r >= d.len());
    if d.is_empty() || focus.is_some_and(out_of_range) {
        return None;
    }
    let (op, parents, operand) = draw(d, cfg, table, rng, focus)?;
    let mut names = RngNames { table, rng };
    let s = apply(op, d, &parents, operand.as_ref(), &mut names).ok()?;
    if d.steps.iter().any(|p| p.equation == s.equation) {
        return None;
    }
    if op.introduces_names() {
        let key = StepKey::of(d, &s);
        if d.steps.iter().any(|p| p.op == op && StepKey::of(d, p) == key) {
            return None;
        }
    }
    let latex = equation_to_latex(&s.equation, table).ok()?;
    if latex.chars().count() > cfg.max_latex_chars {
        return None;
    }
    Some(s)
}

/// Keep only the last step and its ancestors, in original order, with
/// parents re-indexed and roles recomputed.
pub fn extract_derivation(steps: &[Step]) -> Derivation {
    let Some(last) = steps.len().checked_sub(1) else {
        return Derivation::default();
    };
    let mut keep = vec![false; steps.len()];
    keep[last] = true;
    for i in (0..=last).rev() {
        if keep[i] {
            for &p in &steps[i].parents {
                keep[p] = true;
            }
        }
    }
    let mut new_index = vec![usize::MAX; steps.len()];
    let mut out = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        if keep[i] {
            new_index[i] = out.len();
            let mut s = s.clone();
            s.parents = s.parents.iter().map(|&p| new_index[p]).collect();
            out.push(s);
        }
    }
    let mut d = Derivation::new(out);
    d.assign_roles();
    d
}

/// Grow a derivation until the extracted part reaches a sampled length.
/// `None` once the failure budget `retry_cap` is spent.
pub fn generate_derivation<R: Rng + ?Sized>(
    cfg: &GenConfig,
    table: &SymbolTable,
    rng: &mut R,
    prior: Option<Derivation>,
) -> Option<Derivation> {
    let mut full = match prior {
        Some(d) if !d.is_empty() => d,
        _ => {
            let eq = generate_premise(table, &BTreeSet::new(), rng).ok()?;
            Derivation::new(vec![Step::premise(eq)])
        }
    };
    let target = sample_length(cfg, rng);
    let mut failures = 0usize;
    loop {
        match step(&full, cfg, table, rng) {
            Some(s) => {
                if cfg.failure_mode == FailureMode::Consecutive {
                    failures = 0;
                }
                full.steps.push(s);
                let extracted = extract_derivation(&full.steps);
                if extracted.len() >= target {
                    return Some(extracted);
                }
            }
            None => {
                failures += 1;
                if failures >= cfg.retry_cap {
                    return None;
                }
            }
        }
    }
}
