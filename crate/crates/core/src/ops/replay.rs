use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::calculus::Scripted;
use crate::expr::{Equation, Expr};

use super::apply::{apply_to_equations, StepKey};
use super::{Derivation, OpId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub valid: bool,
    /// Index of the first offending step and what went wrong.
    pub failure: Option<(usize, String)>,
}

impl ValidityReport {
    fn ok() -> Self {
        ValidityReport {
            valid: true,
            failure: None,
        }
    }

    fn fail(i: usize, reason: impl Into<String>) -> Self {
        ValidityReport {
            valid: false,
            failure: Some((i, reason.into())),
        }
    }
}

/// Re-execute every step and compare with the recorded equation.
pub fn replay(d: &Derivation) -> ValidityReport {
    let mut used: BTreeSet<String> = BTreeSet::new();
    for (i, step) in d.steps.iter().enumerate() {
        if let Some(&p) = step.parents.iter().find(|&&p| p >= i) {
            return ValidityReport::fail(i, format!("parent {p} does not precede the step"));
        }
        if step.op == OpId::Premise {
            if !step.parents.is_empty() || step.operand.is_some() {
                return ValidityReport::fail(i, "premise with parents or operand");
            }
        } else if let Err(reason) = replay_step(d, i, &used) {
            return ValidityReport::fail(i, reason);
        }
        used.extend(step.equation.free_symbols());
        if let Some(o) = &step.operand {
            used.extend(o.free_symbols());
        }
    }
    ValidityReport::ok()
}

fn replay_step(d: &Derivation, i: usize, used: &BTreeSet<String>) -> Result<(), String> {
    let step = &d.steps[i];
    let parents: Vec<&Equation> = step.parents.iter().map(|&p| &d.steps[p].equation).collect();
    let fresh: Vec<String> = step
        .equation
        .free_symbols()
        .into_iter()
        .filter(|n| !used.contains(n))
        .collect();

    let attempts: Vec<Scripted> = match step.op {
        OpId::EvalInt => permutations(&fresh)
            .into_iter()
            .map(|p| Scripted {
                constants: p.into(),
                ..Default::default()
            })
            .collect(),
        OpId::Rename | OpId::DefineFromExpr => vec![Scripted {
            functions: fresh.clone().into(),
            ..Default::default()
        }],
        _ => vec![Scripted::default()],
    };
    let mut last_err = String::from("no attempt");
    for mut names in attempts {
        match apply_to_equations(step.op, &parents, step.operand.as_ref(), used, &mut names) {
            Ok(eq) if same_up_to_argument_order(step.op, &eq, &step.equation) => return Ok(()),
            Ok(eq) => {
                last_err = format!("replayed `{eq}` differs from recorded `{}`", step.equation);
            }
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(last_err)
}

fn same_up_to_argument_order(op: OpId, got: &Equation, want: &Equation) -> bool {
    if got == want {
        return true;
    }
    if !matches!(op, OpId::Rename | OpId::DefineFromExpr) || got.rhs != want.rhs {
        return false;
    }
    match (&got.lhs, &want.lhs) {
        (Expr::Apply(a, xs), Expr::Apply(b, ys)) => {
            let xs: BTreeSet<&Expr> = xs.iter().collect();
            let ys: BTreeSet<&Expr> = ys.iter().collect();
            a == b && xs == ys
        }
        _ => false,
    }
}

/// All orderings of `items`, capped so pathological inputs stay cheap.
fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() > 6 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    let mut cur = items.to_vec();
    permute(&mut cur, 0, &mut out);
    out
}

fn permute(v: &mut Vec<String>, k: usize, out: &mut Vec<Vec<String>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

/// Every step reaches the final step through parent links.
pub fn check_dag_coherent(d: &Derivation) -> Result<(), usize> {
    let Some(last) = d.len().checked_sub(1) else {
        return Ok(());
    };
    let mut reach = vec![false; d.len()];
    reach[last] = true;
    for i in (0..=last).rev() {
        if reach[i] {
            for &p in &d.steps[i].parents {
                if p < d.len() {
                    reach[p] = true;
                }
            }
        }
    }
    match reach.iter().position(|r| !r) {
        Some(i) => Err(i),
        None => Ok(()),
    }
}

/// First step whose equation repeats an earlier one, or whose fresh-name
/// annotation repeats an earlier one.
pub fn find_duplicate(d: &Derivation) -> Option<usize> {
    let mut seen: HashSet<&Equation> = HashSet::new();
    let mut keys: Vec<StepKey> = Vec::new();
    for (i, s) in d.steps.iter().enumerate() {
        if !seen.insert(&s.equation) {
            return Some(i);
        }
        if s.op.introduces_names() {
            let k = StepKey::of(d, s);
            if keys.contains(&k) {
                return Some(i);
            }
            keys.push(k);
        }
    }
    None
}

/// Replay plus DAG coherence, duplicate and role checks.
pub fn validate(d: &Derivation) -> ValidityReport {
    let r = replay(d);
    if !r.valid {
        return r;
    }
    if let Err(i) = check_dag_coherent(d) {
        return ValidityReport::fail(i, "step does not contribute to the goal");
    }
    if let Some(i) = find_duplicate(d) {
        return ValidityReport::fail(i, "duplicate step");
    }
    let mut expected = d.clone();
    expected.assign_roles();
    for (i, (a, b)) in d.steps.iter().zip(&expected.steps).enumerate() {
        if a.role != b.role {
            return ValidityReport::fail(i, format!("role {} should be {}", a.role.name(), b.role.name()));
        }
    }
    ValidityReport::ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Scripted;
    use crate::expr::{parse_equation, SymbolTable};
    use crate::ops::{apply, Step};

    fn eq(s: &str) -> Equation {
        parse_equation(s, &SymbolTable::default()).unwrap()
    }

    fn sample() -> Derivation {
        let mut d = Derivation::new(vec![Step::premise(eq("f{(x)} = x^{2}"))]);
        let s = apply(OpId::Diff, &d, &[0], Some(&Expr::sym("x")), &mut Scripted::default()).unwrap();
        d.steps.push(s);
        let s = apply(OpId::EvalDiff, &d, &[1], None, &mut Scripted::default()).unwrap();
        d.steps.push(s);
        d.assign_roles();
        d
    }

    #[test]
    fn constructed_derivation_is_valid() {
        let d = sample();
        assert_eq!(validate(&d), ValidityReport::ok());
        assert_eq!(d.steps[2].equation, eq("\\frac{d}{d x} f{(x)} = 2 x"));
    }

    #[test]
    fn deleted_exponent_is_caught() {
        let mut d = sample();
        d.steps[2].equation = eq("\\frac{d}{d x} f{(x)} = 2");
        let r = replay(&d);
        assert!(!r.valid);
        assert_eq!(r.failure.unwrap().0, 2);
    }

    #[test]
    fn pruning_violation_is_caught() {
        let mut d = sample();
        d.steps[2].parents = vec![0];
        d.steps[2].op = OpId::SwapSides;
        d.steps[2].equation = d.steps[0].equation.swapped();
        assert_eq!(check_dag_coherent(&d), Err(1));
    }
}
