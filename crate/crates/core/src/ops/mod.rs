//! Derivation operations, annotated steps and replay.

mod apply;
mod replay;

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Equation, Expr};

pub use apply::{apply, apply_to_equations, StepKey};
pub use replay::{check_dag_coherent, find_duplicate, replay, validate, ValidityReport};

/// Operation identifiers. `Premise` annotates an initial equation and is not
/// part of the 18-operation registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpId {
    Premise,
    AddExpr,
    SubExpr,
    MulExpr,
    DivExpr,
    PowExpr,
    Diff,
    Int,
    EvalDiff,
    EvalInt,
    SubstLhs,
    SubstRhs,
    Rename,
    Negate,
    SwapSides,
    ExpBothSides,
    LogBothSides,
    AddEq,
    DefineFromExpr,
}

impl OpId {
    /// The eighteen registry operations.
    pub const ALL: [OpId; 18] = [
        OpId::AddExpr,
        OpId::SubExpr,
        OpId::MulExpr,
        OpId::DivExpr,
        OpId::PowExpr,
        OpId::Diff,
        OpId::Int,
        OpId::EvalDiff,
        OpId::EvalInt,
        OpId::SubstLhs,
        OpId::SubstRhs,
        OpId::Rename,
        OpId::Negate,
        OpId::SwapSides,
        OpId::ExpBothSides,
        OpId::LogBothSides,
        OpId::AddEq,
        OpId::DefineFromExpr,
    ];

    /// Number of parent equations consumed.
    pub fn arity(self) -> usize {
        match self {
            OpId::Premise | OpId::Rename | OpId::DefineFromExpr => 0,
            OpId::SubstLhs | OpId::SubstRhs | OpId::AddEq => 2,
            _ => 1,
        }
    }

    pub fn takes_operand(self) -> bool {
        matches!(
            self,
            OpId::AddExpr
                | OpId::SubExpr
                | OpId::MulExpr
                | OpId::DivExpr
                | OpId::PowExpr
                | OpId::Diff
                | OpId::Int
                | OpId::Rename
                | OpId::DefineFromExpr
        )
    }

    /// Operations not named by the original operation set.
    pub fn is_extension(self) -> bool {
        matches!(
            self,
            OpId::Negate
                | OpId::SwapSides
                | OpId::ExpBothSides
                | OpId::LogBothSides
                | OpId::AddEq
                | OpId::DefineFromExpr
        )
    }

    /// Ops that introduce fresh names; their results are deduplicated by
    /// annotation rather than by equation.
    pub fn introduces_names(self) -> bool {
        matches!(self, OpId::EvalInt | OpId::Rename | OpId::DefineFromExpr)
    }

    /// Short display symbol used in statistics tables.
    pub fn symbol(self) -> &'static str {
        match self {
            OpId::Premise => "P",
            OpId::AddExpr => "+",
            OpId::SubExpr => "−",
            OpId::MulExpr => "×",
            OpId::DivExpr => "÷",
            OpId::PowExpr => "X^O",
            OpId::Diff => "∂",
            OpId::Int => "∫",
            OpId::EvalDiff => "∂_E",
            OpId::EvalInt => "∫_E",
            OpId::SubstLhs => "S_L",
            OpId::SubstRhs => "S_R",
            OpId::Rename => "R",
            OpId::Negate => "Neg",
            OpId::SwapSides => "Swap",
            OpId::ExpBothSides => "Exp",
            OpId::LogBothSides => "Log",
            OpId::AddEq => "AddEq",
            OpId::DefineFromExpr => "Def",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpId::Premise => "premise",
            OpId::AddExpr => "add_expr",
            OpId::SubExpr => "sub_expr",
            OpId::MulExpr => "mul_expr",
            OpId::DivExpr => "div_expr",
            OpId::PowExpr => "pow_expr",
            OpId::Diff => "diff",
            OpId::Int => "int",
            OpId::EvalDiff => "eval_diff",
            OpId::EvalInt => "eval_int",
            OpId::SubstLhs => "subst_lhs",
            OpId::SubstRhs => "subst_rhs",
            OpId::Rename => "rename",
            OpId::Negate => "negate",
            OpId::SwapSides => "swap_sides",
            OpId::ExpBothSides => "exp_both_sides",
            OpId::LogBothSides => "log_both_sides",
            OpId::AddEq => "add_eq",
            OpId::DefineFromExpr => "define_from_expr",
        }
    }

    pub fn from_name(s: &str) -> Option<OpId> {
        std::iter::once(OpId::Premise)
            .chain(OpId::ALL)
            .find(|op| op.name() == s)
    }

    /// The op that undoes this one with the same operand, if any.
    pub fn inverse(self) -> Option<OpId> {
        match self {
            OpId::AddExpr => Some(OpId::SubExpr),
            OpId::SubExpr => Some(OpId::AddExpr),
            OpId::MulExpr => Some(OpId::DivExpr),
            OpId::DivExpr => Some(OpId::MulExpr),
            OpId::ExpBothSides => Some(OpId::LogBothSides),
            OpId::Negate => Some(OpId::Negate),
            OpId::SwapSides => Some(OpId::SwapSides),
            _ => None,
        }
    }
}

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Premise,
    Intermediate,
    Ordinary,
    Goal,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Premise => "premise",
            Role::Intermediate => "intermediate",
            Role::Ordinary => "ordinary",
            Role::Goal => "goal",
        }
    }

    pub fn from_name(s: &str) -> Option<Role> {
        [Role::Premise, Role::Intermediate, Role::Ordinary, Role::Goal]
            .into_iter()
            .find(|r| r.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub equation: Equation,
    pub op: OpId,
    pub parents: Vec<usize>,
    pub operand: Option<Expr>,
    pub role: Role,
}

impl Step {
    pub fn premise(equation: Equation) -> Step {
        Step {
            equation,
            op: OpId::Premise,
            parents: Vec::new(),
            operand: None,
            role: Role::Premise,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Derivation {
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn new(steps: Vec<Step>) -> Derivation {
        Derivation { steps }
    }

    /// Number of equations, `L`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn equations(&self) -> Vec<&Equation> {
        self.steps.iter().map(|s| &s.equation).collect()
    }

    /// Every symbol and function name used anywhere in the derivation.
    pub fn used_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for s in &self.steps {
            out.extend(s.equation.free_symbols());
            if let Some(o) = &s.operand {
                out.extend(o.free_symbols());
            }
        }
        out
    }

    /// Operation chain: ops of all non-premise steps in order.
    pub fn chain(&self) -> Vec<OpId> {
        self.steps
            .iter()
            .filter(|s| s.op != OpId::Premise)
            .map(|s| s.op)
            .collect()
    }

    /// Recompute roles from ops and position.
    pub fn assign_roles(&mut self) {
        let n = self.steps.len();
        for (i, s) in self.steps.iter_mut().enumerate() {
            s.role = if matches!(s.op, OpId::Premise | OpId::Rename | OpId::DefineFromExpr) {
                Role::Premise
            } else if i + 1 == n {
                Role::Goal
            } else if matches!(s.op, OpId::EvalDiff | OpId::EvalInt) {
                Role::Intermediate
            } else {
                Role::Ordinary
            };
        }
        if n > 1 {
            self.steps[n - 1].role = Role::Goal;
        }
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.role == role)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("{op} takes {expected} parent(s), got {got}")]
    ArityMismatch { op: OpId, expected: usize, got: usize },
    #[error("{0} requires an operand")]
    OperandRequired(OpId),
    #[error("{0} takes no operand")]
    UnexpectedOperand(OpId),
    #[error("parent index {0} out of range")]
    ParentOutOfRange(usize),
    #[error("{op} is inapplicable: {reason}")]
    Inapplicable { op: OpId, reason: &'static str },
}

/// Recency weights `p_history^(-k/n)` for `n` items, oldest first, where `k`
/// is the distance from the newest item.
pub fn recency_weights(n: usize, p_history: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|i| {
            let k = (n - 1 - i) as f64;
            if p_history.is_infinite() {
                if k == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                p_history.powf(-k / n as f64)
            }
        })
        .collect()
}

/// Index drawn with probability proportional to `weights`.
pub fn weighted_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 || !total.is_finite() {
        return None;
    }
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return Some(i);
        }
        x -= w;
    }
    weights.iter().rposition(|w| *w > 0.0)
}

/// Pick a step index with recency bias.
pub fn sample_step<R: Rng + ?Sized>(d: &Derivation, rng: &mut R, p_history: f64) -> Option<usize> {
    weighted_index(rng, &recency_weights(d.len(), p_history))
}

/// A symbol or sub-expression of a recency-weighted step.
pub fn sample_operand<R: Rng + ?Sized>(d: &Derivation, rng: &mut R, p_history: f64) -> Option<Expr> {
    let i = sample_step(d, rng, p_history)?;
    let subs = d.steps[i].equation.subexpressions();
    if subs.is_empty() {
        return None;
    }
    Some(subs[rng.random_range(0..subs.len())].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_eighteen_ops() {
        assert_eq!(OpId::ALL.len(), 18);
        assert_eq!(OpId::ALL.iter().filter(|o| o.is_extension()).count(), 6);
        for op in OpId::ALL {
            assert_eq!(OpId::from_name(op.name()), Some(op));
        }
    }

    #[test]
    fn recency_weights_shape() {
        let w = recency_weights(4, 10.0);
        assert!((w[3] - 1.0).abs() < 1e-12);
        assert!((w[0] - 10f64.powf(-0.75)).abs() < 1e-12);
        assert!(w.windows(2).all(|p| p[0] < p[1]));
        let inf = recency_weights(3, f64::INFINITY);
        assert_eq!(inf, vec![0.0, 0.0, 1.0]);
    }
}
