use std::collections::BTreeSet;

use crate::calculus::{evaluate_derivatives, evaluate_integrals, FreshNames};
use crate::expr::{Equation, Expr};

use super::{Derivation, OpError, OpId, Role, Step};

/// Annotation identity of a step: op, parent equations and operand.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StepKey {
    pub op: OpId,
    pub parents: Vec<Equation>,
    pub operand: Option<Expr>,
}

impl StepKey {
    pub fn of(d: &Derivation, step: &Step) -> StepKey {
        StepKey {
            op: step.op,
            parents: step.parents.iter().map(|&p| d.steps[p].equation.clone()).collect(),
            operand: step.operand.clone(),
        }
    }
}

/// Apply `op` to steps of `d`. The returned step has role `Ordinary` (or
/// `Premise`/`Intermediate` by op); callers recompute roles after
/// extraction.
pub fn apply(
    op: OpId,
    d: &Derivation,
    parents: &[usize],
    operand: Option<&Expr>,
    names: &mut dyn FreshNames,
) -> Result<Step, OpError> {
    for &p in parents {
        if p >= d.len() {
            return Err(OpError::ParentOutOfRange(p));
        }
    }
    let eqs: Vec<&Equation> = parents.iter().map(|&p| &d.steps[p].equation).collect();
    let used = d.used_names();
    let equation = apply_to_equations(op, &eqs, operand, &used, names)?;
    let role = match op {
        OpId::Premise | OpId::Rename | OpId::DefineFromExpr => Role::Premise,
        OpId::EvalDiff | OpId::EvalInt => Role::Intermediate,
        _ => Role::Ordinary,
    };
    Ok(Step {
        equation,
        op,
        parents: parents.to_vec(),
        operand: operand.cloned(),
        role,
    })
}

fn inapplicable(op: OpId, reason: &'static str) -> OpError {
    OpError::Inapplicable { op, reason }
}

/// Core of [`apply`] over bare equations. `used` lists names that fresh
/// names must avoid.
pub fn apply_to_equations(
    op: OpId,
    parents: &[&Equation],
    operand: Option<&Expr>,
    used: &BTreeSet<String>,
    names: &mut dyn FreshNames,
) -> Result<Equation, OpError> {
    if op == OpId::Premise {
        return Err(inapplicable(op, "premises are not derived"));
    }
    if parents.len() != op.arity() {
        return Err(OpError::ArityMismatch {
            op,
            expected: op.arity(),
            got: parents.len(),
        });
    }
    let o = match (op.takes_operand(), operand) {
        (true, Some(o)) => Some(o),
        (true, None) => return Err(OpError::OperandRequired(op)),
        (false, Some(_)) => return Err(OpError::UnexpectedOperand(op)),
        (false, None) => None,
    };
    let p = parents.first().copied();
    let eq = match op {
        OpId::AddExpr => {
            let (p, o) = (p.unwrap(), o.unwrap());
            p.map(|s| Expr::add([s.clone(), o.clone()]))
        }
        OpId::SubExpr => {
            let (p, o) = (p.unwrap(), o.unwrap());
            p.map(|s| Expr::sub(s.clone(), o.clone()))
        }
        OpId::MulExpr => {
            let (p, o) = (p.unwrap(), o.unwrap());
            p.map(|s| Expr::mul([s.clone(), o.clone()]))
        }
        OpId::DivExpr => {
            let (p, o) = (p.unwrap(), o.unwrap());
            if o.is_zero() {
                return Err(inapplicable(op, "division by zero"));
            }
            p.map(|s| Expr::div(s.clone(), o.clone()))
        }
        OpId::PowExpr => {
            let (p, o) = (p.unwrap(), o.unwrap());
            p.map(|s| Expr::pow(s.clone(), o.clone()))
        }
        OpId::Diff | OpId::Int => {
            let (p, o) = (p.unwrap(), o.unwrap());
            let Expr::Symbol(v) = o else {
                return Err(inapplicable(op, "operand must be a symbol"));
            };
            if !p.free_variables().contains(v) {
                return Err(inapplicable(op, "variable does not occur"));
            }
            if op == OpId::Diff {
                p.map(|s| Expr::derivative(s.clone(), v.clone(), 1))
            } else {
                p.map(|s| Expr::integral(s.clone(), v.clone()))
            }
        }
        OpId::EvalDiff => evaluate_derivatives(p.unwrap())
            .map_err(|_| inapplicable(op, "no evaluable derivative"))?,
        OpId::EvalInt => {
            let p = p.unwrap();
            match evaluate_integrals(p, used, names) {
                Ok(Some(eq)) => eq,
                Ok(None) => return Err(inapplicable(op, "integral outside the table")),
                Err(_) => return Err(inapplicable(op, "no evaluable integral")),
            }
        }
        OpId::SubstLhs | OpId::SubstRhs => {
            let (rule, target) = (parents[0], parents[1]);
            if rule == target {
                return Err(inapplicable(op, "rule and target coincide"));
            }
            let (pattern, replacement) = if op == OpId::SubstLhs {
                (&rule.lhs, &rule.rhs)
            } else {
                (&rule.rhs, &rule.lhs)
            };
            if pattern.is_number() {
                return Err(inapplicable(op, "numeric pattern"));
            }
            if replacement.contains(pattern) {
                return Err(inapplicable(op, "replacement contains the pattern"));
            }
            if target.lhs.binds_variable(pattern) || target.rhs.binds_variable(pattern) {
                return Err(inapplicable(op, "pattern is a bound variable"));
            }
            if !target.contains(pattern) {
                return Err(inapplicable(op, "pattern does not occur"));
            }
            target.substitute(pattern, replacement)
        }
        OpId::Rename | OpId::DefineFromExpr => {
            let body = o.unwrap();
            if body.is_atom() {
                return Err(inapplicable(op, "body must be compound"));
            }
            let args: Vec<Expr> = body.free_variables().into_iter().map(Expr::Symbol).collect();
            if args.is_empty() {
                return Err(inapplicable(op, "body has no variables"));
            }
            let mut avoid = used.clone();
            avoid.extend(body.free_symbols());
            let name = names
                .fresh_function(&avoid)
                .ok_or_else(|| inapplicable(op, "no fresh function name"))?;
            Equation::new(Expr::Apply(name, args), body.clone())
        }
        OpId::Negate => p.unwrap().map(|s| Expr::neg(s.clone())),
        OpId::SwapSides => p.unwrap().swapped(),
        OpId::ExpBothSides => p.unwrap().map(|s| Expr::exp(s.clone())),
        OpId::LogBothSides => p.unwrap().map(|s| Expr::log(s.clone())),
        OpId::AddEq => {
            let (a, b) = (parents[0], parents[1]);
            if a == b {
                return Err(inapplicable(op, "parents coincide"));
            }
            Equation::new(
                Expr::add([a.lhs.clone(), b.lhs.clone()]),
                Expr::add([a.rhs.clone(), b.rhs.clone()]),
            )
        }
        OpId::Premise => unreachable!(),
    };
    check_result(op, &eq)?;
    Ok(eq)
}

fn check_result(op: OpId, eq: &Equation) -> Result<(), OpError> {
    if eq.lhs == eq.rhs {
        return Err(inapplicable(op, "trivial identity"));
    }
    if eq.lhs.is_number() && eq.rhs.is_number() {
        return Err(inapplicable(op, "numeric equation"));
    }
    if eq.lhs.is_degenerate() || eq.rhs.is_degenerate() {
        return Err(inapplicable(op, "degenerate expression"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Scripted;
    use crate::expr::{parse_equation, SymbolTable};

    fn eq(s: &str) -> Equation {
        parse_equation(s, &SymbolTable::default()).unwrap()
    }

    fn none() -> Scripted {
        Scripted::default()
    }

    #[test]
    fn diff_of_premise() {
        let p = eq("\\operatorname{v_{y}}{(L)} = e^{L}");
        let got = apply_to_equations(OpId::Diff, &[&p], Some(&Expr::sym("L")), &BTreeSet::new(), &mut none())
            .unwrap();
        assert_eq!(got, eq("\\frac{d}{d L} \\operatorname{v_{y}}{(L)} = \\frac{d}{d L} e^{L}"));
    }

    #[test]
    fn divide_by_one_is_identity() {
        let p = eq("x = \\sin{(y)}");
        let got = apply_to_equations(OpId::DivExpr, &[&p], Some(&Expr::one()), &BTreeSet::new(), &mut none())
            .unwrap();
        assert_eq!(got, p);
        let zero = apply_to_equations(OpId::DivExpr, &[&p], Some(&Expr::zero()), &BTreeSet::new(), &mut none());
        assert!(matches!(zero, Err(OpError::Inapplicable { .. })));
    }

    #[test]
    fn substitute_lhs() {
        let rule = eq("f^{\\prime} = \\cos{(J_{f})}");
        let target = eq("f^{\\prime} = \\frac{d}{d J_{f}} \\sin{(J_{f})}");
        let got = apply_to_equations(OpId::SubstLhs, &[&rule, &target], None, &BTreeSet::new(), &mut none())
            .unwrap();
        assert_eq!(got, eq("\\cos{(J_{f})} = \\frac{d}{d J_{f}} \\sin{(J_{f})}"));
    }

    #[test]
    fn arity_and_operand_checked() {
        let p = eq("x = y");
        let r = apply_to_equations(OpId::AddEq, &[&p], None, &BTreeSet::new(), &mut none());
        assert!(matches!(r, Err(OpError::ArityMismatch { expected: 2, got: 1, .. })));
        let r = apply_to_equations(OpId::AddExpr, &[&p], None, &BTreeSet::new(), &mut none());
        assert_eq!(r, Err(OpError::OperandRequired(OpId::AddExpr)));
        let r = apply_to_equations(OpId::Negate, &[&p], Some(&Expr::one()), &BTreeSet::new(), &mut none());
        assert_eq!(r, Err(OpError::UnexpectedOperand(OpId::Negate)));
    }

    #[test]
    fn rename_defines_function_of_free_variables() {
        let body = Expr::add([Expr::sym("x"), Expr::sym("y")]);
        let mut names = Scripted {
            functions: ["g".to_string()].into(),
            ..Default::default()
        };
        let got = apply_to_equations(OpId::Rename, &[], Some(&body), &BTreeSet::new(), &mut names).unwrap();
        assert_eq!(got.lhs, Expr::apply("g", vec![Expr::sym("x"), Expr::sym("y")]));
        assert_eq!(got.rhs, body);
    }

    #[test]
    fn eval_int_needs_a_name() {
        let p = eq("f{(x)} = \\int x dx");
        let r = apply_to_equations(OpId::EvalInt, &[&p], None, &BTreeSet::new(), &mut none());
        assert!(r.is_err());
        let mut names = Scripted {
            constants: ["C".to_string()].into(),
            ..Default::default()
        };
        let got = apply_to_equations(OpId::EvalInt, &[&p], None, &BTreeSet::new(), &mut names).unwrap();
        assert_eq!(got, eq("f{(x)} = \\frac{x^{2}}{2} + C"));
    }
}
