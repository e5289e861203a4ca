//! The worked example derivation whose prompt is known verbatim.

use derivkit::calculus::Scripted;
use derivkit::expr::{Equation, Expr, SymbolKind, SymbolTable};
use derivkit::ops::{apply, Derivation, OpId, Step};

pub const GOLDEN_PROMPT: &str = "Given $q{(a)} = e^{a}$ and $G{(a)} = - e^{a} + \\frac{d}{d a} q{(a)}$, \
     then derive $- e^{a} + \\frac{d}{d a} q{(a)} = 0$, then obtain $e^{G{(a)}} = 1$";

/// q(a) = e^a, differentiate, subtract the concrete derivative, evaluate,
/// name the remainder G, substitute it back and exponentiate.
pub fn worked_derivation() -> Derivation {
    let a = || Expr::sym("a");
    let q = Expr::apply("q", vec![a()]);
    let mut d = Derivation::new(vec![Step::premise(Equation::new(q.clone(), Expr::exp(a())))]);
    let mut none = Scripted::default();
    let push = |d: &mut Derivation, op, parents: &[usize], operand: Option<Expr>, names: &mut Scripted| {
        let s = apply(op, d, parents, operand.as_ref(), names).unwrap();
        d.steps.push(s);
    };
    push(&mut d, OpId::Diff, &[0], Some(a()), &mut none);
    push(&mut d, OpId::SubExpr, &[1], Some(Expr::derivative(Expr::exp(a()), "a", 1)), &mut none);
    push(&mut d, OpId::EvalDiff, &[2], None, &mut none);
    let body = Expr::add([Expr::neg(Expr::exp(a())), Expr::derivative(q, "a", 1)]);
    let mut g = Scripted {
        functions: ["G".to_string()].into(),
        ..Default::default()
    };
    push(&mut d, OpId::Rename, &[], Some(body), &mut g);
    push(&mut d, OpId::SubstRhs, &[4, 3], None, &mut none);
    push(&mut d, OpId::ExpBothSides, &[5], None, &mut none);
    d.assign_roles();
    d
}

pub fn table() -> SymbolTable {
    let mut t = SymbolTable::default();
    t.add_renderable("a", SymbolKind::Variable);
    t.add_renderable("q", SymbolKind::FunctionName);
    t.add_renderable("G", SymbolKind::FunctionName);
    t
}
