use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;

use crate::expr::{Equation, Expr, SymbolKind, SymbolTable};

use super::GenError;

fn unary<R: Rng + ?Sized>(a: Expr, rng: &mut R) -> Expr {
    match rng.random_range(0..7) {
        0 => Expr::exp(a),
        1 => Expr::sin(a),
        2 => Expr::cos(a),
        3 => Expr::log(a),
        4 => Expr::pow(a, Expr::int(2)),
        5 => Expr::pow(a, Expr::int(3)),
        _ => Expr::pow(a, Expr::int(-1)),
    }
}

/// A random elementary body in which every name of `vars` occurs.
pub fn generate_body<R: Rng + ?Sized>(vars: &[String], rng: &mut R) -> Expr {
    if vars.len() == 1 {
        return unary(Expr::sym(vars[0].clone()), rng);
    }
    let mut terms: Vec<Expr> = vars
        .iter()
        .map(|v| {
            let s = Expr::sym(v.clone());
            if rng.random::<f64>() < 0.35 {
                unary(s, rng)
            } else {
                s
            }
        })
        .collect();
    let mut acc = terms.pop().unwrap();
    while let Some(t) = terms.pop() {
        acc = match rng.random_range(0..6) {
            0 | 1 => Expr::add([t, acc]),
            2 => Expr::sub(t, acc),
            3 | 4 => Expr::mul([t, acc]),
            _ => Expr::div(t, acc),
        };
    }
    acc
}

/// `base` combined with a term in `var` by a random arithmetic operator.
pub fn extend_body<R: Rng + ?Sized>(base: Expr, var: &str, rng: &mut R) -> Expr {
    let v = Expr::sym(var);
    let t = if rng.random::<f64>() < 0.35 { unary(v, rng) } else { v };
    match rng.random_range(0..5) {
        0 | 1 => Expr::add([base, t]),
        2 => Expr::sub(base, t),
        3 => Expr::mul([base, t]),
        _ => Expr::div(base, t),
    }
}

/// A random elementary expression over `vars` with at most `depth` levels
/// of nesting, for fuzzing the engine.
pub fn random_expr<R: Rng + ?Sized>(vars: &[&str], depth: usize, rng: &mut R) -> Expr {
    if depth == 0 || rng.random::<f64>() < 0.25 {
        if rng.random::<f64>() < 0.7 {
            return Expr::sym(vars[rng.random_range(0..vars.len())]);
        }
        return match rng.random_range(0..8) {
            0 => Expr::rational(1, 2),
            1 => Expr::rational(-3, 2),
            n => Expr::int([-3, -2, -1, 1, 2, 3][n - 2]),
        };
    }
    let sub = |rng: &mut R| random_expr(vars, depth - 1, rng);
    match rng.random_range(0..9) {
        0 | 1 => {
            let k = rng.random_range(2..4);
            Expr::add((0..k).map(|_| sub(rng)).collect::<Vec<_>>())
        }
        2 | 3 => {
            let k = rng.random_range(2..4);
            Expr::mul((0..k).map(|_| sub(rng)).collect::<Vec<_>>())
        }
        4 => {
            let n = [-2, -1, 2, 3][rng.random_range(0..4)];
            Expr::pow(sub(rng), Expr::int(n))
        }
        5 => Expr::sin(sub(rng)),
        6 => Expr::cos(sub(rng)),
        7 => Expr::exp(sub(rng)),
        _ => Expr::log(sub(rng)),
    }
}

/// A fresh function of one to three fresh variables, equal to an
/// elementary body of those variables.
pub fn generate_premise<R: Rng + ?Sized>(
    table: &SymbolTable,
    used: &BTreeSet<String>,
    rng: &mut R,
) -> Result<Equation, GenError> {
    let funcs = table.unused(SymbolKind::FunctionName, used);
    let vars = table.unused(SymbolKind::Variable, used);
    if funcs.is_empty() || vars.len() < 2 {
        return Err(GenError::VocabularyExhausted);
    }
    let name = funcs[rng.random_range(0..funcs.len())].clone();
    let k = match rng.random::<f64>() {
        x if x < 0.5 => 1,
        x if x < 0.8 => 2,
        _ => 3,
    };
    let args: Vec<String> = sample(rng, vars.len(), k.min(vars.len()))
        .into_iter()
        .map(|i| vars[i].clone())
        .collect();
    let body = generate_body(&args, rng);
    let lhs = Expr::apply(name, args.into_iter().map(Expr::Symbol).collect());
    Ok(Equation::new(lhs, body))
}
