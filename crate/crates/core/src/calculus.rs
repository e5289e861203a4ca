//! Rule-based differentiation and table-driven integration.

use std::collections::{BTreeSet, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{canonicalize, Equation, Expr, FuncKind, SymbolKind, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalcError {
    #[error("equation has no evaluable derivative")]
    NoDerivativePresent,
    #[error("equation has no evaluable integral")]
    NoIntegralPresent,
    #[error("no unused symbol left for a constant of integration")]
    ConstantPoolExhausted,
}

/// Source of fresh names for integration constants and new functions.
pub trait FreshNames {
    fn fresh_constant(&mut self, used: &BTreeSet<String>) -> Option<String>;
    fn fresh_function(&mut self, used: &BTreeSet<String>) -> Option<String>;
}

/// Deterministic: the first unused name in vocabulary order. Constants are
/// drawn from the `constant` entries, then from unused variables.
pub struct FirstUnused<'a>(pub &'a SymbolTable);

impl FreshNames for FirstUnused<'_> {
    fn fresh_constant(&mut self, used: &BTreeSet<String>) -> Option<String> {
        self.0
            .unused(SymbolKind::Constant, used)
            .into_iter()
            .chain(self.0.unused(SymbolKind::Variable, used))
            .next()
    }

    fn fresh_function(&mut self, used: &BTreeSet<String>) -> Option<String> {
        self.0.unused(SymbolKind::FunctionName, used).into_iter().next()
    }
}

/// Hands out a fixed list of names in order, skipping used ones. Replay uses
/// this to reproduce the names recorded in an equation.
#[derive(Debug, Clone, Default)]
pub struct Scripted {
    pub constants: VecDeque<String>,
    pub functions: VecDeque<String>,
}

impl FreshNames for Scripted {
    fn fresh_constant(&mut self, used: &BTreeSet<String>) -> Option<String> {
        while let Some(n) = self.constants.pop_front() {
            if !used.contains(&n) {
                return Some(n);
            }
        }
        None
    }

    fn fresh_function(&mut self, used: &BTreeSet<String>) -> Option<String> {
        while let Some(n) = self.functions.pop_front() {
            if !used.contains(&n) {
                return Some(n);
            }
        }
        None
    }
}

/// d/dv e, canonical.
pub fn differentiate(e: &Expr, v: &str) -> Expr {
    canonicalize(&diff_raw(e, v))
}

fn diff_raw(e: &Expr, v: &str) -> Expr {
    if !e.depends_on(v) {
        return Expr::zero();
    }
    match e {
        Expr::Number(_) => Expr::zero(),
        Expr::Symbol(s) => {
            if s == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Add(ts) => Expr::Add(ts.iter().map(|t| diff_raw(t, v)).collect()),
        Expr::Mul(fs) => {
            let mut terms = Vec::new();
            for i in 0..fs.len() {
                if !fs[i].depends_on(v) {
                    continue;
                }
                let mut prod: Vec<Expr> = fs.clone();
                prod[i] = diff_raw(&fs[i], v);
                terms.push(Expr::Mul(prod));
            }
            Expr::Add(terms)
        }
        Expr::Pow(b, x) => {
            let b = b.as_ref();
            let x = x.as_ref();
            if !x.depends_on(v) {
                let x_minus_1 = Expr::Add(vec![x.clone(), Expr::int(-1)]);
                Expr::Mul(vec![x.clone(), Expr::pow(b.clone(), x_minus_1), diff_raw(b, v)])
            } else if !b.depends_on(v) {
                Expr::Mul(vec![e.clone(), Expr::log(b.clone()), diff_raw(x, v)])
            } else {
                let inner = Expr::Add(vec![
                    Expr::Mul(vec![diff_raw(x, v), Expr::log(b.clone())]),
                    Expr::Mul(vec![
                        x.clone(),
                        diff_raw(b, v),
                        Expr::pow(b.clone(), Expr::int(-1)),
                    ]),
                ]);
                Expr::Mul(vec![e.clone(), inner])
            }
        }
        Expr::Func(k, a) => {
            let a = a.as_ref();
            let outer = match k {
                FuncKind::Sin => Expr::cos(a.clone()),
                FuncKind::Cos => Expr::Mul(vec![Expr::int(-1), Expr::sin(a.clone())]),
                FuncKind::Exp => Expr::exp(a.clone()),
                FuncKind::Log => Expr::pow(a.clone(), Expr::int(-1)),
            };
            Expr::Mul(vec![outer, diff_raw(a, v)])
        }
        Expr::Apply(..) => Expr::derivative(e.clone(), v, 1),
        Expr::Derivative(b, w, n) => {
            if w == v {
                Expr::derivative(b.as_ref().clone(), v, n + 1)
            } else {
                Expr::derivative(e.clone(), v, 1)
            }
        }
        Expr::Integral(b, w) => {
            if w == v {
                b.as_ref().clone()
            } else {
                Expr::derivative(e.clone(), v, 1)
            }
        }
    }
}

/// `c·v + k` with `c` a non-zero number and `k` free of `v`: returns `c`.
fn linear_coefficient(arg: &Expr, v: &str) -> Option<BigRational> {
    let d = differentiate(arg, v);
    match d {
        Expr::Number(c) if !c.is_zero() => Some(c),
        _ => None,
    }
}

/// Antiderivative without a constant of integration, or `None` when the
/// integrand is outside the table.
pub fn antiderivative(e: &Expr, v: &str) -> Option<Expr> {
    if !e.depends_on(v) {
        return Some(Expr::mul([e.clone(), Expr::sym(v)]));
    }
    if e.has_calculus_nodes() || e.has_applied_function() {
        return None;
    }
    match e {
        Expr::Symbol(_) => Some(Expr::mul([
            Expr::rational(1, 2),
            Expr::pow(e.clone(), Expr::int(2)),
        ])),
        Expr::Add(ts) => {
            let parts: Option<Vec<Expr>> = ts.iter().map(|t| antiderivative(t, v)).collect();
            Some(Expr::add(parts?))
        }
        Expr::Mul(fs) => {
            let (free, dep): (Vec<&Expr>, Vec<&Expr>) = fs.iter().partition(|f| !f.depends_on(v));
            if dep.len() != 1 {
                return None;
            }
            let inner = antiderivative(dep[0], v)?;
            Some(Expr::mul(free.into_iter().cloned().chain([inner])))
        }
        Expr::Pow(b, x) => {
            if !x.depends_on(v) {
                let c = linear_coefficient(b, v)?;
                let n = x.as_number()?;
                if n == &-BigRational::one() {
                    return Some(Expr::mul([
                        Expr::Number(c.recip()),
                        Expr::log(b.as_ref().clone()),
                    ]));
                }
                let n1 = n + BigRational::one();
                let scale = (c * &n1).recip();
                Some(Expr::mul([
                    Expr::Number(scale),
                    Expr::pow(b.as_ref().clone(), Expr::Number(n1)),
                ]))
            } else if !b.depends_on(v) {
                let c = linear_coefficient(x, v)?;
                if b.is_number() && b.as_number().is_some_and(|n| n <= &BigRational::zero()) {
                    return None;
                }
                Some(Expr::mul([
                    Expr::Number(c.recip()),
                    e.clone(),
                    Expr::pow(Expr::log(b.as_ref().clone()), Expr::int(-1)),
                ]))
            } else {
                None
            }
        }
        Expr::Func(k, a) => {
            let c = linear_coefficient(a, v)?;
            let a = a.as_ref().clone();
            let f = match k {
                FuncKind::Exp => Expr::exp(a),
                FuncKind::Sin => Expr::neg(Expr::cos(a)),
                FuncKind::Cos => Expr::sin(a),
                FuncKind::Log => Expr::sub(Expr::mul([a.clone(), Expr::log(a.clone())]), a),
            };
            Some(Expr::mul([Expr::Number(c.recip()), f]))
        }
        _ => None,
    }
}

/// One representative integrand for every row of the integration table,
/// written in `v` with `k` as an unrelated symbol.
pub fn table_rules(v: &str, k: &str) -> Vec<(&'static str, Expr)> {
    let x = || Expr::sym(v);
    let c = || Expr::sym(k);
    let lin = || Expr::add([Expr::mul([Expr::int(3), x()]), c()]);
    vec![
        ("constant", c()),
        ("number", Expr::int(5)),
        ("variable", x()),
        ("power", Expr::pow(x(), Expr::int(4))),
        ("negative power", Expr::pow(x(), Expr::int(-3))),
        ("rational power", Expr::pow(x(), Expr::rational(1, 2))),
        ("reciprocal", Expr::pow(x(), Expr::int(-1))),
        ("linear power", Expr::pow(lin(), Expr::int(2))),
        ("linear reciprocal", Expr::pow(lin(), Expr::int(-1))),
        ("exponential base", Expr::pow(c(), Expr::mul([Expr::int(2), x()]))),
        ("exp", Expr::exp(lin())),
        ("sin", Expr::sin(lin())),
        ("cos", Expr::cos(x())),
        ("log", Expr::log(x())),
        ("linear log", Expr::log(lin())),
        ("scaled", Expr::mul([c(), Expr::sin(x())])),
        ("sum", Expr::add([x(), Expr::exp(x()), c()])),
    ]
}

/// ∫ e dv with a fresh constant of integration. `None` on a table miss or
/// when no fresh name is available.
pub fn integrate(
    e: &Expr,
    v: &str,
    used: &BTreeSet<String>,
    names: &mut dyn FreshNames,
) -> Option<Expr> {
    let f = antiderivative(e, v)?;
    let c = names.fresh_constant(used)?;
    Some(Expr::add([f, Expr::sym(c)]))
}

fn is_concrete(e: &Expr) -> bool {
    !e.has_applied_function() && !e.has_calculus_nodes()
}

/// Replace every derivative node that the rules can evaluate.
pub fn evaluate_derivatives(eq: &Equation) -> Result<Equation, CalcError> {
    let lhs = eval_derivs(&eq.lhs);
    let rhs = eval_derivs(&eq.rhs);
    let out = Equation::new(lhs, rhs);
    if &out == eq {
        return Err(CalcError::NoDerivativePresent);
    }
    Ok(out)
}

fn eval_derivs(e: &Expr) -> Expr {
    let rebuilt = map_children(e, eval_derivs);
    match &rebuilt {
        Expr::Derivative(b, v, n) => {
            let mut out = b.as_ref().clone();
            for _ in 0..*n {
                out = differentiate(&out, v);
            }
            out
        }
        _ => canonicalize(&rebuilt),
    }
}

/// Replace every concrete integral with its antiderivative plus its own
/// fresh constant. `Ok(None)` when some concrete integral is not in the
/// table (or the name pool ran dry).
pub fn evaluate_integrals(
    eq: &Equation,
    used: &BTreeSet<String>,
    names: &mut dyn FreshNames,
) -> Result<Option<Equation>, CalcError> {
    let mut found = false;
    let mut used = used.clone();
    used.extend(eq.free_symbols());
    let mut miss = false;
    let mut run = |e: &Expr| eval_ints(e, &mut used, names, &mut found, &mut miss);
    let lhs = run(&eq.lhs);
    let rhs = run(&eq.rhs);
    if !found {
        return Err(CalcError::NoIntegralPresent);
    }
    if miss {
        return Ok(None);
    }
    Ok(Some(Equation::new(lhs, rhs)))
}

fn eval_ints(
    e: &Expr,
    used: &mut BTreeSet<String>,
    names: &mut dyn FreshNames,
    found: &mut bool,
    miss: &mut bool,
) -> Expr {
    if let Expr::Integral(b, v) = e {
        if is_concrete(b) {
            *found = true;
            return match antiderivative(b, v) {
                Some(f) => match names.fresh_constant(used) {
                    Some(c) => {
                        used.insert(c.clone());
                        Expr::add([f, Expr::sym(c)])
                    }
                    None => {
                        *miss = true;
                        e.clone()
                    }
                },
                None => {
                    *miss = true;
                    e.clone()
                }
            };
        }
    }
    let rebuilt = map_children(e, |c| eval_ints(c, used, names, found, miss));
    canonicalize(&rebuilt)
}

fn map_children(e: &Expr, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
    match e {
        Expr::Number(_) | Expr::Symbol(_) => e.clone(),
        Expr::Pow(b, x) => Expr::pow(f(b), f(x)),
        Expr::Mul(xs) => Expr::Mul(xs.iter().map(f).collect()),
        Expr::Add(xs) => Expr::Add(xs.iter().map(f).collect()),
        Expr::Apply(n, xs) => Expr::Apply(n.clone(), xs.iter().map(f).collect()),
        Expr::Func(k, a) => Expr::func(*k, f(a)),
        Expr::Derivative(b, v, n) => Expr::derivative(f(b), v.clone(), *n),
        Expr::Integral(b, v) => Expr::integral(f(b), v.clone()),
    }
}
