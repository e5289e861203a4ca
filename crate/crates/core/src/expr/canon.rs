//! Syntactic normal form: flatten, fold numbers, merge like terms, sort.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{Expr, FuncKind};

/// Exponents beyond this magnitude are never folded numerically.
const MAX_FOLD_EXPONENT: i64 = 64;

/// Bottom-up canonicalization. Idempotent.
pub fn canonicalize(e: &Expr) -> Expr {
    match e {
        Expr::Number(_) | Expr::Symbol(_) => e.clone(),
        Expr::Add(terms) => add(terms.iter().map(canonicalize).collect()),
        Expr::Mul(factors) => mul(factors.iter().map(canonicalize).collect()),
        Expr::Pow(b, x) => pow(canonicalize(b), canonicalize(x)),
        Expr::Func(k, a) => func(*k, canonicalize(a)),
        Expr::Apply(name, args) => Expr::Apply(name.clone(), args.iter().map(canonicalize).collect()),
        Expr::Derivative(b, v, n) => {
            let body = canonicalize(b);
            if !body.depends_on(v) {
                return Expr::zero();
            }
            match body {
                Expr::Derivative(inner, w, m) if &w == v => Expr::Derivative(inner, w, m + n),
                body => Expr::Derivative(Box::new(body), v.clone(), *n),
            }
        }
        Expr::Integral(b, v) => Expr::Integral(Box::new(canonicalize(b)), v.clone()),
    }
}

fn num(r: BigRational) -> Expr {
    Expr::Number(r)
}

fn small_int(r: &BigRational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

fn func(kind: FuncKind, arg: Expr) -> Expr {
    match (kind, &arg) {
        (FuncKind::Sin, a) if a.is_zero() => Expr::zero(),
        (FuncKind::Cos, a) if a.is_zero() => Expr::one(),
        (FuncKind::Exp, a) if a.is_zero() => Expr::one(),
        (FuncKind::Log, a) if a.is_one() => Expr::zero(),
        (FuncKind::Log, Expr::Func(FuncKind::Exp, inner)) => inner.as_ref().clone(),
        (FuncKind::Exp, Expr::Func(FuncKind::Log, inner)) => inner.as_ref().clone(),
        _ => Expr::Func(kind, Box::new(arg)),
    }
}

fn rational_pow(base: &BigRational, exp: i64) -> Option<BigRational> {
    if exp.abs() > MAX_FOLD_EXPONENT {
        return None;
    }
    if base.is_zero() {
        return if exp > 0 {
            Some(BigRational::zero())
        } else {
            None
        };
    }
    let mut out = BigRational::one();
    for _ in 0..exp.unsigned_abs() {
        out *= base;
    }
    if exp < 0 {
        out = out.recip();
    }
    Some(out)
}

/// Canonical power of two canonical operands.
pub(crate) fn pow(base: Expr, exp: Expr) -> Expr {
    if exp.is_zero() {
        return Expr::one();
    }
    if exp.is_one() {
        return base;
    }
    if base.is_one() {
        return Expr::one();
    }
    let int_exp = exp.as_number().and_then(small_int);
    if let (Expr::Number(b), Some(k)) = (&base, int_exp) {
        if let Some(r) = rational_pow(b, k) {
            return num(r);
        }
    }
    if let Some(k) = int_exp {
        match base {
            Expr::Pow(inner, a) => {
                let new_exp = mul(vec![*a, Expr::int(k)]);
                return pow(*inner, new_exp);
            }
            Expr::Mul(factors) => {
                return mul(factors.into_iter().map(|f| pow(f, Expr::int(k))).collect());
            }
            _ => {}
        }
    }
    Expr::Pow(Box::new(base), Box::new(exp))
}

fn split_power(e: Expr) -> (Expr, Expr) {
    match e {
        Expr::Pow(b, x) => (*b, *x),
        other => (other, Expr::one()),
    }
}

/// Canonical product of canonical factors.
pub(crate) fn mul(factors: Vec<Expr>) -> Expr {
    let mut pending = factors;
    let mut coeff = BigRational::one();
    loop {
        let mut flat = Vec::with_capacity(pending.len());
        let mut stack: Vec<Expr> = pending;
        stack.reverse();
        while let Some(f) = stack.pop() {
            match f {
                Expr::Mul(inner) => {
                    for g in inner.into_iter().rev() {
                        stack.push(g);
                    }
                }
                Expr::Number(n) => coeff *= n,
                other => flat.push(other),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }

        let mut groups: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
        for f in flat {
            let (b, x) = split_power(f);
            groups.entry(b).or_default().push(x);
        }

        let mut rebuilt = Vec::with_capacity(groups.len());
        let mut unstable = false;
        for (b, exps) in groups {
            let x = if exps.len() == 1 {
                exps.into_iter().next().unwrap()
            } else {
                add(exps)
            };
            let p = pow(b, x);
            if matches!(p, Expr::Mul(_) | Expr::Number(_)) {
                unstable = true;
            }
            rebuilt.push(p);
        }
        if unstable {
            pending = rebuilt;
            continue;
        }
        rebuilt.sort();

        // A coefficient never sits beside a sum: it is absorbed into the
        // first sum factor so that every product has a single normal form.
        if !coeff.is_one() && rebuilt.len() > 1 {
            if let Some(pos) = rebuilt.iter().position(|f| matches!(f, Expr::Add(_))) {
                let Expr::Add(terms) = rebuilt.remove(pos) else {
                    unreachable!()
                };
                let c = std::mem::replace(&mut coeff, BigRational::one());
                rebuilt.push(add(terms.into_iter().map(|t| mul(vec![num(c.clone()), t])).collect()));
                pending = rebuilt;
                continue;
            }
        }

        if rebuilt.is_empty() {
            return num(coeff);
        }
        if rebuilt.len() == 1 && matches!(rebuilt[0], Expr::Add(_)) && !coeff.is_one() {
            let Expr::Add(terms) = rebuilt.pop().unwrap() else {
                unreachable!()
            };
            return add(
                terms
                    .into_iter()
                    .map(|t| mul(vec![num(coeff.clone()), t]))
                    .collect(),
            );
        }
        if coeff.is_one() && rebuilt.len() == 1 {
            return rebuilt.pop().unwrap();
        }
        let mut out = Vec::with_capacity(rebuilt.len() + 1);
        if !coeff.is_one() {
            out.push(num(coeff));
        }
        out.extend(rebuilt);
        return Expr::Mul(out);
    }
}

/// Split a canonical term into its numeric coefficient and the remainder.
pub(crate) fn split_coeff(e: &Expr) -> (BigRational, Option<Expr>) {
    match e {
        Expr::Number(n) => (n.clone(), None),
        Expr::Mul(fs) => match fs.first() {
            Some(Expr::Number(c)) => {
                let rest: Vec<Expr> = fs[1..].to_vec();
                let rest = if rest.len() == 1 {
                    rest.into_iter().next().unwrap()
                } else {
                    Expr::Mul(rest)
                };
                (c.clone(), Some(rest))
            }
            _ => (BigRational::one(), Some(e.clone())),
        },
        other => (BigRational::one(), Some(other.clone())),
    }
}

fn with_coeff(c: BigRational, rest: Expr) -> Expr {
    if c.is_one() {
        return rest;
    }
    match rest {
        Expr::Mul(fs) if fs.iter().any(|f| matches!(f, Expr::Add(_))) => mul(vec![num(c), Expr::Mul(fs)]),
        Expr::Mul(fs) => {
            let mut out = Vec::with_capacity(fs.len() + 1);
            out.push(num(c));
            out.extend(fs);
            Expr::Mul(out)
        }
        other => Expr::Mul(vec![num(c), other]),
    }
}

/// Canonical sum of canonical terms.
pub(crate) fn add(terms: Vec<Expr>) -> Expr {
    let mut constant = BigRational::zero();
    let mut like: BTreeMap<Expr, BigRational> = BTreeMap::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        match t {
            Expr::Add(inner) => stack.extend(inner),
            t => match split_coeff(&t) {
                (c, None) => constant += c,
                (c, Some(rest)) => {
                    let slot = like.entry(rest).or_insert_with(BigRational::zero);
                    *slot += c;
                }
            },
        }
    }
    let mut out = Vec::new();
    if !constant.is_zero() {
        out.push(num(constant));
    }
    for (rest, c) in like {
        if c.is_zero() {
            continue;
        }
        out.push(with_coeff(c, rest));
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}
