//! Immutable symbolic expressions.
//!
//! Every constructor in this module returns a *raw* tree; call
//! [`canonicalize`] (or use the arithmetic helpers, which canonicalize for
//! you) to obtain the normal form that the rest of the crate relies on for
//! structural equality.

mod canon;
mod eval;
mod latex;
mod parse;
mod symbols;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use canon::canonicalize;
pub use eval::{eval_numeric, EvalError};
pub use latex::{equation_to_latex, to_latex, RenderError};
pub use parse::{parse_equation, parse_latex, ParseError};
pub use symbols::{SymbolEntry, SymbolKind, SymbolTable, VocabularyError, GREEK_POOL};

/// Elementary functions understood by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FuncKind {
    Sin,
    Cos,
    Exp,
    Log,
}

impl FuncKind {
    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
            FuncKind::Exp => "exp",
            FuncKind::Log => "log",
        }
    }
}

/// Expression tree.
///
/// The variant order matters: the derived `Ord` is the total structural
/// order used to sort operands of `Add` and `Mul`, so numbers sort first and
/// calculus nodes last.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Number(BigRational),
    Symbol(String),
    Pow(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
    Func(FuncKind, Box<Expr>),
    /// A named, otherwise unspecified function applied to arguments, `f(x, y)`.
    Apply(String, Vec<Expr>),
    /// `d^order/d var^order body`, left unevaluated.
    Derivative(Box<Expr>, String, u32),
    /// Indefinite integral of `body` with respect to `var`, left unevaluated.
    Integral(Box<Expr>, String),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Number(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Number(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Expr {
        Expr::Number(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Number(BigRational::one())
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::Symbol(name.into())
    }

    pub fn apply(name: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Apply(name.into(), args)
    }

    pub fn func(kind: FuncKind, arg: Expr) -> Expr {
        Expr::Func(kind, Box::new(arg))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::func(FuncKind::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::func(FuncKind::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::func(FuncKind::Exp, arg)
    }

    pub fn log(arg: Expr) -> Expr {
        Expr::func(FuncKind::Log, arg)
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        Expr::Pow(Box::new(base), Box::new(exp))
    }

    pub fn derivative(body: Expr, var: impl Into<String>, order: u32) -> Expr {
        Expr::Derivative(Box::new(body), var.into(), order)
    }

    pub fn integral(body: Expr, var: impl Into<String>) -> Expr {
        Expr::Integral(Box::new(body), var.into())
    }

    /// Canonical sum.
    pub fn add(terms: impl IntoIterator<Item = Expr>) -> Expr {
        canonicalize(&Expr::Add(terms.into_iter().collect()))
    }

    /// Canonical product.
    pub fn mul(factors: impl IntoIterator<Item = Expr>) -> Expr {
        canonicalize(&Expr::Mul(factors.into_iter().collect()))
    }

    /// Canonical `a - b`.
    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add([a, Expr::neg(b)])
    }

    /// Canonical `-a`.
    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        Expr::mul([Expr::int(-1), a])
    }

    /// Canonical `a / b`.
    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::mul([a, Expr::pow(b, Expr::int(-1))])
    }

    pub fn as_number(&self) -> Option<&BigRational> {
        match self {
            Expr::Number(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Number(n) if n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Number(n) if n.is_one())
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Expr::Number(_))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Expr::Number(_) | Expr::Symbol(_))
    }

    /// True for numbers below zero and products with a negative coefficient.
    pub fn is_negative_term(&self) -> bool {
        match self {
            Expr::Number(n) => n.is_negative(),
            Expr::Mul(fs) => matches!(fs.first(), Some(Expr::Number(n)) if n.is_negative()),
            _ => false,
        }
    }

    /// Direct children in a fixed order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Number(_) | Expr::Symbol(_) => Vec::new(),
            Expr::Pow(b, e) => vec![b.as_ref(), e.as_ref()],
            Expr::Mul(xs) | Expr::Add(xs) | Expr::Apply(_, xs) => xs.iter().collect(),
            Expr::Func(_, a) => vec![a.as_ref()],
            Expr::Derivative(b, _, _) | Expr::Integral(b, _) => vec![b.as_ref()],
        }
    }

    /// Pre-order walk over every subtree, including `self`.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// All distinct subtrees in first-visit order.
    pub fn subexpressions(&self) -> Vec<Expr> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if seen.insert(e) {
                out.push(e.clone());
            }
        });
        out
    }

    pub fn contains(&self, target: &Expr) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if !found && e == target {
                found = true;
            }
        });
        found
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Names of every symbol and applied function, including bound
    /// differentiation/integration variables.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::Symbol(s) => {
                out.insert(s.clone());
            }
            Expr::Apply(name, _) => {
                out.insert(name.clone());
            }
            Expr::Derivative(_, v, _) | Expr::Integral(_, v) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Symbol names only (function names excluded).
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::Symbol(s) => {
                out.insert(s.clone());
            }
            Expr::Derivative(_, v, _) | Expr::Integral(_, v) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Names of applied functions only.
    pub fn function_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Apply(name, _) = e {
                out.insert(name.clone());
            }
        });
        out
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.free_variables().contains(var)
    }

    pub fn has_calculus_nodes(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Derivative(..) | Expr::Integral(..)) {
                found = true;
            }
        });
        found
    }

    pub fn has_applied_function(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Apply(..)) {
                found = true;
            }
        });
        found
    }

    /// True when the tree holds a division by literal zero or `log(0)`.
    pub fn is_degenerate(&self) -> bool {
        let mut bad = false;
        self.walk(&mut |e| match e {
            Expr::Pow(b, x) => {
                if b.is_zero() && matches!(x.as_ref(), Expr::Number(n) if !n.is_positive()) {
                    bad = true;
                }
            }
            Expr::Func(FuncKind::Log, a) if a.is_zero() => bad = true,
            _ => {}
        });
        bad
    }

    /// Replace every occurrence of `target` by `replacement`, then canonicalize.
    ///
    /// A symbol target also renames matching differentiation/integration
    /// variables when the replacement is itself a symbol.
    pub fn substitute(&self, target: &Expr, replacement: &Expr) -> Expr {
        canonicalize(&self.replace_raw(target, replacement))
    }

    fn replace_raw(&self, target: &Expr, replacement: &Expr) -> Expr {
        if self == target {
            return replacement.clone();
        }
        let rename_var = |v: &String| -> String {
            match (target, replacement) {
                (Expr::Symbol(t), Expr::Symbol(r)) if t == v => r.clone(),
                _ => v.clone(),
            }
        };
        match self {
            Expr::Number(_) | Expr::Symbol(_) => self.clone(),
            Expr::Pow(b, e) => Expr::pow(
                b.replace_raw(target, replacement),
                e.replace_raw(target, replacement),
            ),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.replace_raw(target, replacement)).collect()),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.replace_raw(target, replacement)).collect()),
            Expr::Apply(n, xs) => Expr::Apply(
                n.clone(),
                xs.iter().map(|x| x.replace_raw(target, replacement)).collect(),
            ),
            Expr::Func(k, a) => Expr::func(*k, a.replace_raw(target, replacement)),
            Expr::Derivative(b, v, n) => {
                Expr::derivative(b.replace_raw(target, replacement), rename_var(v), *n)
            }
            Expr::Integral(b, v) => Expr::integral(b.replace_raw(target, replacement), rename_var(v)),
        }
    }

    /// True when `target` is a symbol used as a differentiation or
    /// integration variable somewhere inside `self`.
    pub fn binds_variable(&self, target: &Expr) -> bool {
        let Expr::Symbol(t) = target else {
            return false;
        };
        let mut found = false;
        self.walk(&mut |e| match e {
            Expr::Derivative(_, v, _) | Expr::Integral(_, v) if v == t => found = true,
            _ => {}
        });
        found
    }

    /// Rename symbols and applied-function names through `map`; names not in
    /// the map are kept. The result is canonical.
    pub fn rename(&self, map: &dyn Fn(&str) -> String) -> Expr {
        canonicalize(&self.rename_raw(map))
    }

    fn rename_raw(&self, map: &dyn Fn(&str) -> String) -> Expr {
        match self {
            Expr::Number(_) => self.clone(),
            Expr::Symbol(s) => Expr::Symbol(map(s)),
            Expr::Pow(b, e) => Expr::pow(b.rename_raw(map), e.rename_raw(map)),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.rename_raw(map)).collect()),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.rename_raw(map)).collect()),
            Expr::Apply(n, xs) => Expr::Apply(map(n), xs.iter().map(|x| x.rename_raw(map)).collect()),
            Expr::Func(k, a) => Expr::func(*k, a.rename_raw(map)),
            Expr::Derivative(b, v, n) => Expr::derivative(b.rename_raw(map), map(v), *n),
            Expr::Integral(b, v) => Expr::integral(b.rename_raw(map), map(v)),
        }
    }

    /// Shape of the tree with every name erased and commutative operands
    /// sorted, so two trees have equal shapes iff they are isomorphic modulo
    /// leaf names.
    pub fn shape(&self) -> String {
        match self {
            Expr::Number(n) => format!("#{n}"),
            Expr::Symbol(_) => "s".to_string(),
            Expr::Pow(b, e) => format!("pow({},{})", b.shape(), e.shape()),
            Expr::Mul(xs) | Expr::Add(xs) => {
                let mut parts: Vec<String> = xs.iter().map(Expr::shape).collect();
                parts.sort();
                let tag = if matches!(self, Expr::Mul(_)) { "mul" } else { "add" };
                format!("{tag}({})", parts.join(","))
            }
            Expr::Func(k, a) => format!("{}({})", k.name(), a.shape()),
            Expr::Apply(_, xs) => {
                let parts: Vec<String> = xs.iter().map(Expr::shape).collect();
                format!("f({})", parts.join(","))
            }
            Expr::Derivative(b, _, n) => format!("d{n}({})", b.shape()),
            Expr::Integral(b, _) => format!("int({})", b.shape()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(n) => write!(f, "{n}"),
            Expr::Symbol(s) => write!(f, "{s}"),
            Expr::Pow(b, e) => write!(f, "({b})^({e})"),
            Expr::Mul(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
                write!(f, "({})", parts.join("*"))
            }
            Expr::Add(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
                write!(f, "({})", parts.join(" + "))
            }
            Expr::Func(k, a) => write!(f, "{}({a})", k.name()),
            Expr::Apply(n, xs) => {
                let parts: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
                write!(f, "{n}({})", parts.join(", "))
            }
            Expr::Derivative(b, v, n) => write!(f, "D[{b}, {v}, {n}]"),
            Expr::Integral(b, v) => write!(f, "Int[{b}, {v}]"),
        }
    }
}

/// `lhs = rhs`. Order-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Equation {
    /// Builds an equation with both sides canonicalized.
    pub fn new(lhs: Expr, rhs: Expr) -> Equation {
        Equation {
            lhs: canonicalize(&lhs),
            rhs: canonicalize(&rhs),
        }
    }

    pub fn swapped(&self) -> Equation {
        Equation {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
        }
    }

    /// Apply the same transform to both sides.
    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Equation {
        Equation::new(f(&self.lhs), f(&self.rhs))
    }

    pub fn is_canonical(&self) -> bool {
        canonicalize(&self.lhs) == self.lhs && canonicalize(&self.rhs) == self.rhs
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut s = self.lhs.free_symbols();
        s.extend(self.rhs.free_symbols());
        s
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut s = self.lhs.free_variables();
        s.extend(self.rhs.free_variables());
        s
    }

    pub fn contains(&self, target: &Expr) -> bool {
        self.lhs.contains(target) || self.rhs.contains(target)
    }

    pub fn substitute(&self, target: &Expr, replacement: &Expr) -> Equation {
        Equation {
            lhs: self.lhs.substitute(target, replacement),
            rhs: self.rhs.substitute(target, replacement),
        }
    }

    /// Distinct subtrees of both sides, lhs first.
    pub fn subexpressions(&self) -> Vec<Expr> {
        let mut out = self.lhs.subexpressions();
        for e in self.rhs.subexpressions() {
            if !out.contains(&e) {
                out.push(e);
            }
        }
        out
    }

    pub fn shape(&self) -> String {
        format!("{}={}", self.lhs.shape(), self.rhs.shape())
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_symbols_of_sum() {
        let e = Expr::add([Expr::sym("x"), Expr::sym("y")]);
        let names: Vec<String> = e.free_symbols().into_iter().collect();
        assert_eq!(names, vec!["x", "y"]);
        assert!(Expr::int(5).free_symbols().is_empty());
    }

    #[test]
    fn free_symbols_include_function_names() {
        let e = Expr::derivative(Expr::apply("f", vec![Expr::sym("x")]), "x", 1);
        let names: Vec<String> = e.free_symbols().into_iter().collect();
        assert_eq!(names, vec!["f", "x"]);
        assert_eq!(e.free_variables().len(), 1);
    }

    #[test]
    fn substitute_identity_and_absent() {
        let e = Expr::add([Expr::mul([Expr::int(2), Expr::sym("x")]), Expr::sym("y")]);
        assert_eq!(e.substitute(&Expr::sym("x"), &Expr::sym("x")), e);
        assert_eq!(e.substitute(&Expr::sym("z"), &Expr::int(1)), e);
    }

    #[test]
    fn substitute_numeric_value() {
        // 2x + x^2 at x = 3 is 15.
        let x = Expr::sym("x");
        let e = Expr::add([
            Expr::mul([Expr::int(2), x.clone()]),
            Expr::pow(x.clone(), Expr::int(2)),
        ]);
        assert_eq!(e.substitute(&x, &Expr::int(3)), Expr::int(15));
    }

    #[test]
    fn substitute_applied_function_inside_derivative() {
        let y = Expr::apply("y", vec![Expr::sym("x")]);
        let e = Expr::derivative(y.clone(), "x", 1);
        let got = e.substitute(&y, &Expr::sin(Expr::sym("x")));
        assert_eq!(got, Expr::derivative(Expr::sin(Expr::sym("x")), "x", 1));
    }

    #[test]
    fn degenerate_detection() {
        assert!(Expr::pow(Expr::zero(), Expr::int(-1)).is_degenerate());
        assert!(!Expr::pow(Expr::sym("x"), Expr::int(-1)).is_degenerate());
    }
}
