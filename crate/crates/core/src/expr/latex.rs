//! LaTeX rendering in the sympy printing style.

use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use super::{Equation, Expr, FuncKind, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("name `{0}` is not in the symbol table")]
    UnresolvedName(String),
}

type R = Result<String, RenderError>;

pub fn to_latex(e: &Expr, table: &SymbolTable) -> R {
    Printer { table }.expr(e)
}

pub fn equation_to_latex(eq: &Equation, table: &SymbolTable) -> R {
    let p = Printer { table };
    Ok(format!("{} = {}", p.expr(&eq.lhs)?, p.expr(&eq.rhs)?))
}

struct Printer<'a> {
    table: &'a SymbolTable,
}

fn number(n: &BigRational) -> String {
    if n.is_integer() {
        n.to_integer().to_string()
    } else {
        let body = format!("\\frac{{{}}}{{{}}}", n.numer().abs(), n.denom());
        if n.is_negative() {
            format!("- {body}")
        } else {
            body
        }
    }
}

impl Printer<'_> {
    fn name(&self, n: &str) -> R {
        self.table
            .latex_of(n)
            .map(str::to_string)
            .ok_or_else(|| RenderError::UnresolvedName(n.to_string()))
    }

    fn expr(&self, e: &Expr) -> R {
        match e {
            Expr::Number(n) => Ok(number(n)),
            Expr::Symbol(s) => self.name(s),
            Expr::Add(terms) => self.add(terms),
            Expr::Mul(_) => self.mul(e),
            Expr::Pow(b, x) => self.pow(b, x),
            Expr::Func(k, a) => self.func(*k, a),
            Expr::Apply(name, args) => {
                let args: Result<Vec<String>, _> = args.iter().map(|a| self.expr(a)).collect();
                Ok(format!("{}{{({})}}", self.name(name)?, args?.join(",")))
            }
            Expr::Derivative(body, var, order) => {
                let v = self.name(var)?;
                let partial = e.free_variables().len() > 1;
                let d = if partial { "\\partial" } else { "d" };
                let op = if *order == 1 {
                    format!("\\frac{{{d}}}{{{d} {v}}}")
                } else {
                    format!("\\frac{{{d}^{{{order}}}}}{{{d} {v}^{{{order}}}}}")
                };
                let inner = self.expr(body)?;
                let wrap = matches!(body.as_ref(), Expr::Add(_)) || body.is_negative_term();
                Ok(if wrap {
                    format!("{op} ({inner})")
                } else {
                    format!("{op} {inner}")
                })
            }
            Expr::Integral(body, var) => {
                let v = self.name(var)?;
                let inner = self.expr(body)?;
                let wrap = matches!(body.as_ref(), Expr::Add(_)) || body.is_negative_term();
                Ok(if wrap {
                    format!("\\int ({inner}) d{v}")
                } else {
                    format!("\\int {inner} d{v}")
                })
            }
        }
    }

    fn add(&self, terms: &[Expr]) -> R {
        // Numbers print last, as in "x + 1".
        let ordered = terms
            .iter()
            .filter(|t| !t.is_number())
            .chain(terms.iter().filter(|t| t.is_number()));
        let mut out = String::new();
        for (i, t) in ordered.enumerate() {
            if t.is_negative_term() {
                let pos = self.expr(&negate(t))?;
                if i == 0 {
                    out.push_str(&format!("- {pos}"));
                } else {
                    out.push_str(&format!(" - {pos}"));
                }
            } else {
                let s = self.expr(t)?;
                if i > 0 {
                    out.push_str(" + ");
                }
                out.push_str(&s);
            }
        }
        Ok(out)
    }

    fn mul(&self, e: &Expr) -> R {
        let Expr::Mul(factors) = e else {
            return self.expr(e);
        };
        if e.is_negative_term() {
            return Ok(format!("- {}", self.expr(&negate(e))?));
        }
        let mut num_factors: Vec<Expr> = Vec::new();
        let mut den_factors: Vec<Expr> = Vec::new();
        for f in factors {
            match f {
                Expr::Number(n) => {
                    if !n.numer().is_one() {
                        num_factors.push(Expr::Number(BigRational::from_integer(n.numer().clone())));
                    }
                    if !n.denom().is_one() {
                        den_factors.push(Expr::Number(BigRational::from_integer(n.denom().clone())));
                    }
                }
                Expr::Pow(b, x) if x.is_negative_term() && !b.is_number() => {
                    den_factors.push(super::canonicalize(&Expr::pow(b.as_ref().clone(), negate(x))));
                }
                other => num_factors.push(other.clone()),
            }
        }
        let coeff = e.as_number().cloned().or_else(|| factors[0].as_number().cloned());
        if let Some(c) = coeff.filter(|c| !c.denom().is_one()) {
            if den_factors.iter().any(|f| matches!(f, Expr::Add(_))) {
                // `\frac{x}{2 (a + b)}` would parse back with the 2 spread
                // over the sum, so the coefficient is printed on its own.
                let rest = Expr::Mul(factors[1..].to_vec());
                let rest = if factors.len() == 2 { factors[1].clone() } else { rest };
                return Ok(format!("{} {}", number(&c), self.mul(&rest)?));
            }
        }
        let num = self.product(&num_factors)?;
        if den_factors.is_empty() {
            return Ok(num);
        }
        let num = if num.is_empty() { "1".to_string() } else { num };
        let den = self.product(&den_factors)?;
        Ok(format!("\\frac{{{num}}}{{{den}}}"))
    }

    fn product(&self, factors: &[Expr]) -> R {
        let many = factors.len() > 1;
        let mut parts = Vec::with_capacity(factors.len());
        for (i, f) in factors.iter().enumerate() {
            let s = self.expr(f)?;
            let last = i + 1 == factors.len();
            let wrap = match f {
                Expr::Add(_) => many,
                Expr::Derivative(..) | Expr::Integral(..) => !last,
                Expr::Mul(_) => true,
                Expr::Number(n) => n.is_negative() && i > 0,
                _ => false,
            };
            parts.push(if wrap { format!("({s})") } else { s });
        }
        Ok(parts.join(" "))
    }

    fn pow(&self, base: &Expr, exp: &Expr) -> R {
        // A numeric base only survives canonicalization with a negative
        // exponent when it is zero, and `\frac{1}{0^{2}}` would fold to
        // `\frac{1}{0}`, so such powers are printed as they are.
        if exp.is_negative_term() && !base.is_number() {
            let inv = super::canonicalize(&Expr::pow(base.clone(), negate(exp)));
            return Ok(format!("\\frac{{1}}{{{}}}", self.expr(&inv)?));
        }
        let b = self.expr(base)?;
        let wrap = match base {
            Expr::Add(_)
            | Expr::Mul(_)
            | Expr::Pow(..)
            | Expr::Derivative(..)
            | Expr::Integral(..)
            | Expr::Func(..)
            | Expr::Apply(..) => true,
            Expr::Number(n) => n.is_negative() || !n.is_integer(),
            Expr::Symbol(_) => b.contains('^'),
        };
        let b = if wrap { format!("({b})") } else { b };
        Ok(format!("{b}^{{{}}}", self.expr(exp)?))
    }

    fn func(&self, kind: FuncKind, arg: &Expr) -> R {
        let a = self.expr(arg)?;
        Ok(match kind {
            FuncKind::Exp => format!("e^{{{a}}}"),
            FuncKind::Sin => format!("\\sin{{({a})}}"),
            FuncKind::Cos => format!("\\cos{{({a})}}"),
            FuncKind::Log => format!("\\log{{({a})}}"),
        })
    }
}

fn negate(e: &Expr) -> Expr {
    Expr::neg(e.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> SymbolTable {
        SymbolTable::default()
    }

    #[test]
    fn integral_of_log() {
        let xp = Expr::sym("x^\\prime");
        let e = Expr::integral(Expr::log(xp), "x^\\prime");
        assert_eq!(to_latex(&e, &t()).unwrap(), "\\int \\log{(x^\\prime)} dx^\\prime");
    }

    #[test]
    fn zero_and_power() {
        assert_eq!(to_latex(&Expr::int(0), &t()).unwrap(), "0");
        let e = Expr::pow(Expr::sym("\\hat{X}"), Expr::sym("t"));
        assert_eq!(to_latex(&e, &t()).unwrap(), "\\hat{X}^{t}");
    }

    #[test]
    fn reciprocal_and_fractions() {
        let e = Expr::pow(Expr::sym("P_{e}"), Expr::int(-1));
        assert_eq!(to_latex(&e, &t()).unwrap(), "\\frac{1}{P_{e}}");
        let j = Expr::sym("\\mathbf{J}");
        let e = Expr::add([
            Expr::mul([Expr::rational(1, 2), Expr::pow(j.clone(), Expr::int(2))]),
            Expr::mul([j, Expr::sym("\\mathbf{v}")]),
            Expr::sym("f"),
        ]);
        assert_eq!(
            to_latex(&e, &t()).unwrap(),
            "f + \\frac{\\mathbf{J}^{2}}{2} + \\mathbf{J} \\mathbf{v}"
        );
    }

    #[test]
    fn golden_prompt_pieces() {
        let a = Expr::sym("a");
        let q = Expr::apply("q", vec![a.clone()]);
        let e = Expr::add([Expr::neg(Expr::exp(a.clone())), Expr::derivative(q, "a", 1)]);
        assert_eq!(to_latex(&e, &t()).unwrap(), "- e^{a} + \\frac{d}{d a} q{(a)}");
        let g = Expr::exp(Expr::apply("G", vec![a]));
        assert_eq!(to_latex(&g, &t()).unwrap(), "e^{G{(a)}}");
    }

    #[test]
    fn partial_when_several_variables() {
        let xp = Expr::sym("x^\\prime");
        let body = Expr::add([
            Expr::sym("n_{2}"),
            Expr::mul([xp.clone(), Expr::log(xp.clone())]),
            Expr::neg(xp.clone()),
        ]);
        let e = Expr::derivative(body, "x^\\prime", 1);
        assert_eq!(
            to_latex(&e, &t()).unwrap(),
            "\\frac{\\partial}{\\partial x^\\prime} (n_{2} - x^\\prime + x^\\prime \\log{(x^\\prime)})"
        );
    }

    #[test]
    fn unresolved_name_errors() {
        let e = Expr::sym("nope");
        assert_eq!(to_latex(&e, &t()), Err(RenderError::UnresolvedName("nope".into())));
    }

    #[test]
    fn operatorname_functions() {
        let e = Expr::apply("v_{y}", vec![Expr::sym("L")]);
        assert_eq!(to_latex(&e, &t()).unwrap(), "\\operatorname{v_{y}}{(L)}");
    }
}
