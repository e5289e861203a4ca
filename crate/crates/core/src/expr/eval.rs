use std::collections::HashMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::{Expr, FuncKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("symbol `{0}` has no binding")]
    UnboundSymbol(String),
    #[error("log of non-positive value {0}")]
    DomainError(f64),
    #[error("cannot evaluate {0} numerically")]
    Unevaluable(&'static str),
}

/// Evaluate `e` in double precision.
pub fn eval_numeric(e: &Expr, bindings: &HashMap<String, f64>) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Number(n) => n.to_f64().unwrap_or(f64::NAN),
        Expr::Symbol(s) => *bindings
            .get(s)
            .ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?,
        Expr::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_numeric(t, bindings)?;
            }
            acc
        }
        Expr::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_numeric(f, bindings)?;
            }
            acc
        }
        Expr::Pow(b, x) => {
            let b = eval_numeric(b, bindings)?;
            match x.as_number() {
                Some(n) if n.is_integer() && n.to_integer().to_i32().is_some() => {
                    b.powi(n.to_integer().to_i32().unwrap())
                }
                _ => b.powf(eval_numeric(x, bindings)?),
            }
        }
        Expr::Func(k, a) => {
            let a = eval_numeric(a, bindings)?;
            match k {
                FuncKind::Sin => a.sin(),
                FuncKind::Cos => a.cos(),
                FuncKind::Exp => a.exp(),
                FuncKind::Log => {
                    if a <= 0.0 {
                        return Err(EvalError::DomainError(a));
                    }
                    a.ln()
                }
            }
        }
        Expr::Apply(..) => return Err(EvalError::Unevaluable("an applied function")),
        Expr::Derivative(..) => return Err(EvalError::Unevaluable("a derivative")),
        Expr::Integral(..) => return Err(EvalError::Unevaluable("an integral")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn elementary_values() {
        let none = HashMap::new();
        assert_eq!(eval_numeric(&Expr::Func(FuncKind::Sin, Box::new(Expr::int(0))), &none).unwrap(), 0.0);
        let log_e = Expr::Func(FuncKind::Log, Box::new(Expr::Func(FuncKind::Exp, Box::new(Expr::int(1)))));
        assert!((eval_numeric(&log_e, &none).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn antiderivative_value() {
        // J^2/2 + J v + f at J=2, v=3, f=1.
        let j = Expr::sym("J");
        let e = Expr::add([
            Expr::mul([Expr::rational(1, 2), Expr::pow(j.clone(), Expr::int(2))]),
            Expr::mul([j, Expr::sym("v")]),
            Expr::sym("f"),
        ]);
        let v = eval_numeric(&e, &bind(&[("J", 2.0), ("v", 3.0), ("f", 1.0)])).unwrap();
        assert_eq!(v, 9.0);
    }

    #[test]
    fn errors_are_distinct() {
        let none = HashMap::new();
        assert_eq!(
            eval_numeric(&Expr::sym("q"), &none),
            Err(EvalError::UnboundSymbol("q".into()))
        );
        assert!(matches!(
            eval_numeric(&Expr::log(Expr::int(-1)), &none),
            Err(EvalError::DomainError(_))
        ));
        assert!(matches!(
            eval_numeric(&Expr::derivative(Expr::sym("x"), "x", 1), &none),
            Err(EvalError::Unevaluable(_))
        ));
    }
}
