//! Recursive-descent parser for the emitted LaTeX grammar.
//!
//! See `docs/latex-grammar.md` for the accepted language.

use thiserror::Error;

use super::{canonicalize, Equation, Expr, FuncKind, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown command `\\{name}` at byte {pos}")]
    UnknownCommand { pos: usize, name: String },
}

/// Commands accepted as (parts of) symbol names.
const SYMBOL_COMMANDS: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta", "theta", "vartheta",
    "iota", "kappa", "lambda", "mu", "nu", "xi", "pi", "varpi", "rho", "varrho", "sigma", "varsigma",
    "tau", "upsilon", "phi", "varphi", "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda",
    "Xi", "Pi", "Sigma", "Upsilon", "Phi", "Psi", "Omega", "hbar", "ell", "mathbf", "mathbb",
    "mathcal", "mathrm", "hat", "dot", "ddot", "bar", "tilde", "vec", "prime",
];

/// Commands that take one braced argument, e.g. `\mathbf{J}`.
const ACCENT_COMMANDS: &[&str] = &[
    "mathbf", "mathbb", "mathcal", "mathrm", "hat", "dot", "ddot", "bar", "tilde", "vec",
];

pub fn parse_latex(s: &str, table: &SymbolTable) -> Result<Expr, ParseError> {
    let mut p = Parser::new(s, table);
    let e = p.expr(false)?;
    p.ws();
    if !p.at_end() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(canonicalize(&e))
}

pub fn parse_equation(s: &str, table: &SymbolTable) -> Result<Equation, ParseError> {
    let mut p = Parser::new(s, table);
    let lhs = p.expr(false)?;
    p.ws();
    if !p.eat("=") {
        return Err(p.err("expected `=`"));
    }
    let rhs = p.expr(false)?;
    p.ws();
    if !p.at_end() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(Equation::new(lhs, rhs))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    patterns: Vec<(&'a str, &'a str)>,
}

type P<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(src: &'a str, table: &'a SymbolTable) -> Self {
        Parser {
            src,
            pos: 0,
            patterns: table.latex_patterns(),
        }
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn ws(&mut self) {
        loop {
            let r = self.rest();
            if let Some(c) = r.chars().next().filter(|c| c.is_whitespace()) {
                self.pos += c.len_utf8();
            } else if r.starts_with("\\,") || r.starts_with("\\;") || r.starts_with("\\!") {
                self.pos += 2;
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> P<()> {
        self.ws();
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{s}`")))
        }
    }

    /// Name of the command at the cursor (without the backslash), if any.
    fn command(&self) -> Option<&'a str> {
        let r = self.rest();
        let body = r.strip_prefix('\\')?;
        let len = body.chars().take_while(|c| c.is_ascii_alphabetic()).count();
        (len > 0).then(|| &body[..len])
    }

    /// `expr := ['-'] term (('+' | '-') term)*`
    fn expr(&mut self, int_mode: bool) -> P<Expr> {
        self.ws();
        let mut terms = Vec::new();
        let neg = self.eat("-");
        let first = self.term(int_mode)?;
        terms.push(if neg { Expr::neg(first) } else { first });
        loop {
            self.ws();
            if self.eat("+") {
                terms.push(self.term(int_mode)?);
            } else if self.eat("-") {
                terms.push(Expr::neg(self.term(int_mode)?));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn at_product_end(&self, int_mode: bool) -> bool {
        let r = self.rest();
        match r.chars().next() {
            None => true,
            Some('+' | '-' | '=' | '}' | ')' | ',' | '&') => true,
            Some('d') if int_mode => true,
            _ => r.starts_with("\\right"),
        }
    }

    /// Juxtaposed factors.
    fn term(&mut self, int_mode: bool) -> P<Expr> {
        let mut factors = Vec::new();
        loop {
            self.ws();
            if self.at_product_end(int_mode) {
                break;
            }
            if self.eat("\\cdot") || self.eat("\\times") {
                continue;
            }
            factors.push(self.factor(int_mode)?);
        }
        match factors.len() {
            0 => Err(self.err("expected an expression")),
            1 => Ok(factors.pop().unwrap()),
            _ => Ok(Expr::Mul(factors)),
        }
    }

    fn factor(&mut self, int_mode: bool) -> P<Expr> {
        let base = self.primary(int_mode)?;
        let save = self.pos;
        self.ws();
        if self.eat("^") {
            let exp = self.script()?;
            return Ok(Expr::pow(base, exp));
        }
        self.pos = save;
        Ok(base)
    }

    /// Superscript argument: `{expr}` or a single digit / letter.
    fn script(&mut self) -> P<Expr> {
        self.ws();
        if self.eat("{") {
            let e = self.expr(false)?;
            self.expect("}")?;
            return Ok(e);
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                self.pos += 1;
                Ok(Expr::int(c.to_digit(10).unwrap() as i64))
            }
            Some(_) => self.symbol_expr(),
            None => Err(self.err("expected exponent")),
        }
    }

    fn primary(&mut self, int_mode: bool) -> P<Expr> {
        self.ws();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Err(self.err("unexpected end of input"));
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr(false)?;
            self.expect(")")?;
            return Ok(e);
        }
        if c == '{' {
            self.pos += 1;
            let e = self.expr(false)?;
            self.expect("}")?;
            return Ok(e);
        }
        if c.is_ascii_digit() {
            let len = self.rest().chars().take_while(|c| c.is_ascii_digit()).count();
            let digits = &self.rest()[..len];
            self.pos += len;
            let n: num_bigint::BigInt = digits.parse().map_err(|_| self.err("bad number"))?;
            return Ok(Expr::Number(num_rational::BigRational::from_integer(n)));
        }
        if c == 'e' && self.rest()[1..].trim_start().starts_with('^') {
            self.pos += 1;
            self.ws();
            self.pos += 1;
            let arg = self.script()?;
            return Ok(Expr::exp(arg));
        }
        if let Some(cmd) = self.command() {
            match cmd {
                "left" => {
                    self.pos += 5;
                    self.expect("(")?;
                    let e = self.expr(false)?;
                    self.expect("\\right")?;
                    self.expect(")")?;
                    return Ok(e);
                }
                "frac" => {
                    self.pos += 5;
                    return self.frac(int_mode);
                }
                "int" => {
                    self.pos += 4;
                    return self.integral();
                }
                "sin" | "cos" | "log" | "exp" | "ln" => {
                    self.pos += 1 + cmd.len();
                    let kind = match cmd {
                        "sin" => FuncKind::Sin,
                        "cos" => FuncKind::Cos,
                        "exp" => FuncKind::Exp,
                        _ => FuncKind::Log,
                    };
                    let arg = self.call_args()?;
                    if arg.len() != 1 {
                        return Err(self.err("elementary functions take one argument"));
                    }
                    return Ok(Expr::func(kind, arg.into_iter().next().unwrap()));
                }
                "operatorname" => {
                    self.pos += 13;
                    self.expect("{")?;
                    let name_start = self.pos;
                    self.skip_balanced()?;
                    let name = self.src[name_start..self.pos - 1].to_string();
                    return self.maybe_call(name);
                }
                _ => {}
            }
            if !SYMBOL_COMMANDS.contains(&cmd) {
                return Err(ParseError::UnknownCommand {
                    pos: start,
                    name: cmd.to_string(),
                });
            }
        }
        if c.is_alphabetic() || c == '\\' {
            let name = self.symbol_name()?;
            return self.maybe_call(name);
        }
        Err(self.err(&format!("unexpected character `{c}`")))
    }

    /// Consume up to and including the `}` matching an already-consumed `{`.
    fn skip_balanced(&mut self) -> P<()> {
        let mut depth = 1usize;
        while let Some(c) = self.peek() {
            self.pos += c.len_utf8();
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        Err(self.err("unbalanced braces"))
    }

    /// `{(a, b)}` or `(a, b)` argument list.
    fn call_args(&mut self) -> P<Vec<Expr>> {
        self.ws();
        let braced = self.eat("{");
        self.ws();
        let left = self.eat("\\left");
        self.expect("(")?;
        let mut args = vec![self.expr(false)?];
        loop {
            self.ws();
            if self.eat(",") {
                args.push(self.expr(false)?);
            } else {
                break;
            }
        }
        if left {
            self.expect("\\right")?;
        }
        self.expect(")")?;
        if braced {
            self.expect("}")?;
        }
        Ok(args)
    }

    fn maybe_call(&mut self, name: String) -> P<Expr> {
        if self.rest().starts_with("{(") || self.rest().starts_with("{\\left(") {
            let args = self.call_args()?;
            return Ok(Expr::Apply(name, args));
        }
        Ok(Expr::Symbol(name))
    }

    fn symbol_expr(&mut self) -> P<Expr> {
        let name = self.symbol_name()?;
        Ok(Expr::Symbol(name))
    }

    /// Longest of: a vocabulary LaTeX spelling, or the generic
    /// `letter-or-command [_sub] [^\prime]` form.
    fn symbol_name(&mut self) -> P<String> {
        let r = self.rest();
        let generic = self.generic_symbol_len();
        let mut best: Option<(usize, &str)> = None;
        for (latex, name) in &self.patterns {
            if latex.len() < generic.unwrap_or(0) {
                break;
            }
            if r.starts_with(latex) && !splits_command(latex, &r[latex.len()..]) {
                best = Some((latex.len(), *name));
                break;
            }
        }
        match (best, generic) {
            (Some((len, name)), g) if len >= g.unwrap_or(0) => {
                self.pos += len;
                Ok(name.to_string())
            }
            (_, Some(len)) => {
                let name = r[..len].to_string();
                self.pos += len;
                Ok(name)
            }
            _ => Err(self.err("expected a symbol")),
        }
    }

    fn generic_symbol_len(&self) -> Option<usize> {
        let r = self.rest();
        let mut i = atom_len(r)?;
        if r[i..].starts_with('_') {
            let sub = &r[i + 1..];
            let l = if sub.starts_with('{') {
                balanced_len(sub)?
            } else {
                atom_len(sub)?
            };
            i += 1 + l;
        }
        for prime in ["^\\prime", "^{\\prime}"] {
            if r[i..].starts_with(prime) && !splits_command(prime, &r[i + prime.len()..]) {
                i += prime.len();
                break;
            }
        }
        Some(i)
    }

    /// After `\frac`: a derivative operator or an ordinary fraction.
    fn frac(&mut self, int_mode: bool) -> P<Expr> {
        self.expect("{")?;
        self.ws();
        let save = self.pos;
        if let Some(op) = self.derivative_op()? {
            let (var, order) = op;
            self.ws();
            let neg = self.eat("-");
            let body = self.term(int_mode)?;
            let body = if neg { Expr::neg(body) } else { body };
            return Ok(Expr::derivative(body, var, order));
        }
        self.pos = save;
        let num = self.expr(false)?;
        self.expect("}")?;
        self.expect("{")?;
        let den = self.expr(false)?;
        self.expect("}")?;
        Ok(Expr::Mul(vec![num, Expr::pow(den, Expr::int(-1))]))
    }

    /// Tries `d}{d x}` / `\partial^{n}}{\partial x^{n}}` after `\frac{`.
    fn derivative_op(&mut self) -> P<Option<(String, u32)>> {
        let d = if self.rest().starts_with("\\partial") {
            "\\partial"
        } else if self.rest().starts_with('d')
            && matches!(self.rest()[1..].trim_start().chars().next(), Some('}' | '^'))
        {
            "d"
        } else {
            return Ok(None);
        };
        self.pos += d.len();
        let order = self.order()?;
        self.expect("}")?;
        self.expect("{")?;
        self.ws();
        if !self.eat(d) {
            return Err(self.err("malformed derivative denominator"));
        }
        self.ws();
        let var = self.symbol_name()?;
        let order2 = self.order()?;
        if order != order2 {
            return Err(self.err("derivative orders disagree"));
        }
        self.expect("}")?;
        Ok(Some((var, order)))
    }

    fn order(&mut self) -> P<u32> {
        self.ws();
        if !self.eat("^") {
            return Ok(1);
        }
        self.ws();
        let braced = self.eat("{");
        self.ws();
        let len = self.rest().chars().take_while(|c| c.is_ascii_digit()).count();
        let n: u32 = self.rest()[..len].parse().map_err(|_| self.err("bad derivative order"))?;
        self.pos += len;
        if braced {
            self.expect("}")?;
        }
        if n == 0 {
            return Err(self.err("derivative order must be positive"));
        }
        Ok(n)
    }

    fn integral(&mut self) -> P<Expr> {
        self.ws();
        let body = self.term(true)?;
        self.ws();
        if !self.eat("d") {
            return Err(self.err("expected integration variable"));
        }
        self.ws();
        let var = self.symbol_name()?;
        Ok(Expr::integral(body, var))
    }
}

/// Length of a single letter or a `\command` with its `{...}` arguments.
fn atom_len(r: &str) -> Option<usize> {
    let c = r.chars().next()?;
    if c.is_alphabetic() {
        return Some(c.len_utf8());
    }
    let body = r.strip_prefix('\\')?;
    let n = body.chars().take_while(|c| c.is_ascii_alphabetic()).count();
    if n == 0 || !SYMBOL_COMMANDS.contains(&&body[..n]) {
        return None;
    }
    let mut i = 1 + n;
    if ACCENT_COMMANDS.contains(&&body[..n]) {
        if !r[i..].starts_with('{') {
            return None;
        }
        i += balanced_len(&r[i..])?;
    }
    Some(i)
}

/// Length of a `{...}` group including both braces.
fn balanced_len(r: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in r.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// True when `latex` ends inside a longer command name, e.g. `\phi` in `\phial`.
fn splits_command(latex: &str, after: &str) -> bool {
    let ends_alpha = latex.chars().last().is_some_and(|c| c.is_ascii_alphabetic());
    let tail_is_command = latex.rfind('\\').is_some_and(|i| {
        latex[i + 1..].chars().all(|c| c.is_ascii_alphabetic())
    });
    ends_alpha && tail_is_command && after.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::to_latex;

    fn t() -> SymbolTable {
        SymbolTable::default()
    }

    #[test]
    fn reciprocal() {
        let e = parse_latex("\\frac{1}{P_{e}}", &t()).unwrap();
        assert_eq!(e, Expr::pow(Expr::sym("P_{e}"), Expr::int(-1)));
    }

    #[test]
    fn zero() {
        assert_eq!(parse_latex("0", &t()).unwrap(), Expr::int(0));
    }

    #[test]
    fn derivative_forms() {
        let e = parse_latex("\\frac{d}{d a} q{(a)}", &t()).unwrap();
        assert_eq!(e, Expr::derivative(Expr::apply("q", vec![Expr::sym("a")]), "a", 1));
        let e = parse_latex("\\frac{d^{2}}{d x^{2}} \\sin{(x)}", &t()).unwrap();
        assert_eq!(e, Expr::derivative(Expr::sin(Expr::sym("x")), "x", 2));
    }

    #[test]
    fn integral_body_stops_at_differential() {
        let e = parse_latex("\\int \\frac{d}{d P_{e}} \\log{(P_{e})} dP_{e}", &t()).unwrap();
        let p = Expr::sym("P_{e}");
        assert_eq!(
            e,
            Expr::integral(Expr::derivative(Expr::log(p), "P_{e}", 1), "P_{e}")
        );
    }

    #[test]
    fn operatorname_call() {
        let e = parse_latex("\\operatorname{t_{1}}{(x^\\prime,n_{2})}", &t()).unwrap();
        assert_eq!(
            e,
            Expr::apply("t_{1}", vec![Expr::sym("x^\\prime"), Expr::sym("n_{2}")])
        );
    }

    #[test]
    fn generic_symbols() {
        let e = parse_latex("\\chi + e^{\\Psi_{\\lambda}}", &t()).unwrap();
        assert_eq!(
            e,
            Expr::add([Expr::sym("\\chi"), Expr::exp(Expr::sym("\\Psi_{\\lambda}"))])
        );
        let e = parse_latex("g_{7}", &t()).unwrap();
        assert_eq!(e, Expr::sym("g_{7}"));
    }

    #[test]
    fn unknown_command() {
        let err = parse_latex("\\sqrt{x}", &t()).unwrap_err();
        assert!(matches!(err, ParseError::UnknownCommand { pos: 0, .. }));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_latex("x + ", &t()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: 4, .. }));
    }

    #[test]
    fn round_trip_examples() {
        let table = t();
        for s in [
            "\\frac{d}{d x^\\prime} \\phi{(x^\\prime)}",
            "- e^{a} + \\frac{d}{d a} q{(a)}",
            "e^{G{(a)}}",
            "\\hat{X}^{t} \\log{(\\hat{X})}",
            "W + \\frac{q}{B}",
            "(F_{g} + \\sin{(\\mathbf{J})})^{F_{g}}",
            "\\int (x + y) dx",
            "\\frac{x}{2} - 3",
        ] {
            let e = parse_latex(s, &table).unwrap();
            let back = to_latex(&e, &table).unwrap();
            assert_eq!(parse_latex(&back, &table).unwrap(), e, "{s} -> {back}");
        }
    }
}
