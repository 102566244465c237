use crate::jets::Elementary;

use super::ast::{BinOp, Expr, Var};
use super::{DslError, ParameterEnv};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, DslError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let done = t.0 == Tok::End;
            out.push(t);
            if done {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), DslError> {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Op(c as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap();
        Err(DslError::SyntaxError { offset: start, message: format!("unexpected character `{ch}`") })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), DslError> {
        let digits = |lx: &mut Lexer| {
            let from = lx.pos;
            while lx.peek().is_some_and(|c| c.is_ascii_digit()) {
                lx.pos += 1;
            }
            lx.pos - from
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(DslError::SyntaxError { offset: start, message: "malformed number".into() });
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return Err(DslError::SyntaxError { offset: mark, message: "malformed exponent".into() });
            }
        }
        let text = &self.src[start..self.pos];
        let v = text
            .parse()
            .map_err(|_| DslError::SyntaxError { offset: start, message: format!("bad number `{text}`") })?;
        Ok((Tok::Num(v), start))
    }
}

struct Parser<'e> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    params: Option<&'e ParameterEnv>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::End {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self) -> Result<T, DslError> {
        let message = match self.peek() {
            Tok::End => "unexpected end of input".to_string(),
            Tok::Num(v) => format!("unexpected number {v}"),
            Tok::Ident(s) => format!("unexpected identifier `{s}`"),
            Tok::Op(c) => format!("unexpected `{c}`"),
        };
        Err(DslError::SyntaxError { offset: self.offset(), message })
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.unexpected()
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(match self.unary()? {
                Expr::Num(v) => Expr::Num(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            return Ok(Expr::bin(BinOp::Pow, base, self.unary()?));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let offset = self.offset();
                self.bump();
                if let Some(f) = Elementary::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::call(f, arg));
                }
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::Var(v));
                }
                if let Some(env) = self.params {
                    if !env.contains(&name) {
                        return Err(DslError::UnknownIdentifier { name, offset });
                    }
                }
                Ok(Expr::Param(name))
            }
            _ => self.unexpected(),
        }
    }
}

fn run(text: &str, params: Option<&ParameterEnv>) -> Result<Expr, DslError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0, params };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.unexpected();
    }
    Ok(e)
}

/// Parses `text`, treating every non-reserved identifier as a parameter.
pub fn parse(text: &str) -> Result<Expr, DslError> {
    run(text, None)
}

/// Parses `text`; identifiers must be reserved names or keys of `params`.
pub fn parse_with_params(text: &str, params: &ParameterEnv) -> Result<Expr, DslError> {
    run(text, Some(params))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Expr {
        Expr::Var(Var::Z)
    }

    #[test]
    fn sqrt_of_polynomial() {
        let e = parse("sqrt(z^2+1)").unwrap();
        let want = Expr::call(
            Elementary::Sqrt,
            Expr::bin(BinOp::Add, Expr::bin(BinOp::Pow, z(), Expr::Num(2.0)), Expr::Num(1.0)),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn parameter_references() {
        let env = ParameterEnv::new().with("k", 1.0).unwrap().with("a", 1.0).unwrap().with("b", 1.0).unwrap();
        let e = parse_with_params("k*exp(b*arctan((z+a*b)/a))", &env).unwrap();
        assert_eq!(e.parameter_refs(), vec!["k", "b", "a", "b", "a"]);
        let mut distinct = e.parameter_refs();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn stray_unary_plus() {
        assert_eq!(parse("2*+z").unwrap_err(), DslError::SyntaxError { offset: 2, message: "unexpected `+`".into() });
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_with_params("z + q", &ParameterEnv::new()).unwrap_err();
        assert_eq!(err, DslError::UnknownIdentifier { name: "q".into(), offset: 4 });
    }

    #[test]
    fn no_implicit_multiplication() {
        assert!(matches!(parse("2z"), Err(DslError::SyntaxError { offset: 1, .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-z^2").unwrap(), Expr::Neg(Box::new(parse("z^2").unwrap())));
        assert_eq!(parse("2^3^2").unwrap(), parse("2^(3^2)").unwrap());
        assert_eq!(parse("1-2-3").unwrap(), parse("(1-2)-3").unwrap());
        assert_eq!(parse("z^-1").unwrap(), Expr::bin(BinOp::Pow, z(), Expr::Num(-1.0)));
        assert_eq!(parse(" 1 +\tz*2 ").unwrap(), parse("1+(z*2)").unwrap());
    }

    #[test]
    fn errors_report_offsets() {
        assert!(matches!(parse("(z+1"), Err(DslError::SyntaxError { offset: 4, .. })));
        assert!(matches!(parse("sqrt z"), Err(DslError::SyntaxError { offset: 5, .. })));
        assert!(matches!(parse("z $ 1"), Err(DslError::SyntaxError { offset: 2, .. })));
        assert!(matches!(parse("1e+"), Err(DslError::SyntaxError { offset: 1, .. })));
        assert!(matches!(parse(""), Err(DslError::SyntaxError { offset: 0, .. })));
    }

    #[test]
    fn printer_round_trip() {
        for text in ["sqrt(z^2+1)+0.5*z", "-x0*r/(s-2.5e-3)", "exp(-(z-1)^2)*cos(r)^3", "k*log(2+z)-(-1)"] {
            let e = parse(text).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{text}");
        }
    }
}
