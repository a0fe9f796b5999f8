//! Recursive-descent parser for the expression DSL.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | name '(' expr ')' | name '\'' '(' expr ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;

use super::error::{ParseError, SymError};
use super::expr::{Expr, Rational};
use crate::geometry::JetContext;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Name(String),
    Op(char),
    Prime,
    LParen,
    RParen,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &text[fs..i];
            }
            let digits = format!("{int_part}{frac_part}");
            let numer: BigInt =
                digits.parse().map_err(|_| ParseError::Syntax { pos: start, message: "malformed number".into() })?;
            let denom = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push((Tok::Num(Rational::new(numer, denom)), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Name(text[start..i].to_string()), start));
            continue;
        }
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'\'' => Tok::Prime,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax { pos: i, message: format!("unexpected character `{ch}`") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    ctx: &'a JetContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax { pos: self.pos(), message: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut parts = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    parts.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    parts.push(-self.term()?);
                }
                _ => return Ok(Expr::sum(parts)),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Op('/') => {
                    let pos = self.bump().1;
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|source| ParseError::Algebra { pos, source })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        let pos = self.bump().1;
        let exp_pos = self.pos();
        let exponent = self.unary()?;
        let Some(r) = exponent.as_constant() else {
            return Err(ParseError::Algebra {
                pos: exp_pos,
                source: SymError::NonConstantExponent(exponent.to_string()),
            });
        };
        base.pow(&r).map_err(|source| ParseError::Algebra { pos, source })
    }

    fn parenthesized(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(r) => Ok(Expr::constant(r)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Name(name) => self.named(name, pos),
            Tok::End => Err(ParseError::Syntax { pos, message: "unexpected end of input".into() }),
            other => Err(ParseError::Syntax { pos, message: format!("unexpected token {other:?}") }),
        }
    }

    fn named(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        match name.as_str() {
            "pi" => return Ok(Expr::pi()),
            "sin" => return Ok(Expr::sin(self.parenthesized()?)),
            "cos" => return Ok(Expr::cos(self.parenthesized()?)),
            "exp" => return Ok(Expr::exp(self.parenthesized()?)),
            "sqrt" => {
                let arg = self.parenthesized()?;
                return arg.sqrt().map_err(|source| ParseError::Algebra { pos, source });
            }
            _ => {}
        }
        if self.ctx.has_function(&name) {
            if *self.peek() == Tok::Prime {
                self.bump();
                return Ok(Expr::opaque_derivative(&name, self.parenthesized()?));
            }
            return Ok(Expr::opaque(&name, self.parenthesized()?));
        }
        Ok(Expr::symbol(self.ctx.resolve(&name, pos)?))
    }
}

/// Parses `text` into a normalized expression over the coordinates of `ctx`.
pub fn parse(text: &str, ctx: &JetContext) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, ctx };
    if *p.peek() == Tok::End {
        return Err(ParseError::Syntax { pos: 0, message: "empty expression".into() });
    }
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Syntax { pos: p.pos(), message: "trailing input".into() });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::Symbol;

    fn ctx3() -> JetContext {
        JetContext::new(3, 1).unwrap().with_function("F").unwrap().with_param("m").unwrap()
    }

    #[test]
    fn parses_wave_lagrangian() {
        let ctx = ctx3();
        let l = parse("1/2*(v1_1^2 - v1_2^2 - v1_3^2)", &ctx).unwrap();
        let v = |a| Expr::symbol(Symbol::v(1, a));
        let expected = Expr::ratio(1, 2) * (v(1) * v(1) - v(2) * v(2) - v(3) * v(3));
        assert_eq!(l, expected);
    }

    #[test]
    fn zero_and_cancellation() {
        let ctx = ctx3();
        assert!(parse("0", &ctx).unwrap().is_zero());
        assert!(parse("q1*v1_1 - v1_1*q1", &ctx).unwrap().is_zero());
    }

    #[test]
    fn decimals_are_exact() {
        let ctx = ctx3();
        assert_eq!(parse("0.25*q1", &ctx).unwrap(), parse("q1/4", &ctx).unwrap());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let ctx = ctx3();
        assert_eq!(parse("-q1^2", &ctx).unwrap(), -parse("q1*q1", &ctx).unwrap());
        assert_eq!(parse("q1^-1*q1", &ctx).unwrap(), Expr::one());
        assert_eq!(parse("2^3^2", &ctx).unwrap(), Expr::int(512));
    }

    #[test]
    fn opaque_functions_and_params() {
        let ctx = ctx3();
        let e = parse("F(q1) - 1/2*m^2*q1^2", &ctx).unwrap();
        let d = parse("F'(q1) - m^2*q1", &ctx).unwrap();
        assert_eq!(e.diff(&Symbol::q(1)).unwrap(), d);
    }

    #[test]
    fn print_parse_round_trip() {
        let ctx = ctx3();
        for text in [
            "sqrt(1 + v1_1^2 + v1_2^2)*(x1 + x2) - q1/(1 + v1_1^2)",
            "sin(x1*x2)^2 + cos(pi*x3) - exp(-q1)",
            "(x1^2)^(1/2) + 2^(1/2)*x1 + (-x2)^(1/3)",
            "F'(q1)*F(2*q1) - m^2",
        ] {
            let e = parse(text, &ctx).unwrap();
            let again = parse(&e.to_string(), &ctx).unwrap();
            assert_eq!(e, again, "{text} printed as {e}");
        }
    }

    #[test]
    fn reports_positions() {
        let ctx = ctx3();
        assert_eq!(
            parse("q1 + v1_4", &ctx),
            Err(ParseError::IndexOutOfRange { name: "v1_4".into(), pos: 5, detail: "context has k=3, n=1".into() })
        );
        assert_eq!(parse("q1 + y", &ctx), Err(ParseError::UnknownSymbol { name: "y".into(), pos: 5 }));
        assert!(matches!(parse("q1 +", &ctx), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("(q1", &ctx), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("q1 # 2", &ctx), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(
            parse("q1^x1", &ctx),
            Err(ParseError::Algebra { pos: 3, source: SymError::NonConstantExponent(_) })
        ));
        assert!(matches!(
            parse("1/(q1 - q1)", &ctx),
            Err(ParseError::Algebra { pos: 1, source: SymError::DivisionByZero })
        ));
    }
}
