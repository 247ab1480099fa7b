//! Recursive-descent parser.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^` (right
//! associative). `pow(a, b)` is accepted as a spelling of `a ^ b`. A minus
//! sign directly in front of a numeric literal folds into the literal.

use std::fmt;

use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {}", .expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String> },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("empty expression")]
    Empty,
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownFunction { offset, .. } => Some(*offset),
            ParseError::Empty => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(u8),
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(_) => f.write_str("number"),
            Tok::Ident(_) => f.write_str("identifier"),
            Tok::Op(c) => write!(f, "`{}`", *c as char),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => self.number(start)?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["expression".into()],
                })
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError::Syntax {
                offset: start,
                expected: vec!["digit".into()],
            });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2e` followed by something else: not an exponent
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError::Syntax {
            offset: start,
            expected: vec!["number".into()],
        })
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (t, at) = self.lex.next()?;
        self.tok = t;
        self.at = at;
        Ok(())
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.at,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.tok == t {
            self.bump()
        } else {
            self.fail(&[&t.to_string()])
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ (b'+' | b'-')) = self.tok {
            self.bump()?;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ (b'*' | b'/')) = self.tok {
            self.bump()?;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Op(b'-') {
            self.bump()?;
            if self.tok == Tok::Op(b'-') {
                return Ok(Expr::neg(self.unary()?));
            }
            let (operand, literal) = self.power()?;
            return Ok(match (operand, literal) {
                (Expr::Const(c), true) => Expr::Const(-c),
                (e, _) => Expr::neg(e),
            });
        }
        self.power().map(|(e, _)| e)
    }

    /// Returns the parsed operand and whether it was a bare numeric literal.
    fn power(&mut self) -> Result<(Expr, bool), ParseError> {
        let (base, literal) = self.primary()?;
        if self.tok == Tok::Op(b'^') {
            self.bump()?;
            let exp = self.unary()?;
            return Ok((Expr::pow(base, exp), false));
        }
        Ok((base, literal))
    }

    fn primary(&mut self) -> Result<(Expr, bool), ParseError> {
        match self.tok.clone() {
            Tok::Num(c) => {
                self.bump()?;
                Ok((Expr::Const(c), true))
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                if self.tok != Tok::LParen {
                    return Ok((Expr::var(&name), false));
                }
                self.bump()?;
                if name == "pow" {
                    let a = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let b = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok((Expr::pow(a, b), false));
                }
                let f = Func::from_name(&name).ok_or(ParseError::UnknownFunction { name, offset: at })?;
                let a = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok((Expr::call(f, a), false))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok((e, false))
            }
            _ => self.fail(&["number", "identifier", "`(`", "`-`"]),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        lex: Lexer {
            src: text.as_bytes(),
            pos: 0,
        },
        tok: Tok::End,
        at: 0,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        let ops = ["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"];
        return p.fail(&ops);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }
    fn c(x: f64) -> Expr {
        Expr::Const(x)
    }

    #[test]
    fn oscillator_lagrangian_shape() {
        let e = parse("v^2/2 - q^2/2").unwrap();
        let want = Expr::binary(
            BinOp::Sub,
            Expr::binary(BinOp::Div, Expr::pow(v("v"), c(2.0)), c(2.0)),
            Expr::binary(BinOp::Div, Expr::pow(v("q"), c(2.0)), c(2.0)),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn parachute_potential_parses() {
        let e = parse("m*g/(2*gamma)*(exp(2*gamma*y)-1)").unwrap();
        assert_eq!(e.free_vars().len(), 4);
    }

    #[test]
    fn unterminated_call_reports_offset() {
        let err = parse("sin(").unwrap_err();
        assert_eq!(err.offset(), Some(4));
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn unknown_function() {
        let err = parse("1 + foo(x)").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownFunction {
                name: "foo".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // unary minus binds looser than ^
        assert_eq!(parse("-x^2").unwrap(), Expr::neg(Expr::pow(v("x"), c(2.0))));
        assert_eq!(parse("-2^2").unwrap(), Expr::neg(Expr::pow(c(2.0), c(2.0))));
        assert_eq!(parse("-2").unwrap(), c(-2.0));
        // right associative power
        assert_eq!(
            parse("a^b^c").unwrap(),
            Expr::pow(v("a"), Expr::pow(v("b"), v("c")))
        );
        assert_eq!(parse("x^-2").unwrap(), Expr::pow(v("x"), c(-2.0)));
        // left associative subtraction and division
        assert_eq!(parse("a-b-c").unwrap(), (v("a") - v("b")) - v("c"));
        assert_eq!(parse("a/b/c").unwrap(), (v("a") / v("b")) / v("c"));
        assert_eq!(parse("-gamma*s").unwrap(), Expr::neg(v("gamma")) * v("s"));
        assert_eq!(parse("pow(x, 3)").unwrap(), Expr::pow(v("x"), c(3.0)));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("1.5e-3").unwrap(), c(1.5e-3));
        assert_eq!(parse(".25").unwrap(), c(0.25));
        assert_eq!(parse("3.").unwrap(), c(3.0));
        assert_eq!(parse("2E+2").unwrap(), c(200.0));
    }

    #[test]
    fn errors() {
        assert_eq!(parse("").unwrap_err(), ParseError::Empty);
        assert_eq!(parse("x +").unwrap_err().offset(), Some(3));
        assert_eq!(parse("x y").unwrap_err().offset(), Some(2));
        assert_eq!(parse("(x").unwrap_err().offset(), Some(2));
        assert_eq!(parse("x $ y").unwrap_err().offset(), Some(2));
        assert_eq!(parse("pow(x)").unwrap_err().offset(), Some(5));
    }

    #[test]
    fn canonical_round_trip() {
        for src in [
            "v^2/2 - q^2/2",
            "-(2)",
            "-(-2)",
            "-2*x + sin(-x)^-1.5",
            "m*g/(2*gamma)*(exp(2*gamma*y)-1)",
            "abs(x) - sign(y) + 1e-20*x + 3e20",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }
}
