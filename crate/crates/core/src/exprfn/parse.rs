//! Pratt parser for the expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, `* /`, unary `-`, `^`
//! (right-associative). Function calls and parentheses are primaries.

use super::{BinOp, Expr, Func1, Func2, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            let start = self.pos;
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                    continue;
                }
                b'+' => out.push((Tok::Plus, start)),
                b'-' => out.push((Tok::Minus, start)),
                b'*' => out.push((Tok::Star, start)),
                b'/' => out.push((Tok::Slash, start)),
                b'^' => out.push((Tok::Caret, start)),
                b'(' => out.push((Tok::LParen, start)),
                b')' => out.push((Tok::RParen, start)),
                b',' => out.push((Tok::Comma, start)),
                b'0'..=b'9' | b'.' => {
                    out.push((self.lex_number()?, start));
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while self.pos < self.bytes.len()
                        && (self.bytes[self.pos].is_ascii_alphanumeric()
                            || self.bytes[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    out.push((Tok::Ident(self.src[start..self.pos].to_string()), start));
                    continue;
                }
                other => {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    });
                }
            }
            self.pos += 1;
        }
        Ok(out)
    }

    fn lex_number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        // Exponent part, e.g. 1e-9 or 2.5E3.
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. `2e` would be `2 * e`?
                // There is no `e` constant, so leave it for the ident lexer
                // to reject with a clear offset).
                self.pos = mark;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("invalid numeric literal `{text}`"),
        })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn err(&self, message: String) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn expr_bp(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = match self.bump() {
            Some(Tok::Num(v)) => Expr::Num(v),
            Some(Tok::Ident(name)) => self.ident(name)?,
            Some(Tok::Minus) => {
                // Unary minus binds tighter than * / but looser than ^.
                let rhs = self.expr_bp(5)?;
                Expr::Neg(Box::new(rhs))
            }
            Some(Tok::LParen) => {
                let e = self.expr_bp(0)?;
                self.expect(Tok::RParen, "`)`")?;
                e
            }
            Some(tok) => {
                self.pos -= 1;
                return Err(self.err(format!("unexpected token {tok:?}")));
            }
            None => return Err(self.err("unexpected end of input".into())),
        };
        loop {
            let (op, l_bp, r_bp) = match self.peek() {
                Some(Tok::Plus) => (BinOp::Add, 1, 2),
                Some(Tok::Minus) => (BinOp::Sub, 1, 2),
                Some(Tok::Star) => (BinOp::Mul, 3, 4),
                Some(Tok::Slash) => (BinOp::Div, 3, 4),
                Some(Tok::Caret) => (BinOp::Pow, 8, 7),
                _ => break,
            };
            if l_bp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr_bp(r_bp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn ident(&mut self, name: String) -> Result<Expr, ParseError> {
        let ident_offset = self.toks[self.pos - 1].1;
        if name == "x" {
            return Ok(Expr::Var);
        }
        let arity1 = match name.as_str() {
            "ln" => Some(Func1::Ln),
            "log2" => Some(Func1::Log2),
            "ceil" => Some(Func1::Ceil),
            "floor" => Some(Func1::Floor),
            "sqrt" => Some(Func1::Sqrt),
            _ => None,
        };
        let arity2 = match name.as_str() {
            "log" => Some(Func2::Log),
            "max" => Some(Func2::Max),
            "min" => Some(Func2::Min),
            _ => None,
        };
        if arity1.is_none() && arity2.is_none() {
            return Err(ParseError::UnknownIdent {
                offset: ident_offset,
                name,
            });
        }
        self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
        let first = self.expr_bp(0)?;
        if let Some(f) = arity1 {
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Call1(f, Box::new(first)));
        }
        let f = arity2.unwrap();
        self.expect(Tok::Comma, &format!("`,` (`{name}` takes two arguments)"))?;
        let second = self.expr_bp(0)?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(Expr::Call2(f, Box::new(first), Box::new(second)))
    }
}

/// Parse an expression in the toolkit's grammar.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let toks = Lexer::new(text).tokens()?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = parser.expr_bp(0)?;
    if parser.pos != parser.toks.len() {
        return Err(parser.err("trailing input after expression".into()));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(
            parse_expr("1+2*3").unwrap(),
            Expr::Bin(
                BinOp::Add,
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Bin(
                    BinOp::Mul,
                    Box::new(Expr::Num(2.0)),
                    Box::new(Expr::Num(3.0)),
                )),
            )
        );
        // Left associativity of subtraction.
        assert_eq!(
            parse_expr("5-2-1").unwrap().eval(0.0).unwrap(),
            2.0
        );
        // Unary minus below ^.
        assert_eq!(parse_expr("-2^2").unwrap().eval(0.0).unwrap(), -4.0);
        assert_eq!(parse_expr("2^-1").unwrap().eval(0.0).unwrap(), 0.5);
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse_expr("1e3").unwrap(), Expr::Num(1000.0));
        assert_eq!(parse_expr("2.5e-2").unwrap(), Expr::Num(0.025));
        assert_eq!(parse_expr("5e-324").unwrap(), Expr::Num(5e-324));
    }

    #[test]
    fn error_cases() {
        assert!(matches!(
            parse_expr(""),
            Err(ParseError::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            parse_expr("()"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expr("log(x)"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expr("sqrt(x, 2)"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expr("x y"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expr("y"),
            Err(ParseError::UnknownIdent { offset: 0, .. })
        ));
    }
}
