use thiserror::Error;

use super::{BinOp, Expr, Func};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{message} at position {pos}")]
pub struct ParseError {
    /// Byte offset into the source.
    pub pos: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, integer: Option<i64> },
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(tok) = lx.next_token()? {
            out.push(tok);
        }
        Ok(out)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += self.peek().unwrap().len_utf8();
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = if c.is_ascii_digit() || c == '.' {
            self.number()?
        } else if c.is_ascii_alphabetic() || c == '_' {
            while self
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                self.pos += 1;
            }
            Tok::Ident(self.src[start..self.pos].to_string())
        } else {
            self.pos += c.len_utf8();
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ParseError {
                        pos: start,
                        message: format!("unexpected character '{c}'"),
                    })
                }
            }
        };
        Ok(Some((start, tok)))
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |lx: &mut Self| {
            while lx.pos < bytes.len() && bytes[lx.pos].is_ascii_digit() {
                lx.pos += 1;
            }
        };
        digits(self);
        let mut integer = true;
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            integer = false;
            self.pos += 1;
            digits(self);
        }
        if self.pos < bytes.len() && matches!(bytes[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && matches!(bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                integer = false;
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text.parse().map_err(|_| ParseError {
            pos: start,
            message: format!("malformed number '{text}'"),
        })?;
        let integer = if integer { text.parse::<i64>().ok() } else { None };
        Ok(Tok::Num { value, integer })
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

/// Parses an expression in `t`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(src)?;
    if toks.is_empty() {
        return Err(ParseError {
            pos: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks,
        idx: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if let Some((pos, tok)) = p.toks.get(p.idx) {
        let message = if *tok == Tok::RParen {
            "unbalanced parenthesis: unmatched ')'".to_string()
        } else {
            format!("unexpected token {}", describe(tok))
        };
        return Err(ParseError { pos: *pos, message });
    }
    Ok(e)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num { value, .. } => format!("number {value}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Op(c) => format!("operator '{c}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn unexpected<T>(&self) -> Result<T, ParseError> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(Tok::RParen) => self.err("unbalanced parenthesis: unexpected ')'"),
            Some(t) => self.err(format!("unexpected token {}", describe(t))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.bump();
            let k = self.exponent()?;
            if let Some(Tok::Op('^')) = self.peek() {
                return self.err("chained exponent; use parentheses");
            }
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = matches!(self.peek(), Some(Tok::LParen));
        if paren {
            self.bump();
        }
        let neg = matches!(self.peek(), Some(Tok::Op('-')));
        if neg {
            self.bump();
        }
        let k = match self.peek() {
            Some(Tok::Num {
                integer: Some(k), ..
            }) => {
                let k = i32::try_from(*k).or_else(|_| self.err("exponent out of range"))?;
                self.bump();
                if neg {
                    -k
                } else {
                    k
                }
            }
            Some(Tok::Num { .. }) => return self.err("exponent must be an integer literal"),
            None => return self.err("unexpected end of input"),
            Some(_) => return self.err("exponent must be an integer literal"),
        };
        if paren {
            match self.peek() {
                Some(Tok::RParen) => {
                    self.bump();
                }
                None => return self.err("unbalanced parenthesis: missing ')'"),
                Some(_) => return self.err("exponent must be an integer literal"),
            }
        }
        Ok(k)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num { value, .. }) => {
                self.bump();
                Ok(Expr::Const(value))
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                match name.as_str() {
                    "t" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Pi),
                    _ => match Func::from_name(&name) {
                        Some(f) => {
                            if !matches!(self.peek(), Some(Tok::LParen)) {
                                return self.err(format!("expected '(' after '{name}'"));
                            }
                            let arg = self.parenthesized()?;
                            Ok(Expr::Call(f, Box::new(arg)))
                        }
                        None => Err(ParseError {
                            pos: start,
                            message: format!("unknown identifier '{name}'"),
                        }),
                    },
                }
            }
            Some(Tok::LParen) => self.parenthesized(),
            _ => self.unexpected(),
        }
    }

    fn parenthesized(&mut self) -> Result<Expr, ParseError> {
        let open = self.pos();
        self.bump();
        let e = self.expr()?;
        match self.peek() {
            Some(Tok::RParen) => {
                self.bump();
                Ok(e)
            }
            None => Err(ParseError {
                pos: open,
                message: "unbalanced parenthesis: missing ')'".into(),
            }),
            Some(_) => self.unexpected(),
        }
    }
}
