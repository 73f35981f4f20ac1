use std::fmt;

use super::{BinOp, CmpOp, Cond, Expr, Func, Var};

/// Syntax error with its location in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset (0-based) where the problem was detected.
    pub offset: usize,
    /// Character column (1-based) on the offending line.
    pub column: usize,
    pub expected: String,
    pub found: String,
    /// The source line containing `offset`.
    pub excerpt: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "expected {}, found {} at column {}",
            self.expected, self.found, self.column
        )?;
        writeln!(f, "  {}", self.excerpt)?;
        write!(f, "  {}^", " ".repeat(self.column - 1))
    }
}

impl std::error::Error for ParseError {}

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
    Cmp(CmpOp),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
}

fn error_at(src: &str, offset: usize, expected: &str, found: String) -> ParseError {
    let line_start = src[..offset].rfind('\n').map_or(0, |i| i + 1);
    let line_end = src[offset..].find('\n').map_or(src.len(), |i| offset + i);
    ParseError {
        offset,
        column: src[line_start..offset].chars().count() + 1,
        expected: expected.to_string(),
        found,
        excerpt: src[line_start..line_end].to_string(),
    }
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'<' | b'>' | b'=' => {
                let eq_next = bytes.get(i + 1) == Some(&b'=');
                let op = match (c, eq_next) {
                    (b'<', true) => CmpOp::Le,
                    (b'<', false) => CmpOp::Lt,
                    (b'>', true) => CmpOp::Ge,
                    (b'>', false) => CmpOp::Gt,
                    _ => CmpOp::Eq,
                };
                if eq_next {
                    i += 1;
                }
                Tok::Cmp(op)
            }
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &src[i..j];
                let v: f64 = text
                    .parse()
                    .map_err(|_| error_at(src, i, "a number", format!("`{text}`")))?;
                if !v.is_finite() {
                    return Err(error_at(src, i, "a finite number", format!("`{text}`")));
                }
                i = j - 1;
                Tok::Num(v)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let name = src[i..j].to_string();
                i = j - 1;
                Tok::Ident(name)
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(error_at(src, i, "an expression token", format!("`{ch}`")));
            }
        };
        toks.push((tok, start));
        i += 1;
    }
    toks.push((Tok::End, src.len()));
    Ok(Lexed { toks })
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

/// Parses expression source text into an [`Expr`].
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let Lexed { toks } = lex(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error("an operator or end of input")),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        error_at(self.src, self.offset(), expected, self.peek().describe())
    }

    fn expect(&mut self, tok: Tok, shown: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(shown))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Number(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.offset();
                self.bump();
                match name.as_str() {
                    "x" => return Ok(Expr::Var(Var::X)),
                    "x1" => return Ok(Expr::Var(Var::X1)),
                    "x2" => return Ok(Expr::Var(Var::X2)),
                    _ => {}
                }
                if *self.peek() != Tok::LParen {
                    return Err(error_at(
                        self.src,
                        at,
                        "a variable (x, x1, x2) or a function call",
                        format!("`{name}`"),
                    ));
                }
                match name.as_str() {
                    "chi" => self.chi(),
                    "if" => self.piecewise(),
                    _ => match Func::from_name(&name) {
                        Some(func) => self.call(func, at),
                        None => Err(error_at(
                            self.src,
                            at,
                            "a known function (abs, log, exp, sqrt, loglog, min, max, chi, if)",
                            format!("`{name}`"),
                        )),
                    },
                }
            }
            _ => Err(self.error("an expression")),
        }
    }

    fn call(&mut self, func: Func, at: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        let ok = if func.is_variadic() {
            args.len() >= 2
        } else {
            args.len() == 1
        };
        if !ok {
            let want = if func.is_variadic() {
                "at least 2 arguments"
            } else {
                "exactly 1 argument"
            };
            return Err(error_at(
                self.src,
                at,
                &format!("{} for `{}`", want, func.name()),
                format!("{} arguments", args.len()),
            ));
        }
        Ok(Expr::Call(func, args))
    }

    fn literal(&mut self) -> Result<f64, ParseError> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        match self.peek() {
            Tok::Num(v) => {
                let v = *v;
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.error("a numeric literal")),
        }
    }

    fn chi(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let lo_at = self.offset();
        let a = self.literal()?;
        self.expect(Tok::Comma, "`,`")?;
        let b = self.literal()?;
        self.expect(Tok::RParen, "`)`")?;
        if a >= b {
            return Err(error_at(
                self.src,
                lo_at,
                "chi bounds with a < b",
                format!("chi({a}, {b})"),
            ));
        }
        Ok(Expr::Chi(a, b))
    }

    fn piecewise(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut arms = Vec::new();
        loop {
            // Either `cond, expr` or the final `expr`. Try the condition
            // first and fall back when no comparison follows.
            let save = self.pos;
            match self.cond() {
                Ok(c) if *self.peek() == Tok::Comma => {
                    self.bump();
                    let e = self.expr()?;
                    arms.push((c, e));
                    self.expect(Tok::Comma, "`,` followed by the next arm or the default value")?;
                }
                Ok(_) => return Err(self.error("`,` after the condition")),
                Err(cond_err) => {
                    self.pos = save;
                    if arms.is_empty() {
                        return Err(cond_err);
                    }
                    let other = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return Err(self.error("`)` after the default value"));
                    }
                    self.bump();
                    return Ok(Expr::Piecewise(arms, Box::new(other)));
                }
            }
        }
    }

    fn cond(&mut self) -> Result<Cond, ParseError> {
        let mut lhs = self.conj()?;
        while matches!(self.peek(), Tok::Ident(s) if s == "or") {
            self.bump();
            let rhs = self.conj()?;
            lhs = Cond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Cond, ParseError> {
        let mut lhs = self.comparison()?;
        while matches!(self.peek(), Tok::Ident(s) if s == "and") {
            self.bump();
            let rhs = self.comparison()?;
            lhs = Cond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> Result<Cond, ParseError> {
        if *self.peek() == Tok::LParen {
            let save = self.pos;
            self.bump();
            if let Ok(c) = self.cond() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(c);
                }
            }
            self.pos = save;
        }
        let a = self.expr()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return Err(self.error("a comparison (<, <=, >, >=, =)")),
        };
        self.bump();
        let b = self.expr()?;
        Ok(Cond::Cmp(op, a, b))
    }
}
