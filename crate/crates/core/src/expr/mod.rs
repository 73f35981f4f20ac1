//! Closed-form expression language for exponents and test functions.
//!
//! ```text
//! expr   := sum
//! sum    := prod (('+' | '-') prod)*
//! prod   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?            right associative
//! atom   := number | var | '(' expr ')' | call
//! call   := name '(' args ')' | 'chi' '(' lit ',' lit ')' | 'if' '(' cond ',' expr (',' cond ',' expr)* ',' expr ')'
//! cond   := conj ('or' conj)*
//! conj   := cmp ('and' cmp)*
//! cmp    := expr ('<' | '<=' | '>' | '>=' | '=') expr | '(' cond ')'
//! ```
//!
//! Variables are `x` (an alias of `x1`), `x1` and `x2`. Functions are `abs`,
//! `log`, `exp`, `sqrt`, `loglog` (one argument), `min`/`max` (two or more)
//! and `chi(a, b)`, the indicator of the closed interval `[a, b]` in the
//! first coordinate.

mod eval;
mod parser;
mod print;

pub use eval::{EvalError, EvalErrorKind};
pub use parser::{parse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    /// `x`, same coordinate as `x1`.
    X,
    X1,
    X2,
}

impl Var {
    pub fn axis(self) -> usize {
        match self {
            Var::X | Var::X1 => 0,
            Var::X2 => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::X1 => "x1",
            Var::X2 => "x2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Abs,
    Log,
    Exp,
    Sqrt,
    LogLog,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::LogLog => "loglog",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => Func::Abs,
            "log" => Func::Log,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "loglog" => Func::LogLog,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    /// `true` for the variadic `min`/`max` (two or more arguments).
    pub fn is_variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Cmp(CmpOp, Expr, Expr),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

/// Parsed expression. Literals produced by the parser are non-negative;
/// a leading minus becomes [`Expr::Neg`].
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    /// Indicator of `[a, b]` in the first coordinate.
    Chi(f64, f64),
    /// `if(c1, e1, c2, e2, ..., otherwise)`.
    Piecewise(Vec<(Cond, Expr)>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// Largest coordinate index used plus one (0 for constants).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Number(_) => 0,
            Expr::Var(v) => v.axis() + 1,
            Expr::Chi(..) => 1,
            Expr::Neg(a) => a.arity(),
            Expr::Binary(_, a, b) => a.arity().max(b.arity()),
            Expr::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
            Expr::Piecewise(arms, other) => arms
                .iter()
                .map(|(c, e)| c.arity().max(e.arity()))
                .fold(other.arity(), usize::max),
        }
    }
}

impl Cond {
    pub fn arity(&self) -> usize {
        match self {
            Cond::Cmp(_, a, b) => a.arity().max(b.arity()),
            Cond::And(a, b) | Cond::Or(a, b) => a.arity().max(b.arity()),
        }
    }
}
