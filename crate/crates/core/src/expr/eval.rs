use std::fmt;

use super::{BinOp, Cond, Expr, Func};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    LogOfNonPositive,
    LogLogAtMostOne,
    SqrtOfNegative,
    DivisionByZero,
    NonRealPower,
    MissingCoordinate,
}

impl EvalErrorKind {
    fn describe(self) -> &'static str {
        match self {
            EvalErrorKind::LogOfNonPositive => "log of a non-positive argument",
            EvalErrorKind::LogLogAtMostOne => "loglog of an argument <= 1",
            EvalErrorKind::SqrtOfNegative => "sqrt of a negative argument",
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::NonRealPower => "power with no real value",
            EvalErrorKind::MissingCoordinate => "coordinate not available in this dimension",
        }
    }
}

/// Domain error raised while evaluating, naming the offending subexpression.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subexpr: String,
    pub operands: Vec<f64>,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in `{}`", self.kind.describe(), self.subexpr)?;
        if !self.operands.is_empty() {
            write!(f, " (operands {:?})", self.operands)?;
        }
        Ok(())
    }
}

impl std::error::Error for EvalError {}

fn fail(kind: EvalErrorKind, e: &Expr, operands: Vec<f64>) -> EvalError {
    EvalError {
        kind,
        subexpr: e.to_string(),
        operands,
    }
}

impl Expr {
    /// Evaluates at `point` (`point[0]` is `x`/`x1`, `point[1]` is `x2`).
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        match self {
            Expr::Number(v) => Ok(*v),
            Expr::Var(v) => point
                .get(v.axis())
                .copied()
                .ok_or_else(|| fail(EvalErrorKind::MissingCoordinate, self, vec![])),
            Expr::Chi(a, b) => {
                let x = *point
                    .first()
                    .ok_or_else(|| fail(EvalErrorKind::MissingCoordinate, self, vec![]))?;
                Ok(if *a <= x && x <= *b { 1.0 } else { 0.0 })
            }
            Expr::Neg(a) => Ok(-a.eval(point)?),
            Expr::Binary(op, a, b) => {
                let x = a.eval(point)?;
                let y = b.eval(point)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div => {
                        if y == 0.0 {
                            Err(fail(EvalErrorKind::DivisionByZero, self, vec![x, y]))
                        } else {
                            Ok(x / y)
                        }
                    }
                    BinOp::Pow => {
                        if (x < 0.0 && y.fract() != 0.0) || (x == 0.0 && y < 0.0) {
                            Err(fail(EvalErrorKind::NonRealPower, self, vec![x, y]))
                        } else {
                            Ok(x.powf(y))
                        }
                    }
                }
            }
            Expr::Call(func, args) => {
                let first = args[0].eval(point)?;
                match func {
                    Func::Abs => Ok(first.abs()),
                    Func::Exp => Ok(first.exp()),
                    Func::Log => {
                        if first <= 0.0 {
                            Err(fail(EvalErrorKind::LogOfNonPositive, self, vec![first]))
                        } else {
                            Ok(first.ln())
                        }
                    }
                    Func::LogLog => {
                        if first <= 1.0 {
                            Err(fail(EvalErrorKind::LogLogAtMostOne, self, vec![first]))
                        } else {
                            Ok(first.ln().ln())
                        }
                    }
                    Func::Sqrt => {
                        if first < 0.0 {
                            Err(fail(EvalErrorKind::SqrtOfNegative, self, vec![first]))
                        } else {
                            Ok(first.sqrt())
                        }
                    }
                    Func::Min | Func::Max => {
                        let mut acc = first;
                        for a in &args[1..] {
                            let v = a.eval(point)?;
                            acc = if *func == Func::Min { acc.min(v) } else { acc.max(v) };
                        }
                        Ok(acc)
                    }
                }
            }
            Expr::Piecewise(arms, other) => {
                for (c, e) in arms {
                    if c.eval(point)? {
                        return e.eval(point);
                    }
                }
                other.eval(point)
            }
        }
    }
}

impl Cond {
    pub fn eval(&self, point: &[f64]) -> Result<bool, EvalError> {
        match self {
            Cond::Cmp(op, a, b) => Ok(op.holds(a.eval(point)?, b.eval(point)?)),
            Cond::And(a, b) => Ok(a.eval(point)? && b.eval(point)?),
            Cond::Or(a, b) => Ok(a.eval(point)? || b.eval(point)?),
        }
    }
}
