//! Canonical printing. Parentheses are emitted only where the grammar needs
//! them, so `parse(&e.to_string()) == e` for every parsed expression.

use std::fmt::{self, Display, Write};

use super::{BinOp, Cond, Expr};

// Binding strength, loosest first.
const SUM: u8 = 4;
const PRODUCT: u8 = 5;
const UNARY: u8 = 6;
const POWER: u8 = 7;
const ATOM: u8 = 8;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => SUM,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Binary(BinOp::Pow, ..) => POWER,
        _ => ATOM,
    }
}

/// Shortest text that parses back to exactly `v`.
pub(crate) fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_at(out: &mut String, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        out.push('(');
        write_expr(out, e)?;
        out.push(')');
        Ok(())
    } else {
        write_expr(out, e)
    }
}

fn write_expr(out: &mut String, e: &Expr) -> fmt::Result {
    match e {
        Expr::Number(v) => {
            if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                write!(out, "({})", number(*v))
            } else {
                out.push_str(&number(*v));
                Ok(())
            }
        }
        Expr::Var(v) => {
            out.push_str(v.name());
            Ok(())
        }
        Expr::Chi(a, b) => write!(out, "chi({}, {})", number(*a), number(*b)),
        Expr::Neg(a) => {
            out.push('-');
            write_at(out, a, UNARY)
        }
        Expr::Binary(op, a, b) => {
            let (lhs_min, rhs_min, sep) = match op {
                BinOp::Add | BinOp::Sub => (SUM, PRODUCT, true),
                BinOp::Mul | BinOp::Div => (PRODUCT, UNARY, false),
                BinOp::Pow => (ATOM, UNARY, false),
            };
            write_at(out, a, lhs_min)?;
            if sep {
                write!(out, " {} ", op.symbol())?;
            } else {
                out.push_str(op.symbol());
            }
            write_at(out, b, rhs_min)
        }
        Expr::Call(func, args) => {
            write!(out, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a)?;
            }
            out.push(')');
            Ok(())
        }
        Expr::Piecewise(arms, other) => {
            out.push_str("if(");
            for (c, v) in arms {
                write_cond(out, c, 0)?;
                out.push_str(", ");
                write_expr(out, v)?;
                out.push_str(", ");
            }
            write_expr(out, other)?;
            out.push(')');
            Ok(())
        }
    }
}

// Condition levels: or = 1, and = 2, comparison = 3.
fn write_cond(out: &mut String, c: &Cond, min: u8) -> fmt::Result {
    let lvl = match c {
        Cond::Or(..) => 1,
        Cond::And(..) => 2,
        Cond::Cmp(..) => 3,
    };
    let wrap = lvl < min;
    if wrap {
        out.push('(');
    }
    match c {
        Cond::Cmp(op, a, b) => {
            write_expr(out, a)?;
            write!(out, " {} ", op.symbol())?;
            write_expr(out, b)?;
        }
        Cond::And(a, b) => {
            write_cond(out, a, 2)?;
            out.push_str(" and ");
            write_cond(out, b, 3)?;
        }
        Cond::Or(a, b) => {
            write_cond(out, a, 1)?;
            out.push_str(" or ");
            write_cond(out, b, 2)?;
        }
    }
    if wrap {
        out.push(')');
    }
    Ok(())
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self)?;
        f.write_str(&s)
    }
}

impl Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_cond(&mut s, self, 0)?;
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn canon(src: &str) -> String {
        parse(src).unwrap().to_string()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canon("2 - 1/(1+x^2)"), "2 - 1/(1 + x^2)");
        assert_eq!(canon("2*loglog(x)/(loglog(x)-2)"), "2*loglog(x)/(loglog(x) - 2)");
        assert_eq!(canon("(2^3)^2"), "(2^3)^2");
        assert_eq!(canon("2^(3^2)"), "2^3^2");
        assert_eq!(canon("(-x)^2"), "(-x)^2");
        assert_eq!(
            canon("a - (b - c)".replace(['a', 'b', 'c'], "x").as_str()),
            "x - (x - x)"
        );
        assert_eq!(canon("1e-7 + 1e300"), "1e-7 + 1e300");
        assert_eq!(canon("chi(-1,1)"), "chi(-1, 1)");
        assert_eq!(
            canon("if((x<0 or x>1) and x2=0, 1, 0)"),
            "if((x < 0 or x > 1) and x2 = 0, 1, 0)"
        );
    }

    #[test]
    fn round_trip_of_tricky_shapes() {
        for src in [
            "x - -x",
            "--x",
            "2^-x^2",
            "x/(x*x)",
            "x*(x/x)",
            "-(x + 1)",
            "1/(-x)",
            "min(x, -x, 0.1)",
            "if(x < 1 or x > 2 and x < 3, x, -x)",
            "if(x < 1 and (x > 0 or x < -1), 1, 2)",
            "0.30000000000000004",
        ] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
    }
}
