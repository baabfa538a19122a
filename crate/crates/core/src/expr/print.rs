use std::fmt;

use super::{BinaryOp, Expr, Node};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => ADD,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => MUL,
        Node::Neg(_) => NEG,
        Node::Pow(..) => POW,
        _ => ATOM,
    }
}

fn write_number(x: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        write!(f, "{a}")
    } else {
        write!(f, "{a:e}")
    }
}

fn write_wrapped(e: &Expr, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if parens {
        write!(f, "(")?;
        write_expr(e, f)?;
        write!(f, ")")
    } else {
        write_expr(e, f)
    }
}

/// Writes `e` with the minimum parentheses needed for the parser to rebuild
/// the same tree.
pub(crate) fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Const(c) if c.is_sign_negative() => {
            write!(f, "(-")?;
            write_number(*c, f)?;
            write!(f, ")")
        }
        Node::Const(c) => write_number(*c, f),
        Node::Var(name) => write!(f, "{name}"),
        Node::Neg(a) => {
            write!(f, "-")?;
            // a bare literal after '-' would be read back as a negative constant
            let parens = precedence(a) < NEG || matches!(a.node(), Node::Const(_));
            write_wrapped(a, parens, f)
        }
        Node::Binary(op, a, b) => {
            let p = precedence(e);
            write_wrapped(a, precedence(a) < p, f)?;
            write!(f, " {} ", op.symbol())?;
            write_wrapped(b, precedence(b) <= p, f)
        }
        Node::Pow(a, b) => {
            write_wrapped(a, precedence(a) <= POW, f)?;
            write!(f, "^")?;
            write_wrapped(b, precedence(b) < NEG, f)
        }
        Node::Ln(a) => {
            write!(f, "ln(")?;
            write_expr(a, f)?;
            write!(f, ")")
        }
        Node::Exp(a) => {
            write!(f, "exp(")?;
            write_expr(a, f)?;
            write!(f, ")")
        }
    }
}
