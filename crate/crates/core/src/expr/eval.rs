use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{BinaryOp, Expr, Node};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    MissingVariable(String),
    #[error("logarithm of non-positive value {0}")]
    LogNonPositive(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-integer power {exponent} of non-positive base {base}")]
    FractionalPowerOfNonPositive { base: f64, exponent: f64 },
    #[error("non-finite intermediate result")]
    NonFinite,
}

impl EvalError {
    /// True for errors caused by the point being outside the natural
    /// domain of the expression (as opposed to a malformed binding).
    pub fn is_domain_error(&self) -> bool {
        !matches!(self, EvalError::MissingVariable(_))
    }
}

/// A source of variable values.
pub trait Binding {
    fn get(&self, name: &str) -> Option<f64>;
}

impl<B: Binding + ?Sized> Binding for &B {
    fn get(&self, name: &str) -> Option<f64> {
        (**self).get(name)
    }
}

impl Binding for HashMap<String, f64> {
    fn get(&self, name: &str) -> Option<f64> {
        HashMap::get(self, name).copied()
    }
}

impl Binding for BTreeMap<String, f64> {
    fn get(&self, name: &str) -> Option<f64> {
        BTreeMap::get(self, name).copied()
    }
}

impl Binding for [(&str, f64)] {
    fn get(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Binding for [(&str, f64); N] {
    fn get(&self, name: &str) -> Option<f64> {
        Binding::get(self.as_slice(), name)
    }
}

fn check(x: f64) -> Result<f64, EvalError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NonFinite)
    }
}

pub(crate) fn checked_div(a: f64, b: f64) -> Result<f64, EvalError> {
    if b == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    check(a / b)
}

pub(crate) fn checked_ln(a: f64) -> Result<f64, EvalError> {
    if a <= 0.0 {
        return Err(EvalError::LogNonPositive(a));
    }
    check(a.ln())
}

/// Integer exponents accept any base (except zero with a negative exponent);
/// everything else requires a strictly positive base.
pub(crate) fn checked_pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        return check(base.powi(exponent as i32));
    }
    if base <= 0.0 {
        return Err(EvalError::FractionalPowerOfNonPositive { base, exponent });
    }
    check(base.powf(exponent))
}

fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinaryOp::Add => check(a + b),
        BinaryOp::Sub => check(a - b),
        BinaryOp::Mul => check(a * b),
        BinaryOp::Div => checked_div(a, b),
    }
}

pub(crate) fn eval<B: Binding + ?Sized>(e: &Expr, binding: &B) -> Result<f64, EvalError> {
    match e.node() {
        Node::Const(c) => Ok(*c),
        Node::Var(name) => binding
            .get(name)
            .ok_or_else(|| EvalError::MissingVariable(name.to_string())),
        Node::Neg(a) => Ok(-eval(a, binding)?),
        Node::Binary(op, a, b) => apply_binary(*op, eval(a, binding)?, eval(b, binding)?),
        Node::Pow(a, b) => checked_pow(eval(a, binding)?, eval(b, binding)?),
        Node::Ln(a) => checked_ln(eval(a, binding)?),
        Node::Exp(a) => check(eval(a, binding)?.exp()),
    }
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Var(usize),
    Neg(Box<Op>),
    Binary(BinaryOp, Box<Op>, Box<Op>),
    Powi(Box<Op>, i32),
    Pow(Box<Op>, Box<Op>),
    Ln(Box<Op>),
    Exp(Box<Op>),
}

/// An expression with variables resolved to slice positions.
///
/// Evaluation semantics are identical to [`Expr::eval`].
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    root: Op,
    arity: usize,
}

impl CompiledExpr {
    pub fn new(e: &Expr, names: &[&str]) -> Result<Self, EvalError> {
        Ok(CompiledExpr {
            root: lower(e, names)?,
            arity: names.len(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates at `values`, which must have the arity given at compile time.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        debug_assert_eq!(values.len(), self.arity);
        run(&self.root, values)
    }
}

fn lower(e: &Expr, names: &[&str]) -> Result<Op, EvalError> {
    Ok(match e.node() {
        Node::Const(c) => Op::Const(*c),
        Node::Var(name) => Op::Var(
            names
                .iter()
                .position(|n| *n == &**name)
                .ok_or_else(|| EvalError::MissingVariable(name.to_string()))?,
        ),
        Node::Neg(a) => Op::Neg(Box::new(lower(a, names)?)),
        Node::Binary(op, a, b) => {
            Op::Binary(*op, Box::new(lower(a, names)?), Box::new(lower(b, names)?))
        }
        Node::Pow(a, b) => {
            let base = Box::new(lower(a, names)?);
            match b.as_constant() {
                Some(k) if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 => {
                    Op::Powi(base, k as i32)
                }
                _ => Op::Pow(base, Box::new(lower(b, names)?)),
            }
        }
        Node::Ln(a) => Op::Ln(Box::new(lower(a, names)?)),
        Node::Exp(a) => Op::Exp(Box::new(lower(a, names)?)),
    })
}

fn run(op: &Op, x: &[f64]) -> Result<f64, EvalError> {
    match op {
        Op::Const(c) => Ok(*c),
        Op::Var(i) => Ok(x[*i]),
        Op::Neg(a) => Ok(-run(a, x)?),
        Op::Binary(op, a, b) => apply_binary(*op, run(a, x)?, run(b, x)?),
        Op::Powi(a, k) => {
            let base = run(a, x)?;
            if base == 0.0 && *k < 0 {
                return Err(EvalError::DivisionByZero);
            }
            check(base.powi(*k))
        }
        Op::Pow(a, b) => checked_pow(run(a, x)?, run(b, x)?),
        Op::Ln(a) => checked_ln(run(a, x)?),
        Op::Exp(a) => check(run(a, x)?.exp()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_str(src: &str, binding: &[(&str, f64)]) -> Result<f64, EvalError> {
        Expr::parse(src).unwrap().eval(binding)
    }

    #[test]
    fn photon_pressure_value() {
        assert_eq!(eval_str("U/(3*V)", &[("U", 3.0), ("V", 1.0)]), Ok(1.0));
    }

    #[test]
    fn cancellation_is_exact() {
        assert_eq!(eval_str("x - x", &[("x", 7.25)]), Ok(0.0));
    }

    #[test]
    fn log_of_zero_is_domain_error() {
        let err = eval_str("ln(U)", &[("U", 0.0)]).unwrap_err();
        assert_eq!(err, EvalError::LogNonPositive(0.0));
        assert!(err.is_domain_error());
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        assert_eq!(
            eval_str("1/(x-1)", &[("x", 1.0)]),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn fractional_power_needs_positive_base() {
        assert!(matches!(
            eval_str("x^0.5", &[("x", -4.0)]),
            Err(EvalError::FractionalPowerOfNonPositive { .. })
        ));
        assert_eq!(eval_str("x^3", &[("x", -2.0)]), Ok(-8.0));
        assert_eq!(eval_str("x^(-2)", &[("x", 0.0)]), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn missing_variable_is_reported() {
        let err = eval_str("U + W", &[("U", 1.0)]).unwrap_err();
        assert_eq!(err, EvalError::MissingVariable("W".into()));
        assert!(!err.is_domain_error());
    }

    #[test]
    fn overflow_is_an_error_not_infinity() {
        assert_eq!(eval_str("exp(x)", &[("x", 1000.0)]), Err(EvalError::NonFinite));
    }

    #[test]
    fn compiled_matches_tree_walk() {
        let e = Expr::parse("U*V/N^2 - ln(U/N)^3 + exp(-V)*U^0.75").unwrap();
        let c = e.compile(&["U", "V", "N"]).unwrap();
        let vals = [1.7, 0.4, 2.3];
        let tree = e
            .eval(&[("U", vals[0]), ("V", vals[1]), ("N", vals[2])])
            .unwrap();
        assert_eq!(c.eval(&vals).unwrap(), tree);
        assert_eq!(c.arity(), 3);
    }

    #[test]
    fn compile_rejects_unknown_variables() {
        let e = Expr::parse("U + Q").unwrap();
        assert!(e.compile(&["U"]).is_err());
    }
}
