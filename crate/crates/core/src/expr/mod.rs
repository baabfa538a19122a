//! Expression language for state equations.
//!
//! Expressions are immutable trees over named real variables. They can be
//! parsed from text, printed back, evaluated at a binding and differentiated
//! symbolically. The grammar is small on purpose:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          (right-associative)
//! primary := number | ident | ('ln' | 'exp') '(' expr ')' | '(' expr ')'
//! ```

mod diff;
mod eval;
mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use eval::{Binding, CompiledExpr, EvalError};
pub use parse::ParseError;

/// Binary arithmetic operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// Node kinds of the expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Arc<str>),
    Neg(Expr),
    Binary(BinaryOp, Expr, Expr),
    Pow(Expr, Expr),
    Ln(Expr),
    Exp(Expr),
}

/// An immutable, cheaply clonable expression.
///
/// Arithmetic operators on `Expr` build new trees with light simplification
/// (constant folding, `0`/`1` identities). The parser, by contrast, keeps the
/// tree exactly as written.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    /// Wraps a node without any simplification.
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn parse(source: &str) -> Result<Self, ParseError> {
        parse::parse(source)
    }

    pub fn constant(value: f64) -> Self {
        Expr::from_node(Node::Const(value))
    }

    pub fn var(name: &str) -> Self {
        Expr::from_node(Node::Var(Arc::from(name)))
    }

    pub fn zero() -> Self {
        Expr::constant(0.0)
    }

    pub fn one() -> Self {
        Expr::constant(1.0)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    /// Sorted set of free variable names.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(name) => {
                out.insert(name.to_string());
            }
            Node::Neg(a) | Node::Ln(a) | Node::Exp(a) => a.collect_variables(out),
            Node::Binary(_, a, b) | Node::Pow(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(v) => &**v == name,
            Node::Neg(a) | Node::Ln(a) | Node::Exp(a) => a.depends_on(name),
            Node::Binary(_, a, b) | Node::Pow(a, b) => a.depends_on(name) || b.depends_on(name),
        }
    }

    /// Replaces every occurrence of variable `name` with `replacement`,
    /// simplifying as the tree is rebuilt.
    pub fn substitute(&self, name: &str, replacement: &Expr) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(v) if &**v == name => replacement.clone(),
            Node::Var(_) => self.clone(),
            Node::Neg(a) => a.substitute(name, replacement).neg(),
            Node::Ln(a) => a.substitute(name, replacement).ln(),
            Node::Exp(a) => a.substitute(name, replacement).exp(),
            Node::Binary(op, a, b) => {
                let a = a.substitute(name, replacement);
                let b = b.substitute(name, replacement);
                Expr::binary(*op, a, b)
            }
            Node::Pow(a, b) => a
                .substitute(name, replacement)
                .pow(b.substitute(name, replacement)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Ln(a) | Node::Exp(a) => 1 + a.size(),
            Node::Binary(_, a, b) | Node::Pow(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => a.add(b),
            BinaryOp::Sub => a.sub(b),
            BinaryOp::Mul => a.mul(b),
            BinaryOp::Div => a.div(b),
        }
    }

    // Simplifying constructors. Folding only happens when the folded value
    // is finite, so domain errors survive into evaluation.

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_constant(), other.as_constant()) {
            if let Some(c) = finite(a + b) {
                return Expr::constant(c);
            }
        }
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        Expr::from_node(Node::Binary(BinaryOp::Add, self, other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_constant(), other.as_constant()) {
            if let Some(c) = finite(a - b) {
                return Expr::constant(c);
            }
        }
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return other.neg();
        }
        Expr::from_node(Node::Binary(BinaryOp::Sub, self, other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_constant(), other.as_constant()) {
            if let Some(c) = finite(a * b) {
                return Expr::constant(c);
            }
        }
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return other;
        }
        if other.is_one() {
            return self;
        }
        if self.as_constant() == Some(-1.0) {
            return other.neg();
        }
        if other.as_constant() == Some(-1.0) {
            return self.neg();
        }
        Expr::from_node(Node::Binary(BinaryOp::Mul, self, other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, other: Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_constant(), other.as_constant()) {
            if b != 0.0 {
                if let Some(c) = finite(a / b) {
                    return Expr::constant(c);
                }
            }
        }
        if other.is_one() {
            return self;
        }
        if self.is_zero() && !other.is_zero() {
            return Expr::zero();
        }
        Expr::from_node(Node::Binary(BinaryOp::Div, self, other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::from_node(Node::Neg(self)),
        }
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_constant(), exponent.as_constant()) {
            if let Ok(c) = eval::checked_pow(a, b) {
                return Expr::constant(c);
            }
        }
        Expr::from_node(Node::Pow(self, exponent))
    }

    pub fn powf(self, exponent: f64) -> Expr {
        self.pow(Expr::constant(exponent))
    }

    pub fn ln(self) -> Expr {
        if let Some(a) = self.as_constant() {
            if a > 0.0 {
                return Expr::constant(a.ln());
            }
        }
        if let Node::Exp(inner) = self.node() {
            return inner.clone();
        }
        Expr::from_node(Node::Ln(self))
    }

    pub fn exp(self) -> Expr {
        if let Some(a) = self.as_constant() {
            if let Some(c) = finite(a.exp()) {
                return Expr::constant(c);
            }
        }
        Expr::from_node(Node::Exp(self))
    }

    /// Symbolic partial derivative with respect to `var`.
    pub fn differentiate(&self, var: &str) -> Expr {
        diff::differentiate(self, var)
    }

    /// Evaluates against any variable binding.
    pub fn eval<B: Binding + ?Sized>(&self, binding: &B) -> Result<f64, EvalError> {
        eval::eval(self, binding)
    }

    /// Resolves variable names against `names` for fast repeated evaluation
    /// on value slices.
    pub fn compile(&self, names: &[&str]) -> Result<CompiledExpr, EvalError> {
        CompiledExpr::new(self, names)
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(self, f)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::constant(value)
    }
}

macro_rules! impl_op {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$method(self, rhs)
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$method(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$method(self, Expr::constant(rhs))
            }
        }
    };
}

impl_op!(Add, add);
impl_op!(Sub, sub);
impl_op!(Mul, mul);
impl_op!(Div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self.clone())
    }
}
