//! Symbolic real-valued expressions in named variables.
//!
//! Every scalar function in the crate (Hamiltonians, Lagrangians, energies,
//! vector-field components, candidate quantities) is an [`Expr`]. Trees are
//! immutable and share subtrees through `Arc`, so cloning is cheap and values
//! can be evaluated from many threads at once.
//!
//! ```
//! use contactdyn::expr::{Expr, Bindings};
//! let e = Expr::parse("v^2/2 - q^2/2").unwrap();
//! let dv = e.diff("v");
//! assert_eq!(dv.to_string(), "v");
//! let b = Bindings::from_pairs([("v", 2.0), ("q", 0.0)]);
//! assert_eq!(e.eval(&b).unwrap(), 2.0);
//! ```

mod diff;
mod eval;
mod normal;
mod parse;
mod simplify;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use eval::{Bindings, CompiledExpr, EvalError};
pub use normal::is_equivalent;
pub use parse::ParseError;

/// Binary operators of the expression grammar.
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

/// Unary functions. `Sign` only arises as the derivative of `abs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Abs,
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }
}

/// Immutable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Arc<str>),
    Neg(Arc<Expr>),
    Binary(BinOp, Arc<Expr>, Arc<Expr>),
    Call(Func, Arc<Expr>),
}

/// Returns true for names matching `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse::parse(text)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    /// Variable node. Panics if `name` is not an identifier.
    pub fn var(name: &str) -> Expr {
        assert!(is_identifier(name), "invalid variable name {name:?}");
        Expr::Var(Arc::from(name))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Arc::new(a))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Arc::new(a))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Pow, a, b)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// Free variable names, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.to_string());
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => &**v == name,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(name),
            Expr::Binary(_, a, b) => a.depends_on(name) || b.depends_on(name),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Replaces every variable for which `f` returns `Some`.
    pub fn substitute_with(&self, f: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::neg(a.substitute_with(f)),
            Expr::Call(g, a) => Expr::call(*g, a.substitute_with(f)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute_with(f), b.substitute_with(f)),
        }
    }

    /// Replaces bound variables by their numeric values and simplifies.
    pub fn substitute_values(&self, b: &Bindings) -> Expr {
        self.substitute_with(&|name| b.get(name).map(Expr::Const)).simplify()
    }

    pub fn diff(&self, var: &str) -> Expr {
        diff::diff(self, var).simplify()
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        eval::eval(self, b)
    }

    pub fn compile(&self, slots: &[&str]) -> Result<CompiledExpr, EvalError> {
        CompiledExpr::new(self, slots)
    }

    /// Human-oriented rendering with minimal parentheses.
    pub fn pretty(&self) -> String {
        let mut s = String::new();
        pretty(self, 0, &mut s);
        s
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Div, self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::Const(c)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Expr, ParseError> {
        Expr::parse(s)
    }
}

pub(crate) fn format_number(c: f64) -> String {
    let a = c.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{a}")
    } else {
        format!("{a:e}")
    }
}

/// Canonical, fully parenthesized form. Re-parsing yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() && *c != 0.0 => write!(f, "(-{})", format_number(*c)),
            Expr::Const(c) => f.write_str(&format_number(*c)),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(a) => match &**a {
                // keep `-(2)` distinct from the literal `-2`
                Expr::Const(_) => write!(f, "(-({a}))"),
                _ => write!(f, "(-{a})"),
            },
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if *c < 0.0 => 3,
        Expr::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn pretty(e: &Expr, min_prec: u8, out: &mut String) {
    let p = precedence(e);
    let paren = p < min_prec;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Const(c) => {
            if *c < 0.0 {
                out.push('-');
            }
            out.push_str(&format_number(*c));
        }
        Expr::Var(v) => out.push_str(v),
        Expr::Neg(a) => {
            out.push('-');
            if let Expr::Const(_) = &**a {
                out.push('(');
                pretty(a, 0, out);
                out.push(')');
            } else {
                pretty(a, 4, out);
            }
        }
        Expr::Call(g, a) => {
            out.push_str(g.name());
            out.push('(');
            pretty(a, 0, out);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            let (lp, rp) = match op {
                BinOp::Add => (1, 1),
                BinOp::Sub => (1, 2),
                BinOp::Mul => (2, 3),
                BinOp::Div => (2, 3),
                BinOp::Pow => (5, 3),
            };
            pretty(a, lp, out);
            match op {
                BinOp::Pow => out.push('^'),
                BinOp::Mul | BinOp::Div => out.push_str(op.symbol()),
                _ => {
                    out.push(' ');
                    out.push_str(op.symbol());
                    out.push(' ');
                }
            }
            pretty(b, rp, out);
        }
    }
    if paren {
        out.push(')');
    }
}
