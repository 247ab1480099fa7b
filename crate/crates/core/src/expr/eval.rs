use std::collections::HashMap;

use super::{BinOp, Expr, Func};

/// Variable name to value map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    values: HashMap<String, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        Self {
            values: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// Binds `names[i]` to `values[i]`.
    pub fn from_slices(names: &[String], values: &[f64]) -> Self {
        assert_eq!(names.len(), values.len(), "names and values differ in length");
        Self {
            values: names.iter().cloned().zip(values.iter().copied()).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Adds every binding of `other`, overwriting on conflict.
    pub fn extend(&mut self, other: &Bindings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), *v);
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries sorted by name.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        let mut v: Vec<_> = self.values.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v.into_iter()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: &'static str },
}

pub(crate) fn apply_binary(op: BinOp, x: f64, y: f64) -> Result<f64, &'static str> {
    Ok(match op {
        BinOp::Add => x + y,
        BinOp::Sub => x - y,
        BinOp::Mul => x * y,
        BinOp::Div => {
            if y == 0.0 {
                return Err("division by zero");
            }
            x / y
        }
        BinOp::Pow => {
            if x < 0.0 && y.fract() != 0.0 {
                return Err("negative base with non-integer exponent");
            }
            if x == 0.0 && y < 0.0 {
                return Err("division by zero");
            }
            if y.fract() == 0.0 && y.abs() <= 64.0 {
                x.powi(y as i32)
            } else {
                x.powf(y)
            }
        }
    })
}

pub(crate) fn apply_func(f: Func, x: f64) -> Result<f64, &'static str> {
    Ok(match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => x.tan(),
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return Err("logarithm of a non-positive number");
            }
            x.ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err("square root of a negative number");
            }
            x.sqrt()
        }
        Func::Tanh => x.tanh(),
        Func::Abs => x.abs(),
        Func::Sign => {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
    })
}

pub(super) fn eval(e: &Expr, b: &Bindings) -> Result<f64, EvalError> {
    let domain = |reason| EvalError::Domain {
        subexpr: e.to_string(),
        reason,
    };
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var(v) => b.get(v).ok_or_else(|| EvalError::Unbound(v.to_string())),
        Expr::Neg(a) => Ok(-eval(a, b)?),
        Expr::Binary(op, l, r) => {
            let (x, y) = (eval(l, b)?, eval(r, b)?);
            apply_binary(*op, x, y).map_err(domain)
        }
        Expr::Call(f, a) => apply_func(*f, eval(a, b)?).map_err(domain),
    }
}

#[derive(Debug, Clone)]
enum Instr {
    Const(f64),
    Slot(usize),
    Neg,
    Bin(BinOp, usize),
    Call(Func, usize),
}

/// Stack-machine form of an [`Expr`] with variables resolved to slot
/// indices. Used on hot paths such as integration.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    code: Vec<Instr>,
    /// Subexpressions for instructions that can fail, for error messages.
    sources: Vec<Expr>,
    depth: usize,
}

impl CompiledExpr {
    pub fn new(e: &Expr, slots: &[&str]) -> Result<Self, EvalError> {
        let mut out = CompiledExpr {
            code: Vec::with_capacity(e.size()),
            sources: Vec::new(),
            depth: 0,
        };
        let mut depth = 0;
        out.emit(e, slots, &mut depth)?;
        Ok(out)
    }

    fn emit(&mut self, e: &Expr, slots: &[&str], depth: &mut usize) -> Result<(), EvalError> {
        match e {
            Expr::Const(c) => self.push(Instr::Const(*c), depth, 1),
            Expr::Var(v) => {
                let i = slots
                    .iter()
                    .position(|s| *s == &**v)
                    .ok_or_else(|| EvalError::Unbound(v.to_string()))?;
                self.push(Instr::Slot(i), depth, 1);
            }
            Expr::Neg(a) => {
                self.emit(a, slots, depth)?;
                self.code.push(Instr::Neg);
            }
            Expr::Binary(op, a, b) => {
                self.emit(a, slots, depth)?;
                self.emit(b, slots, depth)?;
                self.sources.push(e.clone());
                self.code.push(Instr::Bin(*op, self.sources.len() - 1));
                *depth -= 1;
            }
            Expr::Call(f, a) => {
                self.emit(a, slots, depth)?;
                self.sources.push(e.clone());
                self.code.push(Instr::Call(*f, self.sources.len() - 1));
            }
        }
        Ok(())
    }

    fn push(&mut self, i: Instr, depth: &mut usize, n: usize) {
        self.code.push(i);
        *depth += n;
        self.depth = self.depth.max(*depth);
    }

    /// Evaluates with `values[i]` bound to slot `i`.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.depth);
        for ins in &self.code {
            match *ins {
                Instr::Const(c) => stack.push(c),
                Instr::Slot(i) => stack.push(values[i]),
                Instr::Neg => {
                    let x = stack.last_mut().expect("stack");
                    *x = -*x;
                }
                Instr::Bin(op, src) => {
                    let y = stack.pop().expect("stack");
                    let x = stack.last_mut().expect("stack");
                    *x = apply_binary(op, *x, y).map_err(|reason| self.domain(src, reason))?;
                }
                Instr::Call(f, src) => {
                    let x = stack.last_mut().expect("stack");
                    *x = apply_func(f, *x).map_err(|reason| self.domain(src, reason))?;
                }
            }
        }
        Ok(stack.pop().expect("empty program"))
    }

    fn domain(&self, src: usize, reason: &'static str) -> EvalError {
        EvalError::Domain {
            subexpr: self.sources[src].to_string(),
            reason,
        }
    }
}
