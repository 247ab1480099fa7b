//! Local rewriting to a fixpoint: constant folding, neutral and absorbing
//! elements, sign normalisation and a few cancellations. This is not a
//! decision procedure; use [`super::is_equivalent`] to compare expressions.

use std::sync::Arc;

use super::eval::{apply_binary, apply_func};
use super::{BinOp, Expr, Func};

const MAX_PASSES: usize = 64;

pub(super) fn simplify(e: &Expr) -> Expr {
    let mut cur = pass(e);
    for _ in 0..MAX_PASSES {
        let next = pass(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn pass(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(a) => neg(pass(a)),
        Expr::Call(f, a) => call(*f, pass(a)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (pass(a), pass(b));
            match op {
                BinOp::Add => add(a, b),
                BinOp::Sub => sub(a, b),
                BinOp::Mul => mul(a, b),
                BinOp::Div => div(a, b),
                BinOp::Pow => pow(a, b),
            }
        }
    }
}

fn fold(op: BinOp, a: &Expr, b: &Expr) -> Option<Expr> {
    let (x, y) = (a.as_const()?, b.as_const()?);
    let r = apply_binary(op, x, y).ok()?;
    r.is_finite().then_some(Expr::Const(r))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(x) => (*x).clone(),
        a => Expr::Neg(Arc::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if let Some(r) = fold(BinOp::Add, &a, &b) {
        return r;
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    match (&a, &b) {
        (_, Expr::Neg(y)) => return Expr::Binary(BinOp::Sub, Arc::new(a.clone()), y.clone()),
        (_, Expr::Const(c)) if *c < 0.0 => return Expr::binary(BinOp::Sub, a, Expr::Const(-c)),
        (Expr::Neg(x), _) => return Expr::Binary(BinOp::Sub, Arc::new(b.clone()), x.clone()),
        _ => {}
    }
    if a == b {
        return Expr::binary(BinOp::Mul, Expr::Const(2.0), a);
    }
    Expr::binary(BinOp::Add, a, b)
}

fn sub(a: Expr, b: Expr) -> Expr {
    if let Some(r) = fold(BinOp::Sub, &a, &b) {
        return r;
    }
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if a == b {
        return Expr::zero();
    }
    match (&a, &b) {
        (_, Expr::Neg(y)) => Expr::Binary(BinOp::Add, Arc::new(a.clone()), y.clone()),
        (_, Expr::Const(c)) if *c < 0.0 => Expr::binary(BinOp::Add, a, Expr::Const(-c)),
        _ => Expr::binary(BinOp::Sub, a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if let Some(r) = fold(BinOp::Mul, &a, &b) {
        return r;
    }
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    if a.as_const() == Some(-1.0) {
        return neg(b);
    }
    if b.as_const() == Some(-1.0) {
        return neg(a);
    }
    // constants to the left
    if b.as_const().is_some() {
        return Expr::binary(BinOp::Mul, b, a);
    }
    match (&a, &b) {
        (Expr::Neg(x), _) => return neg(Expr::Binary(BinOp::Mul, x.clone(), Arc::new(b.clone()))),
        (_, Expr::Neg(y)) => return neg(Expr::Binary(BinOp::Mul, Arc::new(a.clone()), y.clone())),
        (Expr::Const(c1), Expr::Binary(BinOp::Mul, l, r)) => {
            if let Expr::Const(c2) = **l {
                return Expr::Binary(BinOp::Mul, Arc::new(Expr::Const(c1 * c2)), r.clone());
            }
        }
        // x * (c*y)  ->  c * (x*y)
        (_, Expr::Binary(BinOp::Mul, l, r)) if a.as_const().is_none() && l.as_const().is_some() => {
            return Expr::Binary(BinOp::Mul, l.clone(), Arc::new(Expr::Binary(BinOp::Mul, Arc::new(a.clone()), r.clone())));
        }
        // (c*x) * y  ->  c * (x*y)
        (Expr::Binary(BinOp::Mul, l, r), _) if l.as_const().is_some() => {
            return Expr::Binary(BinOp::Mul, l.clone(), Arc::new(Expr::Binary(BinOp::Mul, r.clone(), Arc::new(b.clone()))));
        }
        // (1/x) * y  ->  y / x
        (Expr::Binary(BinOp::Div, n, d), _) if n.is_one() => {
            return Expr::Binary(BinOp::Div, Arc::new(b.clone()), d.clone());
        }
        (_, Expr::Binary(BinOp::Div, n, d)) if n.is_one() => {
            return Expr::Binary(BinOp::Div, Arc::new(a.clone()), d.clone());
        }
        _ => {}
    }
    if a == b {
        return Expr::pow(a, Expr::Const(2.0));
    }
    let (base_a, exp_a) = split_pow(&a);
    let (base_b, exp_b) = split_pow(&b);
    if base_a == base_b && base_a.as_const().is_none() {
        return Expr::pow(base_a, Expr::Const(exp_a + exp_b));
    }
    Expr::binary(BinOp::Mul, a, b)
}

/// `x^c` with constant `c` as `(x, c)`, anything else as `(e, 1)`.
fn split_pow(e: &Expr) -> (Expr, f64) {
    if let Expr::Binary(BinOp::Pow, x, c) = e {
        if let Expr::Const(c) = **c {
            return ((**x).clone(), c);
        }
    }
    (e.clone(), 1.0)
}

fn div(a: Expr, b: Expr) -> Expr {
    if let Some(r) = fold(BinOp::Div, &a, &b) {
        return r;
    }
    if b.is_one() {
        return a;
    }
    if b.as_const() == Some(-1.0) {
        return neg(a);
    }
    if a.is_zero() && !b.is_zero() {
        return Expr::zero();
    }
    if a == b && !b.is_zero() {
        return Expr::one();
    }
    match (&a, &b) {
        (Expr::Neg(x), _) => return neg(Expr::Binary(BinOp::Div, x.clone(), Arc::new(b.clone()))),
        (_, Expr::Neg(y)) => return neg(Expr::Binary(BinOp::Div, Arc::new(a.clone()), y.clone())),
        (Expr::Binary(BinOp::Mul, l, r), Expr::Const(d)) if *d != 0.0 => {
            if let Expr::Const(c) = **l {
                return Expr::Binary(BinOp::Mul, Arc::new(Expr::Const(c / d)), r.clone());
            }
        }
        (Expr::Binary(BinOp::Mul, l, r), _) => {
            if **l == b {
                return (**r).clone();
            }
            if **r == b {
                return (**l).clone();
            }
        }
        _ => {}
    }
    Expr::binary(BinOp::Div, a, b)
}

fn pow(a: Expr, b: Expr) -> Expr {
    if let Some(r) = fold(BinOp::Pow, &a, &b) {
        return r;
    }
    if b.is_one() {
        return a;
    }
    if b.is_zero() {
        return Expr::one();
    }
    if a.is_one() {
        return Expr::one();
    }
    if let (Expr::Binary(BinOp::Pow, x, p), Expr::Const(q)) = (&a, &b) {
        if let Expr::Const(p) = **p {
            if p.fract() == 0.0 && q.fract() == 0.0 {
                return Expr::Binary(BinOp::Pow, x.clone(), Arc::new(Expr::Const(p * q)));
            }
        }
    }
    Expr::binary(BinOp::Pow, a, b)
}

fn call(f: Func, a: Expr) -> Expr {
    if let Expr::Const(c) = a {
        if let Ok(r) = apply_func(f, c) {
            if r.is_finite() {
                return Expr::Const(r);
            }
        }
    }
    match (f, &a) {
        (Func::Abs, Expr::Neg(x)) => Expr::Call(Func::Abs, x.clone()),
        (Func::Log, Expr::Call(Func::Exp, x)) => (**x).clone(),
        _ => Expr::call(f, a),
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::Expr;

    fn s(src: &str) -> String {
        Expr::parse(src).unwrap().simplify().to_string()
    }

    #[test]
    fn neutral_elements() {
        assert_eq!(s("0*q + 1*v"), "v");
        assert_eq!(s("2+3"), "5");
        assert_eq!(s("q*(1-0)"), "q");
        assert_eq!(s("x^1"), "x");
        assert_eq!(s("0/x"), "0");
        assert_eq!(s("x - x"), "0");
        assert_eq!(s("x^0"), "1");
    }

    #[test]
    fn signs() {
        assert_eq!(s("--x"), "x");
        assert_eq!(s("a + -b"), "(a - b)");
        assert_eq!(s("a - -b"), "(a + b)");
        assert_eq!(s("(-a)*b"), "(-(a * b))");
        assert_eq!(s("x*2"), "(2 * x)");
        assert_eq!(s("3*(2*x)"), "(6 * x)");
        assert_eq!(s("(4*x)/2"), "(2 * x)");
    }

    #[test]
    fn powers_and_cancellation() {
        assert_eq!(s("x*x"), "(x ^ 2)");
        assert_eq!(s("x^2*x"), "(x ^ 3)");
        assert_eq!(s("(m*v)/m"), "v");
        assert_eq!(s("(1/m)*f"), "(f / m)");
        assert_eq!(s("log(exp(y))"), "y");
    }

    #[test]
    fn domain_errors_are_not_folded() {
        assert_eq!(s("1/0"), "(1 / 0)");
        assert_eq!(s("log(0)"), "log(0)");
        assert_eq!(s("(-8)^0.5"), "((-8) ^ 0.5)");
    }
}
