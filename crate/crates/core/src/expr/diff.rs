//! Symbolic differentiation. The chain rule is emitted as `u' * f'(u)`.
//!
//! `abs` differentiates to the formal `sign(u) * u'`; the kink at zero is not
//! treated specially.

use super::{BinOp, Expr, Func};

pub(super) fn diff(e: &Expr, x: &str) -> Expr {
    if !e.depends_on(x) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(v) => Expr::Const(if &**v == x { 1.0 } else { 0.0 }),
        Expr::Neg(a) => Expr::neg(diff(a, x)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (&**a, &**b);
            match op {
                BinOp::Add => diff(a, x) + diff(b, x),
                BinOp::Sub => diff(a, x) - diff(b, x),
                BinOp::Mul => diff(a, x) * b.clone() + a.clone() * diff(b, x),
                BinOp::Div => {
                    if !b.depends_on(x) {
                        diff(a, x) / b.clone()
                    } else {
                        (diff(a, x) * b.clone() - a.clone() * diff(b, x)) / Expr::pow(b.clone(), Expr::Const(2.0))
                    }
                }
                BinOp::Pow => diff_pow(a, b, x),
            }
        }
        Expr::Call(f, a) => {
            let u = (**a).clone();
            let du = diff(&u, x);
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, u),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, u)),
                Func::Tan => Expr::one() / Expr::pow(Expr::call(Func::Cos, u), Expr::Const(2.0)),
                Func::Exp => Expr::call(Func::Exp, u),
                Func::Log => return du / u,
                Func::Sqrt => Expr::one() / (Expr::Const(2.0) * Expr::call(Func::Sqrt, u)),
                Func::Tanh => Expr::one() - Expr::pow(Expr::call(Func::Tanh, u), Expr::Const(2.0)),
                Func::Abs => Expr::call(Func::Sign, u),
                Func::Sign => return Expr::zero(),
            };
            du * outer
        }
    }
}

fn diff_pow(a: &Expr, b: &Expr, x: &str) -> Expr {
    let a_dep = a.depends_on(x);
    let b_dep = b.depends_on(x);
    match (a_dep, b_dep) {
        (true, false) => {
            // b * a^(b-1) * a'
            let exp = match b {
                Expr::Const(c) => Expr::Const(c - 1.0),
                _ => b.clone() - Expr::one(),
            };
            b.clone() * Expr::pow(a.clone(), exp) * diff(a, x)
        }
        (false, true) => diff(b, x) * (Expr::pow(a.clone(), b.clone()) * Expr::call(Func::Log, a.clone())),
        _ => {
            let whole = Expr::pow(a.clone(), b.clone());
            whole * (diff(b, x) * Expr::call(Func::Log, a.clone()) + b.clone() * diff(a, x) / a.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{Bindings, Expr};

    fn d(src: &str, x: &str) -> Expr {
        Expr::parse(src).unwrap().diff(x)
    }

    #[test]
    fn power_rule() {
        assert_eq!(d("v^2/2", "v"), Expr::var("v"));
    }

    #[test]
    fn holonomic_dissipation_term() {
        assert_eq!(d("-gamma*s", "s"), Expr::parse("-gamma").unwrap());
    }

    #[test]
    fn chain_rule_exp() {
        assert_eq!(
            d("exp(2*gamma*y)", "y"),
            Expr::parse("2*gamma*exp(2*gamma*y)").unwrap().simplify()
        );
    }

    #[test]
    fn independent_variable_gives_zero() {
        assert_eq!(d("sin(q)*p", "s"), Expr::zero());
    }

    #[test]
    fn abs_is_formal_sign() {
        assert_eq!(d("abs(x)", "x"), Expr::parse("sign(x)").unwrap());
        assert_eq!(d("sign(x)", "x"), Expr::zero());
    }

    #[test]
    fn function_table_values() {
        let b = Bindings::from_pairs([("x", 0.3)]);
        let cases: [(&str, f64); 8] = [
            ("sin(x)", 0.3f64.cos()),
            ("cos(x)", -0.3f64.sin()),
            ("tan(x)", 1.0 / 0.3f64.cos().powi(2)),
            ("log(x)", 1.0 / 0.3),
            ("sqrt(x)", 0.5 / 0.3f64.sqrt()),
            ("tanh(x)", 1.0 - 0.3f64.tanh().powi(2)),
            ("x^x", 0.3f64.powf(0.3) * (0.3f64.ln() + 1.0)),
            ("2^x", 2f64.powf(0.3) * 2f64.ln()),
        ];
        for (src, want) in cases {
            let got = d(src, "x").eval(&b).unwrap();
            assert!((got - want).abs() < 1e-14, "{src}: {got} vs {want}");
        }
    }
}
