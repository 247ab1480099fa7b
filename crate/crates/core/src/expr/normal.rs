//! Expanded rational normal form, used to decide whether two expressions are
//! the same function.
//!
//! Expressions are expanded into quotients of Laurent polynomials whose
//! atoms are variables and opaque calls (`exp(..)`, non-integer powers, ...)
//! keyed by the normal form of their argument. Two expressions are judged
//! equivalent when `n1*d2 - n2*d1` cancels to zero. Transcendental identities
//! such as `sin^2 + cos^2 = 1` are not recognised.

use std::collections::BTreeMap;

use super::eval::apply_func;
use super::{BinOp, Expr};

type Monomial = BTreeMap<String, i32>;

#[derive(Debug, Clone, PartialEq, Default)]
struct Poly(BTreeMap<Monomial, f64>);

impl Poly {
    fn constant(c: f64) -> Poly {
        let mut p = Poly::default();
        if c != 0.0 {
            p.0.insert(Monomial::new(), c);
        }
        p
    }

    fn atom(name: String) -> Poly {
        let mut m = Monomial::new();
        m.insert(name, 1);
        Poly([(m, 1.0)].into_iter().collect())
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn as_constant(&self) -> Option<f64> {
        match self.0.len() {
            0 => Some(0.0),
            1 => self.0.get(&Monomial::new()).copied(),
            _ => None,
        }
    }

    fn single_term(&self) -> Option<(&Monomial, f64)> {
        (self.0.len() == 1).then(|| self.0.iter().next().map(|(m, c)| (m, *c)))?
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        let v = self.0.get(&m).copied().unwrap_or(0.0) + c;
        if v == 0.0 {
            self.0.remove(&m);
        } else {
            self.0.insert(m, v);
        }
    }

    fn add(&self, other: &Poly, sign: f64) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), sign * c);
        }
        out
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m = m1.clone();
                for (a, k) in m2 {
                    let e = m.entry(a.clone()).or_insert(0);
                    *e += k;
                    if *e == 0 {
                        m.remove(a);
                    }
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    fn scale(&self, c: f64) -> Poly {
        Poly(self.0.iter().map(|(m, v)| (m.clone(), v * c)).filter(|(_, v)| *v != 0.0).collect())
    }

    fn monomial_inverse(m: &Monomial) -> Poly {
        let inv: Monomial = m.iter().map(|(a, k)| (a.clone(), -k)).collect();
        Poly([(inv, 1.0)].into_iter().collect())
    }

    fn max_abs(&self) -> f64 {
        self.0.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    fn key(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (m, c) in &self.0 {
            s.push_str(&format!("{:+.12e}", c));
            for (a, k) in m {
                s.push_str(&format!("*{a}^{k}"));
            }
        }
        s
    }
}

/// `num / den`, with `den` never zero.
#[derive(Debug, Clone)]
struct Rational {
    num: Poly,
    den: Poly,
}

impl Rational {
    fn poly(p: Poly) -> Rational {
        Rational {
            num: p,
            den: Poly::constant(1.0),
        }
    }

    /// Absorbs a single-term denominator into the numerator.
    fn tidy(mut self) -> Rational {
        if let Some((m, c)) = self.den.single_term() {
            let inv = Poly::monomial_inverse(m).scale(1.0 / c);
            self.num = self.num.mul(&inv);
            self.den = Poly::constant(1.0);
        } else if let Some((_, lead)) = self.den.0.iter().next_back().map(|(m, c)| (m.clone(), *c)) {
            self.num = self.num.scale(1.0 / lead);
            self.den = self.den.scale(1.0 / lead);
        }
        if self.num.is_zero() {
            self.den = Poly::constant(1.0);
        }
        self
    }

    fn add(&self, o: &Rational, sign: f64) -> Rational {
        if self.den == o.den {
            return Rational {
                num: self.num.add(&o.num, sign),
                den: self.den.clone(),
            }
            .tidy();
        }
        Rational {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den), sign),
            den: self.den.mul(&o.den),
        }
        .tidy()
    }

    fn mul(&self, o: &Rational) -> Rational {
        Rational {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
        .tidy()
    }

    fn recip(&self) -> Option<Rational> {
        (!self.num.is_zero()).then(|| {
            Rational {
                num: self.den.clone(),
                den: self.num.clone(),
            }
            .tidy()
        })
    }

    fn as_constant(&self) -> Option<f64> {
        Some(self.num.as_constant()? / self.den.as_constant()?)
    }

    fn key(&self) -> String {
        match self.den.as_constant() {
            Some(d) if d == 1.0 => self.num.key(),
            _ => format!("({})/({})", self.num.key(), self.den.key()),
        }
    }
}

fn opaque(tag: &str, args: &[&Rational]) -> Rational {
    let keys: Vec<String> = args.iter().map(|r| r.key()).collect();
    Rational::poly(Poly::atom(format!("{tag}[{}]", keys.join(";"))))
}

fn normal(e: &Expr) -> Rational {
    match e {
        Expr::Const(c) => Rational::poly(Poly::constant(*c)),
        Expr::Var(v) => Rational::poly(Poly::atom(v.to_string())),
        Expr::Neg(a) => {
            let r = normal(a);
            Rational {
                num: r.num.scale(-1.0),
                den: r.den,
            }
        }
        Expr::Call(f, a) => {
            let r = normal(a);
            if let Some(c) = r.as_constant() {
                if let Ok(v) = apply_func(*f, c) {
                    return Rational::poly(Poly::constant(v));
                }
            }
            opaque(f.name(), &[&r])
        }
        Expr::Binary(op, a, b) => {
            let (x, y) = (normal(a), normal(b));
            match op {
                BinOp::Add => x.add(&y, 1.0),
                BinOp::Sub => x.add(&y, -1.0),
                BinOp::Mul => x.mul(&y),
                BinOp::Div => match y.recip() {
                    Some(inv) => x.mul(&inv),
                    None => opaque("div", &[&x, &y]),
                },
                BinOp::Pow => power(&x, &y),
            }
        }
    }
}

fn power(base: &Rational, exp: &Rational) -> Rational {
    if let Some(k) = exp.as_constant() {
        if k.fract() == 0.0 && k.abs() <= 16.0 {
            let mut acc = Rational::poly(Poly::constant(1.0));
            for _ in 0..(k.abs() as u32) {
                acc = acc.mul(base);
            }
            if k < 0.0 {
                return acc.recip().unwrap_or_else(|| opaque("pow", &[base, exp]));
            }
            return acc;
        }
        if let Some(b) = base.as_constant() {
            if b > 0.0 {
                return Rational::poly(Poly::constant(b.powf(k)));
            }
        }
    }
    opaque("pow", &[base, exp])
}

/// True when `a` and `b` expand to the same rational function of their
/// variables and opaque atoms, up to `1e-12` relative coefficient noise.
pub fn is_equivalent(a: &Expr, b: &Expr) -> bool {
    let (x, y) = (normal(a), normal(b));
    let diff = x.num.mul(&y.den).add(&y.num.mul(&x.den), -1.0);
    let scale = x.num.mul(&y.den).max_abs().max(y.num.mul(&x.den).max_abs()).max(1.0);
    diff.max_abs() <= 1e-12 * scale
}
