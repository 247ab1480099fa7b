//! Pointwise exterior algebra on ℝ^m.
//!
//! A k-form is stored sparsely as a map from strictly increasing index tuples
//! to coefficients; absent tuples are zero. Symbolic forms ([`FormExpr`]) are
//! limited to degrees 0–2, numeric forms ([`FormValue`]) may have any degree
//! up to the dimension.
//!
//! The interior product inserts the vector in the first slot:
//! `(i(X)f)_J = Σ_i X^i f_{iJ}`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use crate::expr::{Bindings, EvalError, Expr};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("degree {got} exceeds the supported maximum {max}")]
    Degree { got: usize, max: usize },
    #[error("interior product of a 0-form")]
    ContractScalar,
    #[error("index {0} out of range")]
    Index(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Sorts `idx` in place and returns the sign of the permutation, or `None`
/// if an index repeats.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Symbolic differential form of degree 0, 1 or 2.
#[derive(Debug, Clone, PartialEq)]
pub struct FormExpr {
    dim: usize,
    degree: usize,
    components: BTreeMap<Vec<usize>, Expr>,
}

impl FormExpr {
    pub const MAX_DEGREE: usize = 2;

    pub fn zero(dim: usize, degree: usize) -> Result<Self, FormError> {
        if degree > Self::MAX_DEGREE {
            return Err(FormError::Degree {
                got: degree,
                max: Self::MAX_DEGREE,
            });
        }
        Ok(FormExpr {
            dim,
            degree,
            components: BTreeMap::new(),
        })
    }

    pub fn scalar(dim: usize, f: Expr) -> Self {
        let mut out = FormExpr::zero(dim, 0).expect("degree 0");
        out.add_term(&[], f).expect("scalar");
        out
    }

    /// `Σ coeffs[i] dx^i`.
    pub fn one_form(coeffs: Vec<Expr>) -> Self {
        let dim = coeffs.len();
        let mut out = FormExpr::zero(dim, 1).expect("degree 1");
        for (i, c) in coeffs.into_iter().enumerate() {
            out.add_term(&[i], c).expect("in range");
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Adds `coeff dx^{idx[0]} ∧ dx^{idx[1]} ∧ ...`; `idx` need not be sorted.
    pub fn add_term(&mut self, idx: &[usize], coeff: Expr) -> Result<(), FormError> {
        if idx.len() != self.degree {
            return Err(FormError::Degree {
                got: idx.len(),
                max: self.degree,
            });
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(FormError::Index(bad));
        }
        let mut key = idx.to_vec();
        let Some(sign) = sort_with_sign(&mut key) else {
            return Ok(());
        };
        let term = if sign < 0.0 { -coeff } else { coeff };
        let merged = match self.components.remove(&key) {
            Some(prev) => (prev + term).simplify(),
            None => term.simplify(),
        };
        if !merged.is_zero() {
            self.components.insert(key, merged);
        }
        Ok(())
    }

    pub fn component(&self, idx: &[usize]) -> Expr {
        self.components.get(idx).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn components(&self) -> impl Iterator<Item = (&[usize], &Expr)> {
        self.components.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Coefficients of a 1-form as a dense list.
    pub fn coefficients(&self) -> Vec<Expr> {
        (0..self.dim).map(|i| self.component(&[i])).collect()
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> FormExpr {
        let mut out = FormExpr::zero(self.dim, self.degree).expect("same degree");
        for (k, v) in &self.components {
            out.add_term(k, f(v)).expect("same shape");
        }
        out
    }

    pub fn add(&self, other: &FormExpr) -> Result<FormExpr, FormError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (k, v) in &other.components {
            out.add_term(k, v.clone())?;
        }
        Ok(out)
    }

    fn check_same(&self, other: &FormExpr) -> Result<(), FormError> {
        if self.dim != other.dim {
            return Err(FormError::Dimension(self.dim, other.dim));
        }
        if self.degree != other.degree {
            return Err(FormError::Degree {
                got: other.degree,
                max: self.degree,
            });
        }
        Ok(())
    }
}

/// `d(a_I dx^I) = Σ_j (∂a_I/∂x^j) dx^j ∧ dx^I` for forms of degree ≤ 1.
pub fn exterior_derivative(f: &FormExpr, vars: &[String]) -> Result<FormExpr, FormError> {
    if f.degree > 1 {
        return Err(FormError::Degree { got: f.degree, max: 1 });
    }
    if vars.len() != f.dim {
        return Err(FormError::Dimension(f.dim, vars.len()));
    }
    let mut out = FormExpr::zero(f.dim, f.degree + 1)?;
    for (idx, a) in &f.components {
        for (j, x) in vars.iter().enumerate() {
            let da = a.diff(x);
            if da.is_zero() {
                continue;
            }
            let mut key = vec![j];
            key.extend_from_slice(idx);
            out.add_term(&key, da)?;
        }
    }
    Ok(out)
}

/// Symbolic interior product of the vector field with components `x`.
pub fn contract_symbolic(x: &[Expr], f: &FormExpr) -> Result<FormExpr, FormError> {
    if x.len() != f.dim {
        return Err(FormError::Dimension(f.dim, x.len()));
    }
    if f.degree == 0 {
        return Err(FormError::ContractScalar);
    }
    let mut out = FormExpr::zero(f.dim, f.degree - 1)?;
    for (idx, c) in &f.components {
        for (k, &i) in idx.iter().enumerate() {
            if x[i].is_zero() {
                continue;
            }
            let mut rest = idx.clone();
            rest.remove(k);
            let term = x[i].clone() * c.clone();
            let term = if k % 2 == 1 { -term } else { term };
            out.add_term(&rest, term)?;
        }
    }
    Ok(out)
}

pub fn eval_form(f: &FormExpr, b: &Bindings) -> Result<FormValue, EvalError> {
    let mut out = FormValue::zero(f.dim, f.degree);
    for (k, v) in &f.components {
        let x = v.eval(b)?;
        if x != 0.0 {
            out.components.insert(k.clone(), x);
        }
    }
    Ok(out)
}

/// Numeric k-form at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FormValue {
    dim: usize,
    degree: usize,
    components: BTreeMap<Vec<usize>, f64>,
}

impl FormValue {
    pub fn zero(dim: usize, degree: usize) -> Self {
        FormValue {
            dim,
            degree,
            components: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        let mut out = FormValue::zero(dim, 0);
        out.add_term(&[], c);
        out
    }

    pub fn covector(values: &[f64]) -> Self {
        let mut out = FormValue::zero(values.len(), 1);
        for (i, &v) in values.iter().enumerate() {
            out.add_term(&[i], v);
        }
        out
    }

    /// The basis form `dx^{i_0} ∧ ... ∧ dx^{i_k}`.
    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut out = FormValue::zero(dim, idx.len());
        out.add_term(idx, 1.0);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Adds `c` times the basis form `dx^idx`; `idx` need not be sorted.
    pub fn add_term(&mut self, idx: &[usize], c: f64) {
        assert_eq!(idx.len(), self.degree, "index length must equal the degree");
        assert!(idx.iter().all(|&i| i < self.dim), "index out of range");
        let mut key = idx.to_vec();
        let Some(sign) = sort_with_sign(&mut key) else {
            return;
        };
        let v = self.components.get(&key).copied().unwrap_or(0.0) + sign * c;
        if v == 0.0 {
            self.components.remove(&key);
        } else {
            self.components.insert(key, v);
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components.get(idx).copied().unwrap_or(0.0)
    }

    pub fn components(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.components.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.components.values().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Dense coefficients of a 1-form.
    pub fn to_covector(&self) -> Vec<f64> {
        assert_eq!(self.degree, 1, "not a 1-form");
        (0..self.dim).map(|i| self.get(&[i])).collect()
    }

    pub fn scale(&self, c: f64) -> FormValue {
        let mut out = FormValue::zero(self.dim, self.degree);
        for (k, v) in &self.components {
            out.add_term(k, c * v);
        }
        out
    }

    fn combine(&self, other: &FormValue, sign: f64) -> FormValue {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut out = self.clone();
        for (k, v) in &other.components {
            out.add_term(k, sign * v);
        }
        out
    }
}

impl Add for &FormValue {
    type Output = FormValue;
    fn add(self, rhs: &FormValue) -> FormValue {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &FormValue {
    type Output = FormValue;
    fn sub(self, rhs: &FormValue) -> FormValue {
        self.combine(rhs, -1.0)
    }
}

impl Mul<&FormValue> for f64 {
    type Output = FormValue;
    fn mul(self, rhs: &FormValue) -> FormValue {
        rhs.scale(self)
    }
}

/// Tangent vector at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValue(pub Vec<f64>);

impl VectorValue {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        VectorValue(v)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

pub fn wedge(a: &FormValue, b: &FormValue) -> Result<FormValue, FormError> {
    if a.dim != b.dim {
        return Err(FormError::Dimension(a.dim, b.dim));
    }
    let degree = a.degree + b.degree;
    if degree > a.dim {
        return Ok(FormValue::zero(a.dim, degree.min(a.dim)));
    }
    let mut out = FormValue::zero(a.dim, degree);
    let mut key = Vec::with_capacity(degree);
    for (i, x) in &a.components {
        for (j, y) in &b.components {
            key.clear();
            key.extend_from_slice(i);
            key.extend_from_slice(j);
            out.add_term(&key, x * y);
        }
    }
    Ok(out)
}

pub fn contract(x: &VectorValue, f: &FormValue) -> Result<FormValue, FormError> {
    if x.dim() != f.dim {
        return Err(FormError::Dimension(f.dim, x.dim()));
    }
    if f.degree == 0 {
        return Err(FormError::ContractScalar);
    }
    let mut out = FormValue::zero(f.dim, f.degree - 1);
    let mut rest = Vec::with_capacity(f.degree);
    for (idx, c) in &f.components {
        for (k, &i) in idx.iter().enumerate() {
            if x.0[i] == 0.0 {
                continue;
            }
            rest.clear();
            rest.extend(idx.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, &j)| j));
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out.add_term(&rest, sign * x.0[i] * c);
        }
    }
    Ok(out)
}

/// Top coefficient of `η ∧ (dη)^n / n!` at the point; nonzero exactly where
/// `η` is a contact form. The `1/n!` normalisation makes the canonical form
/// `ds - p_i dq^i` give ±1 in every dimension.
pub fn contact_volume_coefficient(eta: &FormExpr, vars: &[String], b: &Bindings, n: usize) -> Result<f64, FormError> {
    if eta.degree != 1 {
        return Err(FormError::Degree { got: eta.degree, max: 1 });
    }
    if eta.dim != 2 * n + 1 {
        return Err(FormError::Dimension(eta.dim, 2 * n + 1));
    }
    let d_eta = eval_form(&exterior_derivative(eta, vars)?, b)?;
    let mut acc = eval_form(eta, b)?;
    let mut factorial = 1.0;
    for k in 1..=n {
        acc = wedge(&acc, &d_eta)?;
        factorial *= k as f64;
    }
    let top: Vec<usize> = (0..eta.dim).collect();
    Ok(acc.get(&top) / factorial)
}
