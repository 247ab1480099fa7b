//! Vector fields on a coordinate chart.

use crate::exterior::VectorValue;
use crate::expr::{Bindings, CompiledExpr, EvalError, Expr};

/// Ordered coordinate names plus the numeric parameters expressions may use.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coords: Vec<String>,
    params: Bindings,
}

impl Chart {
    pub fn new(coords: Vec<String>, params: Bindings) -> Self {
        Chart { coords, params }
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &Bindings {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    /// Parameters plus `coords[i] = x[i]`.
    pub fn bind(&self, x: &[f64]) -> Bindings {
        assert_eq!(x.len(), self.coords.len(), "state has wrong dimension");
        let mut b = self.params.clone();
        for (name, v) in self.coords.iter().zip(x) {
            b.set(name, *v);
        }
        b
    }

    /// Coordinate values read back from bindings.
    pub fn point(&self, b: &Bindings) -> Result<Vec<f64>, EvalError> {
        self.coords
            .iter()
            .map(|c| b.get(c).ok_or_else(|| EvalError::Unbound(c.clone())))
            .collect()
    }

    fn slot_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.coords.iter().map(String::as_str).collect();
        names.extend(self.params.iter().map(|(k, _)| k));
        names
    }

    fn param_values(&self) -> Vec<f64> {
        self.params.iter().map(|(_, v)| v).collect()
    }

    pub fn compile(&self, e: &Expr) -> Result<ChartExpr, EvalError> {
        Ok(ChartExpr {
            code: e.compile(&self.slot_names())?,
            params: self.param_values(),
        })
    }
}

/// An expression compiled against a chart: evaluate with a state vector.
#[derive(Debug, Clone)]
pub struct ChartExpr {
    code: CompiledExpr,
    params: Vec<f64>,
}

impl ChartExpr {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut slots = Vec::with_capacity(x.len() + self.params.len());
        slots.extend_from_slice(x);
        slots.extend_from_slice(&self.params);
        self.code.eval(&slots)
    }
}

/// Symbolic vector field: one component per chart coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldExpr {
    components: Vec<Expr>,
}

impl VectorFieldExpr {
    pub fn new(components: Vec<Expr>) -> Self {
        VectorFieldExpr { components }
    }

    pub fn zero(dim: usize) -> Self {
        VectorFieldExpr::new(vec![Expr::zero(); dim])
    }

    /// The coordinate field `∂/∂x^i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut c = vec![Expr::zero(); dim];
        c[i] = Expr::one();
        VectorFieldExpr::new(c)
    }

    /// Parses one component per string.
    pub fn parse<S: AsRef<str>>(components: &[S]) -> Result<Self, crate::expr::ParseError> {
        components
            .iter()
            .map(|s| Expr::parse(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()
            .map(VectorFieldExpr::new)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    /// `X(f) = Σ X^i ∂f/∂x^i`.
    pub fn apply(&self, f: &Expr, coords: &[String]) -> Expr {
        assert_eq!(coords.len(), self.dim(), "chart and field dimensions differ");
        let mut acc = Expr::zero();
        for (xi, name) in self.components.iter().zip(coords) {
            if xi.is_zero() {
                continue;
            }
            let df = f.diff(name);
            if df.is_zero() {
                continue;
            }
            acc = acc + xi.clone() * df;
        }
        acc.simplify()
    }

    pub fn eval(&self, b: &Bindings) -> Result<VectorValue, EvalError> {
        self.components.iter().map(|c| c.eval(b)).collect::<Result<Vec<_>, _>>().map(VectorValue)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        VectorFieldExpr::new(self.components.iter().map(f).collect())
    }

    pub fn simplify(&self) -> Self {
        self.map(Expr::simplify)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        VectorFieldExpr::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| (a.clone() + b.clone()).simplify())
                .collect(),
        )
    }

    pub fn scale(&self, c: &Expr) -> Self {
        self.map(|a| (c.clone() * a.clone()).simplify())
    }

    /// True when every component simplifies to the constant 0.
    pub fn is_symbolically_zero(&self) -> bool {
        self.components.iter().all(|c| c.simplify().is_zero())
    }

    pub fn substitute_values(&self, b: &Bindings) -> Self {
        self.map(|c| c.substitute_values(b))
    }
}

/// Anything that yields a velocity at a state: the integrator's input.
pub trait Flow: Sync {
    fn dim(&self) -> usize;
    fn velocity(&self, x: &[f64], out: &mut [f64]) -> Result<(), EvalError>;
}

/// A [`VectorFieldExpr`] compiled against a chart.
#[derive(Debug, Clone)]
pub struct CompiledField {
    components: Vec<ChartExpr>,
}

impl CompiledField {
    pub fn new(field: &VectorFieldExpr, chart: &Chart) -> Result<Self, EvalError> {
        assert_eq!(field.dim(), chart.dim(), "chart and field dimensions differ");
        let components = field.components().iter().map(|c| chart.compile(c)).collect::<Result<_, _>>()?;
        Ok(CompiledField { components })
    }
}

impl Flow for CompiledField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn velocity(&self, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::new(
            vec!["q".into(), "p".into(), "s".into()],
            Bindings::from_pairs([("gamma", 0.5)]),
        )
    }

    #[test]
    fn apply_is_directional_derivative() {
        let x = VectorFieldExpr::parse(&["p", "-q", "0"]).unwrap();
        let h = Expr::parse("p^2/2 + q^2/2").unwrap();
        let xh = x.apply(&h, chart().coords());
        let b = chart().bind(&[0.3, -0.7, 1.0]);
        assert!(xh.eval(&b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn compiled_field_matches_symbolic() {
        let c = chart();
        let x = VectorFieldExpr::parse(&["p", "-q - gamma*p", "p^2 - gamma*s"]).unwrap();
        let f = CompiledField::new(&x, &c).unwrap();
        let state = [0.2, -1.1, 0.4];
        let mut out = [0.0; 3];
        f.velocity(&state, &mut out).unwrap();
        assert_eq!(out.to_vec(), x.eval(&c.bind(&state)).unwrap().0);
    }

    #[test]
    fn compile_reports_unbound_names() {
        let x = VectorFieldExpr::parse(&["p", "omega*q", "0"]).unwrap();
        let err = CompiledField::new(&x, &chart()).unwrap_err();
        assert_eq!(err, EvalError::Unbound("omega".into()));
    }
}
