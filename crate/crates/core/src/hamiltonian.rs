//! Contact Hamiltonian systems in Darboux coordinates `(q^i, p_i, s)` with
//! `η = ds - p_i dq^i` and Reeb field `∂/∂s`.
//!
//! Coordinates are ordered q-block, p-block, then `s`.

use crate::contact::{ContactDynamics, ContactError, ContactStructure, EquationResiduals, ZERO_LOCUS_TOL};
use crate::exterior::{FormExpr, VectorValue};
use crate::expr::{Bindings, Expr, ParseError};
use crate::field::{Chart, VectorFieldExpr};
use crate::system::{check_arity, validate, SystemError};

#[derive(Debug, Clone)]
pub struct ContactHamiltonianSystem {
    n: usize,
    q: Vec<String>,
    p: Vec<String>,
    s: String,
    h: Expr,
    chart: Chart,
}

impl ContactHamiltonianSystem {
    pub fn new(q: Vec<String>, p: Vec<String>, s: impl Into<String>, h: Expr, params: Bindings) -> Result<Self, SystemError> {
        let n = q.len();
        if n == 0 {
            return Err(SystemError::ZeroDimension);
        }
        check_arity("momentum", &p, n)?;
        let s = s.into();
        let coords: Vec<String> = q.iter().chain(&p).cloned().chain([s.clone()]).collect();
        validate(&coords, &params, &[("the Hamiltonian", &h)])?;
        Ok(ContactHamiltonianSystem {
            n,
            q,
            p,
            s,
            h,
            chart: Chart::new(coords, params),
        })
    }

    /// Convenience constructor from string names and a Hamiltonian source.
    pub fn parse(q: &[&str], p: &[&str], s: &str, h: &str, params: Bindings) -> Result<Self, HamiltonianBuildError> {
        let owned = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let h = Expr::parse(h)?;
        Ok(Self::new(owned(q), owned(p), s, h, params)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q_names(&self) -> &[String] {
        &self.q
    }

    pub fn p_names(&self) -> &[String] {
        &self.p
    }

    pub fn s_name(&self) -> &str {
        &self.s
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coords(&self) -> &[String] {
        self.chart.coords()
    }

    pub fn params(&self) -> &Bindings {
        self.chart.params()
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Parameters plus coordinates bound to the state `x`.
    pub fn bind(&self, x: &[f64]) -> Bindings {
        self.chart.bind(x)
    }

    /// Same system with a different Hamiltonian.
    pub fn with_hamiltonian(&self, h: Expr) -> Result<Self, SystemError> {
        Self::new(self.q.clone(), self.p.clone(), self.s.clone(), h, self.params().clone())
    }

    /// `η = ds - p_i dq^i`.
    pub fn contact_form(&self) -> FormExpr {
        let mut coeffs = vec![Expr::zero(); self.dim()];
        for i in 0..self.n {
            coeffs[i] = Expr::neg(Expr::var(&self.p[i]));
        }
        coeffs[2 * self.n] = Expr::one();
        FormExpr::one_form(coeffs)
    }

    pub fn reeb_field(&self) -> VectorFieldExpr {
        VectorFieldExpr::coordinate(self.dim(), 2 * self.n)
    }

    /// `L_R H = ∂H/∂s`.
    pub fn reeb_rate(&self) -> Expr {
        self.h.diff(&self.s)
    }

    /// `q̇ = ∂H/∂p`, `ṗ = -(∂H/∂q + p ∂H/∂s)`, `ṡ = p ∂H/∂p - H`.
    pub fn hamiltonian_vector_field(&self) -> VectorFieldExpr {
        let h_s = self.reeb_rate();
        let h_p: Vec<Expr> = self.p.iter().map(|p| self.h.diff(p)).collect();
        let mut comps = Vec::with_capacity(self.dim());
        comps.extend(h_p.iter().cloned());
        for (q, p) in self.q.iter().zip(&self.p) {
            let c = Expr::neg(self.h.diff(q) + Expr::var(p) * h_s.clone());
            comps.push(c.simplify());
        }
        let mut s_dot = Expr::zero();
        for (p, hp) in self.p.iter().zip(&h_p) {
            s_dot = s_dot + Expr::var(p) * hp.clone();
        }
        comps.push((s_dot - self.h.clone()).simplify());
        VectorFieldExpr::new(comps)
    }

    pub fn structure(&self) -> ContactStructure {
        ContactStructure::new(self.chart.clone(), self.contact_form(), self.h.clone(), self.reeb_rate())
            .expect("canonical form has degree 1")
    }

    pub fn dynamics(&self, label: impl Into<String>) -> ContactDynamics {
        ContactDynamics {
            label: label.into(),
            structure: self.structure(),
            reeb: self.reeb_field(),
            field: self.hamiltonian_vector_field(),
        }
    }

    /// Residuals of `i(X)dη = dH - (L_R H)η` and `i(X)η = -H` at `b`.
    pub fn hamilton_equation_residuals(&self, x: &VectorFieldExpr, b: &Bindings) -> Result<EquationResiduals, ContactError> {
        let xv = x.eval(b)?;
        self.structure().equation_residuals(&xv, b)
    }

    /// `(max|i(X)Ω|, i(X)η + H)` with `Ω = -H dη + dH ∧ η`. Fails with
    /// [`ContactError::OnZeroLocus`] where `|H| <= 1e-6`.
    pub fn omega_residuals(&self, x: &VectorFieldExpr, b: &Bindings) -> Result<(f64, f64), ContactError> {
        let xv = x.eval(b)?;
        self.structure().omega_residuals(&xv, b, ZERO_LOCUS_TOL)
    }

    pub fn flat_map(&self, x: &VectorFieldExpr, b: &Bindings) -> Result<Vec<f64>, ContactError> {
        let xv = x.eval(b)?;
        self.structure().flat(&xv, b)
    }

    /// `X_H(H) + (∂H/∂s) H` at `b`.
    pub fn dissipation_rate_residual(&self, b: &Bindings) -> Result<f64, ContactError> {
        self.dynamics("").dissipation_rate_residual(b)
    }

    pub fn reeb_residuals(&self, b: &Bindings) -> Result<(f64, f64), ContactError> {
        let r = VectorValue::unit(self.dim(), 2 * self.n);
        self.structure().reeb_residuals(&r, b)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HamiltonianBuildError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    System(#[from] SystemError),
}
