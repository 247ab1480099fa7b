//! Formalism-independent pieces of a contact Hamiltonian system `(M, η, H)`.
//!
//! Both the Hamiltonian side (canonical `η`, Hamiltonian `H`) and the
//! Lagrangian side (`η_L`, energy `E_L`) reduce to a [`ContactStructure`],
//! and once the dynamics is known symbolically, to a [`ContactDynamics`].
//! Residual checks work on numeric values at a point.

use nalgebra::DMatrix;

use crate::exterior::{contract, eval_form, exterior_derivative, wedge, FormError, FormExpr, FormValue, VectorValue};
use crate::expr::{Bindings, EvalError, Expr};
use crate::field::{Chart, CompiledField, VectorFieldExpr};

/// Points with `|H| <= ZERO_LOCUS_TOL` are treated as lying on `{H = 0}`.
pub const ZERO_LOCUS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContactError {
    #[error("on H=0 locus (|H| = {value:e}); the Reeb-free equations are not equivalent there")]
    OnZeroLocus { value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Residuals of `i(X)dη = dH - (L_R H)η`, `i(X)η = -H` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationResiduals {
    /// Coefficients of `i(X)dη - dH + (L_R H)η`.
    pub one_form: Vec<f64>,
    /// Max-norm of `one_form`.
    pub r1: f64,
    /// `i(X)η + H`.
    pub r2: f64,
}

impl EquationResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2.abs())
    }
}

#[derive(Debug, Clone)]
pub struct ContactStructure {
    pub chart: Chart,
    pub eta: FormExpr,
    pub d_eta: FormExpr,
    pub energy: Expr,
    pub energy_grad: Vec<Expr>,
    /// `L_R H` as an expression.
    pub reeb_rate: Expr,
}

impl ContactStructure {
    pub fn new(chart: Chart, eta: FormExpr, energy: Expr, reeb_rate: Expr) -> Result<Self, FormError> {
        let d_eta = exterior_derivative(&eta, chart.coords())?;
        let energy_grad = chart.coords().iter().map(|x| energy.diff(x)).collect();
        Ok(ContactStructure {
            chart,
            eta,
            d_eta,
            energy,
            energy_grad,
            reeb_rate,
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn grad_value(&self, b: &Bindings) -> Result<FormValue, EvalError> {
        let g = self.energy_grad.iter().map(|e| e.eval(b)).collect::<Result<Vec<_>, _>>()?;
        Ok(FormValue::covector(&g))
    }

    pub fn equation_residuals(&self, x: &VectorValue, b: &Bindings) -> Result<EquationResiduals, ContactError> {
        let eta = eval_form(&self.eta, b)?;
        let d_eta = eval_form(&self.d_eta, b)?;
        let dh = self.grad_value(b)?;
        let h = self.energy.eval(b)?;
        let rate = self.reeb_rate.eval(b)?;
        let lhs = contract(x, &d_eta)?;
        let rhs = &dh - &(rate * &eta);
        let one_form = (&lhs - &rhs).to_covector();
        let r1 = one_form.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let r2 = contract(x, &eta)?.get(&[]) + h;
        Ok(EquationResiduals { one_form, r1, r2 })
    }

    /// `Ω = -H dη + dH ∧ η` at the point.
    pub fn omega(&self, b: &Bindings) -> Result<FormValue, ContactError> {
        let eta = eval_form(&self.eta, b)?;
        let d_eta = eval_form(&self.d_eta, b)?;
        let h = self.energy.eval(b)?;
        let dh = self.grad_value(b)?;
        Ok(&(-h * &d_eta) + &wedge(&dh, &eta)?)
    }

    /// `(max|i(X)Ω|, i(X)η + H)`; refuses on the zero locus of `H`.
    pub fn omega_residuals(&self, x: &VectorValue, b: &Bindings, zero_tol: f64) -> Result<(f64, f64), ContactError> {
        let h = self.energy.eval(b)?;
        if h.abs() <= zero_tol {
            return Err(ContactError::OnZeroLocus { value: h });
        }
        let r1 = contract(x, &self.omega(b)?)?.max_abs();
        let eta = eval_form(&self.eta, b)?;
        let r2 = contract(x, &eta)?.get(&[]) + h;
        Ok((r1, r2))
    }

    /// `♭(X) = i(X)dη + (i(X)η)η`.
    pub fn flat(&self, x: &VectorValue, b: &Bindings) -> Result<Vec<f64>, ContactError> {
        let eta = eval_form(&self.eta, b)?;
        let d_eta = eval_form(&self.d_eta, b)?;
        let a = contract(x, &d_eta)?;
        let c = contract(x, &eta)?.get(&[]);
        Ok((&a + &(c * &eta)).to_covector())
    }

    /// `dH - (L_R H + H)η`, the image of the dynamics under `♭`.
    pub fn flat_of_dynamics(&self, b: &Bindings) -> Result<Vec<f64>, ContactError> {
        let eta = eval_form(&self.eta, b)?;
        let dh = self.grad_value(b)?;
        let k = self.reeb_rate.eval(b)? + self.energy.eval(b)?;
        Ok((&dh - &(k * &eta)).to_covector())
    }

    /// Matrix of `♭` in coordinates; column `j` is `♭(∂/∂x^j)`.
    pub fn flat_matrix(&self, b: &Bindings) -> Result<DMatrix<f64>, ContactError> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for j in 0..m {
            let col = self.flat(&VectorValue::unit(m, j), b)?;
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    /// `(max|i(R)dη|, i(R)η - 1)`.
    pub fn reeb_residuals(&self, r: &VectorValue, b: &Bindings) -> Result<(f64, f64), ContactError> {
        let eta = eval_form(&self.eta, b)?;
        let d_eta = eval_form(&self.d_eta, b)?;
        Ok((contract(r, &d_eta)?.max_abs(), contract(r, &eta)?.get(&[]) - 1.0))
    }

    /// `i(Y)η` as an expression.
    pub fn contract_eta(&self, y: &VectorFieldExpr) -> Expr {
        let mut acc = Expr::zero();
        for (i, c) in self.eta.coefficients().into_iter().enumerate() {
            if c.is_zero() || y.component(i).is_zero() {
                continue;
            }
            acc = acc + y.component(i).clone() * c;
        }
        acc.simplify()
    }
}

/// A contact structure together with its Reeb field and dynamics.
#[derive(Debug, Clone)]
pub struct ContactDynamics {
    pub label: String,
    pub structure: ContactStructure,
    pub reeb: VectorFieldExpr,
    pub field: VectorFieldExpr,
}

impl ContactDynamics {
    pub fn chart(&self) -> &Chart {
        &self.structure.chart
    }

    pub fn coords(&self) -> &[String] {
        self.structure.chart.coords()
    }

    pub fn energy(&self) -> &Expr {
        &self.structure.energy
    }

    pub fn eta(&self) -> &FormExpr {
        &self.structure.eta
    }

    pub fn compile(&self) -> Result<CompiledField, EvalError> {
        CompiledField::new(&self.field, self.chart())
    }

    pub fn equation_residuals(&self, b: &Bindings) -> Result<EquationResiduals, ContactError> {
        let x = self.field.eval(b)?;
        self.structure.equation_residuals(&x, b)
    }

    /// `X(H) + (L_R H) H`; vanishes for the contact Hamiltonian field.
    pub fn dissipation_rate_residual(&self, b: &Bindings) -> Result<f64, ContactError> {
        let x = self.field.eval(b)?;
        let xh: f64 = self
            .structure
            .energy_grad
            .iter()
            .zip(&x.0)
            .map(|(g, xi)| g.eval(b).map(|g| g * xi))
            .sum::<Result<f64, _>>()?;
        Ok(xh + self.structure.reeb_rate.eval(b)? * self.structure.energy.eval(b)?)
    }
}
