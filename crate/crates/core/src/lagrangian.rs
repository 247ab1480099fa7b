//! Contact Lagrangian systems on `TQ × ℝ` with coordinates `(q^i, v^i, s)`.
//!
//! Coordinates are ordered q-block, v-block, then `s`. The Hessian
//! `W_ij = ∂²L/∂v^i∂v^j` is inverted symbolically (adjugate over
//! determinant) up to [`SYMBOLIC_INVERSE_MAX_DIM`] degrees of freedom;
//! larger systems get a [`PointwiseField`] that solves `W y = rhs` at each
//! state instead.

use nalgebra::{DMatrix, DVector};

use crate::contact::{ContactDynamics, ContactError, ContactStructure, EquationResiduals};
use crate::exterior::{FormExpr, VectorValue};
use crate::expr::{is_equivalent, Bindings, EvalError, Expr, ParseError};
use crate::field::{Chart, ChartExpr, CompiledField, Flow, VectorFieldExpr};
use crate::hamiltonian::ContactHamiltonianSystem;
use crate::system::{check_arity, validate, SystemError};

pub const SYMBOLIC_INVERSE_MAX_DIM: usize = 3;

/// `|det W| < SINGULAR_DET_TOL·(1 + ‖W‖)` counts as singular.
pub const SINGULAR_DET_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LagrangianError {
    #[error("Lagrangian is not regular at {at:?} (det W = {det:e})")]
    Singular { det: f64, at: Vec<f64> },
    #[error("Hessian determinant vanishes identically; the Lagrangian is singular")]
    SymbolicallySingular,
    #[error("symbolic inverse is only built for n <= {SYMBOLIC_INVERSE_MAX_DIM}; use the pointwise field")]
    SymbolicUnavailable,
    #[error("not a holonomic dissipation Lagrangian: {0}")]
    NotHolonomic(String),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Hessian of `L` in the velocities at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianValue {
    pub w: DMatrix<f64>,
    pub w_inv: DMatrix<f64>,
    pub det: f64,
    /// Condition number in the 1-norm.
    pub cond: f64,
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// LU with partial pivoting; `Err(det)` when the matrix counts as singular.
fn invert(w: &DMatrix<f64>) -> Result<HessianValue, f64> {
    let lu = w.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() < SINGULAR_DET_TOL * (1.0 + norm1(w)) {
        return Err(det);
    }
    let w_inv = lu.try_inverse().ok_or(det)?;
    let cond = norm1(w) * norm1(&w_inv);
    Ok(HessianValue {
        w: w.clone(),
        w_inv,
        det,
        cond,
    })
}

#[derive(Debug, Clone)]
pub struct ContactLagrangianSystem {
    n: usize,
    q: Vec<String>,
    v: Vec<String>,
    s: String,
    l: Expr,
    chart: Chart,
    l_v: Vec<Expr>,
    l_s: Expr,
    l_sv: Vec<Expr>,
    w: Vec<Vec<Expr>>,
    /// `∂L/∂q^k − v^j ∂²L/∂q^j∂v^k − L ∂²L/∂s∂v^k + (∂L/∂s)(∂L/∂v^k)`.
    force: Vec<Expr>,
    structure: ContactStructure,
}

impl ContactLagrangianSystem {
    pub fn new(q: Vec<String>, v: Vec<String>, s: impl Into<String>, l: Expr, params: Bindings) -> Result<Self, SystemError> {
        let n = q.len();
        if n == 0 {
            return Err(SystemError::ZeroDimension);
        }
        check_arity("velocity", &v, n)?;
        let s = s.into();
        let coords: Vec<String> = q.iter().chain(&v).cloned().chain([s.clone()]).collect();
        validate(&coords, &params, &[("the Lagrangian", &l)])?;
        let chart = Chart::new(coords, params);

        let l_v: Vec<Expr> = v.iter().map(|vi| l.diff(vi)).collect();
        let l_s = l.diff(&s);
        let l_sv: Vec<Expr> = l_v.iter().map(|e| e.diff(&s)).collect();
        let w: Vec<Vec<Expr>> = l_v.iter().map(|e| v.iter().map(|vj| e.diff(vj)).collect()).collect();
        let force = (0..n)
            .map(|k| {
                let mut f = l.diff(&q[k]);
                for j in 0..n {
                    let l_qv = l_v[k].diff(&q[j]);
                    if !l_qv.is_zero() {
                        f = f - Expr::var(&v[j]) * l_qv;
                    }
                }
                if !l_sv[k].is_zero() {
                    f = f - l.clone() * l_sv[k].clone();
                }
                if !l_s.is_zero() {
                    f = f + l_s.clone() * l_v[k].clone();
                }
                f.simplify()
            })
            .collect();

        let mut theta = vec![Expr::zero(); 2 * n + 1];
        theta[..n].clone_from_slice(&l_v);
        let eta = eta_from_theta(&theta);
        let energy = energy_expr(&l, &v, &l_v);
        let structure = ContactStructure::new(chart.clone(), eta, energy, Expr::neg(l_s.clone()).simplify())
            .expect("one-form");
        Ok(ContactLagrangianSystem {
            n,
            q,
            v,
            s,
            l,
            chart,
            l_v,
            l_s,
            l_sv,
            w,
            force,
            structure,
        })
    }

    pub fn parse(q: &[&str], v: &[&str], s: &str, l: &str, params: Bindings) -> Result<Self, LagrangianError> {
        let owned = |x: &[&str]| x.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Ok(Self::new(owned(q), owned(v), s, Expr::parse(l)?, params)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn q_names(&self) -> &[String] {
        &self.q
    }

    pub fn v_names(&self) -> &[String] {
        &self.v
    }

    pub fn s_name(&self) -> &str {
        &self.s
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.l
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

    pub fn bind(&self, x: &[f64]) -> Bindings {
        self.chart.bind(x)
    }

    pub fn structure(&self) -> &ContactStructure {
        &self.structure
    }

    /// `E_L = v^i ∂L/∂v^i − L`.
    pub fn energy(&self) -> &Expr {
        &self.structure.energy
    }

    /// Momenta `∂L/∂v^i`.
    pub fn momenta(&self) -> &[Expr] {
        &self.l_v
    }

    /// `(θ_L, η_L)` with `θ_L = (∂L/∂v^i) dq^i` and `η_L = ds − θ_L`.
    pub fn cartan_forms(&self) -> (FormExpr, FormExpr) {
        let mut theta = vec![Expr::zero(); self.dim()];
        theta[..self.n].clone_from_slice(&self.l_v);
        (FormExpr::one_form(theta), self.structure.eta.clone())
    }

    /// Symbolic `W_ij`.
    pub fn hessian_exprs(&self) -> &[Vec<Expr>] {
        &self.w
    }

    fn point(&self, b: &Bindings) -> Vec<f64> {
        self.chart.point(b).unwrap_or_default()
    }

    pub fn hessian(&self, b: &Bindings) -> Result<HessianValue, LagrangianError> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                w[(i, j)] = self.w[i][j].eval(b)?;
            }
        }
        invert(&w).map_err(|det| LagrangianError::Singular { det, at: self.point(b) })
    }

    pub fn is_regular_at(&self, b: &Bindings) -> Result<bool, LagrangianError> {
        match self.hessian(b) {
            Ok(_) => Ok(true),
            Err(LagrangianError::Singular { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    fn reeb_rhs(&self) -> Vec<Expr> {
        self.l_sv.iter().map(|e| Expr::neg(e.clone()).simplify()).collect()
    }

    /// Components `(0, W⁻¹·rhs, s_comp)` with `q_block` in front.
    fn assemble(&self, q_block: Vec<Expr>, rhs: &[Expr], s_comp: Expr) -> Result<VectorFieldExpr, LagrangianError> {
        if self.n > SYMBOLIC_INVERSE_MAX_DIM {
            return Err(LagrangianError::SymbolicUnavailable);
        }
        let (adj, det) = adjugate(&self.w);
        let det = det.simplify();
        if det.is_zero() {
            return Err(LagrangianError::SymbolicallySingular);
        }
        let mut comps = q_block;
        for row in &adj {
            let mut num = Expr::zero();
            for (a, r) in row.iter().zip(rhs) {
                if !a.is_zero() && !r.is_zero() {
                    num = num + a.clone() * r.clone();
                }
            }
            comps.push((num / det.clone()).simplify());
        }
        comps.push(s_comp);
        Ok(VectorFieldExpr::new(comps))
    }

    fn pointwise(&self, q_block: Vec<Expr>, rhs: Vec<Expr>, s_comp: Expr) -> Result<PointwiseField, EvalError> {
        let c = |e: &Expr| self.chart.compile(e);
        Ok(PointwiseField {
            n: self.n,
            q_block: q_block.iter().map(c).collect::<Result<_, _>>()?,
            w: self.w.iter().flatten().map(c).collect::<Result<_, _>>()?,
            rhs: rhs.iter().map(c).collect::<Result<_, _>>()?,
            s_comp: c(&s_comp)?,
        })
    }

    /// `R_L = ∂/∂s − W^{ji} ∂²L/∂s∂v^j ∂/∂v^i`.
    pub fn reeb_field(&self) -> Result<LagrangianField, LagrangianError> {
        match self.reeb_field_symbolic() {
            Err(LagrangianError::SymbolicUnavailable) => Ok(LagrangianField::Pointwise(self.reeb_field_pointwise()?)),
            other => other.map(LagrangianField::Symbolic),
        }
    }

    pub fn reeb_field_symbolic(&self) -> Result<VectorFieldExpr, LagrangianError> {
        self.assemble(vec![Expr::zero(); self.n], &self.reeb_rhs(), Expr::one())
    }

    pub fn reeb_field_pointwise(&self) -> Result<PointwiseField, LagrangianError> {
        Ok(self.pointwise(vec![Expr::zero(); self.n], self.reeb_rhs(), Expr::one())?)
    }

    /// The Euler–Lagrange field `Γ_L`: `q̇ = v`, `v̇ = W⁻¹ F`, `ṡ = L`.
    pub fn euler_lagrange_field(&self) -> Result<LagrangianField, LagrangianError> {
        match self.euler_lagrange_symbolic() {
            Err(LagrangianError::SymbolicUnavailable) => Ok(LagrangianField::Pointwise(self.euler_lagrange_pointwise()?)),
            other => other.map(LagrangianField::Symbolic),
        }
    }

    pub fn euler_lagrange_symbolic(&self) -> Result<VectorFieldExpr, LagrangianError> {
        let v = self.v.iter().map(|x| Expr::var(x)).collect();
        self.assemble(v, &self.force, self.l.clone())
    }

    pub fn euler_lagrange_pointwise(&self) -> Result<PointwiseField, LagrangianError> {
        let v = self.v.iter().map(|x| Expr::var(x)).collect();
        Ok(self.pointwise(v, self.force.clone(), self.l.clone())?)
    }

    /// `Γ_L` at `b` by numeric solve, refusing at singular points.
    pub fn euler_lagrange_at(&self, b: &Bindings) -> Result<VectorValue, LagrangianError> {
        self.field_at(b, &self.force, |s| Expr::var(s), Some(&self.l))
    }

    /// `R_L` at `b` by numeric solve.
    pub fn reeb_at(&self, b: &Bindings) -> Result<VectorValue, LagrangianError> {
        self.field_at(b, &self.reeb_rhs(), |_| Expr::zero(), None)
    }

    fn field_at(&self, b: &Bindings, rhs: &[Expr], q_comp: impl Fn(&str) -> Expr, s_comp: Option<&Expr>) -> Result<VectorValue, LagrangianError> {
        let h = self.hessian(b)?;
        let r = rhs.iter().map(|e| e.eval(b)).collect::<Result<Vec<_>, _>>()?;
        let y = &h.w_inv * DVector::from_vec(r);
        let mut out = Vec::with_capacity(self.dim());
        for v in &self.v {
            out.push(q_comp(v).eval(b)?);
        }
        out.extend(y.iter());
        out.push(match s_comp {
            Some(e) => e.eval(b)?,
            None => 1.0,
        });
        Ok(VectorValue(out))
    }

    /// Symbolic contact dynamics `(η_L, E_L, R_L, Γ_L)`; needs `n ≤ 3`.
    pub fn dynamics(&self, label: impl Into<String>) -> Result<ContactDynamics, LagrangianError> {
        Ok(ContactDynamics {
            label: label.into(),
            structure: self.structure.clone(),
            reeb: self.reeb_field_symbolic()?,
            field: self.euler_lagrange_symbolic()?,
        })
    }

    /// Residuals of `i(X)dη_L = dE_L − (L_{R_L}E_L)η_L` and `i(X)η_L = −E_L`,
    /// with `L_{R_L}E_L = −∂L/∂s`.
    pub fn lagrange_equation_residuals(&self, x: &VectorFieldExpr, b: &Bindings) -> Result<EquationResiduals, LagrangianError> {
        let xv = x.eval(b)?;
        Ok(self.structure.equation_residuals(&xv, b)?)
    }

    /// Same residuals for `Γ_L` evaluated pointwise.
    pub fn euler_lagrange_residuals(&self, b: &Bindings) -> Result<EquationResiduals, LagrangianError> {
        let xv = self.euler_lagrange_at(b)?;
        Ok(self.structure.equation_residuals(&xv, b)?)
    }

    /// `R_L(E_L) + ∂L/∂s`, with `R_L(E_L)` computed by direct contraction.
    pub fn reeb_energy_residual(&self, b: &Bindings) -> Result<f64, LagrangianError> {
        let r = self.reeb_at(b)?;
        let mut acc = self.l_s.eval(b)?;
        for (g, ri) in self.structure.energy_grad.iter().zip(&r.0) {
            if *ri != 0.0 {
                acc += g.eval(b)? * ri;
            }
        }
        Ok(acc)
    }

    /// `(max|i(R_L)dη_L|, i(R_L)η_L − 1)`.
    pub fn reeb_residuals(&self, b: &Bindings) -> Result<(f64, f64), LagrangianError> {
        let r = self.reeb_at(b)?;
        Ok(self.structure.reeb_residuals(&r, b)?)
    }

    pub fn sode_check(&self, x: &VectorFieldExpr) -> bool {
        sode_check(x, &self.v)
    }

    /// `FL(q, v, s) = (q, ∂L/∂v, s)` as a state in `(q, p, s)` order.
    pub fn legendre_map(&self, b: &Bindings) -> Result<Vec<f64>, LagrangianError> {
        let mut out = Vec::with_capacity(self.dim());
        for q in &self.q {
            out.push(b.get(q).ok_or_else(|| EvalError::Unbound(q.clone()))?);
        }
        for p in &self.l_v {
            out.push(p.eval(b)?);
        }
        out.push(b.get(&self.s).ok_or_else(|| EvalError::Unbound(self.s.clone()))?);
        Ok(out)
    }

    /// `max(|H(FL(b)) − E_L(b)|, ‖J_FL(b)·Γ_L(b) − X_H(FL(b))‖∞)`.
    pub fn check_legendre_equivalence(&self, h: &ContactHamiltonianSystem, b: &Bindings) -> Result<f64, LagrangianError> {
        LegendreComparison::new(self, h)?.residual(b)
    }
}

fn eta_from_theta(theta: &[Expr]) -> FormExpr {
    let mut c: Vec<Expr> = theta.iter().map(|t| Expr::neg(t.clone()).simplify()).collect();
    *c.last_mut().expect("nonempty") = Expr::one();
    FormExpr::one_form(c)
}

fn energy_expr(l: &Expr, v: &[String], l_v: &[Expr]) -> Expr {
    let mut e = Expr::zero();
    for (vi, p) in v.iter().zip(l_v) {
        if !p.is_zero() {
            e = e + Expr::var(vi) * p.clone();
        }
    }
    let e = (e - l.clone()).simplify();
    // expansion catches cancellations the local rewriter misses
    if is_equivalent(&e, &Expr::zero()) {
        Expr::zero()
    } else {
        e
    }
}

fn minor(m: &[Vec<Expr>], row: usize, col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

fn det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let term = m[0][j].clone() * det(&minor(m, 0, j));
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            acc.simplify()
        }
    }
}

/// `(adj W, det W)` with `W⁻¹ = adj W / det W`.
fn adjugate(m: &[Vec<Expr>]) -> (Vec<Vec<Expr>>, Expr) {
    let n = m.len();
    let adj = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = det(&minor(m, j, i));
                    if (i + j) % 2 == 0 { c } else { Expr::neg(c).simplify() }
                })
                .collect()
        })
        .collect();
    (adj, det(m))
}

/// True iff the first `v.len()` components are the velocity variables.
pub fn sode_check(x: &VectorFieldExpr, v: &[String]) -> bool {
    x.dim() > v.len()
        && x.components()
            .iter()
            .zip(v)
            .all(|(c, vi)| is_equivalent(c, &Expr::var(vi)))
}

/// Either a symbolic field or one that solves against the Hessian per state.
#[derive(Debug, Clone)]
pub enum LagrangianField {
    Symbolic(VectorFieldExpr),
    Pointwise(PointwiseField),
}

impl LagrangianField {
    pub fn as_symbolic(&self) -> Option<&VectorFieldExpr> {
        match self {
            LagrangianField::Symbolic(x) => Some(x),
            LagrangianField::Pointwise(_) => None,
        }
    }

    pub fn flow(&self, chart: &Chart) -> Result<LagrangianFlow, EvalError> {
        Ok(match self {
            LagrangianField::Symbolic(x) => LagrangianFlow::Compiled(CompiledField::new(x, chart)?),
            LagrangianField::Pointwise(p) => LagrangianFlow::Pointwise(p.clone()),
        })
    }
}

#[derive(Debug, Clone)]
pub enum LagrangianFlow {
    Compiled(CompiledField),
    Pointwise(PointwiseField),
}

impl Flow for LagrangianFlow {
    fn dim(&self) -> usize {
        match self {
            LagrangianFlow::Compiled(c) => c.dim(),
            LagrangianFlow::Pointwise(p) => p.dim(),
        }
    }

    fn velocity(&self, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        match self {
            LagrangianFlow::Compiled(c) => c.velocity(x, out),
            LagrangianFlow::Pointwise(p) => p.velocity(x, out),
        }
    }
}

/// `(q_block, W(x)⁻¹ rhs(x), s_comp)` evaluated per state.
#[derive(Debug, Clone)]
pub struct PointwiseField {
    n: usize,
    q_block: Vec<ChartExpr>,
    w: Vec<ChartExpr>,
    rhs: Vec<ChartExpr>,
    s_comp: ChartExpr,
}

impl Flow for PointwiseField {
    fn dim(&self) -> usize {
        2 * self.n + 1
    }

    fn velocity(&self, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let n = self.n;
        for (o, c) in out.iter_mut().zip(&self.q_block) {
            *o = c.eval(x)?;
        }
        let w = self.w.iter().map(|c| c.eval(x)).collect::<Result<Vec<_>, _>>()?;
        let w = DMatrix::from_row_slice(n, n, &w);
        let rhs = self.rhs.iter().map(|c| c.eval(x)).collect::<Result<Vec<_>, _>>()?;
        let h = invert(&w).map_err(|_| EvalError::Domain {
            subexpr: "W".into(),
            reason: "singular Hessian",
        })?;
        let y = h.w_inv * DVector::from_vec(rhs);
        out[n..2 * n].copy_from_slice(y.as_slice());
        out[2 * n] = self.s_comp.eval(x)?;
        Ok(())
    }
}

/// Precomputed pieces for comparing `Γ_L` with `X_H` through `FL`.
#[derive(Debug, Clone)]
pub struct LegendreComparison<'a> {
    l: &'a ContactLagrangianSystem,
    h: &'a ContactHamiltonianSystem,
    xh: VectorFieldExpr,
    /// `∂p_i/∂x^j` over the Lagrangian chart.
    jac: Vec<Vec<Expr>>,
}

impl<'a> LegendreComparison<'a> {
    pub fn new(l: &'a ContactLagrangianSystem, h: &'a ContactHamiltonianSystem) -> Result<Self, LagrangianError> {
        if l.n() != h.n() {
            return Err(LagrangianError::Mismatch(format!(
                "Lagrangian has {} degrees of freedom, Hamiltonian has {}",
                l.n(),
                h.n()
            )));
        }
        let jac = l.l_v.iter().map(|p| l.coords().iter().map(|x| p.diff(x)).collect()).collect();
        Ok(LegendreComparison {
            l,
            h,
            xh: h.hamiltonian_vector_field(),
            jac,
        })
    }

    pub fn residual(&self, b: &Bindings) -> Result<f64, LagrangianError> {
        let n = self.l.n();
        let gamma = self.l.euler_lagrange_at(b)?;
        let bh = self.h.bind(&self.l.legendre_map(b)?);
        let energy = (self.h.hamiltonian().eval(&bh)? - self.l.energy().eval(b)?).abs();
        let xh = self.xh.eval(&bh)?;
        let mut pushed = Vec::with_capacity(2 * n + 1);
        pushed.extend_from_slice(&gamma.0[..n]);
        for row in &self.jac {
            let mut acc = 0.0;
            for (d, g) in row.iter().zip(&gamma.0) {
                if !d.is_zero() && *g != 0.0 {
                    acc += d.eval(b)? * g;
                }
            }
            pushed.push(acc);
        }
        pushed.push(gamma.0[2 * n]);
        let field = pushed.iter().zip(&xh.0).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        Ok(energy.max(field))
    }
}

/// `L = L₀(q, v) + φ(q, s)`.
#[derive(Debug, Clone)]
pub struct HolonomicDissipationLagrangian {
    base: Expr,
    phi: Expr,
    base_system: ContactLagrangianSystem,
    system: ContactLagrangianSystem,
}

impl HolonomicDissipationLagrangian {
    pub fn new(q: Vec<String>, v: Vec<String>, s: impl Into<String>, base: Expr, phi: Expr, params: Bindings) -> Result<Self, LagrangianError> {
        let s = s.into();
        if base.depends_on(&s) {
            return Err(LagrangianError::NotHolonomic(format!("base Lagrangian depends on `{s}`")));
        }
        if let Some(vi) = v.iter().find(|vi| phi.depends_on(vi)) {
            return Err(LagrangianError::NotHolonomic(format!("dissipation term depends on `{vi}`")));
        }
        let system = ContactLagrangianSystem::new(q.clone(), v.clone(), s.clone(), base.clone() + phi.clone(), params.clone())?;
        if let Some(k) = system.l_sv.iter().position(|e| !is_equivalent(e, &Expr::zero())) {
            return Err(LagrangianError::NotHolonomic(format!("∂²L/∂s∂{} does not vanish", v[k])));
        }
        let base_system = ContactLagrangianSystem::new(q, v, s, base.clone(), params)?;
        Ok(HolonomicDissipationLagrangian {
            base,
            phi,
            base_system,
            system,
        })
    }

    pub fn base(&self) -> &Expr {
        &self.base
    }

    pub fn phi(&self) -> &Expr {
        &self.phi
    }

    /// The full system with `L = L₀ + φ`.
    pub fn system(&self) -> &ContactLagrangianSystem {
        &self.system
    }

    /// `∂φ/∂q^i + (∂φ/∂s)(∂L₀/∂v^i)`.
    pub fn dissipative_force(&self) -> Vec<Expr> {
        let sys = &self.system;
        let phi_s = self.phi.diff(&sys.s);
        sys.q
            .iter()
            .zip(&self.base_system.l_v)
            .map(|(q, p)| (self.phi.diff(q) + phi_s.clone() * p.clone()).simplify())
            .collect()
    }

    /// Largest deviation among `E_L − (E_{L₀} − φ)`, `R_L − ∂/∂s` and the
    /// Euler–Lagrange equations `d/dt ∂L₀/∂v − ∂L₀/∂q = force` along `Γ_L`.
    pub fn check(&self, b: &Bindings) -> Result<f64, LagrangianError> {
        let sys = &self.system;
        let n = sys.n;
        let energy = (sys.energy().eval(b)? - (self.base_system.energy().eval(b)? - self.phi.eval(b)?)).abs();
        let r = sys.reeb_at(b)?;
        let reeb = r
            .0
            .iter()
            .enumerate()
            .fold(0.0f64, |a, (i, x)| a.max((x - if i == 2 * n { 1.0 } else { 0.0 }).abs()));
        let gamma = sys.euler_lagrange_at(b)?;
        let force = self.dissipative_force();
        let mut el = 0.0f64;
        for k in 0..n {
            let p = &self.base_system.l_v[k];
            let mut dt = 0.0;
            for (x, g) in sys.coords().iter().zip(&gamma.0) {
                dt += p.diff(x).eval(b)? * g;
            }
            let lhs = dt - self.base.diff(&sys.q[k]).eval(b)?;
            el = el.max((lhs - force[k].eval(b)?).abs());
        }
        Ok(energy.max(reeb).max(el))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SampleBox;

    fn oscillator(gamma: f64) -> ContactLagrangianSystem {
        ContactLagrangianSystem::parse(
            &["q"],
            &["v"],
            "s",
            "m*v^2/2 - m*omega^2*q^2/2 - gamma*s",
            Bindings::from_pairs([("m", 1.5), ("omega", 1.2), ("gamma", gamma)]),
        )
        .unwrap()
    }

    fn parachute() -> ContactLagrangianSystem {
        ContactLagrangianSystem::parse(
            &["y"],
            &["v"],
            "s",
            "m*v^2/2 - m*g/(2*gamma)*(exp(2*gamma*y) - 1) + 2*gamma*v*s",
            Bindings::from_pairs([("m", 2.0), ("g", 9.81), ("gamma", 0.3)]),
        )
        .unwrap()
    }

    fn gravity() -> ContactLagrangianSystem {
        ContactLagrangianSystem::parse(
            &["x", "y"],
            &["vx", "vy"],
            "s",
            "m*(vx^2 + vy^2)/2 - m*g*y - gamma*s",
            Bindings::from_pairs([("m", 1.3), ("g", 9.81), ("gamma", 0.2)]),
        )
        .unwrap()
    }

    fn eq(a: &Expr, b: &str) -> bool {
        is_equivalent(a, &Expr::parse(b).unwrap())
    }

    #[test]
    fn energies() {
        assert!(eq(oscillator(0.1).energy(), "m*v^2/2 + m*omega^2*q^2/2 + gamma*s"));
        let l = ContactLagrangianSystem::parse(&["q"], &["v"], "s", "v", Bindings::new()).unwrap();
        assert!(l.energy().is_zero());
        assert!(eq(parachute().energy(), "m*v^2/2 + m*g/(2*gamma)*(exp(2*gamma*y) - 1)"));
    }

    #[test]
    fn cartan_forms() {
        let (theta, eta) = parachute().cartan_forms();
        assert!(eq(&theta.component(&[0]), "m*v + 2*gamma*s"));
        assert!(eq(&eta.component(&[0]), "-(m*v + 2*gamma*s)"));
        assert_eq!(eta.component(&[2]), Expr::one());
        let l = ContactLagrangianSystem::parse(&["q"], &["v"], "s", "q^2 + s", Bindings::new()).unwrap();
        let (theta, eta) = l.cartan_forms();
        assert!(theta.is_zero());
        assert_eq!(eta.coefficients(), vec![Expr::zero(), Expr::zero(), Expr::one()]);
    }

    #[test]
    fn hessians() {
        let g = gravity();
        let h = g.hessian(&g.bind(&[0.1, 0.2, 0.3, 0.4, 0.5])).unwrap();
        assert_eq!(h.w, DMatrix::from_row_slice(2, 2, &[1.3, 0.0, 0.0, 1.3]));
        assert!((h.det - 1.69).abs() < 1e-12);
        let l = ContactLagrangianSystem::parse(&["q"], &["v"], "s", "v^4", Bindings::new()).unwrap();
        assert!(matches!(l.hessian(&l.bind(&[0.0, 0.0, 0.0])), Err(LagrangianError::Singular { .. })));
        assert!(!l.is_regular_at(&l.bind(&[0.0, 0.0, 0.0])).unwrap());
        let one = ContactLagrangianSystem::parse(&["q"], &["v"], "s", "v^2/2", Bindings::new()).unwrap();
        let h = one.hessian(&one.bind(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!((h.w[(0, 0)], h.w_inv[(0, 0)]), (1.0, 1.0));
    }

    #[test]
    fn reeb_fields() {
        let p = parachute();
        let r = p.reeb_field_symbolic().unwrap();
        assert!(r.component(0).is_zero());
        assert!(eq(r.component(1), "-2*gamma/m"));
        assert!(r.component(2).is_one());
        assert!(!p.sode_check(&r));
        for x in SampleBox::standard(3).points(100, 11) {
            let (r1, r2) = p.reeb_residuals(&p.bind(&x)).unwrap();
            assert!(r1 <= 1e-12 && r2.abs() <= 1e-12);
            assert!(p.reeb_energy_residual(&p.bind(&x)).unwrap().abs() <= 1e-10);
        }
        let r = oscillator(0.4).reeb_field_symbolic().unwrap();
        assert_eq!(r, VectorFieldExpr::parse(&["0", "0", "1"]).unwrap());
    }

    #[test]
    fn euler_lagrange_fields() {
        let x = oscillator(0.4).euler_lagrange_symbolic().unwrap();
        assert!(eq(x.component(0), "v"));
        assert!(eq(x.component(1), "-(omega^2*q + gamma*v)"));
        assert!(eq(x.component(2), "m*v^2/2 - m*omega^2*q^2/2 - gamma*s"));

        let x = gravity().euler_lagrange_symbolic().unwrap();
        assert!(eq(x.component(2), "-gamma*vx"));
        assert!(eq(x.component(3), "-(g + gamma*vy)"));

        let p = parachute();
        let x = p.euler_lagrange_symbolic().unwrap();
        assert!(eq(x.component(1), "gamma*v^2 - g"));
        assert!(eq(x.component(2), p.lagrangian().to_string().as_str()));
        assert!(p.sode_check(&x));
        assert!(sode_check(&VectorFieldExpr::parse(&["v", "q*s", "exp(v)"]).unwrap(), &["v".to_string()]));
    }

    #[test]
    fn singular_lagrangian_is_refused() {
        let l = ContactLagrangianSystem::parse(&["q"], &["v"], "s", "v - q*s", Bindings::new()).unwrap();
        assert_eq!(l.euler_lagrange_symbolic().unwrap_err(), LagrangianError::SymbolicallySingular);
        assert!(matches!(l.euler_lagrange_at(&l.bind(&[1.0, 1.0, 1.0])), Err(LagrangianError::Singular { .. })));
    }

    #[test]
    fn residuals() {
        for sys in [oscillator(0.3), parachute(), gravity()] {
            let x = sys.euler_lagrange_symbolic().unwrap();
            for pt in SampleBox::standard(sys.dim()).points(50, 12) {
                let b = sys.bind(&pt);
                assert!(sys.lagrange_equation_residuals(&x, &b).unwrap().max() <= 1e-10);
                assert!(sys.euler_lagrange_residuals(&b).unwrap().max() <= 1e-10);
            }
        }
        let p = parachute();
        let b = p.bind(&[0.3, -0.4, 1.1]);
        let r = p.lagrange_equation_residuals(&VectorFieldExpr::coordinate(3, 2), &b).unwrap();
        assert!((r.r2 - (1.0 + p.energy().eval(&b).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn pointwise_matches_symbolic() {
        let g = gravity();
        let sym = CompiledField::new(&g.euler_lagrange_symbolic().unwrap(), g.chart()).unwrap();
        let pw = g.euler_lagrange_pointwise().unwrap();
        for x in SampleBox::standard(5).points(20, 13) {
            let (mut a, mut b) = ([0.0; 5], [0.0; 5]);
            sym.velocity(&x, &mut a).unwrap();
            pw.velocity(&x, &mut b).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn large_systems_fall_back_to_pointwise() {
        let q = ["a", "b", "c", "d"];
        let v = ["va", "vb", "vc", "vd"];
        let l = "(va^2 + vb^2 + vc^2 + vd^2)/2 + va*vb/4 - a^2 - b*c - d^2 - s/3";
        let sys = ContactLagrangianSystem::parse(&q, &v, "s", l, Bindings::new()).unwrap();
        assert!(matches!(sys.euler_lagrange_field().unwrap(), LagrangianField::Pointwise(_)));
        assert_eq!(sys.dynamics("x").unwrap_err(), LagrangianError::SymbolicUnavailable);
        for x in SampleBox::standard(9).points(20, 14) {
            assert!(sys.euler_lagrange_residuals(&sys.bind(&x)).unwrap().max() <= 1e-10);
        }
    }

    #[test]
    fn legendre() {
        let osc = ContactLagrangianSystem::parse(&["q"], &["v"], "s", "v^2/2 - q^2/2", Bindings::new()).unwrap();
        assert_eq!(osc.legendre_map(&osc.bind(&[1.0, 2.0, 0.0])).unwrap(), vec![1.0, 2.0, 0.0]);
        let p = parachute();
        let fl = p.legendre_map(&p.bind(&[0.0, 1.0, 3.0])).unwrap();
        assert!((fl[1] - (2.0 + 2.0 * 0.3 * 3.0)).abs() < 1e-12);

        let params = Bindings::from_pairs([("m", 1.5), ("omega", 1.2), ("gamma", 0.3)]);
        let h = ContactHamiltonianSystem::parse(&["q"], &["p"], "s", "p^2/(2*m) + m*omega^2*q^2/2 + gamma*s", params.clone()).unwrap();
        let l = oscillator(0.3);
        let cmp = LegendreComparison::new(&l, &h).unwrap();
        for x in SampleBox::standard(3).points(100, 15) {
            assert!(cmp.residual(&l.bind(&x)).unwrap() <= 1e-9);
        }
        let shifted = h.with_hamiltonian(h.hamiltonian().clone() + Expr::one()).unwrap();
        let r = l.check_legendre_equivalence(&shifted, &l.bind(&[0.2, 0.3, 0.4])).unwrap();
        assert!((r - 1.0).abs() < 1e-9);

        let hp = ContactHamiltonianSystem::parse(
            &["y"],
            &["p"],
            "s",
            "(p - 2*gamma*s)^2/(2*m) + m*g/(2*gamma)*(exp(2*gamma*y) - 1)",
            Bindings::from_pairs([("m", 2.0), ("g", 9.81), ("gamma", 0.3)]),
        )
        .unwrap();
        let p = parachute();
        for x in SampleBox::standard(3).points(100, 16) {
            assert!(p.check_legendre_equivalence(&hp, &p.bind(&x)).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn holonomic_dissipation() {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let params = Bindings::from_pairs([("gamma", 0.3)]);
        let hd = |phi: &str| {
            HolonomicDissipationLagrangian::new(
                names(&["q"]),
                names(&["v"]),
                "s",
                Expr::parse("v^2/2 - q^2/2").unwrap(),
                Expr::parse(phi).unwrap(),
                params.clone(),
            )
        };
        let h = hd("-gamma*s").unwrap();
        assert!(eq(&h.dissipative_force()[0], "-gamma*v"));
        for x in SampleBox::standard(3).points(50, 17) {
            assert!(h.check(&h.system().bind(&x)).unwrap() <= 1e-12);
            let fl = h.system().legendre_map(&h.system().bind(&x)).unwrap();
            assert_eq!(fl[1], x[1]);
        }
        assert!(hd("0").unwrap().dissipative_force()[0].is_zero());
        assert!(eq(&hd("q^3").unwrap().dissipative_force()[0], "3*q^2"));
        assert!(matches!(hd("v*s"), Err(LagrangianError::NotHolonomic(_))));
    }
}
