//! Lie brackets, symmetry tests, dissipated and conserved quantities.
//!
//! Symmetry tests are pointwise: a symbolically zero residual passes at
//! once, otherwise residuals are sampled on a seeded box. Every residual is
//! divided by `1 + max|x| + |H|` before comparing with the tolerance.

use serde::{Deserialize, Serialize};

use crate::contact::ContactDynamics;
use crate::exterior::{contract_symbolic, exterior_derivative, FormError, FormExpr};
use crate::expr::{is_equivalent, EvalError, Expr};
use crate::field::{Chart, ChartExpr, CompiledField, VectorFieldExpr};
use crate::integrate::{cumulative_corrected_trapezoid, flow_step, Trajectory};
use crate::sampling::{residual_scale, SampleBox, DEFAULT_SEED};

/// Points where a quotient's denominator is smaller than this are skipped.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymmetryError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("quotient needs two dissipated quantities")]
    NotDissipated,
    #[error("{0}")]
    Lift(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCandidate {
    pub label: String,
    pub field: VectorFieldExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantityKind {
    Dissipated,
    Conserved,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub expr: Expr,
    pub kind: QuantityKind,
    /// Denominator of a quotient; points where it nearly vanishes are skipped.
    pub denominator: Option<Expr>,
}

impl Quantity {
    pub fn new(expr: Expr, kind: QuantityKind) -> Self {
        Quantity {
            expr,
            kind,
            denominator: None,
        }
    }
}

/// Outcome of a sampled check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub passed: bool,
    /// Largest scaled residual.
    pub worst_residual: f64,
    pub tolerance: f64,
    pub worst_point: Option<Vec<f64>>,
    pub checked: usize,
    pub skipped: usize,
    /// Settled by symbolic simplification alone.
    pub symbolic: bool,
    pub notes: Vec<String>,
}

impl Report {
    pub fn symbolic_pass(name: &str, tol: f64) -> Self {
        Report {
            name: name.to_string(),
            passed: true,
            worst_residual: 0.0,
            tolerance: tol,
            worst_point: None,
            checked: 0,
            skipped: 0,
            symbolic: true,
            notes: vec!["residual simplifies to zero".into()],
        }
    }

    pub fn new(name: &str, tol: f64) -> Self {
        Report {
            name: name.to_string(),
            passed: false,
            worst_residual: 0.0,
            tolerance: tol,
            worst_point: None,
            checked: 0,
            skipped: 0,
            symbolic: false,
            notes: Vec::new(),
        }
    }

    pub fn record(&mut self, residual: f64, x: &[f64]) {
        self.checked += 1;
        if residual > self.worst_residual || self.worst_point.is_none() || residual.is_nan() {
            self.worst_residual = if residual.is_nan() { f64::INFINITY } else { residual.max(self.worst_residual) };
            self.worst_point = Some(x.to_vec());
        }
    }

    /// Settles `passed`; a report with no evaluated points fails.
    pub fn finish(mut self) -> Self {
        if self.checked == 0 && !self.symbolic {
            self.passed = false;
            self.notes.push("no evaluable points".into());
        } else {
            self.passed = self.worst_residual <= self.tolerance;
        }
        if self.skipped > 0 {
            self.notes.push(format!("{} points skipped (evaluation failed or excluded)", self.skipped));
        }
        self
    }

    /// Combines sub-checks; passes iff all parts pass.
    pub fn merge(name: &str, parts: Vec<Report>) -> Report {
        let mut out = Report::new(name, parts.first().map_or(0.0, |p| p.tolerance));
        out.passed = !parts.is_empty() && parts.iter().all(|p| p.passed);
        out.symbolic = parts.iter().all(|p| p.symbolic);
        for p in parts {
            out.checked += p.checked;
            out.skipped += p.skipped;
            if p.worst_residual >= out.worst_residual && p.worst_point.is_some() {
                out.worst_residual = p.worst_residual;
                out.worst_point = p.worst_point.clone();
            }
            out.notes.push(format!("{}: {}", p.name, if p.passed { "pass" } else { "FAIL" }));
            out.notes.extend(p.notes.into_iter().map(|n| format!("{}: {n}", p.name)));
        }
        out
    }
}

/// Where and how densely to sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub sample_box: Option<SampleBox>,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            sample_box: None,
            points: 200,
            seed: DEFAULT_SEED,
            tol: 1e-9,
        }
    }
}

impl CheckOptions {
    pub fn sample(&self, dim: usize) -> Vec<Vec<f64>> {
        match &self.sample_box {
            Some(b) => b.points(self.points, self.seed),
            None => SampleBox::standard(dim).points(self.points, self.seed),
        }
    }
}

/// Tolerances for laws checked along a trajectory: the pointwise rate
/// residual and the integrated law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryTol {
    pub pointwise: f64,
    pub global: f64,
}

impl TrajectoryTol {
    pub fn uniform(tol: f64) -> Self {
        TrajectoryTol { pointwise: tol, global: tol }
    }
}

impl Default for TrajectoryTol {
    fn default() -> Self {
        TrajectoryTol {
            pointwise: 1e-9,
            global: 1e-6,
        }
    }
}

/// Which bracket condition counts as a dynamical symmetry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BracketMode {
    /// `[Y, X] = 0`.
    #[default]
    Strict,
    /// `η([Y, X]) = 0`, enough for the dissipation theorem.
    KernelEta,
}

/// `[X, Y]^i = X^j ∂Y^i/∂x^j − Y^j ∂X^i/∂x^j`.
pub fn lie_bracket(x: &VectorFieldExpr, y: &VectorFieldExpr, coords: &[String]) -> VectorFieldExpr {
    assert_eq!(x.dim(), y.dim(), "fields differ in dimension");
    let comps = (0..x.dim())
        .map(|i| (x.apply(y.component(i), coords) - y.apply(x.component(i), coords)).simplify())
        .collect();
    VectorFieldExpr::new(comps)
}

/// `L_Y f = i(Y)df + d(i(Y)f)` for forms of degree 0 or 1.
pub fn lie_derivative_one_form(y: &VectorFieldExpr, f: &FormExpr, coords: &[String]) -> Result<FormExpr, FormError> {
    match f.degree() {
        0 => Ok(FormExpr::scalar(f.dim(), y.apply(&f.component(&[]), coords))),
        1 => {
            let df = exterior_derivative(f, coords)?;
            let a = contract_symbolic(y.components(), &df)?;
            let c = contract_symbolic(y.components(), f)?;
            let b = exterior_derivative(&c, coords)?;
            Ok(a.add(&b)?.map(Expr::simplify))
        }
        got => Err(FormError::Degree { got, max: 1 }),
    }
}

fn is_zero_expr(e: &Expr) -> bool {
    e.is_zero() || is_equivalent(e, &Expr::zero())
}

struct Sampler<'a> {
    dynamics: &'a ContactDynamics,
    energy: ChartExpr,
}

impl<'a> Sampler<'a> {
    fn new(dynamics: &'a ContactDynamics) -> Result<Self, EvalError> {
        Ok(Sampler {
            dynamics,
            energy: dynamics.chart().compile(dynamics.energy())?,
        })
    }

    fn scale(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(residual_scale(x, self.energy.eval(x)?))
    }

    /// Max-norm of `exprs` at each point, scaled.
    fn sweep(&self, name: &str, exprs: &[Expr], opts: &CheckOptions) -> Report {
        if exprs.iter().all(is_zero_expr) {
            return Report::symbolic_pass(name, opts.tol);
        }
        let chart = self.dynamics.chart();
        let mut report = Report::new(name, opts.tol);
        let compiled: Result<Vec<ChartExpr>, _> = exprs.iter().map(|e| chart.compile(e)).collect();
        let compiled = match compiled {
            Ok(c) => c,
            Err(e) => {
                report.notes.push(e.to_string());
                return report.finish();
            }
        };
        for x in opts.sample(chart.dim()) {
            let r = compiled
                .iter()
                .map(|c| c.eval(&x))
                .collect::<Result<Vec<_>, _>>()
                .and_then(|v| Ok(v.iter().fold(0.0f64, |a, r| a.max(r.abs())) / self.scale(&x)?));
            match r {
                Ok(r) => report.record(r, &x),
                Err(_) => report.skipped += 1,
            }
        }
        report.finish()
    }
}

fn sampler<'a>(dynamics: &'a ContactDynamics, name: &str, tol: f64) -> Result<Sampler<'a>, Report> {
    Sampler::new(dynamics).map_err(|e| {
        let mut r = Report::new(name, tol);
        r.notes.push(e.to_string());
        r.finish()
    })
}

/// Samples `[Y, X]` (or `η([Y, X])` in kernel mode).
pub fn is_dynamical_symmetry(y: &VectorFieldExpr, dynamics: &ContactDynamics, opts: &CheckOptions, mode: BracketMode) -> Report {
    let name = "dynamical symmetry";
    let s = match sampler(dynamics, name, opts.tol) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let bracket = lie_bracket(y, &dynamics.field, dynamics.coords());
    match mode {
        BracketMode::Strict => s.sweep(name, bracket.components(), opts),
        BracketMode::KernelEta => {
            let e = dynamics.structure.contract_eta(&bracket);
            let mut r = s.sweep(name, &[e], opts);
            r.notes.push("kernel-eta mode".into());
            r
        }
    }
}

/// Samples `L_Y η`, `L_Y H` and the consequence `[Y, R]`.
pub fn is_contact_symmetry(y: &VectorFieldExpr, dynamics: &ContactDynamics, opts: &CheckOptions) -> Report {
    let name = "contact symmetry";
    let s = match sampler(dynamics, name, opts.tol) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let coords = dynamics.coords();
    let l_eta = match lie_derivative_one_form(y, dynamics.eta(), coords) {
        Ok(f) => f.coefficients(),
        Err(e) => {
            let mut r = Report::new(name, opts.tol);
            r.notes.push(e.to_string());
            return r.finish();
        }
    };
    let l_h = y.apply(dynamics.energy(), coords);
    let y_r = lie_bracket(y, &dynamics.reeb, coords);
    Report::merge(
        name,
        vec![
            s.sweep("L_Y eta", &l_eta, opts),
            s.sweep("L_Y H", &[l_h], opts),
            s.sweep("[Y, R]", y_r.components(), opts),
        ],
    )
}

/// `F = −i(Y)η`.
pub fn dissipated_from_symmetry(y: &VectorFieldExpr, dynamics: &ContactDynamics) -> Quantity {
    let f = Expr::neg(dynamics.structure.contract_eta(y)).simplify();
    Quantity::new(f, QuantityKind::Dissipated)
}

pub fn quotient_quantity(f1: &Quantity, f2: &Quantity) -> Result<Quantity, SymmetryError> {
    if f1.kind != QuantityKind::Dissipated || f2.kind != QuantityKind::Dissipated {
        return Err(SymmetryError::NotDissipated);
    }
    Ok(Quantity {
        expr: (f1.expr.clone() / f2.expr.clone()).simplify(),
        kind: QuantityKind::Conserved,
        denominator: Some(f2.expr.clone()),
    })
}

/// Samples `X(F) + (L_R H) F` on the box (`X(G)` for conserved `G`).
pub fn check_rate(q: &Quantity, dynamics: &ContactDynamics, opts: &CheckOptions) -> Report {
    let name = match q.kind {
        QuantityKind::Conserved => "conserved rate",
        _ => "dissipation rate",
    };
    let s = match sampler(dynamics, name, opts.tol) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let rate = rate_residual(q, dynamics);
    if is_zero_expr(&rate) {
        return Report::symbolic_pass(name, opts.tol);
    }
    let Some(den) = &q.denominator else {
        return s.sweep(name, &[rate], opts);
    };
    let chart = dynamics.chart();
    let mut report = Report::new(name, opts.tol);
    let (rate, den) = match (chart.compile(&rate), chart.compile(den)) {
        (Ok(r), Ok(d)) => (r, d),
        (Err(e), _) | (_, Err(e)) => {
            report.notes.push(e.to_string());
            return report.finish();
        }
    };
    for x in opts.sample(chart.dim()) {
        match (den.eval(&x), rate.eval(&x), s.scale(&x)) {
            (Ok(d), Ok(r), Ok(sc)) if d.abs() >= DENOMINATOR_FLOOR => report.record(r.abs() / sc, &x),
            _ => report.skipped += 1,
        }
    }
    report.finish()
}

fn rate_residual(q: &Quantity, dynamics: &ContactDynamics) -> Expr {
    let xf = dynamics.field.apply(&q.expr, dynamics.coords());
    match q.kind {
        QuantityKind::Conserved => xf,
        _ => (xf + dynamics.structure.reeb_rate.clone() * q.expr.clone()).simplify(),
    }
}

struct Along {
    values: Vec<f64>,
    rates: Vec<f64>,
    /// Indices into the trajectory that could be evaluated.
    ok: Vec<bool>,
}

fn along(traj: &Trajectory, chart: &Chart, exprs: [&Expr; 2]) -> Result<Along, EvalError> {
    let a = chart.compile(exprs[0])?;
    let b = chart.compile(exprs[1])?;
    let mut out = Along {
        values: Vec::with_capacity(traj.len()),
        rates: Vec::with_capacity(traj.len()),
        ok: Vec::with_capacity(traj.len()),
    };
    for x in &traj.states {
        match (a.eval(x), b.eval(x)) {
            (Ok(u), Ok(v)) => {
                out.values.push(u);
                out.rates.push(v);
                out.ok.push(true);
            }
            _ => {
                out.values.push(f64::NAN);
                out.rates.push(f64::NAN);
                out.ok.push(false);
            }
        }
    }
    Ok(out)
}

/// `∫₀ᵗ (L_R H) dτ` along the trajectory.
fn integrated_reeb_rate(traj: &Trajectory, dynamics: &ContactDynamics) -> Result<Vec<f64>, EvalError> {
    let rh = &dynamics.structure.reeb_rate;
    let d_rh = dynamics.field.apply(rh, dynamics.coords());
    let a = along(traj, dynamics.chart(), [rh, &d_rh])?;
    if a.ok.iter().any(|ok| !ok) {
        return Err(EvalError::Unbound("L_R H along trajectory".into()));
    }
    Ok(cumulative_corrected_trapezoid(&traj.times, &a.values, &a.rates))
}

fn report_error(name: &str, tol: f64, e: impl ToString) -> Report {
    let mut r = Report::new(name, tol);
    r.notes.push(e.to_string());
    r.finish()
}

/// Checks `F` along `traj` pointwise (`X(F) + (L_R H)F`) and globally
/// (`F(t) = F(0) exp(−∫ L_R H)`). Residuals are relative to
/// `residual_scale(x, F)` and `1 + |F(0)| e^{−∫ L_R H}`.
pub fn check_dissipated(q: &Quantity, dynamics: &ContactDynamics, traj: &Trajectory, tol: TrajectoryTol) -> Report {
    let values = |e: &Expr| along(traj, dynamics.chart(), [&q.expr, e]);
    let rate = rate_residual(&Quantity::new(q.expr.clone(), QuantityKind::Dissipated), dynamics);
    let a = match values(&rate) {
        Ok(a) => a,
        Err(e) => return report_error("dissipated", tol.global, e),
    };
    let integral = match integrated_reeb_rate(traj, dynamics) {
        Ok(i) => i,
        Err(e) => return report_error("dissipated", tol.global, e),
    };
    decay_report("dissipated", traj, &a, &integral, tol)
}

fn decay_report(name: &str, traj: &Trajectory, a: &Along, integral: &[f64], tol: TrajectoryTol) -> Report {
    let mut pointwise = Report::new("pointwise", tol.pointwise);
    let mut global = Report::new("global", tol.global);
    let Some(k0) = a.ok.iter().position(|ok| *ok) else {
        return report_error(name, tol.global, "quantity cannot be evaluated along the trajectory");
    };
    let f0 = a.values[k0];
    for (k, x) in traj.states.iter().enumerate() {
        if !a.ok[k] {
            pointwise.skipped += 1;
            global.skipped += 1;
            continue;
        }
        pointwise.record(a.rates[k].abs() / residual_scale(x, a.values[k]), x);
        let predicted = f0 * (-(integral[k] - integral[k0])).exp();
        global.record((a.values[k] - predicted).abs() / (1.0 + predicted.abs()), x);
    }
    Report::merge(name, vec![pointwise.finish(), global.finish()])
}

/// Checks `X(G) = 0` along `traj` and drift `|G(t) − G(0)| ≤ tol (1 + |G(0)|)`.
/// States where a quotient's denominator is below [`DENOMINATOR_FLOOR`] are
/// skipped.
pub fn check_conserved(q: &Quantity, dynamics: &ContactDynamics, traj: &Trajectory, tol: TrajectoryTol) -> Report {
    let rate = rate_residual(&Quantity::new(q.expr.clone(), QuantityKind::Conserved), dynamics);
    let mut a = match along(traj, dynamics.chart(), [&q.expr, &rate]) {
        Ok(a) => a,
        Err(e) => return report_error("conserved", tol.global, e),
    };
    if let Some(den) = &q.denominator {
        let d = match dynamics.chart().compile(den) {
            Ok(d) => d,
            Err(e) => return report_error("conserved", tol.global, e),
        };
        for (ok, x) in a.ok.iter_mut().zip(&traj.states) {
            if !d.eval(x).is_ok_and(|v| v.abs() >= DENOMINATOR_FLOOR) {
                *ok = false;
            }
        }
    }
    let zeros = vec![0.0; traj.len()];
    decay_report("conserved", traj, &a, &zeros, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftKind {
    Tangent,
    Cotangent,
}

/// Complete lift of `Z = Z^i(q) ∂/∂q^i` to `(q, fiber, s)`:
/// tangent `Z^i ∂/∂q^i + v^j (∂Z^i/∂q^j) ∂/∂v^i`, cotangent
/// `Z^i ∂/∂q^i − p_j (∂Z^j/∂q^i) ∂/∂p_i`; no `s` component.
pub fn complete_lift(z: &[Expr], kind: LiftKind, q: &[String], fiber: &[String], s: &str) -> Result<VectorFieldExpr, SymmetryError> {
    let n = q.len();
    if z.len() != n || fiber.len() != n {
        return Err(SymmetryError::Lift(format!("expected {n} base components and fiber names")));
    }
    for zi in z {
        if let Some(bad) = fiber.iter().map(String::as_str).chain([s]).find(|c| zi.depends_on(c)) {
            return Err(SymmetryError::Lift(format!("base field depends on `{bad}`")));
        }
    }
    let mut comps: Vec<Expr> = z.to_vec();
    for i in 0..n {
        let mut acc = Expr::zero();
        for j in 0..n {
            let (d, f) = match kind {
                LiftKind::Tangent => (z[i].diff(&q[j]), &fiber[j]),
                LiftKind::Cotangent => (z[j].diff(&q[i]), &fiber[j]),
            };
            if !d.is_zero() {
                acc = acc + Expr::var(f) * d;
            }
        }
        comps.push(match kind {
            LiftKind::Tangent => acc.simplify(),
            LiftKind::Cotangent => Expr::neg(acc).simplify(),
        });
    }
    comps.push(Expr::zero());
    Ok(VectorFieldExpr::new(comps))
}

/// For `s`-independent dynamics and a dynamical symmetry `Y`, `G = −i(Y)η`
/// must be conserved along `traj`.
pub fn contactified_conservation_check(y: &VectorFieldExpr, dynamics: &ContactDynamics, traj: &Trajectory, opts: &CheckOptions) -> Result<Report, SymmetryError> {
    let rate = dynamics.structure.reeb_rate.substitute_values(dynamics.chart().params());
    if !is_zero_expr(&rate) {
        return Err(SymmetryError::Precondition(format!("the energy depends on the contact variable (L_R H = {})", rate.pretty())));
    }
    let sym = is_dynamical_symmetry(y, dynamics, opts, BracketMode::Strict);
    if !sym.passed {
        return Err(SymmetryError::Precondition(format!(
            "not a dynamical symmetry (worst bracket residual {:e})",
            sym.worst_residual
        )));
    }
    let g = Quantity::new(dissipated_from_symmetry(y, dynamics).expr, QuantityKind::Conserved);
    Ok(check_conserved(&g, dynamics, traj, TrajectoryTol::uniform(opts.tol)))
}

/// `Φ*F = F ∘ Φ` where `Φ` is one RK4 step of length `eps` along `Y`,
/// checked for the dissipation law along `traj`.
pub fn check_pullback_dissipated(q: &Quantity, y: &VectorFieldExpr, eps: f64, dynamics: &ContactDynamics, traj: &Trajectory, tol: TrajectoryTol) -> Report {
    let name = "pullback dissipated";
    let chart = dynamics.chart();
    let (flow, f) = match (CompiledField::new(y, chart), chart.compile(&q.expr)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return report_error(name, tol.global, e),
    };
    let mut a = Along {
        values: Vec::with_capacity(traj.len()),
        rates: vec![0.0; traj.len()],
        ok: Vec::with_capacity(traj.len()),
    };
    for x in &traj.states {
        match flow_step(&flow, x, eps).and_then(|phi| f.eval(&phi)) {
            Ok(v) => {
                a.values.push(v);
                a.ok.push(true);
            }
            Err(_) => {
                a.values.push(f64::NAN);
                a.ok.push(false);
            }
        }
    }
    let integral = match integrated_reeb_rate(traj, dynamics) {
        Ok(i) => i,
        Err(e) => return report_error(name, tol.global, e),
    };
    let mut r = decay_report(name, traj, &a, &integral, tol);
    // only the global law is meaningful here
    r.notes.push(format!("flow step eps = {eps}"));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;
    use crate::hamiltonian::ContactHamiltonianSystem;
    use crate::integrate::{integrate, IntegratorConfig};
    use crate::lagrangian::ContactLagrangianSystem;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn gravity() -> ContactDynamics {
        ContactLagrangianSystem::parse(
            &["x", "y"],
            &["vx", "vy"],
            "s",
            "m*(vx^2 + vy^2)/2 - m*g*y - gamma*s",
            Bindings::from_pairs([("m", 1.3), ("g", 9.81), ("gamma", 0.2)]),
        )
        .unwrap()
        .dynamics("gravity")
        .unwrap()
    }

    fn damped() -> (ContactHamiltonianSystem, ContactDynamics) {
        let h = ContactHamiltonianSystem::parse(
            &["q"],
            &["p"],
            "s",
            "p^2/2 + q^2/2 + gamma*s",
            Bindings::from_pairs([("gamma", 0.3)]),
        )
        .unwrap();
        let d = h.dynamics("damped");
        (h, d)
    }

    #[test]
    fn brackets() {
        let c = names(&["q", "p", "s"]);
        let dq = VectorFieldExpr::coordinate(3, 0);
        let dp = VectorFieldExpr::coordinate(3, 1);
        assert!(lie_bracket(&dq, &dp, &c).is_symbolically_zero());
        let (_, d) = damped();
        assert!(lie_bracket(&d.field, &d.field, &c).is_symbolically_zero());
        let g = gravity();
        let dx = VectorFieldExpr::coordinate(5, 0);
        assert!(lie_bracket(&dx, &g.field, g.coords()).is_symbolically_zero());
    }

    #[test]
    fn lie_derivatives() {
        let c = names(&["q", "p", "s"]);
        let eta = FormExpr::one_form(vec![Expr::parse("-p").unwrap(), Expr::zero(), Expr::one()]);
        assert!(lie_derivative_one_form(&VectorFieldExpr::coordinate(3, 2), &eta, &c).unwrap().is_zero());
        assert!(lie_derivative_one_form(&VectorFieldExpr::coordinate(3, 0), &eta, &c).unwrap().is_zero());
        let y = VectorFieldExpr::parse(&["q", "0", "0"]).unwrap();
        let l = lie_derivative_one_form(&y, &eta, &c).unwrap();
        assert!(is_equivalent(&l.component(&[0]), &Expr::parse("-p").unwrap()));
        assert!(l.component(&[1]).is_zero() && l.component(&[2]).is_zero());
    }

    #[test]
    fn symmetry_tests() {
        let opts = CheckOptions::default();
        let (_, d) = damped();
        assert!(is_dynamical_symmetry(&d.field, &d, &opts, BracketMode::Strict).passed);
        let scaling = VectorFieldExpr::parse(&["q", "0", "0"]).unwrap();
        let r = is_dynamical_symmetry(&scaling, &d, &opts, BracketMode::Strict);
        assert!(!r.passed && r.worst_point.is_some());
        assert!(!is_contact_symmetry(&VectorFieldExpr::coordinate(3, 0), &d, &opts).passed);

        let g = gravity();
        let dx = VectorFieldExpr::coordinate(5, 0);
        assert!(is_dynamical_symmetry(&dx, &g, &opts, BracketMode::Strict).passed);
        let r = is_contact_symmetry(&dx, &g, &opts);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn dissipated_quantities() {
        let (_, d) = damped();
        let h = dissipated_from_symmetry(&d.field, &d);
        assert!(is_equivalent(&h.expr, d.energy()));
        assert!(dissipated_from_symmetry(&VectorFieldExpr::coordinate(3, 0), &d).expr == Expr::var("p"));
        assert_eq!(dissipated_from_symmetry(&VectorFieldExpr::coordinate(3, 2), &d).expr.as_const(), Some(-1.0));
        assert!(check_rate(&h, &d, &CheckOptions::default()).passed);
    }

    #[test]
    fn energy_decay_along_trajectory() {
        let g = gravity();
        let f = g.compile().unwrap();
        let tr = integrate(&f, &[0.0, 1.0, 1.0, 0.5, 0.0], &IntegratorConfig::rk4(1e-3, 5.0), "").unwrap();
        let px = dissipated_from_symmetry(&VectorFieldExpr::coordinate(5, 0), &g);
        let r = check_dissipated(&px, &g, &tr, TrajectoryTol::uniform(1e-8));
        assert!(r.passed, "{r:?}");
        let e = Quantity::new(g.energy().clone(), QuantityKind::Dissipated);
        assert!(check_dissipated(&e, &g, &tr, TrajectoryTol::uniform(1e-8)).passed);
        let ratio = quotient_quantity(&e, &px).unwrap();
        let r = check_conserved(&ratio, &g, &tr, TrajectoryTol::uniform(1e-6));
        assert!(r.passed, "{r:?}");
        let bogus = Quantity::new(Expr::parse("x + vy").unwrap(), QuantityKind::Conserved);
        assert!(!check_conserved(&bogus, &g, &tr, TrajectoryTol::uniform(1e-6)).passed);
        assert_eq!(quotient_quantity(&e, &ratio).unwrap_err(), SymmetryError::NotDissipated);
        let one = quotient_quantity(&px, &px).unwrap();
        assert_eq!(one.expr.as_const(), Some(1.0));
    }

    #[test]
    fn lifts() {
        let q = names(&["q"]);
        for kind in [LiftKind::Tangent, LiftKind::Cotangent] {
            let l = complete_lift(&[Expr::one()], kind, &q, &names(&["v"]), "s").unwrap();
            assert_eq!(l, VectorFieldExpr::coordinate(3, 0));
        }
        let l = complete_lift(&[Expr::var("q")], LiftKind::Tangent, &q, &names(&["v"]), "s").unwrap();
        assert_eq!(l, VectorFieldExpr::parse(&["q", "v", "0"]).unwrap());
        let q2 = names(&["x", "y"]);
        let p2 = names(&["px", "py"]);
        let z = [Expr::parse("x^2*y - y^3").unwrap(), Expr::parse("3*x + x*y^2").unwrap()];
        let lift = complete_lift(&z, LiftKind::Cotangent, &q2, &p2, "s").unwrap();
        let coords = names(&["x", "y", "px", "py", "s"]);
        let eta = FormExpr::one_form(vec![Expr::parse("-px").unwrap(), Expr::parse("-py").unwrap(), Expr::zero(), Expr::zero(), Expr::one()]);
        let l = lie_derivative_one_form(&lift, &eta, &coords).unwrap();
        assert!(l.coefficients().iter().all(|c| is_equivalent(c, &Expr::zero())));
        assert!(complete_lift(&[Expr::var("v")], LiftKind::Tangent, &q, &names(&["v"]), "s").is_err());
    }

    #[test]
    fn conservative_limit() {
        let h = ContactHamiltonianSystem::parse(
            &["x", "y"],
            &["px", "py"],
            "s",
            "(px^2 + py^2)/2 + (x^2 + y^2)/2",
            Bindings::new(),
        )
        .unwrap();
        let d = h.dynamics("iso");
        let rot = complete_lift(
            &[Expr::parse("-y").unwrap(), Expr::var("x")],
            LiftKind::Cotangent,
            h.q_names(),
            h.p_names(),
            "s",
        )
        .unwrap();
        let tr = integrate(&d.compile().unwrap(), &[1.0, 0.2, 0.1, 0.8, 0.0], &IntegratorConfig::rk4(1e-3, 10.0), "").unwrap();
        let opts = CheckOptions {
            tol: 1e-7,
            ..CheckOptions::default()
        };
        let r = contactified_conservation_check(&rot, &d, &tr, &opts).unwrap();
        assert!(r.passed, "{r:?}");
        let g = dissipated_from_symmetry(&rot, &d).expr;
        assert!(is_equivalent(&g, &Expr::parse("x*py - y*px").unwrap()));
        assert!(contactified_conservation_check(&d.field, &d, &tr, &opts).unwrap().passed);
        let (_, damped) = damped();
        let err = contactified_conservation_check(&damped.field, &damped, &tr, &opts).unwrap_err();
        assert!(matches!(err, SymmetryError::Precondition(_)));
    }

    #[test]
    fn pullback_by_symmetry_flow() {
        let g = gravity();
        let tr = integrate(&g.compile().unwrap(), &[0.0, 1.0, 1.0, 0.5, 0.0], &IntegratorConfig::rk4(1e-3, 3.0), "").unwrap();
        let e = Quantity::new(g.energy().clone(), QuantityKind::Dissipated);
        let r = check_pullback_dissipated(&e, &VectorFieldExpr::coordinate(5, 0), 0.01, &g, &tr, TrajectoryTol::uniform(1e-8));
        assert!(r.passed, "{r:?}");
    }
}
