//! Python bindings: expressions, contact systems, integration and the
//! config-driven check suites.

use std::collections::HashMap;

use contactdyn::cli::commands::{trajectory, trajectory_csv};
use contactdyn::cli::{catalog_config, check as run_check, load_config, Loaded, Settings, Suite, CATALOG};
use contactdyn::expr::{is_equivalent, Bindings, Expr};
use contactdyn::field::Flow;
use contactdyn::hamiltonian::ContactHamiltonianSystem;
use contactdyn::integrate::{integrate, IntegratorConfig, Method};
use contactdyn::lagrangian::ContactLagrangianSystem;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bindings(params: Option<HashMap<String, f64>>) -> Bindings {
    let params = params.unwrap_or_default();
    Bindings::from_pairs(params.iter().map(|(k, v)| (k.as_str(), *v)))
}

fn strings(exprs: &[Expr]) -> Vec<String> {
    exprs.iter().map(|e| e.to_string()).collect()
}

type Samples = (Vec<f64>, Vec<Vec<f64>>);

fn config(method: &str, dt: f64, atol: f64, rtol: f64, t_max: f64) -> PyResult<IntegratorConfig> {
    let method: Method = method.parse().map_err(value_err)?;
    let mut cfg = match method {
        Method::Rk4 => IntegratorConfig::rk4(dt, t_max),
        Method::Rk45 => IntegratorConfig::rk45(atol, rtol, t_max),
    };
    cfg.dt = dt;
    Ok(cfg)
}

fn simulate_flow(py: Python<'_>, flow: &dyn Flow, x0: Vec<f64>, cfg: IntegratorConfig, label: &str) -> PyResult<Samples> {
    let traj = py
        .detach(|| integrate(flow, &x0, &cfg, label))
        .map_err(|e| PyArithmeticError::new_err(e.to_string()))?;
    Ok((traj.times, traj.states))
}

/// Symbolic expression in the `+ - * / ^` grammar with `sin cos tan exp log sqrt tanh abs`.
#[pyclass(name = "Expr", frozen, module = "pycontactdyn")]
struct PyExpr {
    inner: Expr,
}

#[pymethods]
impl PyExpr {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyExpr {
            inner: Expr::parse(text).map_err(value_err)?,
        })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.inner.pretty())
    }

    fn pretty(&self) -> String {
        self.inner.pretty()
    }

    fn diff(&self, var: &str) -> PyExpr {
        PyExpr {
            inner: self.inner.diff(var).simplify(),
        }
    }

    fn simplify(&self) -> PyExpr {
        PyExpr {
            inner: self.inner.simplify(),
        }
    }

    fn free_vars(&self) -> Vec<String> {
        self.inner.free_vars().into_iter().collect()
    }

    fn eval(&self, values: HashMap<String, f64>) -> PyResult<f64> {
        self.inner.eval(&bindings(Some(values))).map_err(value_err)
    }

    fn equivalent(&self, other: &PyExpr) -> bool {
        is_equivalent(&self.inner, &other.inner)
    }
}

/// Contact Hamiltonian system in Darboux coordinates `(q, p, s)`.
#[pyclass(name = "HamiltonianSystem", frozen, module = "pycontactdyn")]
struct PyHamiltonian {
    inner: ContactHamiltonianSystem,
}

#[pymethods]
impl PyHamiltonian {
    #[new]
    #[pyo3(signature = (q, p, s, h, params = None))]
    fn new(q: Vec<String>, p: Vec<String>, s: &str, h: &str, params: Option<HashMap<String, f64>>) -> PyResult<Self> {
        let q: Vec<&str> = q.iter().map(String::as_str).collect();
        let p: Vec<&str> = p.iter().map(String::as_str).collect();
        let inner = ContactHamiltonianSystem::parse(&q, &p, s, h, bindings(params)).map_err(value_err)?;
        Ok(PyHamiltonian { inner })
    }

    fn coords(&self) -> Vec<String> {
        self.inner.coords().to_vec()
    }

    fn vector_field(&self) -> Vec<String> {
        strings(self.inner.hamiltonian_vector_field().components())
    }

    fn reeb_field(&self) -> Vec<String> {
        strings(self.inner.reeb_field().components())
    }

    /// `(max|i(X_H)dη − dH + R(H)η|, i(X_H)η + H)` at `x`.
    fn residuals(&self, x: Vec<f64>) -> PyResult<(f64, f64)> {
        let b = self.inner.bind(&x);
        let r = self
            .inner
            .hamilton_equation_residuals(&self.inner.hamiltonian_vector_field(), &b)
            .map_err(value_err)?;
        Ok((r.r1, r.r2))
    }

    #[pyo3(signature = (x0, t_max, dt = 1e-3, method = "rk4-fixed", atol = 1e-10, rtol = 1e-10))]
    fn simulate(&self, py: Python<'_>, x0: Vec<f64>, t_max: f64, dt: f64, method: &str, atol: f64, rtol: f64) -> PyResult<Samples> {
        let flow = self.inner.dynamics("hamiltonian").compile().map_err(value_err)?;
        simulate_flow(py, &flow, x0, config(method, dt, atol, rtol, t_max)?, "hamiltonian")
    }
}

/// Contact Lagrangian system on `(q, v, s)`.
#[pyclass(name = "LagrangianSystem", frozen, module = "pycontactdyn")]
struct PyLagrangian {
    inner: ContactLagrangianSystem,
}

#[pymethods]
impl PyLagrangian {
    #[new]
    #[pyo3(signature = (q, v, s, l, params = None))]
    fn new(q: Vec<String>, v: Vec<String>, s: &str, l: &str, params: Option<HashMap<String, f64>>) -> PyResult<Self> {
        let q: Vec<&str> = q.iter().map(String::as_str).collect();
        let v: Vec<&str> = v.iter().map(String::as_str).collect();
        let inner = ContactLagrangianSystem::parse(&q, &v, s, l, bindings(params)).map_err(value_err)?;
        Ok(PyLagrangian { inner })
    }

    fn coords(&self) -> Vec<String> {
        self.inner.coords().to_vec()
    }

    fn energy(&self) -> String {
        self.inner.energy().to_string()
    }

    fn euler_lagrange_field(&self) -> PyResult<Vec<String>> {
        let f = self.inner.euler_lagrange_symbolic().map_err(value_err)?;
        Ok(strings(f.components()))
    }

    fn reeb_field(&self) -> PyResult<Vec<String>> {
        let f = self.inner.reeb_field_symbolic().map_err(value_err)?;
        Ok(strings(f.components()))
    }

    fn hessian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let h = self.inner.hessian(&self.inner.bind(&x)).map_err(value_err)?;
        Ok(h.w.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    fn is_regular(&self, x: Vec<f64>) -> PyResult<bool> {
        self.inner.is_regular_at(&self.inner.bind(&x)).map_err(value_err)
    }

    /// Legendre map `(q, v, s) ↦ (q, ∂L/∂v, s)`.
    fn legendre_map(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.legendre_map(&self.inner.bind(&x)).map_err(value_err)
    }

    fn legendre_residual(&self, h: &PyHamiltonian, x: Vec<f64>) -> PyResult<f64> {
        self.inner.check_legendre_equivalence(&h.inner, &self.inner.bind(&x)).map_err(value_err)
    }

    #[pyo3(signature = (x0, t_max, dt = 1e-3, method = "rk4-fixed", atol = 1e-10, rtol = 1e-10))]
    fn simulate(&self, py: Python<'_>, x0: Vec<f64>, t_max: f64, dt: f64, method: &str, atol: f64, rtol: f64) -> PyResult<Samples> {
        let field = self.inner.euler_lagrange_field().map_err(value_err)?;
        let flow = field.flow(self.inner.chart()).map_err(value_err)?;
        simulate_flow(py, &flow, x0, config(method, dt, atol, rtol, t_max)?, "lagrangian")
    }
}

fn load(source: &str) -> PyResult<Loaded> {
    match source.strip_prefix("catalog:") {
        Some(name) => catalog_config(name)
            .ok_or_else(|| PyValueError::new_err(format!("no catalog entry `{name}`")))?
            .build()
            .map_err(value_err),
        None => load_config(source.as_ref()).map_err(value_err),
    }
}

/// Names of the shipped example configs.
#[pyfunction]
fn catalog() -> Vec<&'static str> {
    CATALOG.iter().map(|(n, _)| *n).collect()
}

/// Runs the configured integration; returns the CSV text.
#[pyfunction]
fn simulate(py: Python<'_>, config: &str) -> PyResult<String> {
    let loaded = load(config)?;
    py.detach(|| {
        let traj = trajectory(&loaded)?;
        trajectory_csv(&loaded, &traj).map(|(csv, _)| csv)
    })
    .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Runs a check suite; returns `(passed, report_json)`.
#[pyfunction]
#[pyo3(signature = (config, suite = "all", points = None, seed = None, tol = None))]
fn check(py: Python<'_>, config: &str, suite: &str, points: Option<usize>, seed: Option<u64>, tol: Option<f64>) -> PyResult<(bool, String)> {
    let suite = match suite {
        "identities" => Suite::Identities,
        "symmetries" => Suite::Symmetries,
        "legendre" => Suite::Legendre,
        "all" => Suite::All,
        other => return Err(PyValueError::new_err(format!("unknown suite `{other}`"))),
    };
    let loaded = load(config)?;
    let mut settings = Settings::for_config(&loaded);
    settings.points = points.unwrap_or(settings.points);
    settings.seed = seed.unwrap_or(settings.seed);
    settings.tol = tol.unwrap_or(settings.tol);
    let report = py.detach(|| run_check(&loaded, suite, &settings));
    let json = serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((report.passed(), json))
}

#[pymodule]
fn pycontactdyn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PyLagrangian>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
