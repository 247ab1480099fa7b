//! `derive`, `simulate` and `check`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::config::{Loaded, Model};
use crate::contact::{ContactStructure, ZERO_LOCUS_TOL};
use crate::exterior::{contact_volume_coefficient, VectorValue};
use crate::expr::{Bindings, Expr};
use crate::field::{CompiledField, Flow};
use crate::integrate::{integrate, IntegrateError, Trajectory};
use crate::lagrangian::{LagrangianError, LegendreComparison};
use crate::sampling::{residual_scale, SampleBox, DEFAULT_SEED};
use crate::symmetry::{
    check_conserved, check_dissipated, check_rate, contactified_conservation_check, dissipated_from_symmetry, is_contact_symmetry,
    is_dynamical_symmetry, BracketMode, CheckOptions, QuantityKind, Report, TrajectoryTol,
};

/// Ω-equation checks only use points with `|H|` above this.
pub const OMEGA_MIN_ENERGY: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Sampling settings after merging flags, the config's `check` block and
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub sample_box: SampleBox,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub trajectory_tol: f64,
    pub out: PathBuf,
}

impl Settings {
    pub const DEFAULT_POINTS: usize = 200;
    pub const DEFAULT_TOL: f64 = 1e-9;
    pub const DEFAULT_TRAJECTORY_TOL: f64 = 1e-6;

    pub fn for_config(loaded: &Loaded) -> Self {
        let c = &loaded.config.check;
        Settings {
            sample_box: loaded.sample_box().unwrap_or_else(|_| SampleBox::standard(loaded.config.dim())),
            points: c.points.unwrap_or(Self::DEFAULT_POINTS),
            seed: c.seed.unwrap_or(DEFAULT_SEED),
            tol: c.tol.unwrap_or(Self::DEFAULT_TOL),
            trajectory_tol: c.trajectory_tol.unwrap_or(Self::DEFAULT_TRAJECTORY_TOL),
            out: PathBuf::from("out"),
        }
    }

    pub fn options(&self) -> CheckOptions {
        CheckOptions {
            sample_box: Some(self.sample_box.clone()),
            points: self.points,
            seed: self.seed,
            tol: self.tol,
        }
    }

    fn trajectory_tol(&self) -> TrajectoryTol {
        TrajectoryTol {
            pointwise: self.tol,
            global: self.trajectory_tol,
        }
    }

    fn sample(&self) -> Vec<Vec<f64>> {
        self.sample_box.points(self.points, self.seed)
    }
}

/// Printed canonical expressions; `derived.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub name: String,
    pub formalism: String,
    pub coordinates: Vec<String>,
    pub params: BTreeMap<String, f64>,
    pub energy: String,
    pub eta: Vec<String>,
    pub reeb: Option<Vec<String>>,
    pub field: Option<Vec<String>>,
    pub hessian: Option<Vec<Vec<String>>>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub system: String,
    pub command: String,
    pub derived: Option<Derived>,
    pub checks: Vec<Report>,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl RunReport {
    fn new(loaded: &Loaded, command: &str) -> Self {
        RunReport {
            system: loaded.config.name.clone(),
            command: command.to_string(),
            ..RunReport::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "system: {}", self.system);
        if let Some(d) = &self.derived {
            let names = &d.coordinates;
            let pretty = |s: &str| Expr::parse(s).map(|e| e.pretty()).unwrap_or_else(|_| s.to_string());
            let _ = writeln!(out, "energy: {}", pretty(&d.energy));
            let _ = writeln!(out, "eta:");
            for (x, c) in names.iter().zip(&d.eta) {
                if c != "0" {
                    let _ = writeln!(out, "  d{x}: {}", pretty(c));
                }
            }
            for (label, comps) in [("reeb field", &d.reeb), ("vector field", &d.field)] {
                match comps {
                    Some(comps) => {
                        let _ = writeln!(out, "{label}:");
                        for (x, c) in names.iter().zip(comps) {
                            let _ = writeln!(out, "  {x}' = {}", pretty(c));
                        }
                    }
                    None => {
                        let _ = writeln!(out, "{label}: evaluated pointwise");
                    }
                }
            }
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = write!(out, "{status} {}: worst {:.3e} (tol {:.1e}, {} points", c.name, c.worst_residual, c.tolerance, c.checked);
            if c.skipped > 0 {
                let _ = write!(out, ", {} skipped", c.skipped);
            }
            let _ = write!(out, ")");
            if c.symbolic {
                let _ = write!(out, " [symbolic]");
            }
            if let (false, Some(p)) = (c.passed, &c.worst_point) {
                let _ = write!(out, " at {p:?}");
            }
            out.push('\n');
            for n in &c.notes {
                if !c.passed || n.starts_with("skipped") {
                    let _ = writeln!(out, "    {n}");
                }
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for f in &self.files {
            let _ = writeln!(out, "wrote {}", f.display());
        }
        out
    }
}

fn structure(loaded: &Loaded) -> ContactStructure {
    match &loaded.model {
        Model::Hamiltonian(h) => h.structure(),
        Model::Lagrangian { system, .. } => system.structure().clone(),
    }
}

fn strings(exprs: &[Expr]) -> Vec<String> {
    exprs.iter().map(|e| e.to_string()).collect()
}

pub fn derive(loaded: &Loaded, settings: &Settings) -> Result<RunReport, CommandError> {
    let mut report = RunReport::new(loaded, "derive");
    let st = structure(loaded);
    let mut notes = Vec::new();
    let (reeb, field, hessian) = match &loaded.model {
        Model::Hamiltonian(h) => (
            Some(strings(h.reeb_field().components())),
            Some(strings(h.hamiltonian_vector_field().components())),
            None,
        ),
        Model::Lagrangian { system, .. } => {
            let hess = system.hessian_exprs().iter().map(|r| strings(r)).collect();
            let (reeb, field) = match (system.reeb_field_symbolic(), system.euler_lagrange_symbolic()) {
                (Ok(r), Ok(f)) => (Some(strings(r.components())), Some(strings(f.components()))),
                (Err(LagrangianError::SymbolicallySingular), _) | (_, Err(LagrangianError::SymbolicallySingular)) => {
                    return Err(CommandError::Numeric(
                        "the velocity Hessian is identically singular; the Euler-Lagrange field is not defined".into(),
                    ));
                }
                _ => {
                    notes.push(format!("n = {} > 3: W is inverted numerically at each point", system.n()));
                    (None, None)
                }
            };
            let mut points = vec![settings.sample_box.center()];
            points.extend(settings.sample());
            let mut singular = Vec::new();
            for x in &points {
                match system.is_regular_at(&system.bind(x)) {
                    Ok(true) => {}
                    Ok(false) => singular.push(x.clone()),
                    Err(e) => report.warnings.push(format!("Hessian not evaluable at {x:?}: {e}")),
                }
            }
            if !singular.is_empty() {
                let shown: Vec<String> = singular.iter().take(10).map(|x| format!("{x:?}")).collect();
                report.warnings.push(format!(
                    "Lagrangian is not regular at {} of {} sampled points: {}",
                    singular.len(),
                    points.len(),
                    shown.join(", ")
                ));
            }
            (reeb, field, Some(hess))
        }
    };
    let derived = Derived {
        name: loaded.config.name.clone(),
        formalism: match loaded.model {
            Model::Hamiltonian(_) => "hamiltonian".into(),
            Model::Lagrangian { .. } => "lagrangian".into(),
        },
        coordinates: st.chart.coords().to_vec(),
        params: loaded.config.params.clone(),
        energy: st.energy.to_string(),
        eta: strings(&st.eta.coefficients()),
        reeb,
        field,
        hessian,
        notes,
    };
    let path = settings.out.join("derived.json");
    write_file(&path, &(serde_json::to_string_pretty(&derived).expect("serializable") + "\n"))?;
    report.files.push(path);
    report.derived = Some(derived);
    Ok(report)
}

fn write_file(path: &Path, text: &str) -> Result<(), CommandError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    }
    std::fs::write(path, text).map_err(io_error(path))
}

/// Boxed flow for the configured dynamics.
pub fn flow(loaded: &Loaded) -> Result<Box<dyn Flow>, CommandError> {
    let numeric = |e: &dyn std::fmt::Display| CommandError::Numeric(e.to_string());
    match &loaded.model {
        Model::Hamiltonian(h) => Ok(Box::new(CompiledField::new(&h.hamiltonian_vector_field(), h.chart()).map_err(|e| numeric(&e))?)),
        Model::Lagrangian { system, .. } => {
            let f = system.euler_lagrange_field().map_err(|e| numeric(&e))?;
            Ok(Box::new(f.flow(system.chart()).map_err(|e| numeric(&e))?))
        }
    }
}

pub fn trajectory(loaded: &Loaded) -> Result<Trajectory, CommandError> {
    let cfg = &loaded.config;
    let integ = cfg.integration.as_ref().ok_or_else(|| CommandError::Usage("config has no /integration block".into()))?;
    let x0 = cfg.initial_state.as_ref().ok_or_else(|| CommandError::Usage("config has no /initial_state".into()))?;
    let f = flow(loaded)?;
    integrate(f.as_ref(), x0, integ, &cfg.name).map_err(|e: IntegrateError| CommandError::Numeric(e.to_string()))
}

/// Full-precision CSV: `t`, coordinates, then the configured quantities.
pub fn trajectory_csv(loaded: &Loaded, traj: &Trajectory) -> Result<(String, Vec<String>), CommandError> {
    let st = structure(loaded);
    let chart = &st.chart;
    let mut warnings = Vec::new();
    let compiled = loaded
        .quantities
        .iter()
        .map(|(name, q)| chart.compile(&q.expr).map_err(|e| CommandError::Numeric(format!("quantity `{name}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(chart.coords().iter().cloned());
    header.extend(loaded.quantities.iter().map(|(n, _)| n.clone()));
    w.write_record(&header).expect("in-memory write");
    let fmt = |v: f64| format!("{v:.16e}");
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![fmt(*t)];
        row.extend(x.iter().map(|v| fmt(*v)));
        for ((name, _), c) in loaded.quantities.iter().zip(&compiled) {
            match c.eval(x) {
                Ok(v) => row.push(fmt(v)),
                Err(e) => {
                    if warnings.len() < 10 {
                        warnings.push(format!("quantity `{name}` at step {k}: {e}"));
                    }
                    row.push("NaN".into());
                }
            }
        }
        w.write_record(&row).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    Ok((String::from_utf8(bytes).expect("ascii"), warnings))
}

pub fn simulate(loaded: &Loaded, settings: &Settings) -> Result<RunReport, CommandError> {
    let mut report = RunReport::new(loaded, "simulate");
    let traj = trajectory(loaded)?;
    let (csv, warnings) = trajectory_csv(loaded, &traj)?;
    report.warnings = warnings;
    let path = settings.out.join(format!("{}.csv", loaded.config.name));
    write_file(&path, &csv)?;
    report.files.push(path);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Identities,
    Symmetries,
    Legendre,
    All,
}

fn skipped(name: &str, why: &str) -> Report {
    Report {
        name: name.to_string(),
        passed: true,
        worst_residual: 0.0,
        tolerance: 0.0,
        worst_point: None,
        checked: 0,
        skipped: 0,
        symbolic: false,
        notes: vec![format!("skipped: {why}")],
    }
}

fn failed(name: &str, why: String) -> Report {
    let mut r = Report::new(name, 0.0);
    r.notes.push(why);
    r.finish()
}

/// Evaluates `f` at every point; `Ok(None)` excludes the point.
fn sweep(name: &str, points: &[Vec<f64>], tol: f64, mut f: impl FnMut(&[f64]) -> Result<Option<f64>, String>) -> Report {
    let mut r = Report::new(name, tol);
    let mut first_error = None;
    for x in points {
        match f(x) {
            Ok(Some(v)) => r.record(v, x),
            Ok(None) => r.skipped += 1,
            Err(e) => {
                r.skipped += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_error {
        r.notes.push(format!("first evaluation failure: {e}"));
    }
    r.finish()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn identities(loaded: &Loaded, settings: &Settings) -> Vec<Report> {
    let st = structure(loaded);
    let pts = settings.sample();
    let tol = settings.tol;
    let s = |e: &dyn std::fmt::Display| e.to_string();
    let scale = |b: &Bindings, x: &[f64]| -> Result<f64, String> { Ok(residual_scale(x, st.energy.eval(b).map_err(|e| s(&e))?)) };
    let field_at = |b: &Bindings| -> Result<VectorValue, String> {
        match &loaded.model {
            Model::Hamiltonian(_) => loaded.dynamics.as_ref().expect("Hamiltonian dynamics").field.eval(b).map_err(|e| s(&e)),
            Model::Lagrangian { system, .. } => system.euler_lagrange_at(b).map_err(|e| s(&e)),
        }
    };
    let is_singular = |b: &Bindings| match &loaded.model {
        Model::Lagrangian { system, .. } => !system.is_regular_at(b).unwrap_or(false),
        Model::Hamiltonian(_) => false,
    };
    let bind = |x: &[f64]| st.chart.bind(x);
    let n = loaded.config.n;
    let mut out = Vec::new();

    let eq_name = match loaded.model {
        Model::Hamiltonian(_) => "hamilton equations",
        Model::Lagrangian { .. } => "euler-lagrange equations",
    };
    out.push(sweep(eq_name, &pts, tol, |x| {
        let b = bind(x);
        if is_singular(&b) {
            return Ok(None);
        }
        let v = field_at(&b)?;
        let r = st.equation_residuals(&v, &b).map_err(|e| s(&e))?;
        Ok(Some(r.max() / scale(&b, x)?))
    }));

    out.push(sweep("omega equations", &pts, tol, |x| {
        let b = bind(x);
        let h = st.energy.eval(&b).map_err(|e| s(&e))?;
        if h.abs() <= OMEGA_MIN_ENERGY || is_singular(&b) {
            return Ok(None);
        }
        let v = field_at(&b)?;
        let (r1, r2) = st.omega_residuals(&v, &b, ZERO_LOCUS_TOL).map_err(|e| s(&e))?;
        Ok(Some(r1.max(r2.abs()) / scale(&b, x)?))
    }));

    out.push(sweep("flat map", &pts, tol, |x| {
        let b = bind(x);
        if is_singular(&b) {
            return Ok(None);
        }
        let v = field_at(&b)?;
        let a = st.flat(&v, &b).map_err(|e| s(&e))?;
        let w = st.flat_of_dynamics(&b).map_err(|e| s(&e))?;
        let d: Vec<f64> = a.iter().zip(&w).map(|(a, w)| a - w).collect();
        Ok(Some(max_abs(&d) / scale(&b, x)?))
    }));

    out.push(sweep("dissipation rate", &pts, tol, |x| {
        let b = bind(x);
        if is_singular(&b) {
            return Ok(None);
        }
        let v = field_at(&b)?;
        let mut acc = st.reeb_rate.eval(&b).map_err(|e| s(&e))? * st.energy.eval(&b).map_err(|e| s(&e))?;
        for (g, vi) in st.energy_grad.iter().zip(&v.0) {
            acc += g.eval(&b).map_err(|e| s(&e))? * vi;
        }
        Ok(Some(acc.abs() / scale(&b, x)?))
    }));

    match &loaded.model {
        Model::Hamiltonian(h) => {
            out.push(sweep("reeb field", &pts, tol, |x| {
                let (r1, r2) = h.reeb_residuals(&bind(x)).map_err(|e| s(&e))?;
                Ok(Some(r1.max(r2.abs())))
            }));
            out.push(sweep("contact volume", &pts, tol, |x| {
                let c = contact_volume_coefficient(&st.eta, st.chart.coords(), &bind(x), n).map_err(|e| s(&e))?;
                Ok(Some((c.abs() - 1.0).abs()))
            }));
        }
        Model::Lagrangian { system, .. } => {
            out.push(sweep("reeb field", &pts, tol, |x| {
                let b = bind(x);
                if is_singular(&b) {
                    return Ok(None);
                }
                let (r1, r2) = system.reeb_residuals(&b).map_err(|e| s(&e))?;
                Ok(Some(r1.max(r2.abs())))
            }));
            out.push(sweep("reeb energy shortcut", &pts, tol, |x| {
                let b = bind(x);
                if is_singular(&b) {
                    return Ok(None);
                }
                Ok(Some(system.reeb_energy_residual(&b).map_err(|e| s(&e))?.abs() / scale(&b, x)?))
            }));
            out.push(sweep("hessian inverse", &pts, tol, |x| {
                let b = bind(x);
                let h = match system.hessian(&b) {
                    Ok(h) => h,
                    Err(LagrangianError::Singular { .. }) => return Ok(None),
                    Err(e) => return Err(s(&e)),
                };
                let sym = max_abs((&h.w - h.w.transpose()).as_slice());
                let id = max_abs((&h.w * &h.w_inv - DMatrix::identity(n, n)).as_slice());
                Ok(Some(sym.max(id / (1e3 * h.cond.max(1.0)))))
            }));
            out.push(sweep("contact volume", &pts, tol, |x| {
                let b = bind(x);
                let det = match system.hessian(&b) {
                    Ok(h) => h.det,
                    Err(LagrangianError::Singular { .. }) => return Ok(None),
                    Err(e) => return Err(s(&e)),
                };
                if det.abs() <= 1e-6 {
                    return Ok(None);
                }
                let c = contact_volume_coefficient(&st.eta, st.chart.coords(), &b, n).map_err(|e| s(&e))?;
                Ok(Some((c.abs() - det.abs()).abs() / det.abs()))
            }));
            match system.euler_lagrange_symbolic() {
                Ok(f) => {
                    let ok = system.sode_check(&f);
                    let mut r = Report::symbolic_pass("second-order field", tol);
                    if !ok {
                        r.passed = false;
                        r.notes = vec!["position components are not the velocities".into()];
                    }
                    out.push(r);
                }
                Err(_) => out.push(skipped("second-order field", "no symbolic field")),
            }
        }
    }
    out
}

fn symmetries(loaded: &Loaded, settings: &Settings) -> Vec<Report> {
    if loaded.symmetries.is_empty() && loaded.quantities.is_empty() {
        return vec![skipped("symmetries", "no symmetries or quantities declared")];
    }
    let Some(d) = &loaded.dynamics else {
        return vec![failed("symmetries", "symmetry checks need a symbolic vector field (n <= 3)".into())];
    };
    let opts = settings.options();
    let traj = match trajectory(loaded) {
        Ok(t) => Some(t),
        Err(CommandError::Usage(_)) => None,
        Err(e) => return vec![failed("trajectory", e.to_string())],
    };
    let conservative = crate::expr::is_equivalent(&d.structure.reeb_rate.substitute_values(d.chart().params()), &Expr::zero());
    let mut out = Vec::new();
    for y in &loaded.symmetries {
        let label = |s: &str| format!("{}: {s}", y.name);
        let mut dynamical = is_dynamical_symmetry(&y.field, d, &opts, BracketMode::Strict);
        dynamical.name = label("dynamical symmetry");
        let is_symmetry = dynamical.passed;
        out.push(dynamical);
        if y.contact {
            let mut r = is_contact_symmetry(&y.field, d, &opts);
            r.name = label("contact symmetry");
            out.push(r);
        }
        let f = dissipated_from_symmetry(&y.field, d);
        let mut r = check_rate(&f, d, &opts);
        r.name = label("dissipated quantity rate");
        out.push(r);
        match &traj {
            Some(traj) => {
                let mut r = check_dissipated(&f, d, traj, settings.trajectory_tol());
                r.name = label("dissipated quantity along trajectory");
                out.push(r);
                if conservative && is_symmetry {
                    let mut r = match contactified_conservation_check(&y.field, d, traj, &opts) {
                        Ok(r) => r,
                        Err(e) => failed("", e.to_string()),
                    };
                    r.name = label("conserved in the conservative case");
                    out.push(r);
                }
            }
            None => out.push(skipped(&label("dissipated quantity along trajectory"), "no integration block or initial state")),
        }
    }
    for (name, q) in &loaded.quantities {
        let label = format!("quantity {name}");
        match (q.kind, &traj) {
            (QuantityKind::Unknown, _) => {}
            (_, None) => out.push(skipped(&label, "no integration block or initial state")),
            (QuantityKind::Dissipated, Some(t)) => {
                let mut r = check_dissipated(q, d, t, settings.trajectory_tol());
                r.name = format!("{label} dissipated");
                out.push(r);
            }
            (QuantityKind::Conserved, Some(t)) => {
                let mut r = check_conserved(q, d, t, settings.trajectory_tol());
                r.name = format!("{label} conserved");
                out.push(r);
            }
        }
    }
    out
}

fn legendre(loaded: &Loaded, settings: &Settings) -> Vec<Report> {
    let (system, h) = match &loaded.model {
        Model::Lagrangian { system, companion: Some(h) } => (system, h),
        Model::Lagrangian { companion: None, .. } => return vec![skipped("legendre", "no companion Hamiltonian in the config")],
        Model::Hamiltonian(_) => return vec![skipped("legendre", "the Legendre map starts from a Lagrangian")],
    };
    let cmp = match LegendreComparison::new(system, h) {
        Ok(c) => c,
        Err(e) => return vec![failed("legendre", e.to_string())],
    };
    vec![sweep("legendre", &settings.sample(), settings.tol, |x| {
        let b = system.bind(x);
        match cmp.residual(&b) {
            Ok(r) => Ok(Some(r / residual_scale(x, 0.0))),
            Err(LagrangianError::Singular { .. }) => Ok(None),
            Err(e) => Err(e.to_string()),
        }
    })]
}

pub fn check(loaded: &Loaded, suite: Suite, settings: &Settings) -> RunReport {
    let mut report = RunReport::new(loaded, "check");
    if matches!(suite, Suite::Identities | Suite::All) {
        report.checks.extend(identities(loaded, settings));
    }
    if matches!(suite, Suite::Symmetries | Suite::All) {
        report.checks.extend(symmetries(loaded, settings));
    }
    if matches!(suite, Suite::Legendre | Suite::All) {
        report.checks.extend(legendre(loaded, settings));
    }
    let unknown: Vec<&str> = loaded
        .quantities
        .iter()
        .filter(|(_, q)| q.kind == QuantityKind::Unknown)
        .map(|(n, _)| n.as_str())
        .collect();
    if !unknown.is_empty() && matches!(suite, Suite::Symmetries | Suite::All) {
        report.warnings.push(format!("quantities of unknown kind are not checked: {}", unknown.join(", ")));
    }
    report
}

/// Writes the report as `report.json` under the output directory.
pub fn write_report(report: &RunReport, settings: &Settings) -> Result<PathBuf, CommandError> {
    let path = settings.out.join(format!("{}-report.json", report.command));
    write_file(&path, &(serde_json::to_string_pretty(report).expect("serializable") + "\n"))?;
    Ok(path)
}
