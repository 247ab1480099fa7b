//! JSON system definitions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Deserialize;

use crate::contact::ContactDynamics;
use crate::expr::{Bindings, Expr, ParseError};
use crate::field::VectorFieldExpr;
use crate::hamiltonian::ContactHamiltonianSystem;
use crate::integrate::IntegratorConfig;
use crate::lagrangian::{ContactLagrangianSystem, LagrangianError};
use crate::sampling::SampleBox;
use crate::symmetry::{complete_lift, dissipated_from_symmetry, quotient_quantity, LiftKind, Quantity, QuantityKind};
use crate::system::{validate, SystemError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("at {pointer}: {message}")]
    Invalid { pointer: String, message: String },
    /// The model is well formed but its velocity Hessian vanishes identically.
    #[error("at {pointer}: {message}")]
    Singular { pointer: String, message: String },
    #[error("at {pointer}: {source}")]
    Expression {
        pointer: String,
        #[source]
        source: ParseError,
    },
}

impl ConfigError {
    pub fn pointer(&self) -> Option<&str> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Schema { pointer, .. }
            | ConfigError::Invalid { pointer, .. }
            | ConfigError::Singular { pointer, .. }
            | ConfigError::Expression { pointer, .. } => Some(pointer),
        }
    }
}

fn invalid(pointer: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        pointer: pointer.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formalism {
    Hamiltonian,
    Lagrangian,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coordinates {
    pub q: Vec<String>,
    #[serde(default)]
    pub v: Option<Vec<String>>,
    #[serde(default)]
    pub p: Option<Vec<String>>,
    pub s: String,
}

/// Hamiltonian paired with a Lagrangian config for the Legendre check;
/// shares the position names, `s` and the parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Companion {
    pub p: Vec<String>,
    pub expression: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    /// `"dynamics"` names the system's own vector field.
    Keyword(String),
    Components(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SymmetrySpec {
    Short(FieldSpec),
    Full {
        #[serde(default)]
        field: Option<FieldSpec>,
        #[serde(default)]
        lift: Option<LiftKind>,
        #[serde(default)]
        base: Option<Vec<String>>,
        /// Also require `L_Y η = 0` and `L_Y H = 0`.
        #[serde(default)]
        contact: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum QuantitySpec {
    Expr(String),
    Full {
        expr: String,
        #[serde(default = "unknown_kind")]
        kind: QuantityKind,
    },
    Symmetry {
        symmetry: String,
    },
    Quotient {
        quotient: [String; 2],
    },
    Builtin {
        builtin: Builtin,
    },
}

fn unknown_kind() -> QuantityKind {
    QuantityKind::Unknown
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    /// `H` or `E_L`.
    Energy,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BoxSpec {
    Uniform([f64; 2]),
    Bounds { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckBlock {
    #[serde(default, rename = "box")]
    pub sample_box: Option<BoxSpec>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Tolerance for laws checked along a trajectory.
    #[serde(default)]
    pub trajectory_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub formalism: Formalism,
    pub n: usize,
    pub coordinates: Coordinates,
    pub expression: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub hamiltonian: Option<Companion>,
    #[serde(default)]
    pub symmetries: IndexMap<String, SymmetrySpec>,
    #[serde(default)]
    pub quantities: IndexMap<String, QuantitySpec>,
    #[serde(default)]
    pub integration: Option<IntegratorConfig>,
    #[serde(default)]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default)]
    pub check: CheckBlock,
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
            pointer: json_pointer(e.path()),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn params(&self) -> Bindings {
        Bindings::from_pairs(self.params.iter().map(|(k, v)| (k.as_str(), *v)))
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Hamiltonian(ContactHamiltonianSystem),
    Lagrangian {
        system: ContactLagrangianSystem,
        companion: Option<ContactHamiltonianSystem>,
    },
}

#[derive(Debug, Clone)]
pub struct NamedSymmetry {
    pub name: String,
    pub field: VectorFieldExpr,
    pub contact: bool,
}

/// A validated config with its systems built.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: SystemConfig,
    pub model: Model,
    /// `None` when the vector field has no symbolic form (`n > 3` Lagrangians).
    pub dynamics: Option<ContactDynamics>,
    pub symmetries: Vec<NamedSymmetry>,
    pub quantities: Vec<(String, Quantity)>,
}

impl Loaded {
    pub fn coords(&self) -> Vec<String> {
        match &self.model {
            Model::Hamiltonian(h) => h.coords().to_vec(),
            Model::Lagrangian { system, .. } => system.coords().to_vec(),
        }
    }

    pub fn energy(&self) -> Expr {
        match &self.model {
            Model::Hamiltonian(h) => h.hamiltonian().clone(),
            Model::Lagrangian { system, .. } => system.energy().clone(),
        }
    }

    pub fn sample_box(&self) -> Result<SampleBox, ConfigError> {
        let dim = self.config.dim();
        match &self.config.check.sample_box {
            None => Ok(SampleBox::standard(dim)),
            Some(spec) => box_from_spec(spec, dim, "/check/box"),
        }
    }
}

pub fn box_from_spec(spec: &BoxSpec, dim: usize, pointer: &str) -> Result<SampleBox, ConfigError> {
    let b = match spec {
        BoxSpec::Uniform([lo, hi]) => SampleBox {
            lo: vec![*lo; dim],
            hi: vec![*hi; dim],
        },
        BoxSpec::Bounds { lo, hi } => SampleBox {
            lo: lo.clone(),
            hi: hi.clone(),
        },
    };
    if b.lo.len() != dim || b.hi.len() != dim {
        return Err(invalid(pointer, format!("box must have {dim} bounds per side")));
    }
    if b.lo.iter().zip(&b.hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
        return Err(invalid(pointer, "box bounds must be finite with lo <= hi"));
    }
    Ok(b)
}

fn parse_expr(text: &str, pointer: &str) -> Result<Expr, ConfigError> {
    Expr::parse(text).map_err(|source| ConfigError::Expression {
        pointer: pointer.to_string(),
        source,
    })
}

fn system_error(e: SystemError, pointer: &str) -> ConfigError {
    let pointer = match &e {
        SystemError::Arity { block, .. } => match *block {
            "velocity" => "/coordinates/v",
            "momentum" => "/coordinates/p",
            _ => "/coordinates",
        },
        SystemError::ZeroDimension => "/n",
        SystemError::Unbound { .. } => pointer,
        SystemError::InvalidName(_) | SystemError::DuplicateName(_) => "/coordinates",
    };
    invalid(pointer, e)
}

fn check_arity(names: &[String], n: usize, pointer: &str) -> Result<(), ConfigError> {
    if names.len() != n {
        return Err(invalid(pointer, format!("expected {n} names (n = {n}), got {}", names.len())));
    }
    Ok(())
}

type Dynamics = Result<ContactDynamics, LagrangianError>;

fn build_field(spec: &FieldSpec, dynamics: &Dynamics, coords: &[String], params: &Bindings, pointer: &str) -> Result<VectorFieldExpr, ConfigError> {
    match spec {
        FieldSpec::Keyword(k) if k == "dynamics" => match dynamics {
            Ok(d) => Ok(d.field.clone()),
            Err(LagrangianError::SymbolicallySingular) => Err(ConfigError::Singular {
                pointer: pointer.into(),
                message: LagrangianError::SymbolicallySingular.to_string(),
            }),
            Err(_) => Err(invalid(pointer, "the dynamics has no symbolic form for this system")),
        },
        FieldSpec::Keyword(k) => Err(invalid(pointer, format!("unknown keyword `{k}` (expected \"dynamics\" or a component list)"))),
        FieldSpec::Components(c) => {
            if c.len() != coords.len() {
                return Err(invalid(pointer, format!("expected {} components, got {}", coords.len(), c.len())));
            }
            let comps = c
                .iter()
                .enumerate()
                .map(|(i, s)| parse_expr(s, &format!("{pointer}/{i}")))
                .collect::<Result<Vec<_>, _>>()?;
            for (i, e) in comps.iter().enumerate() {
                validate(coords, params, &[("the symmetry component", e)]).map_err(|e| invalid(format!("{pointer}/{i}"), e))?;
            }
            Ok(VectorFieldExpr::new(comps))
        }
    }
}

pub fn load_config(path: &Path) -> Result<Loaded, ConfigError> {
    SystemConfig::load(path)?.build()
}

impl SystemConfig {
    /// Validates and builds the systems, symmetries and quantities.
    pub fn build(self) -> Result<Loaded, ConfigError> {
        let cfg = self;
        if cfg.n == 0 {
            return Err(invalid("/n", "n must be positive"));
        }
        let params = cfg.params();
        let c = &cfg.coordinates;
        check_arity(&c.q, cfg.n, "/coordinates/q")?;
        let expr = parse_expr(&cfg.expression, "/expression")?;
        let model = match cfg.formalism {
            Formalism::Hamiltonian => {
                let p = c.p.clone().ok_or_else(|| invalid("/coordinates/p", "a Hamiltonian system needs momentum names"))?;
                if c.v.is_some() {
                    return Err(invalid("/coordinates/v", "velocities are not used by a Hamiltonian system"));
                }
                check_arity(&p, cfg.n, "/coordinates/p")?;
                if cfg.hamiltonian.is_some() {
                    return Err(invalid("/hamiltonian", "a companion Hamiltonian only applies to Lagrangian systems"));
                }
                let h = ContactHamiltonianSystem::new(c.q.clone(), p, c.s.clone(), expr, params.clone())
                    .map_err(|e| system_error(e, "/expression"))?;
                Model::Hamiltonian(h)
            }
            Formalism::Lagrangian => {
                let v = c.v.clone().ok_or_else(|| invalid("/coordinates/v", "a Lagrangian system needs velocity names"))?;
                if c.p.is_some() {
                    return Err(invalid("/coordinates/p", "momenta are not used by a Lagrangian system; put them under /hamiltonian/p"));
                }
                check_arity(&v, cfg.n, "/coordinates/v")?;
                let system = ContactLagrangianSystem::new(c.q.clone(), v, c.s.clone(), expr, params.clone())
                    .map_err(|e| system_error(e, "/expression"))?;
                let companion = match &cfg.hamiltonian {
                    None => None,
                    Some(comp) => {
                        check_arity(&comp.p, cfg.n, "/hamiltonian/p")?;
                        let h = parse_expr(&comp.expression, "/hamiltonian/expression")?;
                        Some(
                            ContactHamiltonianSystem::new(c.q.clone(), comp.p.clone(), c.s.clone(), h, params.clone())
                                .map_err(|e| match e {
                                    SystemError::Arity { .. } => invalid("/hamiltonian/p", e),
                                    SystemError::Unbound { .. } => invalid("/hamiltonian/expression", e),
                                    other => invalid("/hamiltonian/p", other),
                                })?,
                        )
                    }
                };
                Model::Lagrangian { system, companion }
            }
        };
        let dynamics: Dynamics = match &model {
            Model::Hamiltonian(h) => Ok(h.dynamics(&cfg.name)),
            Model::Lagrangian { system, .. } => system.dynamics(&cfg.name),
        };
        let structure = match &model {
            Model::Hamiltonian(h) => h.structure(),
            Model::Lagrangian { system, .. } => system.structure().clone(),
        };
        let coords = structure.chart.coords().to_vec();

        let mut symmetries = Vec::new();
        for (name, spec) in &cfg.symmetries {
            let ptr = format!("/symmetries/{name}");
            let (field, contact) = match spec {
                SymmetrySpec::Short(f) => (build_field(f, &dynamics, &coords, &params, &ptr)?, false),
                SymmetrySpec::Full {
                    field,
                    lift,
                    base,
                    contact,
                } => {
                    let field = match (field, lift, base) {
                        (Some(f), None, None) => build_field(f, &dynamics, &coords, &params, &format!("{ptr}/field"))?,
                        (None, Some(kind), Some(base)) => {
                            check_arity(base, cfg.n, &format!("{ptr}/base"))?;
                            let z = base
                                .iter()
                                .enumerate()
                                .map(|(i, s)| parse_expr(s, &format!("{ptr}/base/{i}")))
                                .collect::<Result<Vec<_>, _>>()?;
                            let fiber = match &model {
                                Model::Hamiltonian(h) => h.p_names().to_vec(),
                                Model::Lagrangian { system, .. } => system.v_names().to_vec(),
                            };
                            let lifted = complete_lift(&z, *kind, &c.q, &fiber, &c.s).map_err(|e| invalid(format!("{ptr}/base"), e))?;
                            for e in lifted.components() {
                                validate(&coords, &params, &[("the lifted field", e)]).map_err(|e| invalid(format!("{ptr}/base"), e))?;
                            }
                            lifted
                        }
                        _ => return Err(invalid(&ptr, "give either `field` or both `lift` and `base`")),
                    };
                    (field, *contact)
                }
            };
            symmetries.push(NamedSymmetry {
                name: name.clone(),
                field,
                contact,
            });
        }

        let energy = structure.energy.clone();
        let mut quantities: Vec<(String, Quantity)> = Vec::new();
        for (name, spec) in &cfg.quantities {
            let ptr = format!("/quantities/{name}");
            let q = match spec {
                QuantitySpec::Expr(s) => Quantity::new(parse_expr(s, &ptr)?, QuantityKind::Unknown),
                QuantitySpec::Full { expr, kind } => Quantity::new(parse_expr(expr, &format!("{ptr}/expr"))?, *kind),
                QuantitySpec::Builtin { builtin: Builtin::Energy } => Quantity::new(energy.clone(), QuantityKind::Dissipated),
                QuantitySpec::Symmetry { symmetry } => {
                    let y = symmetries
                        .iter()
                        .find(|s| &s.name == symmetry)
                        .ok_or_else(|| invalid(format!("{ptr}/symmetry"), format!("no symmetry named `{symmetry}`")))?;
                    match &dynamics {
                        Ok(d) => dissipated_from_symmetry(&y.field, d),
                        Err(_) => Quantity::new(Expr::neg(structure.contract_eta(&y.field)).simplify(), QuantityKind::Dissipated),
                    }
                }
                QuantitySpec::Quotient { quotient: [a, b] } => {
                    let find = |n: &str, i: usize| {
                        quantities
                            .iter()
                            .find(|(k, _)| k == n)
                            .map(|(_, q)| q)
                            .ok_or_else(|| invalid(format!("{ptr}/quotient/{i}"), format!("`{n}` must be defined before this quotient")))
                    };
                    quotient_quantity(find(a, 0)?, find(b, 1)?).map_err(|e| invalid(format!("{ptr}/quotient"), e))?
                }
            };
            validate(&coords, &params, &[("the quantity", &q.expr)]).map_err(|e| invalid(&ptr, e))?;
            quantities.push((name.clone(), q));
        }

        if let Some(x0) = &cfg.initial_state {
            if x0.len() != cfg.dim() {
                return Err(invalid("/initial_state", format!("expected {} values (2n+1), got {}", cfg.dim(), x0.len())));
            }
        }
        if let Some(integ) = &cfg.integration {
            integ.validate().map_err(|e| invalid("/integration", e))?;
        }
        let loaded = Loaded {
            dynamics: dynamics.ok(),
            model,
            symmetries,
            quantities,
            config: cfg,
        };
        loaded.sample_box()?;
        Ok(loaded)
    }
}
