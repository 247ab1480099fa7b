//! Validation shared by system constructors.

use std::collections::BTreeSet;

use crate::expr::{is_identifier, Bindings, Expr};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("expected {expected} {block} coordinate names, got {got}")]
    Arity {
        block: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("`{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("name `{0}` is used more than once")]
    DuplicateName(String),
    #[error("unbound symbol `{name}` in {what}")]
    Unbound { name: String, what: String },
}

/// Checks identifiers, distinctness (coordinates and parameters together)
/// and that `exprs` only mention coordinates or parameters.
pub(crate) fn validate(coords: &[String], params: &Bindings, exprs: &[(&str, &Expr)]) -> Result<(), SystemError> {
    let mut seen = BTreeSet::new();
    for name in coords.iter().map(String::as_str).chain(params.iter().map(|(k, _)| k)) {
        if !is_identifier(name) {
            return Err(SystemError::InvalidName(name.to_string()));
        }
        if !seen.insert(name) {
            return Err(SystemError::DuplicateName(name.to_string()));
        }
    }
    for (what, e) in exprs {
        if let Some(name) = e.free_vars().into_iter().find(|v| !seen.contains(v.as_str())) {
            return Err(SystemError::Unbound {
                name,
                what: what.to_string(),
            });
        }
    }
    Ok(())
}

pub(crate) fn check_arity(block: &'static str, names: &[String], n: usize) -> Result<(), SystemError> {
    if names.len() != n {
        return Err(SystemError::Arity {
            block,
            expected: n,
            got: names.len(),
        });
    }
    Ok(())
}
