//! A small expression language for scalar functions of `(x0, r, s, z)`.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `x0`, `r`, `s`, `z` are variables; `sqrt exp log arctan sin cos` are functions; every
//! other identifier is a named parameter.

mod ast;
mod builtin;
mod eval;
mod parser;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::jets::JetError;

pub use ast::{BinOp, Expr, Var};
pub use builtin::{builtin, Family};
pub use eval::{eval, eval_f64, eval_jets};
pub use parser::{parse, parse_with_params};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at byte {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("parameter `{0}` shadows a reserved name")]
    ReservedName(String),
    #[error("parameter `{0}` has no value")]
    UnboundParameter(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid parameter for family `{family}`: {message}")]
    InvalidFamilyParameter { family: String, message: String },
    #[error(transparent)]
    Jet(#[from] JetError),
}

pub const RESERVED: [&str; 10] = ["x0", "r", "s", "z", "sqrt", "exp", "log", "arctan", "sin", "cos"];

/// Named parameter values; reserved names are rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterEnv {
    values: BTreeMap<String, f64>,
}

impl ParameterEnv {
    pub fn new() -> ParameterEnv {
        ParameterEnv::default()
    }

    pub fn insert(&mut self, name: &str, value: f64) -> Result<(), DslError> {
        if RESERVED.contains(&name) {
            return Err(DslError::ReservedName(name.to_string()));
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<ParameterEnv, DslError> {
        self.insert(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
