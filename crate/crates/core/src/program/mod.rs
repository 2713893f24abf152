//! Program model: a small subroutine language, its interpreter, variant
//! derivation (inverse, controlled, power) and the call graph.
//!
//! ```text
//! oracle F(int n, qubits qs[n]) is adj+ctl;
//! sub Reverse(int n, qubits qs[n]) {
//!     for i in 0..n/2-1 { SWAP qs[i], qs[n-1-i]; }
//! }
//! ```
//!
//! Ranges are inclusive. `call G[adj, ctl, pow(k)](args)(qubits)` invokes a
//! variant; each `ctl` consumes one leading qubit argument as controls.

mod ast;
mod exec;
mod graph;
mod parse;
mod variants;

use std::fmt;

pub use ast::*;
pub use exec::{Invocation, Layout, RunOutput, Value};
pub use graph::DependencyGraph;
pub use parse::{parse_expr, parse_program, parse_sources, parse_subroutine};
pub use variants::{CONTROL_PARAM, POWER_PARAM};

pub(crate) use variants::{reads, writes};

use crate::sim::SimError;

/// Subroutine and position a runtime error refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub sub: String,
    pub pos: Pos,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.sub, self.pos)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ProgramError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("`{0}` is defined more than once")]
    Duplicate(String),
    #[error("unknown subroutine `{0}`")]
    UnknownSubroutine(String),
    #[error("{at}: unknown callee `{callee}`")]
    UnknownCallee { callee: String, at: Location },
    #[error("{at}: unbound name `{name}`")]
    UnboundName { name: String, at: Location },
    #[error("{at}: index {index} out of range for `{array}` of length {len}")]
    IndexOutOfRange { array: String, index: i64, len: usize, at: Location },
    #[error("{at}: division by zero")]
    DivisionByZero { at: Location },
    #[error("{at}: integer overflow")]
    Overflow { at: Location },
    #[error("{at}: {message}")]
    Type { message: String, at: Location },
    #[error("{at}: {message}")]
    Arity { message: String, at: Location },
    #[error("{at}: `{array}` has length {actual}, declared {expected}")]
    LengthMismatch { array: String, expected: String, actual: usize, at: Location },
    #[error("{at}: qubit arguments overlap")]
    AliasedQubits { at: Location },
    #[error("recursive call chain {}", chain.join(" -> "))]
    Recursion { chain: Vec<String> },
    #[error("{at}: measurement or reset inside an adjoint, controlled or traced context")]
    NonUnitaryInVariant { at: Location },
    #[error("{at}: `{callee}` does not support the {variant} variant")]
    VariantUnsupported { callee: String, variant: &'static str, at: Location },
    #[error("no subroutine bound to `{0}`")]
    UnboundOracle(String),
    #[error("missing argument `{0}`")]
    MissingArgument(String),
    #[error("layout: {0}")]
    Layout(String),
    #[error("cannot derive a variant of `{sub}`: {reason}")]
    NotInvertible { sub: String, reason: String },
    #[error("call graph has a cycle through {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("replacement for `{0}` has a different signature")]
    SignatureMismatch(String),
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error("{}{source}", at.as_ref().map(|l| format!("{l}: ")).unwrap_or_default())]
    Sim { source: SimError, at: Option<Location> },
}

pub type Result<T> = std::result::Result<T, ProgramError>;

impl Program {
    pub fn parse(src: &str) -> Result<Program> {
        parse_program(src)
    }

    pub fn entry(&self) -> &str {
        &self.entry
    }

    pub fn with_entry(&self, name: &str) -> Result<Program> {
        self.subroutine(name)?;
        let mut p = self.clone();
        p.entry = name.to_string();
        Ok(p)
    }

    pub fn subroutine(&self, name: &str) -> Result<&SubroutineDef> {
        self.subs.get(name).ok_or_else(|| ProgramError::UnknownSubroutine(name.to_string()))
    }

    pub fn subroutine_mut(&mut self, name: &str) -> Result<&mut SubroutineDef> {
        self.subs.get_mut(name).ok_or_else(|| ProgramError::UnknownSubroutine(name.to_string()))
    }

    pub fn has_subroutine(&self, name: &str) -> bool {
        self.subs.contains_key(name)
    }

    /// Subroutines in definition order.
    pub fn subroutines(&self) -> impl Iterator<Item = &SubroutineDef> {
        self.order.iter().filter_map(|n| self.subs.get(n))
    }

    pub fn slot(&self, name: &str) -> Option<&OracleSlot> {
        self.slots.get(name)
    }

    pub fn slots(&self) -> impl Iterator<Item = &OracleSlot> {
        self.order.iter().filter_map(|n| self.slots.get(n))
    }

    /// Slot bindings installed by [`Program::substitute`].
    pub fn bound_slot(&self, name: &str) -> Option<&SubroutineDef> {
        self.bound.get(name)
    }

    /// Adds a subroutine, replacing any existing one with the same name.
    pub fn insert_subroutine(&mut self, def: SubroutineDef) {
        if !self.subs.contains_key(&def.name) {
            self.order.push(def.name.clone());
        }
        if self.entry.is_empty() {
            self.entry = def.name.clone();
        }
        self.subs.insert(def.name.clone(), def);
    }

    /// Whether `name` and everything it calls is free of measurement and
    /// reset. Slots count as unitary.
    pub fn is_unitary(&self, name: &str) -> bool {
        let g = self.dependency_graph();
        g.reachable(name).iter().all(|n| self.subs.get(n).is_none_or(SubroutineDef::supports_inverse))
    }

    /// Static checks: calls resolve with matching argument counts, qubit
    /// references name qubit arrays, variables are defined somewhere in
    /// scope, and the call graph is acyclic.
    pub fn validate(&self) -> Result<()> {
        self.subroutine(&self.entry)?;
        for sub in self.subs.values() {
            let mut defined: Vec<String> = sub
                .params
                .iter()
                .filter(|p| matches!(p.kind, ParamKind::Int | ParamKind::Bool))
                .map(|p| p.name.clone())
                .collect();
            for stmt in &sub.body {
                writes(stmt, &mut defined);
            }
            self.validate_block(sub, &sub.body, &mut defined)?;
        }
        self.integration_order()?;
        Ok(())
    }

    fn validate_block(&self, sub: &SubroutineDef, block: &[Stmt], defined: &mut Vec<String>) -> Result<()> {
        let invalid = |pos: Pos, msg: String| ProgramError::Invalid(format!("{} at {pos}: {msg}", sub.name));
        let is_array = |name: &str| matches!(sub.param(name).map(|p| &p.kind), Some(ParamKind::Qubits(_)));
        let check_refs = |refs: &[QubitRef], pos: Pos| -> Result<()> {
            match refs.iter().find(|r| !is_array(&r.array)) {
                Some(r) => Err(invalid(pos, format!("`{}` is not a qubit array", r.array))),
                None => Ok(()),
            }
        };
        for stmt in block {
            let mut used = Vec::new();
            let mut op_args: Vec<String> = Vec::new();
            match &stmt.kind {
                StmtKind::Gate { controls, targets, .. } => {
                    check_refs(controls, stmt.pos)?;
                    check_refs(targets, stmt.pos)?;
                }
                StmtKind::Measure { targets, .. } | StmtKind::Reset { targets } => check_refs(targets, stmt.pos)?,
                StmtKind::Call { callee, variant, args, qargs } => {
                    check_refs(qargs, stmt.pos)?;
                    let target = if let Some(p) = sub.param(callee) {
                        if !matches!(p.kind, ParamKind::Op { .. }) {
                            return Err(invalid(stmt.pos, format!("`{callee}` is not callable")));
                        }
                        None
                    } else if let Some(def) = self.subs.get(callee) {
                        Some(def.params.clone())
                    } else if let Some(slot) = self.slots.get(callee) {
                        Some(slot.params.clone())
                    } else {
                        return Err(invalid(stmt.pos, format!("unknown callee `{callee}`")));
                    };
                    if let Some(params) = target {
                        let nc = params.iter().filter(|p| p.kind.is_classical()).count();
                        let nq = params.len() - nc;
                        if nc != args.len() || nq + variant.controls != qargs.len() {
                            return Err(invalid(stmt.pos, format!("argument count mismatch calling `{callee}`")));
                        }
                        for (p, a) in params.iter().filter(|p| p.kind.is_classical()).zip(args) {
                            if let (ParamKind::Op { .. }, Expr::Var(name)) = (&p.kind, a) {
                                let known = self.subs.contains_key(name)
                                    || self.slots.contains_key(name)
                                    || matches!(sub.param(name).map(|p| &p.kind), Some(ParamKind::Op { .. }));
                                if !known {
                                    return Err(invalid(stmt.pos, format!("unknown subroutine `{name}`")));
                                }
                                op_args.push(name.clone());
                            } else if matches!(p.kind, ParamKind::Op { .. }) {
                                return Err(invalid(stmt.pos, format!("`{}` expects a subroutine", p.name)));
                            }
                        }
                    } else {
                        // signature unknown through an op parameter: bare names may be subroutines
                        op_args.extend(args.iter().filter_map(|a| match a {
                            Expr::Var(n) if self.subs.contains_key(n) || self.slots.contains_key(n) => Some(n.clone()),
                            _ => None,
                        }));
                    }
                }
                _ => {}
            }
            // shallow reads of this statement only; nested blocks are visited below
            let mut shallow = stmt.clone();
            for b in shallow.blocks_mut() {
                b.clear();
            }
            reads(&shallow, &mut used);
            used.retain(|v| !op_args.contains(v));
            if let Some(v) = used.iter().find(|v| !defined.contains(v) && !is_array(v)) {
                return Err(invalid(stmt.pos, format!("`{v}` is never defined")));
            }
            match &stmt.kind {
                StmtKind::For { var, body, .. } => {
                    defined.push(var.clone());
                    self.validate_block(sub, body, defined)?;
                    defined.pop();
                }
                StmtKind::If { then_body, else_body, .. } => {
                    self.validate_block(sub, then_body, defined)?;
                    self.validate_block(sub, else_body, defined)?;
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
