use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::{ProgramError, Result};

/// Caller-to-callee edges between subroutines and oracle slots.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<String, BTreeSet<String>>,
}

impl DependencyGraph {
    pub fn callees(&self, name: &str) -> impl Iterator<Item = &String> {
        self.edges.get(name).into_iter().flatten()
    }

    pub fn callers<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a String> + 'a {
        self.edges.iter().filter(move |(_, cs)| cs.contains(name)).map(|(n, _)| n)
    }

    /// Every node reachable from `root`, `root` included.
    pub fn reachable(&self, root: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut todo = vec![root.to_string()];
        while let Some(n) = todo.pop() {
            if seen.insert(n.clone()) {
                todo.extend(self.callees(&n).cloned());
            }
        }
        seen
    }

    /// Callees before callers; ties broken lexicographically.
    pub fn topological_order(&self) -> Result<Vec<String>> {
        let mut done: BTreeSet<String> = BTreeSet::new();
        let mut order = Vec::new();
        while order.len() < self.nodes.len() {
            let next = self.nodes.iter().find(|n| !done.contains(*n) && self.callees(n).all(|c| done.contains(c)));
            match next {
                Some(n) => {
                    done.insert(n.clone());
                    order.push(n.clone());
                }
                None => {
                    let rest = self.nodes.iter().filter(|n| !done.contains(*n)).cloned().collect();
                    return Err(ProgramError::Cycle(rest));
                }
            }
        }
        Ok(order)
    }
}

fn collect_calls(block: &[Stmt], out: &mut BTreeSet<String>) {
    for stmt in block {
        if let StmtKind::Call { callee, args, .. } = &stmt.kind {
            out.insert(callee.clone());
            // a subroutine passed as an `op` argument is a dependency too
            for a in args {
                if let Expr::Var(name) = a {
                    out.insert(name.clone());
                }
            }
        }
        for b in stmt.blocks() {
            collect_calls(b, out);
        }
    }
}

impl Program {
    /// Edge `A -> B` iff `A`'s body calls `B` or passes it as an `op`
    /// argument. Calls through `op` parameters are not edges.
    pub fn dependency_graph(&self) -> DependencyGraph {
        let mut g = DependencyGraph::default();
        g.nodes.extend(self.subs.keys().cloned());
        g.nodes.extend(self.slots.keys().cloned());
        for (name, sub) in &self.subs {
            let mut calls = BTreeSet::new();
            collect_calls(&sub.body, &mut calls);
            calls.retain(|c| sub.param(c).is_none() && g.nodes.contains(c));
            g.edges.insert(name.clone(), calls);
        }
        g
    }

    /// Bottom-up integration order: every subroutine after everything it
    /// calls, ties broken by name.
    pub fn integration_order(&self) -> Result<Vec<String>> {
        self.dependency_graph().topological_order()
    }

    /// Copy of the program with subroutine or oracle slot `name` replaced by
    /// (or bound to) `replacement`. Signatures must line up.
    pub fn substitute(&self, name: &str, replacement: &SubroutineDef) -> Result<Program> {
        let mut out = self.clone();
        if let Some(existing) = self.subs.get(name) {
            if !existing.same_signature(replacement) {
                return Err(ProgramError::SignatureMismatch(name.to_string()));
            }
            let mut def = replacement.clone();
            def.name = name.to_string();
            out.subs.insert(name.to_string(), def);
        } else if let Some(slot) = self.slots.get(name) {
            if !slot.accepts(replacement) {
                return Err(ProgramError::SignatureMismatch(name.to_string()));
            }
            out.bound.insert(name.to_string(), replacement.clone());
        } else {
            return Err(ProgramError::UnknownSubroutine(name.to_string()));
        }
        Ok(out)
    }
}
