use std::collections::BTreeSet;

use super::ast::*;
use super::{ProgramError, Result};

/// Name of the control-array parameter added by [`Program::derive_controlled`].
pub const CONTROL_PARAM: &str = "__ctl";
/// Name of the exponent parameter added by [`Program::derive_power`].
pub const POWER_PARAM: &str = "__power";
const REPEAT_VAR: &str = "__rep";

fn inverse_gate(name: &str) -> &str {
    match name {
        "S" => "Sdg",
        "Sdg" => "S",
        "T" => "Tdg",
        "Tdg" => "T",
        other => other,
    }
}

fn negate(e: &Expr) -> Expr {
    match e {
        Expr::Neg(inner) => (**inner).clone(),
        Expr::Int(v) => Expr::Int(-v),
        Expr::Real(v) => Expr::Real(-v),
        other => Expr::Neg(Box::new(other.clone())),
    }
}

fn is_classical(stmt: &Stmt) -> bool {
    match &stmt.kind {
        StmtKind::Gate { .. } | StmtKind::Call { .. } | StmtKind::Measure { .. } | StmtKind::Reset { .. } => false,
        StmtKind::Assign { .. } => true,
        _ => stmt.blocks().iter().all(|b| b.iter().all(is_classical)),
    }
}

fn ref_vars(r: &QubitRef, out: &mut Vec<String>) {
    match &r.index {
        Index::All => {}
        Index::At(e) => e.free_vars(out),
        Index::Range(a, b) => {
            a.free_vars(out);
            b.free_vars(out);
        }
    }
}

/// Variables read anywhere in `stmt`.
pub(crate) fn reads(stmt: &Stmt, out: &mut Vec<String>) {
    match &stmt.kind {
        StmtKind::Gate { angle, controls, targets, .. } => {
            if let Some(a) = angle {
                a.free_vars(out);
            }
            controls.iter().chain(targets).for_each(|r| ref_vars(r, out));
        }
        StmtKind::Call { variant, args, qargs, .. } => {
            if let Some(p) = &variant.power {
                p.free_vars(out);
            }
            args.iter().for_each(|a| a.free_vars(out));
            qargs.iter().for_each(|r| ref_vars(r, out));
        }
        StmtKind::For { lower, upper, body, .. } => {
            lower.free_vars(out);
            upper.free_vars(out);
            body.iter().for_each(|s| reads(s, out));
        }
        StmtKind::If { cond, then_body, else_body } => {
            cond.free_vars(out);
            then_body.iter().chain(else_body).for_each(|s| reads(s, out));
        }
        StmtKind::Measure { targets, .. } | StmtKind::Reset { targets } => {
            targets.iter().for_each(|r| ref_vars(r, out));
        }
        StmtKind::Assign { value, .. } => value.free_vars(out),
    }
}

/// Variables assigned anywhere in `stmt` (measurement results included).
pub(crate) fn writes(stmt: &Stmt, out: &mut Vec<String>) {
    match &stmt.kind {
        StmtKind::Assign { name, .. } | StmtKind::Measure { result: name, .. } => out.push(name.clone()),
        _ => stmt.blocks().iter().for_each(|b| b.iter().for_each(|s| writes(s, out))),
    }
}

impl Program {
    fn callee_supports(&self, sub: &SubroutineDef, callee: &str, adjoint: bool) -> std::result::Result<(), String> {
        let (adj, ctl) = if let Some(p) = sub.param(callee) {
            match p.kind {
                ParamKind::Op { adjoint, controlled } => (adjoint, controlled),
                _ => return Err(format!("`{callee}` is not callable")),
            }
        } else if let Some(slot) = self.slots.get(callee) {
            (slot.adjoint, slot.controlled)
        } else if let Some(def) = self.subs.get(callee) {
            (def.supports_inverse(), def.supports_controlled())
        } else {
            return Err(format!("unknown callee `{callee}`"));
        };
        match (adjoint, adj, ctl) {
            (true, false, _) => Err(format!("`{callee}` does not declare inverse support")),
            (false, _, false) => Err(format!("`{callee}` does not declare controlled support")),
            _ => Ok(()),
        }
    }

    fn invert_block(&self, sub: &SubroutineDef, block: &[Stmt]) -> std::result::Result<Vec<Stmt>, String> {
        // Classical statements keep their order and move to the front so
        // the reversed quantum statements still see the same values.
        let mut classical = Vec::new();
        let mut quantum: Vec<&Stmt> = Vec::new();
        for stmt in block {
            if is_classical(stmt) {
                let mut w = Vec::new();
                writes(stmt, &mut w);
                let mut touched = Vec::new();
                for q in &quantum {
                    reads(q, &mut touched);
                    writes(q, &mut touched);
                }
                if let Some(v) = w.iter().find(|v| touched.contains(v)) {
                    return Err(format!("variable `{v}` is used before it is reassigned at {}", stmt.pos));
                }
                classical.push(stmt.clone());
            } else {
                quantum.push(stmt);
            }
        }
        let mut out = classical;
        for stmt in quantum.into_iter().rev() {
            out.push(self.invert_stmt(sub, stmt)?);
        }
        Ok(out)
    }

    fn invert_stmt(&self, sub: &SubroutineDef, stmt: &Stmt) -> std::result::Result<Stmt, String> {
        let kind = match &stmt.kind {
            StmtKind::Gate { name, angle, controls, targets } => StmtKind::Gate {
                name: inverse_gate(name).to_string(),
                angle: angle.as_ref().map(negate),
                controls: controls.clone(),
                targets: targets.clone(),
            },
            StmtKind::Call { callee, variant, args, qargs } => {
                self.callee_supports(sub, callee, true)?;
                let mut v = variant.clone();
                v.adjoint = !v.adjoint;
                StmtKind::Call { callee: callee.clone(), variant: v, args: args.clone(), qargs: qargs.clone() }
            }
            StmtKind::For { var, lower, upper, reverse, body } => StmtKind::For {
                var: var.clone(),
                lower: lower.clone(),
                upper: upper.clone(),
                reverse: !reverse,
                body: self.invert_block(sub, body)?,
            },
            StmtKind::If { cond, then_body, else_body } => StmtKind::If {
                cond: cond.clone(),
                then_body: self.invert_block(sub, then_body)?,
                else_body: self.invert_block(sub, else_body)?,
            },
            StmtKind::Measure { .. } => return Err(format!("measurement at {}", stmt.pos)),
            StmtKind::Reset { .. } => return Err(format!("reset at {}", stmt.pos)),
            StmtKind::Assign { .. } => stmt.kind.clone(),
        };
        Ok(Stmt::new(kind, stmt.pos))
    }

    /// Body-level inverse of `name`: statements reversed, gates replaced by
    /// their adjoints, loops run backwards, calls switched to their adjoint.
    /// The result is named `<name>__adj`.
    pub fn derive_inverse(&self, name: &str) -> Result<SubroutineDef> {
        let sub = self.subroutine(name)?;
        let body = self
            .invert_block(sub, &sub.body)
            .map_err(|reason| ProgramError::NotInvertible { sub: name.to_string(), reason })?;
        Ok(SubroutineDef { name: format!("{name}__adj"), params: sub.params.clone(), body, pos: sub.pos })
    }

    fn control_block(&self, sub: &SubroutineDef, block: &[Stmt]) -> std::result::Result<Vec<Stmt>, String> {
        block.iter().map(|s| self.control_stmt(sub, s)).collect()
    }

    fn control_stmt(&self, sub: &SubroutineDef, stmt: &Stmt) -> std::result::Result<Stmt, String> {
        let ctl = QubitRef::all(CONTROL_PARAM);
        let kind = match &stmt.kind {
            StmtKind::Gate { name, angle, controls, targets } => {
                let mut c = vec![ctl];
                c.extend(controls.iter().cloned());
                StmtKind::Gate { name: name.clone(), angle: angle.clone(), controls: c, targets: targets.clone() }
            }
            StmtKind::Call { callee, variant, args, qargs } => {
                self.callee_supports(sub, callee, false)?;
                let mut v = variant.clone();
                v.controls += 1;
                let mut q = vec![ctl];
                q.extend(qargs.iter().cloned());
                StmtKind::Call { callee: callee.clone(), variant: v, args: args.clone(), qargs: q }
            }
            StmtKind::For { var, lower, upper, reverse, body } => StmtKind::For {
                var: var.clone(),
                lower: lower.clone(),
                upper: upper.clone(),
                reverse: *reverse,
                body: self.control_block(sub, body)?,
            },
            StmtKind::If { cond, then_body, else_body } => StmtKind::If {
                cond: cond.clone(),
                then_body: self.control_block(sub, then_body)?,
                else_body: self.control_block(sub, else_body)?,
            },
            StmtKind::Measure { .. } => return Err(format!("measurement at {}", stmt.pos)),
            StmtKind::Reset { .. } => return Err(format!("reset at {}", stmt.pos)),
            StmtKind::Assign { .. } => stmt.kind.clone(),
        };
        Ok(Stmt::new(kind, stmt.pos))
    }

    /// Controlled version of `name`, named `<name>__ctl`, taking a leading
    /// qubit array `__ctl` whose qubits all control every operation.
    pub fn derive_controlled(&self, name: &str) -> Result<SubroutineDef> {
        let sub = self.subroutine(name)?;
        let body = self
            .control_block(sub, &sub.body)
            .map_err(|reason| ProgramError::NotInvertible { sub: name.to_string(), reason })?;
        let mut params = vec![Param { name: CONTROL_PARAM.to_string(), kind: ParamKind::Qubits(None) }];
        params.extend(sub.params.iter().cloned());
        Ok(SubroutineDef { name: format!("{name}__ctl"), params, body, pos: sub.pos })
    }

    /// `<name>__pow`: the body repeated `__power` times, or the inverse body
    /// repeated `-__power` times for negative exponents.
    pub fn derive_power(&self, name: &str) -> Result<SubroutineDef> {
        let sub = self.subroutine(name)?;
        let inverse = self.derive_inverse(name)?;
        let pos = sub.pos;
        let power = Expr::var(POWER_PARAM);
        let repeat = |upper: Expr, body: Vec<Stmt>| {
            Stmt::new(
                StmtKind::For { var: REPEAT_VAR.to_string(), lower: Expr::Int(1), upper, reverse: false, body },
                pos,
            )
        };
        let body = vec![Stmt::new(
            StmtKind::If {
                cond: Expr::bin(BinOp::Ge, power.clone(), Expr::Int(0)),
                then_body: vec![repeat(power.clone(), sub.body.clone())],
                else_body: vec![repeat(Expr::bin(BinOp::Sub, Expr::Int(0), power), inverse.body)],
            },
            pos,
        )];
        let mut params = sub.params.clone();
        params.push(Param { name: POWER_PARAM.to_string(), kind: ParamKind::Int });
        Ok(SubroutineDef { name: format!("{name}__pow"), params, body, pos })
    }

    /// Names used by `name`'s body, for collision checks by callers.
    pub fn names_in(&self, name: &str) -> Result<BTreeSet<String>> {
        let sub = self.subroutine(name)?;
        let mut out = Vec::new();
        for stmt in &sub.body {
            reads(stmt, &mut out);
            writes(stmt, &mut out);
        }
        Ok(out.into_iter().collect())
    }
}
