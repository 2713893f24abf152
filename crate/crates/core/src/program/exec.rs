use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::ast::*;
use super::{Location, ProgramError, Result};
use crate::sim::{Circuit, Gate, Op, RandomStream, SimError, StateVector};

/// Runtime value of a classical expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Real(f64),
}

impl Value {
    fn as_f64(self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(v as f64),
            Value::Real(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    fn type_name(self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Real(_) => "real",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
        }
    }
}

/// Which entry point to run and with what: classical arguments, qubit
/// array sizes that are not fixed by a declared length, and the
/// subroutines bound to oracle slots or `op` parameters.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub sub: String,
    pub args: BTreeMap<String, i64>,
    pub sizes: BTreeMap<String, usize>,
    pub oracles: BTreeMap<String, SubroutineDef>,
}

impl Invocation {
    pub fn new(sub: &str) -> Self {
        Invocation { sub: sub.to_string(), ..Default::default() }
    }

    pub fn arg(mut self, name: &str, value: i64) -> Self {
        self.args.insert(name.to_string(), value);
        self
    }

    pub fn size(mut self, array: &str, len: usize) -> Self {
        self.sizes.insert(array.to_string(), len);
        self
    }

    pub fn oracle(mut self, name: &str, def: SubroutineDef) -> Self {
        self.oracles.insert(name.to_string(), def);
        self
    }
}

/// Placement of the entry point's qubit arrays in the register: arrays are
/// laid out consecutively from qubit 0 in parameter order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub arrays: Vec<(String, std::ops::Range<usize>)>,
}

impl Layout {
    pub fn width(&self) -> usize {
        self.arrays.last().map_or(0, |(_, r)| r.end)
    }

    pub fn range(&self, array: &str) -> Option<std::ops::Range<usize>> {
        self.arrays.iter().find(|(n, _)| n == array).map(|(_, r)| r.clone())
    }

    pub fn qubits(&self, array: &str) -> Option<Vec<usize>> {
        self.range(array).map(|r| r.collect())
    }
}

/// Result of one execution.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: StateVector,
    /// Classical variables of the entry frame, including measurement
    /// results (big-endian over the measured qubits). Booleans are 0/1.
    pub results: BTreeMap<String, i64>,
    /// Whether any measurement or reset executed.
    pub measured: bool,
}

#[derive(Clone, Copy)]
struct Callable<'a> {
    def: &'a SubroutineDef,
    adjoint: bool,
    controlled: bool,
}

#[derive(Clone, Copy)]
enum Arg<'a> {
    Val(Value),
    Op(Callable<'a>),
}

struct Frame<'a> {
    def: &'a SubroutineDef,
    vars: HashMap<String, Value>,
    arrays: HashMap<String, Vec<usize>>,
    ops: HashMap<String, Callable<'a>>,
}

impl Frame<'_> {
    fn loc(&self, pos: Pos) -> Location {
        Location { sub: self.def.name.clone(), pos }
    }
}

pub(crate) fn eval(
    expr: &Expr,
    vars: &HashMap<String, Value>,
    arrays: &HashMap<String, Vec<usize>>,
) -> std::result::Result<Value, EvalError> {
    use Value::*;
    Ok(match expr {
        Expr::Int(v) => Int(*v),
        Expr::Real(v) => Real(*v),
        Expr::Bool(v) => Bool(*v),
        Expr::Pi => Real(std::f64::consts::PI),
        Expr::Var(name) => match vars.get(name) {
            Some(v) => *v,
            None if arrays.contains_key(name) => {
                return Err(EvalError::Type(format!("`{name}` is a qubit array, not a value")))
            }
            None => return Err(EvalError::Unbound(name.clone())),
        },
        Expr::Len(name) => match arrays.get(name) {
            Some(a) => Int(a.len() as i64),
            None => return Err(EvalError::Unbound(name.clone())),
        },
        Expr::Neg(e) => match eval(e, vars, arrays)? {
            Int(v) => Int(v.checked_neg().ok_or(EvalError::Overflow)?),
            Real(v) => Real(-v),
            Bool(_) => return Err(EvalError::Type("cannot negate a bool".into())),
        },
        Expr::Not(e) => match eval(e, vars, arrays)? {
            Bool(v) => Bool(!v),
            v => return Err(EvalError::Type(format!("`!` needs a bool, got {}", v.type_name()))),
        },
        Expr::Bin(op @ (BinOp::And | BinOp::Or), a, b) => {
            let lhs = expect_bool(eval(a, vars, arrays)?)?;
            // short circuit
            if (*op == BinOp::And && !lhs) || (*op == BinOp::Or && lhs) {
                return Ok(Bool(lhs));
            }
            Bool(expect_bool(eval(b, vars, arrays)?)?)
        }
        Expr::Bin(op, a, b) => binary(*op, eval(a, vars, arrays)?, eval(b, vars, arrays)?)?,
    })
}

fn expect_bool(v: Value) -> std::result::Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        v => Err(EvalError::Type(format!("expected a bool, got {}", v.type_name()))),
    }
}

fn binary(op: BinOp, a: Value, b: Value) -> std::result::Result<Value, EvalError> {
    use Value::*;
    if let (Bool(x), Bool(y)) = (a, b) {
        return match op {
            BinOp::Eq => Ok(Bool(x == y)),
            BinOp::Ne => Ok(Bool(x != y)),
            _ => Err(EvalError::Type(format!("`{}` is not defined on bools", op.symbol()))),
        };
    }
    if let (Int(x), Int(y)) = (a, b) {
        let r = match op {
            BinOp::Add => x.checked_add(y),
            BinOp::Sub => x.checked_sub(y),
            BinOp::Mul => x.checked_mul(y),
            BinOp::Div | BinOp::Mod if y == 0 => return Err(EvalError::DivisionByZero),
            BinOp::Div => x.checked_div(y),
            BinOp::Mod => x.checked_rem(y),
            BinOp::Pow => {
                let e = u32::try_from(y).map_err(|_| EvalError::Type(format!("negative integer exponent {y}")))?;
                x.checked_pow(e)
            }
            _ => return Ok(Bool(compare(op, x.cmp(&y)))),
        };
        return r.map(Int).ok_or(EvalError::Overflow);
    }
    let (Some(x), Some(y)) = (a.as_f64(), b.as_f64()) else {
        return Err(EvalError::Type(format!(
            "`{}` cannot combine {} and {}",
            op.symbol(),
            a.type_name(),
            b.type_name()
        )));
    };
    Ok(match op {
        BinOp::Add => Real(x + y),
        BinOp::Sub => Real(x - y),
        BinOp::Mul => Real(x * y),
        BinOp::Div | BinOp::Mod if y == 0.0 => return Err(EvalError::DivisionByZero),
        BinOp::Div => Real(x / y),
        BinOp::Mod => Real(x % y),
        BinOp::Pow => Real(x.powf(y)),
        _ => Bool(compare(op, x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal))),
    })
}

fn compare(op: BinOp, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        BinOp::Lt => ord == Less,
        BinOp::Le => ord != Greater,
        BinOp::Gt => ord == Greater,
        BinOp::Ge => ord != Less,
        BinOp::Eq => ord == Equal,
        BinOp::Ne => ord != Equal,
        _ => unreachable!("not a comparison"),
    }
}

#[derive(Debug)]
pub(crate) enum EvalError {
    Unbound(String),
    Type(String),
    DivisionByZero,
    Overflow,
}

impl EvalError {
    fn at(self, loc: Location) -> ProgramError {
        match self {
            EvalError::Unbound(name) => ProgramError::UnboundName { name, at: loc },
            EvalError::Type(message) => ProgramError::Type { message, at: loc },
            EvalError::DivisionByZero => ProgramError::DivisionByZero { at: loc },
            EvalError::Overflow => ProgramError::Overflow { at: loc },
        }
    }
}

struct Machine<'a, 'r> {
    program: &'a Program,
    oracles: &'a BTreeMap<String, SubroutineDef>,
    state: Option<&'r mut StateVector>,
    rng: Option<&'r mut RandomStream>,
    tapes: Vec<Vec<Op>>,
    controls: Vec<usize>,
    stack: Vec<&'a SubroutineDef>,
    measured: bool,
}

impl<'a> Machine<'a, '_> {
    fn emit_raw(&mut self, op: Op, loc: &Location) -> Result<()> {
        if let Some(tape) = self.tapes.last_mut() {
            tape.push(op);
            return Ok(());
        }
        let state = self.state.as_mut().expect("state present when not recording");
        state.apply_unitary(&op.gate, &op.controls, &op.targets).map_err(|e| sim_err(e, loc))
    }

    fn emit(&mut self, gate: Gate, controls: &[usize], targets: Vec<usize>, loc: &Location) -> Result<()> {
        let mut c = self.controls.clone();
        c.extend_from_slice(controls);
        self.emit_raw(Op::new(gate, c, targets), loc)
    }

    fn resolve(&self, frame: &Frame<'a>, name: &str, loc: &Location) -> Result<Callable<'a>> {
        if let Some(c) = frame.ops.get(name) {
            return Ok(*c);
        }
        if let Some(def) = self.program.subs.get(name) {
            return Ok(Callable { def, adjoint: true, controlled: true });
        }
        if let Some(slot) = self.program.slots.get(name) {
            let def = self
                .oracles
                .get(name)
                .or_else(|| self.program.bound.get(name))
                .ok_or_else(|| ProgramError::UnboundOracle(name.to_string()))?;
            return Ok(Callable { def, adjoint: slot.adjoint, controlled: slot.controlled });
        }
        Err(ProgramError::UnknownCallee { callee: name.to_string(), at: loc.clone() })
    }

    fn refs(&self, frame: &Frame<'a>, refs: &[QubitRef], loc: &Location) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for r in refs {
            out.extend(self.qref(frame, r, loc)?);
        }
        Ok(out)
    }

    fn qref(&self, frame: &Frame<'a>, r: &QubitRef, loc: &Location) -> Result<Vec<usize>> {
        let Some(arr) = frame.arrays.get(&r.array) else {
            return Err(ProgramError::UnboundName { name: r.array.clone(), at: loc.clone() });
        };
        let check = |i: i64| -> Result<usize> {
            if i < 0 || i as usize >= arr.len() {
                Err(ProgramError::IndexOutOfRange { array: r.array.clone(), index: i, len: arr.len(), at: loc.clone() })
            } else {
                Ok(i as usize)
            }
        };
        Ok(match &r.index {
            Index::All => arr.clone(),
            Index::At(e) => vec![arr[check(self.int(frame, e, loc)?)?]],
            Index::Range(lo, hi) => {
                let (lo, hi) = (self.int(frame, lo, loc)?, self.int(frame, hi, loc)?);
                if hi < lo {
                    Vec::new()
                } else {
                    let (a, b) = (check(lo)?, check(hi)?);
                    arr[a..=b].to_vec()
                }
            }
        })
    }

    fn value(&self, frame: &Frame<'a>, e: &Expr, loc: &Location) -> Result<Value> {
        eval(e, &frame.vars, &frame.arrays).map_err(|err| err.at(loc.clone()))
    }

    fn int(&self, frame: &Frame<'a>, e: &Expr, loc: &Location) -> Result<i64> {
        match self.value(frame, e, loc)? {
            Value::Int(v) => Ok(v),
            v => {
                Err(ProgramError::Type { message: format!("expected an int, got {}", v.type_name()), at: loc.clone() })
            }
        }
    }

    fn block(&mut self, frame: &mut Frame<'a>, body: &'a [Stmt]) -> Result<()> {
        for stmt in body {
            self.stmt(frame, stmt)?;
        }
        Ok(())
    }

    fn stmt(&mut self, frame: &mut Frame<'a>, stmt: &'a Stmt) -> Result<()> {
        let loc = frame.loc(stmt.pos);
        match &stmt.kind {
            StmtKind::Gate { name, angle, controls, targets } => {
                let theta = match angle {
                    Some(e) => match self.value(frame, e, &loc)?.as_f64() {
                        Some(v) => Some(v),
                        None => {
                            return Err(ProgramError::Type { message: "gate angle must be numeric".into(), at: loc })
                        }
                    },
                    None => None,
                };
                let gate = Gate::builtin(name, theta).map_err(|e| sim_err(e, &loc))?;
                let c = self.refs(frame, controls, &loc)?;
                let t = self.refs(frame, targets, &loc)?;
                if gate.arity() == 1 {
                    for q in t {
                        self.emit(gate.clone(), &c, vec![q], &loc)?;
                    }
                } else {
                    self.emit(gate, &c, t, &loc)?;
                }
            }
            StmtKind::Call { callee, variant, args, qargs } => self.call(frame, callee, variant, args, qargs, &loc)?,
            StmtKind::For { var, lower, upper, reverse, body } => {
                let lo = self.int(frame, lower, &loc)?;
                let hi = self.int(frame, upper, &loc)?;
                let saved = frame.vars.get(var).copied();
                let run = |i: i64, m: &mut Self, frame: &mut Frame<'a>| -> Result<()> {
                    frame.vars.insert(var.clone(), Value::Int(i));
                    m.block(frame, body)
                };
                if *reverse {
                    for i in (lo..=hi).rev() {
                        run(i, self, frame)?;
                    }
                } else {
                    for i in lo..=hi {
                        run(i, self, frame)?;
                    }
                }
                match saved {
                    Some(v) => frame.vars.insert(var.clone(), v),
                    None => frame.vars.remove(var),
                };
            }
            StmtKind::If { cond, then_body, else_body } => {
                let c = self.value(frame, cond, &loc)?;
                let c = expect_bool(c).map_err(|e| e.at(loc.clone()))?;
                self.block(frame, if c { then_body } else { else_body })?;
            }
            StmtKind::Measure { targets, result } => {
                let qs = self.refs(frame, targets, &loc)?;
                self.require_plain(&loc)?;
                self.measured = true;
                let state = self.state.as_mut().expect("state");
                let rng = self.rng.as_mut().expect("rng");
                let outcome = state.measure(&qs, rng).map_err(|e| sim_err(e, &loc))?;
                frame.vars.insert(result.clone(), Value::Int(outcome.as_integer() as i64));
            }
            StmtKind::Reset { targets } => {
                let qs = self.refs(frame, targets, &loc)?;
                self.require_plain(&loc)?;
                self.measured = true;
                let state = self.state.as_mut().expect("state");
                let rng = self.rng.as_mut().expect("rng");
                state.reset(&qs, rng).map_err(|e| sim_err(e, &loc))?;
            }
            StmtKind::Assign { name, value } => {
                if frame.arrays.contains_key(name) || frame.ops.contains_key(name) {
                    return Err(ProgramError::Type {
                        message: format!("cannot assign to parameter `{name}`"),
                        at: loc,
                    });
                }
                let v = self.value(frame, value, &loc)?;
                if let Value::Real(_) = v {
                    return Err(ProgramError::Type {
                        message: "classical variables hold ints and bools only".into(),
                        at: loc,
                    });
                }
                frame.vars.insert(name.clone(), v);
            }
        }
        Ok(())
    }

    fn require_plain(&self, loc: &Location) -> Result<()> {
        if !self.tapes.is_empty() || !self.controls.is_empty() || self.state.is_none() {
            return Err(ProgramError::NonUnitaryInVariant { at: loc.clone() });
        }
        Ok(())
    }

    fn call(
        &mut self,
        frame: &mut Frame<'a>,
        callee: &str,
        variant: &Variant,
        args: &[Expr],
        qargs: &[QubitRef],
        loc: &Location,
    ) -> Result<()> {
        let target = self.resolve(frame, callee, loc)?;
        let def = target.def;

        let power = match &variant.power {
            Some(e) => self.int(frame, e, loc)?,
            None => 1,
        };
        let adjoint = variant.adjoint ^ (power < 0);
        let reps = power.unsigned_abs();
        let unsupported = |what: &'static str| ProgramError::VariantUnsupported {
            callee: callee.to_string(),
            variant: what,
            at: loc.clone(),
        };
        if adjoint && !(target.adjoint && def.supports_inverse()) {
            return Err(unsupported("adjoint"));
        }
        if variant.controls > 0 && !(target.controlled && def.supports_controlled()) {
            return Err(unsupported("controlled"));
        }
        if reps != 1 && !def.supports_inverse() {
            return Err(unsupported("power"));
        }

        // classical arguments, positionally against the callee's classical params
        let classical: Vec<&Param> = def.classical_params().collect();
        if classical.len() != args.len() {
            return Err(ProgramError::Arity {
                message: format!("`{callee}` takes {} classical arguments, got {}", classical.len(), args.len()),
                at: loc.clone(),
            });
        }
        let mut bound = Vec::with_capacity(args.len());
        for (p, e) in classical.iter().zip(args) {
            bound.push(match p.kind {
                ParamKind::Op { .. } => match e {
                    Expr::Var(name) => Arg::Op(self.resolve(frame, name, loc)?),
                    _ => {
                        return Err(ProgramError::Type {
                            message: format!("parameter `{}` expects a subroutine name", p.name),
                            at: loc.clone(),
                        })
                    }
                },
                _ => Arg::Val(self.value(frame, e, loc)?),
            });
        }

        let nq = def.qubit_params().count();
        if qargs.len() != variant.controls + nq {
            return Err(ProgramError::Arity {
                message: format!("`{callee}` takes {} qubit arguments, got {}", variant.controls + nq, qargs.len()),
                at: loc.clone(),
            });
        }
        let mut lists = Vec::with_capacity(qargs.len());
        for r in qargs {
            lists.push(self.qref(frame, r, loc)?);
        }
        let mut seen: Vec<usize> = lists.iter().flatten().copied().collect();
        seen.extend(&self.controls);
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(ProgramError::AliasedQubits { at: loc.clone() });
        }
        let controls: Vec<usize> = lists[..variant.controls].concat();
        let qubit_lists = lists.split_off(variant.controls);

        let before = self.controls.len();
        self.controls.extend(&controls);
        let out = if !adjoint && reps == 1 {
            self.invoke(def, &bound, qubit_lists)
        } else {
            // record once, replay as often as needed
            self.tapes.push(Vec::new());
            let res = self.invoke(def, &bound, qubit_lists);
            let tape = self.tapes.pop().expect("tape");
            res.and_then(|()| {
                let ops: Vec<Op> = if adjoint { tape.iter().rev().map(Op::adjoint).collect() } else { tape };
                for _ in 0..reps {
                    for op in &ops {
                        self.emit_raw(op.clone(), loc)?;
                    }
                }
                Ok(())
            })
        };
        self.controls.truncate(before);
        out
    }

    fn invoke(&mut self, def: &'a SubroutineDef, args: &[Arg<'a>], qubits: Vec<Vec<usize>>) -> Result<()> {
        if self.stack.iter().any(|d| std::ptr::eq(*d, def)) {
            let mut chain: Vec<String> = self.stack.iter().map(|d| d.name.clone()).collect();
            chain.push(def.name.clone());
            return Err(ProgramError::Recursion { chain });
        }
        let mut frame = Frame { def, vars: HashMap::new(), arrays: HashMap::new(), ops: HashMap::new() };
        let loc = frame.loc(def.pos);
        let mut args = args.iter();
        let mut qubits = qubits.into_iter();
        for p in &def.params {
            match &p.kind {
                ParamKind::Int | ParamKind::Bool => {
                    let Some(Arg::Val(v)) = args.next() else { unreachable!("checked by caller") };
                    let v = coerce(&p.kind, *v).ok_or_else(|| ProgramError::Type {
                        message: format!("parameter `{}` got {}", p.name, v.type_name()),
                        at: loc.clone(),
                    })?;
                    frame.vars.insert(p.name.clone(), v);
                }
                ParamKind::Op { .. } => {
                    let Some(Arg::Op(c)) = args.next() else { unreachable!("checked by caller") };
                    frame.ops.insert(p.name.clone(), *c);
                }
                ParamKind::Qubits(_) => {
                    let qs = qubits.next().expect("checked by caller");
                    frame.arrays.insert(p.name.clone(), qs);
                }
            }
        }
        for p in &def.params {
            if let ParamKind::Qubits(Some(len)) = &p.kind {
                let want = eval(len, &frame.vars, &frame.arrays).map_err(|e| e.at(loc.clone()))?;
                let got = frame.arrays[&p.name].len();
                if want != Value::Int(got as i64) {
                    return Err(ProgramError::LengthMismatch {
                        array: p.name.clone(),
                        expected: want.to_string(),
                        actual: got,
                        at: loc,
                    });
                }
            }
        }
        self.stack.push(def);
        let res = self.block(&mut frame, &def.body);
        self.stack.pop();
        res
    }
}

fn coerce(kind: &ParamKind, v: Value) -> Option<Value> {
    match (kind, v) {
        (ParamKind::Int, Value::Int(_)) | (ParamKind::Bool, Value::Bool(_)) => Some(v),
        (ParamKind::Bool, Value::Int(i)) if i == 0 || i == 1 => Some(Value::Bool(i == 1)),
        _ => None,
    }
}

fn sim_err(source: SimError, loc: &Location) -> ProgramError {
    ProgramError::Sim { source, at: Some(loc.clone()) }
}

fn value_to_i64(v: Value) -> Option<i64> {
    match v {
        Value::Int(i) => Some(i),
        Value::Bool(b) => Some(i64::from(b)),
        Value::Real(_) => None,
    }
}

impl Program {
    fn entry_def(&self, inv: &Invocation) -> Result<&SubroutineDef> {
        self.subs.get(&inv.sub).ok_or_else(|| ProgramError::UnknownSubroutine(inv.sub.clone()))
    }

    fn entry_frame<'a>(
        &'a self,
        def: &'a SubroutineDef,
        inv: &'a Invocation,
        bind_ops: bool,
    ) -> Result<(Frame<'a>, Layout)> {
        let mut frame = Frame { def, vars: HashMap::new(), arrays: HashMap::new(), ops: HashMap::new() };
        for p in &def.params {
            match &p.kind {
                ParamKind::Int | ParamKind::Bool => {
                    let v = *inv.args.get(&p.name).ok_or_else(|| ProgramError::MissingArgument(p.name.clone()))?;
                    let v = coerce(&p.kind, Value::Int(v)).ok_or_else(|| ProgramError::Type {
                        message: format!("parameter `{}` got {v}", p.name),
                        at: frame.loc(def.pos),
                    })?;
                    frame.vars.insert(p.name.clone(), v);
                }
                ParamKind::Op { adjoint, controlled } => {
                    // array sizes never depend on oracles
                    if !bind_ops && !inv.oracles.contains_key(&p.name) {
                        continue;
                    }
                    let od = inv.oracles.get(&p.name).ok_or_else(|| ProgramError::UnboundOracle(p.name.clone()))?;
                    frame.ops.insert(p.name.clone(), Callable { def: od, adjoint: *adjoint, controlled: *controlled });
                }
                ParamKind::Qubits(_) => {}
            }
        }
        let mut arrays = Vec::new();
        let mut next = 0;
        for p in &def.params {
            let ParamKind::Qubits(len) = &p.kind else {
                continue;
            };
            let size = match (inv.sizes.get(&p.name), len) {
                (Some(s), _) => *s,
                (None, Some(e)) => match eval(e, &frame.vars, &frame.arrays) {
                    Ok(Value::Int(v)) if v >= 0 => v as usize,
                    Ok(v) => return Err(ProgramError::Layout(format!("length of `{}` evaluates to {v}", p.name))),
                    Err(e) => return Err(e.at(frame.loc(def.pos))),
                },
                (None, None) => {
                    return Err(ProgramError::Layout(format!("no size given for `{}`", p.name)));
                }
            };
            let qs: Vec<usize> = (next..next + size).collect();
            frame.arrays.insert(p.name.clone(), qs);
            arrays.push((p.name.clone(), next..next + size));
            next += size;
        }
        Ok((frame, Layout { arrays }))
    }

    /// Register placement of the entry point's qubit arrays.
    pub fn qubit_layout(&self, inv: &Invocation) -> Result<Layout> {
        let def = self.entry_def(inv)?;
        self.entry_frame(def, inv, false).map(|(_, l)| l)
    }

    /// Executes `inv` on `initial`, which must span exactly the layout width.
    pub fn run(&self, inv: &Invocation, initial: StateVector, rng: &mut RandomStream) -> Result<RunOutput> {
        let def = self.entry_def(inv)?;
        let (mut frame, layout) = self.entry_frame(def, inv, true)?;
        if initial.num_qubits() != layout.width() {
            return Err(ProgramError::Layout(format!(
                "initial state has {} qubits, layout needs {}",
                initial.num_qubits(),
                layout.width()
            )));
        }
        let mut state = initial;
        let mut m = Machine {
            program: self,
            oracles: &inv.oracles,
            state: Some(&mut state),
            rng: Some(rng),
            tapes: Vec::new(),
            controls: Vec::new(),
            stack: vec![def],
            measured: false,
        };
        m.block(&mut frame, &def.body)?;
        let measured = m.measured;
        let results = frame.vars.iter().filter_map(|(k, v)| value_to_i64(*v).map(|i| (k.clone(), i))).collect();
        Ok(RunOutput { state, results, measured })
    }

    /// Runs on the all-zero register.
    pub fn run_from_zero(&self, inv: &Invocation, rng: &mut RandomStream) -> Result<RunOutput> {
        let width = self.qubit_layout(inv)?.width();
        let init = StateVector::zero(width).map_err(|source| ProgramError::Sim { source, at: None })?;
        self.run(inv, init, rng)
    }

    /// The gate sequence `inv` performs, for measurement-free executions.
    pub fn trace_circuit(&self, inv: &Invocation) -> Result<Circuit> {
        let def = self.entry_def(inv)?;
        let (mut frame, layout) = self.entry_frame(def, inv, true)?;
        let mut m = Machine {
            program: self,
            oracles: &inv.oracles,
            state: None,
            rng: None,
            tapes: vec![Vec::new()],
            controls: Vec::new(),
            stack: vec![def],
            measured: false,
        };
        m.block(&mut frame, &def.body)?;
        let mut c = Circuit::new(layout.width());
        for op in m.tapes.pop().expect("tape") {
            c.push(op);
        }
        Ok(c)
    }
}
