//! Candidate edits of one subroutine body, grouped by mutation type.

use super::MutationType;
use crate::program::{
    reads, BinOp, Expr, Index, ParamKind, Pos, Program, QubitRef, Stmt, StmtKind, StmtPath, SubroutineDef,
};

/// One single-site edit, already applied.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub mtype: MutationType,
    pub operation: &'static str,
    pub path: StmtPath,
    pub detail: String,
    pub sub: SubroutineDef,
    /// Faulty callee copy introduced by a rebinding edit.
    pub extra: Option<SubroutineDef>,
}

const PLAIN_1Q: &[&str] = &["X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg"];
const ANGLE_1Q: &[&str] = &["R1", "Ry"];
const PLAIN_2Q: &[&str] = &["CNOT", "CZ", "SWAP"];

fn one_line(stmt: &Stmt) -> String {
    stmt.to_string().lines().next().unwrap_or_default().trim().to_string()
}

/// A statement site with the loop variables in scope.
struct Site {
    path: Vec<usize>,
    loop_vars: Vec<String>,
}

fn collect_sites(block: &[Stmt], prefix: &mut Vec<usize>, scope: &mut Vec<String>, out: &mut Vec<Site>) {
    for (i, stmt) in block.iter().enumerate() {
        prefix.push(i);
        out.push(Site { path: prefix.clone(), loop_vars: scope.clone() });
        let pushed = if let StmtKind::For { var, .. } = &stmt.kind {
            scope.push(var.clone());
            true
        } else {
            false
        };
        for (b, child) in stmt.blocks().into_iter().enumerate() {
            prefix.push(b);
            collect_sites(child, prefix, scope, out);
            prefix.pop();
        }
        if pushed {
            scope.pop();
        }
        prefix.pop();
    }
}

fn stmt_at<'a>(sub: &'a SubroutineDef, path: &[usize]) -> &'a Stmt {
    sub.stmt_at(&StmtPath(path.to_vec())).expect("site from walk")
}

fn with_block(base: &SubroutineDef, path: &[usize], edit: impl FnOnce(&mut Vec<Stmt>, usize)) -> SubroutineDef {
    let mut sub = base.clone();
    let (block, i) = sub.block_mut(&StmtPath(path.to_vec())).expect("site from walk");
    edit(block, i);
    sub
}

fn replace_kind(base: &SubroutineDef, path: &[usize], kind: StmtKind) -> SubroutineDef {
    with_block(base, path, |b, i| b[i].kind = kind)
}

/// Every copy of `e` with exactly one node rewritten by `f`.
fn expr_variants(e: &Expr, f: &dyn Fn(&Expr) -> Vec<Expr>) -> Vec<Expr> {
    let mut out = f(e);
    match e {
        Expr::Neg(inner) => out.extend(expr_variants(inner, f).into_iter().map(|v| Expr::Neg(Box::new(v)))),
        Expr::Not(inner) => out.extend(expr_variants(inner, f).into_iter().map(|v| Expr::Not(Box::new(v)))),
        Expr::Bin(op, a, b) => {
            out.extend(expr_variants(a, f).into_iter().map(|v| Expr::Bin(*op, Box::new(v), b.clone())));
            out.extend(expr_variants(b, f).into_iter().map(|v| Expr::Bin(*op, a.clone(), Box::new(v))));
        }
        _ => {}
    }
    out
}

fn flip_comparison(e: &Expr) -> Vec<Expr> {
    let Expr::Bin(op, a, b) = e else { return Vec::new() };
    let flipped = match op {
        BinOp::Lt => BinOp::Le,
        BinOp::Le => BinOp::Lt,
        BinOp::Gt => BinOp::Ge,
        BinOp::Ge => BinOp::Gt,
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        _ => return Vec::new(),
    };
    vec![Expr::Bin(flipped, a.clone(), b.clone())]
}

fn shift_vars(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Var(_) => vec![e.clone().add_int(1), e.clone().add_int(-1)],
        _ => Vec::new(),
    }
}

fn plus_minus(e: &Expr) -> [Expr; 2] {
    [e.clone().add_int(1), e.clone().add_int(-1)]
}

/// Each copy of `refs` with one index bound moved by ±1.
fn ref_variants(refs: &[QubitRef]) -> Vec<Vec<QubitRef>> {
    let mut out = Vec::new();
    for (k, r) in refs.iter().enumerate() {
        let moved: Vec<Index> = match &r.index {
            Index::All => Vec::new(),
            Index::At(e) => plus_minus(e).into_iter().map(Index::At).collect(),
            Index::Range(a, b) => plus_minus(a)
                .into_iter()
                .map(|x| Index::Range(x, b.clone()))
                .chain(plus_minus(b).into_iter().map(|y| Index::Range(a.clone(), y)))
                .collect(),
        };
        for index in moved {
            let mut v = refs.to_vec();
            v[k] = QubitRef { array: r.array.clone(), index };
            out.push(v);
        }
    }
    out
}

/// Qubit references a new statement at a site may use.
fn qubit_choices(sub: &SubroutineDef, loop_vars: &[String]) -> Vec<QubitRef> {
    let mut out = Vec::new();
    for p in &sub.params {
        let ParamKind::Qubits(len) = &p.kind else { continue };
        out.push(QubitRef::at(&p.name, Expr::Int(0)));
        if let Some(len) = len {
            if *len != Expr::Int(1) {
                out.push(QubitRef::at(&p.name, len.clone().add_int(-1)));
            }
        }
        for v in loop_vars {
            out.push(QubitRef::at(&p.name, Expr::var(v)));
        }
    }
    out
}

fn gate(name: &str, angle: Option<Expr>, targets: Vec<QubitRef>) -> StmtKind {
    StmtKind::Gate { name: name.to_string(), angle, controls: Vec::new(), targets }
}

/// Insertion points: before each statement, plus the end of the body.
fn insertion_points(sub: &SubroutineDef, sites: &[Site], with_end: bool) -> Vec<(Vec<usize>, Vec<String>)> {
    let mut out: Vec<(Vec<usize>, Vec<String>)> = sites.iter().map(|s| (s.path.clone(), s.loop_vars.clone())).collect();
    if with_end {
        out.push((vec![sub.body.len()], Vec::new()));
    }
    out
}

fn insert_at(base: &SubroutineDef, path: &[usize], stmt: Stmt) -> SubroutineDef {
    let mut sub = base.clone();
    if path.len() == 1 {
        sub.body.insert(path[0], stmt);
    } else {
        let (block, i) = sub.block_mut(&StmtPath(path.to_vec())).expect("site from walk");
        block.insert(i, stmt);
    }
    sub
}

fn describe_site(path: &[usize]) -> String {
    StmtPath(path.to_vec()).to_string()
}

pub(crate) struct Generator<'a> {
    program: &'a Program,
    base: &'a SubroutineDef,
    sites: Vec<Site>,
    out: Vec<Candidate>,
}

impl<'a> Generator<'a> {
    pub fn new(program: &'a Program, base: &'a SubroutineDef) -> Self {
        let mut sites = Vec::new();
        collect_sites(&base.body, &mut Vec::new(), &mut Vec::new(), &mut sites);
        Generator { program, base, sites, out: Vec::new() }
    }

    fn push(
        &mut self,
        mtype: MutationType,
        operation: &'static str,
        path: &[usize],
        detail: String,
        sub: SubroutineDef,
    ) {
        self.out.push(Candidate { mtype, operation, path: StmtPath(path.to_vec()), detail, sub, extra: None });
    }

    pub fn run(mut self, types: &[MutationType]) -> Vec<Candidate> {
        for t in types {
            match t {
                MutationType::Gm => self.gate_mutations(),
                MutationType::Sm => self.subroutine_mutations(),
                MutationType::Cm => self.classical_mutations(),
                MutationType::Mm => self.measurement_mutations(),
            }
        }
        self.out
    }

    fn gate_mutations(&mut self) {
        use MutationType::Gm;
        for (path, vars) in insertion_points(self.base, &self.sites, true) {
            let qs = qubit_choices(self.base, &vars);
            let mut stmts = Vec::new();
            for q in &qs {
                for g in PLAIN_1Q {
                    stmts.push(gate(g, None, vec![q.clone()]));
                }
                for g in ANGLE_1Q {
                    stmts.push(gate(g, Some(Expr::bin(BinOp::Div, Expr::Pi, Expr::Int(4))), vec![q.clone()]));
                }
            }
            for (i, a) in qs.iter().enumerate() {
                for b in &qs[i + 1..] {
                    for g in PLAIN_2Q {
                        stmts.push(gate(g, None, vec![a.clone(), b.clone()]));
                    }
                }
            }
            for kind in stmts {
                let stmt = Stmt::new(kind, Pos::default());
                let detail = format!("insert `{}` at {}", one_line(&stmt), describe_site(&path));
                let sub = insert_at(self.base, &path, stmt);
                self.push(Gm, "insert-gate", &path, detail, sub);
            }
        }

        let sites: Vec<Vec<usize>> = self.sites.iter().map(|s| s.path.clone()).collect();
        for path in &sites {
            let stmt = stmt_at(self.base, path).clone();
            let StmtKind::Gate { name, angle, controls, targets } = &stmt.kind else { continue };
            let line = one_line(&stmt);

            let sub = with_block(self.base, path, |b, i| {
                b.remove(i);
            });
            self.push(Gm, "delete-gate", path, format!("delete `{line}`"), sub);

            let pool: &[&str] = match (angle.is_some(), targets.len()) {
                (true, _) => ANGLE_1Q,
                (false, 1) => PLAIN_1Q,
                _ => PLAIN_2Q,
            };
            for g in pool.iter().filter(|g| **g != name) {
                let kind = StmtKind::Gate {
                    name: g.to_string(),
                    angle: angle.clone(),
                    controls: controls.clone(),
                    targets: targets.clone(),
                };
                let sub = replace_kind(self.base, path, kind);
                self.push(Gm, "replace-gate", path, format!("`{line}` gate -> {g}"), sub);
            }

            if let Some(a) = angle {
                let half_pi = Expr::bin(BinOp::Div, Expr::Pi, Expr::Int(2));
                let perturbed = [
                    ("+pi/2", Expr::bin(BinOp::Add, a.clone(), half_pi.clone())),
                    ("-pi/2", Expr::bin(BinOp::Sub, a.clone(), half_pi)),
                    ("/2", Expr::bin(BinOp::Div, a.clone(), Expr::Int(2))),
                    ("*2", Expr::bin(BinOp::Mul, a.clone(), Expr::Int(2))),
                ];
                for (label, e) in perturbed {
                    let kind = StmtKind::Gate {
                        name: name.clone(),
                        angle: Some(e),
                        controls: controls.clone(),
                        targets: targets.clone(),
                    };
                    let sub = replace_kind(self.base, path, kind);
                    self.push(Gm, "perturb-angle", path, format!("`{line}` angle {label}"), sub);
                }
            }

            // control/target exchange, including rotating a control range
            let exchanged = match (controls.as_slice(), targets.as_slice()) {
                ([c], [t]) if matches!(c.index, Index::At(_) | Index::All) => Some((vec![t.clone()], vec![c.clone()])),
                ([c], [t]) => match (&c.index, &t.index) {
                    (Index::Range(lo, _), Index::At(ti)) if c.array == t.array => Some((
                        vec![QubitRef {
                            array: c.array.clone(),
                            index: Index::Range(lo.clone().add_int(1), ti.clone()),
                        }],
                        vec![QubitRef::at(&c.array, lo.clone())],
                    )),
                    _ => None,
                },
                ([], [a, b]) if name != "SWAP" => Some((Vec::new(), vec![b.clone(), a.clone()])),
                _ => None,
            };
            if let Some((c, t)) = exchanged {
                let kind = StmtKind::Gate { name: name.clone(), angle: angle.clone(), controls: c, targets: t };
                let sub = replace_kind(self.base, path, kind);
                self.push(Gm, "exchange-control-target", path, format!("exchange qubits of `{line}`"), sub);
            }
        }

        // adjacent gate swaps within a block
        for path in &sites {
            let stmt = stmt_at(self.base, path);
            let mut next = path.clone();
            *next.last_mut().expect("nonempty") += 1;
            let Some(other) = self.base.stmt_at(&StmtPath(next.clone())) else { continue };
            if matches!(stmt.kind, StmtKind::Gate { .. })
                && matches!(other.kind, StmtKind::Gate { .. })
                && stmt.kind != other.kind
            {
                let detail = format!("swap `{}` with `{}`", one_line(stmt), one_line(other));
                let sub = with_block(self.base, path, |b, i| b.swap(i, i + 1));
                self.push(Gm, "swap-adjacent", path, detail, sub);
            }
        }
    }

    fn subroutine_mutations(&mut self) {
        use MutationType::Sm;
        let sites: Vec<Vec<usize>> = self.sites.iter().map(|s| s.path.clone()).collect();
        for path in &sites {
            let stmt = stmt_at(self.base, path).clone();
            let StmtKind::Call { callee, variant, args, qargs } = &stmt.kind else { continue };
            let line = one_line(&stmt);

            let sub = with_block(self.base, path, |b, i| {
                b.remove(i);
            });
            self.push(Sm, "delete-call", path, format!("delete `{line}`"), sub);

            let sub = with_block(self.base, path, |b, i| b.insert(i, stmt.clone()));
            self.push(Sm, "duplicate-call", path, format!("duplicate `{line}`"), sub);

            for i in 0..qargs.len() {
                for j in i + 1..qargs.len() {
                    let mut q = qargs.clone();
                    q.swap(i, j);
                    let kind = StmtKind::Call {
                        callee: callee.clone(),
                        variant: variant.clone(),
                        args: args.clone(),
                        qargs: q,
                    };
                    let sub = replace_kind(self.base, path, kind);
                    self.push(Sm, "swap-call-args", path, format!("swap qubit args {i},{j} of `{line}`"), sub);
                }
            }

            let mut v = variant.clone();
            v.adjoint = !v.adjoint;
            let kind = StmtKind::Call { callee: callee.clone(), variant: v, args: args.clone(), qargs: qargs.clone() };
            let sub = replace_kind(self.base, path, kind);
            self.push(Sm, "toggle-adjoint", path, format!("toggle adj on `{line}`"), sub);

            // rebind to a faulty copy of the callee
            if self.base.param(callee).is_some() {
                continue;
            }
            let Ok(def) = self.program.subroutine(callee) else { continue };
            let faults = Generator::new(self.program, def).run(&[MutationType::Gm]);
            let faults: Vec<&Candidate> = faults.iter().filter(|c| c.operation != "insert-gate").collect();
            for (k, fault) in faults.iter().take(2).enumerate() {
                let name = format!("{callee}__err{k}");
                if self.program.has_subroutine(&name) {
                    continue;
                }
                let mut wrong = fault.sub.clone();
                wrong.name = name.clone();
                let kind = StmtKind::Call {
                    callee: name.clone(),
                    variant: variant.clone(),
                    args: args.clone(),
                    qargs: qargs.clone(),
                };
                let sub = replace_kind(self.base, path, kind);
                self.out.push(Candidate {
                    mtype: Sm,
                    operation: "rebind-call",
                    path: StmtPath(path.clone()),
                    detail: format!("`{line}` -> {name} ({})", fault.detail),
                    sub,
                    extra: Some(wrong),
                });
            }
        }
    }

    fn classical_mutations(&mut self) {
        use MutationType::Cm;
        let sites: Vec<Vec<usize>> = self.sites.iter().map(|s| s.path.clone()).collect();
        for path in &sites {
            let stmt = stmt_at(self.base, path).clone();
            let line = one_line(&stmt);
            let mut kinds: Vec<(&'static str, String, StmtKind)> = Vec::new();
            match &stmt.kind {
                StmtKind::For { var, lower, upper, reverse, body } => {
                    for (label, l, u) in [
                        ("lower+1", lower.clone().add_int(1), upper.clone()),
                        ("lower-1", lower.clone().add_int(-1), upper.clone()),
                        ("upper+1", lower.clone(), upper.clone().add_int(1)),
                        ("upper-1", lower.clone(), upper.clone().add_int(-1)),
                    ] {
                        let kind = StmtKind::For {
                            var: var.clone(),
                            lower: l,
                            upper: u,
                            reverse: *reverse,
                            body: body.clone(),
                        };
                        kinds.push(("loop-bound", format!("`{line}` {label}"), kind));
                    }
                }
                StmtKind::If { cond, then_body, else_body } => {
                    for c in expr_variants(cond, &flip_comparison) {
                        let detail = format!("condition `{cond}` -> `{c}`");
                        let kind = StmtKind::If { cond: c, then_body: then_body.clone(), else_body: else_body.clone() };
                        kinds.push(("flip-comparison", detail, kind));
                    }
                }
                StmtKind::Assign { name, value } => {
                    for (label, v) in [("+1", value.clone().add_int(1)), ("-1", value.clone().add_int(-1))] {
                        kinds.push((
                            "perturb-assignment",
                            format!("`{line}` {label}"),
                            StmtKind::Assign { name: name.clone(), value: v },
                        ));
                    }
                }
                StmtKind::Gate { name, angle, controls, targets } => {
                    let n = controls.len();
                    let all: Vec<QubitRef> = controls.iter().chain(targets).cloned().collect();
                    for refs in ref_variants(&all) {
                        let (c, t) = refs.split_at(n);
                        let kind = StmtKind::Gate {
                            name: name.clone(),
                            angle: angle.clone(),
                            controls: c.to_vec(),
                            targets: t.to_vec(),
                        };
                        kinds.push(("perturb-index", format!("index ±1 in `{line}`"), kind));
                    }
                    if let Some(a) = angle {
                        for e in expr_variants(a, &shift_vars) {
                            let detail = format!("angle `{a}` -> `{e}`");
                            let kind = StmtKind::Gate {
                                name: name.clone(),
                                angle: Some(e),
                                controls: controls.clone(),
                                targets: targets.clone(),
                            };
                            kinds.push(("perturb-angle-variable", detail, kind));
                        }
                    }
                }
                StmtKind::Call { callee, variant, args, qargs } => {
                    for q in ref_variants(qargs) {
                        let kind = StmtKind::Call {
                            callee: callee.clone(),
                            variant: variant.clone(),
                            args: args.clone(),
                            qargs: q,
                        };
                        kinds.push(("perturb-index", format!("index ±1 in `{line}`"), kind));
                    }
                    let op_params = self.op_arg_positions(callee);
                    for (k, a) in args.iter().enumerate() {
                        if op_params.contains(&k) {
                            continue;
                        }
                        for (label, v) in [("+1", a.clone().add_int(1)), ("-1", a.clone().add_int(-1))] {
                            let mut new_args = args.clone();
                            new_args[k] = v;
                            let kind = StmtKind::Call {
                                callee: callee.clone(),
                                variant: variant.clone(),
                                args: new_args,
                                qargs: qargs.clone(),
                            };
                            kinds.push(("perturb-call-arg", format!("arg {k} of `{line}` {label}"), kind));
                        }
                    }
                }
                StmtKind::Measure { .. } | StmtKind::Reset { .. } => {}
            }
            for (op, detail, kind) in kinds {
                let sub = replace_kind(self.base, path, kind);
                self.push(Cm, op, path, detail, sub);
            }
        }
    }

    /// Positions, among `callee`'s classical arguments, of `op` parameters.
    fn op_arg_positions(&self, callee: &str) -> Vec<usize> {
        let params = if let Ok(def) = self.program.subroutine(callee) {
            def.params.clone()
        } else if let Some(slot) = self.program.slot(callee) {
            slot.params.clone()
        } else {
            return Vec::new();
        };
        params
            .iter()
            .filter(|p| p.kind.is_classical())
            .enumerate()
            .filter(|(_, p)| matches!(p.kind, ParamKind::Op { .. }))
            .map(|(k, _)| k)
            .collect()
    }

    fn measurement_mutations(&mut self) {
        use MutationType::Mm;
        let mut used = Vec::new();
        for s in &self.base.body {
            reads(s, &mut used);
            crate::program::writes(s, &mut used);
        }
        let fresh = (0..).map(|k| format!("mm{k}")).find(|v| !used.contains(v)).expect("unbounded");
        for (path, vars) in insertion_points(self.base, &self.sites, false) {
            for q in qubit_choices(self.base, &vars) {
                let stmt = Stmt::new(StmtKind::Measure { targets: vec![q], result: fresh.clone() }, Pos::default());
                let detail = format!("insert `{}` at {}", one_line(&stmt), describe_site(&path));
                let sub = insert_at(self.base, &path, stmt);
                self.push(Mm, "insert-measure", &path, detail, sub);
            }
        }

        let mut read = Vec::new();
        for s in &self.base.body {
            reads(s, &mut read);
        }
        let sites: Vec<Vec<usize>> = self.sites.iter().map(|s| s.path.clone()).collect();
        for path in &sites {
            let stmt = stmt_at(self.base, path).clone();
            let line = one_line(&stmt);
            match &stmt.kind {
                StmtKind::Measure { targets, result } => {
                    let sub = if read.contains(result) {
                        replace_kind(self.base, path, StmtKind::Assign { name: result.clone(), value: Expr::Int(0) })
                    } else {
                        with_block(self.base, path, |b, i| {
                            b.remove(i);
                        })
                    };
                    self.push(Mm, "delete-measure", path, format!("delete `{line}`"), sub);
                    for refs in ref_variants(targets) {
                        let kind = StmtKind::Measure { targets: refs, result: result.clone() };
                        let sub = replace_kind(self.base, path, kind);
                        self.push(Mm, "change-measured", path, format!("move `{line}` by ±1"), sub);
                    }
                }
                StmtKind::Reset { .. } => {
                    let sub = with_block(self.base, path, |b, i| {
                        b.remove(i);
                    });
                    self.push(Mm, "delete-reset", path, format!("delete `{line}`"), sub);
                }
                _ => {}
            }
        }
    }
}
