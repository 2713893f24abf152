use std::collections::BTreeMap;
use std::fmt;

/// Source position (1-based).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
            BinOp::Pow => 7,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne)
    }
}

/// Classical expression. Integer and boolean valued in general; angle
/// positions additionally accept `pi` and decimal literals.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Real(f64),
    Bool(bool),
    Pi,
    Var(String),
    /// `len(array)`
    Len(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn add_int(self, delta: i64) -> Expr {
        match (self, delta) {
            (e, 0) => e,
            (Expr::Int(v), d) => Expr::Int(v + d),
            (e, d) if d > 0 => Expr::bin(BinOp::Add, e, Expr::Int(d)),
            (e, d) => Expr::bin(BinOp::Sub, e, Expr::Int(-d)),
        }
    }

    /// Names of variables read by this expression.
    pub fn free_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => out.push(v.clone()),
            Expr::Neg(e) | Expr::Not(e) => e.free_vars(out),
            Expr::Bin(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            _ => {}
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, outer: u8) -> fmt::Result {
        match self {
            Expr::Int(v) if *v < 0 => write!(f, "({v})"),
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Real(v) => {
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    write!(f, "{v:.1}")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Len(a) => write!(f, "len({a})"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 8)
            }
            Expr::Not(e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 8)
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                let paren = p < outer;
                if paren {
                    write!(f, "(")?;
                }
                // `**` is right associative, everything else left
                let (lp, rp) = if *op == BinOp::Pow { (p + 1, p) } else { (p, p + 1) };
                a.fmt_prec(f, lp)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, rp)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Which qubits of an array a reference selects.
#[derive(Debug, Clone, PartialEq)]
pub enum Index {
    /// The whole array.
    All,
    At(Expr),
    /// Inclusive range; empty when `hi < lo`.
    Range(Expr, Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitRef {
    pub array: String,
    pub index: Index,
}

impl QubitRef {
    pub fn at(array: &str, index: Expr) -> Self {
        QubitRef { array: array.to_string(), index: Index::At(index) }
    }

    pub fn all(array: &str) -> Self {
        QubitRef { array: array.to_string(), index: Index::All }
    }
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.index {
            Index::All => write!(f, "{}", self.array),
            Index::At(e) => write!(f, "{}[{}]", self.array, e),
            Index::Range(a, b) => write!(f, "{}[{}..{}]", self.array, a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    Int,
    Bool,
    /// Qubit array with an optional declared length.
    Qubits(Option<Expr>),
    /// Subroutine-typed parameter with its declared variant support.
    Op {
        adjoint: bool,
        controlled: bool,
    },
}

impl ParamKind {
    /// Kind equality ignoring declared lengths and variant flags.
    pub fn same_shape(&self, other: &ParamKind) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, ParamKind::Int | ParamKind::Bool | ParamKind::Op { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParamKind::Int => write!(f, "int {}", self.name),
            ParamKind::Bool => write!(f, "bool {}", self.name),
            ParamKind::Qubits(None) => write!(f, "qubits {}", self.name),
            ParamKind::Qubits(Some(len)) => write!(f, "qubits {}[{}]", self.name, len),
            ParamKind::Op { adjoint, controlled } => {
                write!(f, "op {}", self.name)?;
                write_support(f, *adjoint, *controlled)
            }
        }
    }
}

fn write_support(f: &mut fmt::Formatter<'_>, adjoint: bool, controlled: bool) -> fmt::Result {
    match (adjoint, controlled) {
        (true, true) => write!(f, " is adj+ctl"),
        (true, false) => write!(f, " is adj"),
        (false, true) => write!(f, " is ctl"),
        (false, false) => Ok(()),
    }
}

/// Call-site functor: `[adj, ctl, pow(k)]`. Controlled calls take one
/// leading control array per `ctl`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Variant {
    pub adjoint: bool,
    pub controls: usize,
    pub power: Option<Expr>,
}

impl Variant {
    pub fn is_base(&self) -> bool {
        !self.adjoint && self.controls == 0 && self.power.is_none()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_base() {
            return Ok(());
        }
        let mut parts = Vec::new();
        if self.adjoint {
            parts.push("adj".to_string());
        }
        for _ in 0..self.controls {
            parts.push("ctl".to_string());
        }
        if let Some(p) = &self.power {
            parts.push(format!("pow({p})"));
        }
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Gate { name: String, angle: Option<Expr>, controls: Vec<QubitRef>, targets: Vec<QubitRef> },
    Call { callee: String, variant: Variant, args: Vec<Expr>, qargs: Vec<QubitRef> },
    For { var: String, lower: Expr, upper: Expr, reverse: bool, body: Vec<Stmt> },
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    Measure { targets: Vec<QubitRef>, result: String },
    Reset { targets: Vec<QubitRef> },
    Assign { name: String, value: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

impl Stmt {
    pub fn new(kind: StmtKind, pos: Pos) -> Self {
        Stmt { kind, pos }
    }

    /// Child blocks: a loop body, or the two branches of an `if`.
    pub fn blocks(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::For { body, .. } => vec![body],
            StmtKind::If { then_body, else_body, .. } => vec![then_body, else_body],
            _ => Vec::new(),
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Vec<Stmt>> {
        match &mut self.kind {
            StmtKind::For { body, .. } => vec![body],
            StmtKind::If { then_body, else_body, .. } => vec![then_body, else_body],
            _ => Vec::new(),
        }
    }

    pub fn is_measurement_free(&self) -> bool {
        match &self.kind {
            StmtKind::Measure { .. } | StmtKind::Reset { .. } => false,
            _ => self.blocks().iter().all(|b| b.iter().all(Stmt::is_measurement_free)),
        }
    }

    fn fmt_indent(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "    ".repeat(depth);
        match &self.kind {
            StmtKind::Gate { name, angle, controls, targets } => {
                write!(f, "{pad}")?;
                if !controls.is_empty() {
                    write!(f, "ctrl({}) ", join(controls))?;
                }
                write!(f, "{name}")?;
                if let Some(a) = angle {
                    write!(f, "({a})")?;
                }
                writeln!(f, " {};", join(targets))
            }
            StmtKind::Call { callee, variant, args, qargs } => {
                writeln!(f, "{pad}call {callee}{variant}({})({});", join(args), join(qargs))
            }
            StmtKind::For { var, lower, upper, reverse, body } => {
                let rev = if *reverse { "rev " } else { "" };
                writeln!(f, "{pad}for {var} in {rev}{lower}..{upper} {{")?;
                fmt_block(f, body, depth + 1)?;
                writeln!(f, "{pad}}}")
            }
            StmtKind::If { cond, then_body, else_body } => {
                writeln!(f, "{pad}if ({cond}) {{")?;
                fmt_block(f, then_body, depth + 1)?;
                if else_body.is_empty() {
                    writeln!(f, "{pad}}}")
                } else {
                    writeln!(f, "{pad}}} else {{")?;
                    fmt_block(f, else_body, depth + 1)?;
                    writeln!(f, "{pad}}}")
                }
            }
            StmtKind::Measure { targets, result } => {
                writeln!(f, "{pad}{result} = measure {};", join(targets))
            }
            StmtKind::Reset { targets } => writeln!(f, "{pad}reset {};", join(targets)),
            StmtKind::Assign { name, value } => writeln!(f, "{pad}{name} = {value};"),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn fmt_block(f: &mut fmt::Formatter<'_>, body: &[Stmt], depth: usize) -> fmt::Result {
    body.iter().try_for_each(|s| s.fmt_indent(f, depth))
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indent(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubroutineDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

impl SubroutineDef {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn qubit_params(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| matches!(p.kind, ParamKind::Qubits(_)))
    }

    pub fn classical_params(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| p.kind.is_classical())
    }

    /// Measurement- and reset-free bodies can be inverted.
    pub fn supports_inverse(&self) -> bool {
        self.body.iter().all(Stmt::is_measurement_free)
    }

    pub fn supports_controlled(&self) -> bool {
        self.supports_inverse()
    }

    /// Parameter kinds line up positionally.
    pub fn same_signature(&self, other: &SubroutineDef) -> bool {
        self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|(a, b)| a.kind.same_shape(&b.kind))
    }

    /// Every statement, depth first, with its path (see [`StmtPath`]).
    pub fn walk(&self) -> Vec<(StmtPath, &Stmt)> {
        let mut out = Vec::new();
        walk_block(&self.body, &mut Vec::new(), &mut out);
        out
    }

    pub fn stmt_at(&self, path: &StmtPath) -> Option<&Stmt> {
        let mut block = &self.body;
        let steps = &path.0;
        let mut i = 0;
        loop {
            let stmt = block.get(steps[i])?;
            if i + 1 == steps.len() {
                return Some(stmt);
            }
            block = stmt.blocks().into_iter().nth(steps[i + 1])?;
            i += 2;
        }
    }

    /// The block holding `path`'s statement, plus its index there.
    pub fn block_mut(&mut self, path: &StmtPath) -> Option<(&mut Vec<Stmt>, usize)> {
        let steps = &path.0;
        let mut block = &mut self.body;
        let mut i = 0;
        while i + 1 < steps.len() {
            let stmt = block.get_mut(steps[i])?;
            block = stmt.blocks_mut().into_iter().nth(steps[i + 1])?;
            i += 2;
        }
        Some((block, *steps.last()?))
    }
}

fn walk_block<'a>(block: &'a [Stmt], prefix: &mut Vec<usize>, out: &mut Vec<(StmtPath, &'a Stmt)>) {
    for (i, stmt) in block.iter().enumerate() {
        prefix.push(i);
        out.push((StmtPath(prefix.clone()), stmt));
        for (b, child) in stmt.blocks().into_iter().enumerate() {
            prefix.push(b);
            walk_block(child, prefix, out);
            prefix.pop();
        }
        prefix.pop();
    }
}

impl fmt::Display for SubroutineDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sub {}({}) {{", self.name, join(&self.params))?;
        fmt_block(f, &self.body, 1)?;
        writeln!(f, "}}")
    }
}

/// Location of a statement inside a subroutine body: alternating
/// statement index and child-block index (`0` = loop body or then-branch,
/// `1` = else-branch). `[2, 0, 1]` is the second statement of the first
/// block of top-level statement 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StmtPath(pub Vec<usize>);

impl fmt::Display for StmtPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Declared oracle slot: a callable filled in by a binding at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSlot {
    pub name: String,
    pub params: Vec<Param>,
    pub adjoint: bool,
    pub controlled: bool,
}

impl OracleSlot {
    pub fn accepts(&self, def: &SubroutineDef) -> bool {
        self.params.len() == def.params.len()
            && self.params.iter().zip(&def.params).all(|(a, b)| a.kind.same_shape(&b.kind))
    }
}

impl fmt::Display for OracleSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "oracle {}({})", self.name, join(&self.params))?;
        write_support(f, self.adjoint, self.controlled)?;
        writeln!(f, ";")
    }
}

/// A set of subroutines and oracle slots with a designated entry point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Program {
    pub(crate) subs: BTreeMap<String, SubroutineDef>,
    pub(crate) slots: BTreeMap<String, OracleSlot>,
    /// Slot bindings installed by `substitute`.
    pub(crate) bound: BTreeMap<String, SubroutineDef>,
    /// Definition order, for printing.
    pub(crate) order: Vec<String>,
    pub(crate) entry: String,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for name in &self.order {
            if let Some(slot) = self.slots.get(name) {
                write!(f, "{slot}")?;
            } else if let Some(sub) = self.subs.get(name) {
                write!(f, "{sub}")?;
            }
        }
        writeln!(f, "entry {};", self.entry)
    }
}
