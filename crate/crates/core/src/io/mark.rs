use std::fmt;

use crate::program::{ParamKind, SubroutineDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// Classical integer (scales, counts).
    Classical,
    /// Data held in a qubit array.
    Quantum,
    /// Subroutine-typed parameter.
    Subroutine,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IoVar {
    pub name: String,
    pub kind: VarKind,
}

impl IoVar {
    pub fn new(name: &str, kind: VarKind) -> Self {
        IoVar { name: name.to_string(), kind }
    }
}

/// Declared inputs and outputs of a subroutine.
///
/// Text form: `P : (n, *qs*, _Op_) -> (*qs'*)`, where `*x*` is quantum
/// data, `_x_` a subroutine and a trailing `'` marks an output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IOMark {
    pub subroutine: String,
    pub inputs: Vec<IoVar>,
    pub outputs: Vec<IoVar>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MarkError {
    #[error("IO mark syntax error at column {col}: {message}")]
    Syntax { col: usize, message: String },
    #[error("`{0}` appears twice on the same side")]
    Duplicate(String),
    #[error("subroutine-typed variable `{0}` cannot be an output")]
    SubroutineOutput(String),
    #[error("`{name}` does not match any parameter of `{sub}`")]
    Unresolved { sub: String, name: String },
    #[error("`{name}` has kind {kind:?} but the parameter does not")]
    KindMismatch { name: String, kind: VarKind },
}

impl IOMark {
    pub fn new(subroutine: &str, inputs: Vec<IoVar>, outputs: Vec<IoVar>) -> Result<Self, MarkError> {
        for side in [&inputs, &outputs] {
            for (i, v) in side.iter().enumerate() {
                if side[..i].iter().any(|w| w.name == v.name) {
                    return Err(MarkError::Duplicate(v.name.clone()));
                }
            }
        }
        if let Some(v) = outputs.iter().find(|v| v.kind == VarKind::Subroutine) {
            return Err(MarkError::SubroutineOutput(v.name.clone()));
        }
        Ok(IOMark { subroutine: subroutine.to_string(), inputs, outputs })
    }

    pub fn input(&self, name: &str) -> Option<&IoVar> {
        self.inputs.iter().find(|v| v.name == name)
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, MarkError> {
        MarkParser { s: text.as_bytes(), at: 0 }.mark()
    }

    /// Subroutine parameter that a mark variable refers to. Classical
    /// variables may also name an array length as `N<array>`, resolving to
    /// the array's declared length parameter.
    pub fn resolve_param<'a>(&self, sub: &'a SubroutineDef, var: &IoVar) -> Result<&'a str, MarkError> {
        let unresolved = || MarkError::Unresolved { sub: sub.name.clone(), name: var.name.clone() };
        let mismatch = || MarkError::KindMismatch { name: var.name.clone(), kind: var.kind };
        if let Some(p) = sub.param(&var.name) {
            let ok = match var.kind {
                VarKind::Classical => matches!(p.kind, ParamKind::Int | ParamKind::Bool),
                VarKind::Quantum => matches!(p.kind, ParamKind::Qubits(_)),
                VarKind::Subroutine => matches!(p.kind, ParamKind::Op { .. }),
            };
            return if ok { Ok(p.name.as_str()) } else { Err(mismatch()) };
        }
        if var.kind == VarKind::Classical {
            if let Some(array) = var.name.strip_prefix('N') {
                if let Some(p) = sub.param(array) {
                    if let ParamKind::Qubits(Some(crate::program::Expr::Var(len))) = &p.kind {
                        if let Some(lp) = sub.param(len) {
                            return Ok(lp.name.as_str());
                        }
                    }
                }
            }
        }
        Err(unresolved())
    }

    /// Checks every variable against the subroutine's parameters. Outputs
    /// that are not parameters (classical results) are allowed.
    pub fn check_against(&self, sub: &SubroutineDef) -> Result<(), MarkError> {
        for v in &self.inputs {
            self.resolve_param(sub, v)?;
        }
        for v in self.outputs.iter().filter(|v| v.kind == VarKind::Quantum) {
            self.resolve_param(sub, v)?;
        }
        Ok(())
    }
}

fn render_var(f: &mut fmt::Formatter<'_>, v: &IoVar, output: bool) -> fmt::Result {
    let tick = if output { "'" } else { "" };
    match v.kind {
        VarKind::Classical => write!(f, "{}{tick}", v.name),
        VarKind::Quantum => write!(f, "*{}{tick}*", v.name),
        VarKind::Subroutine => write!(f, "_{}_", v.name),
    }
}

impl fmt::Display for IOMark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : (", self.subroutine)?;
        for (i, v) in self.inputs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            render_var(f, v, false)?;
        }
        write!(f, ") -> (")?;
        for (i, v) in self.outputs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            render_var(f, v, true)?;
        }
        write!(f, ")")
    }
}

struct MarkParser<'a> {
    s: &'a [u8],
    at: usize,
}

impl MarkParser<'_> {
    fn err<T>(&self, message: &str) -> Result<T, MarkError> {
        Err(MarkError::Syntax { col: self.at + 1, message: message.to_string() })
    }

    fn ws(&mut self) {
        while self.at < self.s.len() && self.s[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.at..].starts_with(tok.as_bytes()) {
            self.at += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), MarkError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(&format!("expected `{tok}`"))
        }
    }

    fn ident(&mut self) -> Result<String, MarkError> {
        self.ws();
        let start = self.at;
        while self.at < self.s.len() && (self.s[self.at].is_ascii_alphanumeric() || self.s[self.at] == b'_') {
            // a trailing underscore closes a subroutine marker
            if self.s[self.at] == b'_' && self.at > start && !self.continues_ident(self.at + 1) {
                break;
            }
            self.at += 1;
        }
        if start == self.at {
            return self.err("expected a name");
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.at]).into_owned())
    }

    fn continues_ident(&self, i: usize) -> bool {
        i < self.s.len() && (self.s[i].is_ascii_alphanumeric() || self.s[i] == b'_')
    }

    fn var(&mut self, output: bool) -> Result<IoVar, MarkError> {
        let (kind, close) = if self.eat("*") {
            (VarKind::Quantum, Some("*"))
        } else if self.eat("_") {
            (VarKind::Subroutine, Some("_"))
        } else {
            (VarKind::Classical, None)
        };
        let name = self.ident()?;
        let ticked = self.eat("'");
        if ticked != output && kind != VarKind::Subroutine {
            return if output { self.err("output variables end with `'`") } else { self.err("`'` marks outputs only") };
        }
        if let Some(c) = close {
            self.expect(c)?;
        }
        Ok(IoVar { name, kind })
    }

    fn list(&mut self, output: bool) -> Result<Vec<IoVar>, MarkError> {
        self.expect("(")?;
        let mut out = Vec::new();
        if self.eat(")") {
            return Ok(out);
        }
        loop {
            out.push(self.var(output)?);
            if self.eat(")") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn mark(&mut self) -> Result<IOMark, MarkError> {
        let name = self.ident()?;
        self.expect(":")?;
        let inputs = self.list(false)?;
        self.expect("->")?;
        let outputs = self.list(true)?;
        self.ws();
        if self.at != self.s.len() {
            return self.err("trailing text");
        }
        IOMark::new(&name, inputs, outputs)
    }
}
