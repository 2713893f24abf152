use std::collections::BTreeMap;

use super::ast::*;
use super::{ProgramError, Result};
use crate::sim::Gate;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

// longest first so that `**` wins over `*`, `..` over `.`, etc.
const SYMBOLS: [&str; 24] = [
    "**", "..", "==", "!=", "<=", ">=", "&&", "||", "+", "-", "*", "/", "%", "<", ">", "=", "!", "(", ")", "{", "}",
    "[", "]", ",",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        if c == ';' {
            out.push(Token { tok: Tok::Sym(";"), pos });
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(word), pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            // a single dot followed by a digit is a decimal point; `..` is a range
            let is_real = i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit();
            if is_real {
                advance(&mut i, &mut line, &mut col, '.');
                while i < chars.len() && chars[i].is_ascii_digit() {
                    {
                        let ch = chars[i];
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse().map_err(|_| parse_err(pos, format!("bad number `{text}`")))?;
                out.push(Token { tok: Tok::Real(v), pos });
            } else {
                let text: String = chars[start..i].iter().collect();
                let v = text.parse().map_err(|_| parse_err(pos, format!("integer literal `{text}` out of range")))?;
                out.push(Token { tok: Tok::Int(v), pos });
            }
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    {
                        let ch = chars[i];
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
                out.push(Token { tok: Tok::Sym(sym), pos });
            }
            None => return Err(parse_err(pos, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

fn parse_err(pos: Pos, message: String) -> ProgramError {
    ProgramError::Parse { line: pos.line, col: pos.col, message }
}

const KEYWORDS: [&str; 18] = [
    "sub", "oracle", "entry", "call", "ctrl", "for", "in", "rev", "if", "else", "measure", "reset", "int", "bool",
    "qubits", "op", "is", "len",
];

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Real(v) => format!("`{v}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn error<T>(&self, expected: &str) -> Result<T> {
        Err(parse_err(self.pos(), format!("expected {expected}, found {}", Self::describe(self.peek()))))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut prog = Program::default();
        let mut entry = None;
        while *self.peek() != Tok::Eof {
            let pos = self.pos();
            if self.eat_kw("sub") {
                let sub = self.sub_rest(pos)?;
                if prog.subs.contains_key(&sub.name) || prog.slots.contains_key(&sub.name) {
                    return Err(parse_err(pos, format!("`{}` is defined twice", sub.name)));
                }
                prog.order.push(sub.name.clone());
                prog.subs.insert(sub.name.clone(), sub);
            } else if self.eat_kw("oracle") {
                let name = self.ident()?;
                let params = self.params()?;
                let (adjoint, controlled) = self.support()?;
                self.expect_sym(";")?;
                if prog.subs.contains_key(&name) || prog.slots.contains_key(&name) {
                    return Err(parse_err(pos, format!("`{name}` is defined twice")));
                }
                prog.order.push(name.clone());
                prog.slots.insert(name.clone(), OracleSlot { name, params, adjoint, controlled });
            } else if self.eat_kw("entry") {
                entry = Some((self.ident()?, pos));
                self.expect_sym(";")?;
            } else {
                return self.error("`sub`, `oracle` or `entry`");
            }
        }
        match entry {
            Some((name, pos)) => {
                if !prog.subs.contains_key(&name) {
                    return Err(parse_err(pos, format!("entry `{name}` is not a defined subroutine")));
                }
                prog.entry = name;
            }
            None => {
                let last = prog.order.iter().rev().find(|n| prog.subs.contains_key(*n));
                match last {
                    Some(n) => prog.entry = n.clone(),
                    None => return Err(parse_err(self.pos(), "program defines no subroutine".into())),
                }
            }
        }
        Ok(prog)
    }

    fn sub_rest(&mut self, pos: Pos) -> Result<SubroutineDef> {
        let name = self.ident()?;
        let params = self.params()?;
        let body = self.block()?;
        Ok(SubroutineDef { name, params, body, pos })
    }

    fn support(&mut self) -> Result<(bool, bool)> {
        let (mut adj, mut ctl) = (false, false);
        if self.eat_kw("is") {
            loop {
                match self.peek() {
                    Tok::Ident(s) if s == "adj" => adj = true,
                    Tok::Ident(s) if s == "ctl" => ctl = true,
                    _ => return self.error("`adj` or `ctl`"),
                }
                self.bump();
                if !self.eat_sym("+") {
                    break;
                }
            }
        }
        Ok((adj, ctl))
    }

    fn params(&mut self) -> Result<Vec<Param>> {
        self.expect_sym("(")?;
        let mut params: Vec<Param> = Vec::new();
        if !self.is_sym(")") {
            loop {
                let pos = self.pos();
                let kind_kw = match self.peek() {
                    Tok::Ident(s) => s.clone(),
                    _ => return self.error("parameter type"),
                };
                self.bump();
                let name = self.ident()?;
                let kind = match kind_kw.as_str() {
                    "int" => ParamKind::Int,
                    "bool" => ParamKind::Bool,
                    "qubits" => {
                        if self.eat_sym("[") {
                            let len = self.expr()?;
                            self.expect_sym("]")?;
                            ParamKind::Qubits(Some(len))
                        } else {
                            ParamKind::Qubits(None)
                        }
                    }
                    "op" => {
                        let (adjoint, controlled) = self.support()?;
                        ParamKind::Op { adjoint, controlled }
                    }
                    other => {
                        return Err(parse_err(pos, format!("unknown parameter type `{other}`")));
                    }
                };
                if params.iter().any(|p| p.name == name) {
                    return Err(parse_err(pos, format!("duplicate parameter `{name}`")));
                }
                params.push(Param { name, kind });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(params)
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect_sym("{")?;
        let mut body = Vec::new();
        while !self.is_sym("}") {
            if *self.peek() == Tok::Eof {
                return self.error("`}`");
            }
            body.push(self.stmt()?);
        }
        self.bump();
        Ok(body)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        let kind = if self.eat_kw("call") {
            let callee = self.ident()?;
            let variant = self.variant()?;
            self.expect_sym("(")?;
            let args = self.list(")", Self::expr)?;
            self.expect_sym("(")?;
            let qargs = self.list(")", Self::qref)?;
            self.expect_sym(";")?;
            StmtKind::Call { callee, variant, args, qargs }
        } else if self.eat_kw("for") {
            let var = self.ident()?;
            self.expect_kw("in")?;
            let reverse = self.eat_kw("rev");
            let lower = self.expr()?;
            self.expect_sym("..")?;
            let upper = self.expr()?;
            let body = self.block()?;
            StmtKind::For { var, lower, upper, reverse, body }
        } else if self.eat_kw("if") {
            return self.if_rest(pos);
        } else if self.eat_kw("reset") {
            let targets = self.refs()?;
            self.expect_sym(";")?;
            StmtKind::Reset { targets }
        } else if self.eat_kw("ctrl") {
            self.expect_sym("(")?;
            let controls = self.list(")", Self::qref)?;
            if controls.is_empty() {
                return Err(parse_err(pos, "`ctrl` needs at least one control".into()));
            }
            self.gate_rest(controls)?
        } else if matches!(self.peek_at(1), Tok::Sym("=")) {
            let name = self.ident()?;
            self.expect_sym("=")?;
            if self.eat_kw("measure") {
                let targets = self.refs()?;
                self.expect_sym(";")?;
                StmtKind::Measure { targets, result: name }
            } else {
                let value = self.expr()?;
                self.expect_sym(";")?;
                StmtKind::Assign { name, value }
            }
        } else {
            self.gate_rest(Vec::new())?
        };
        Ok(Stmt::new(kind, pos))
    }

    fn if_rest(&mut self, pos: Pos) -> Result<Stmt> {
        self.expect_sym("(")?;
        let cond = self.expr()?;
        self.expect_sym(")")?;
        let then_body = self.block()?;
        let else_body = if self.eat_kw("else") {
            if self.is_kw("if") {
                let p = self.pos();
                self.bump();
                vec![self.if_rest(p)?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::new(StmtKind::If { cond, then_body, else_body }, pos))
    }

    fn gate_rest(&mut self, controls: Vec<QubitRef>) -> Result<StmtKind> {
        let pos = self.pos();
        let name = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return self.error("statement"),
        };
        let Some(arity) = Gate::builtin_arity(&name) else {
            return Err(parse_err(pos, format!("unknown gate or statement `{name}`")));
        };
        self.bump();
        let angle = if self.eat_sym("(") {
            let a = self.expr()?;
            self.expect_sym(")")?;
            Some(a)
        } else {
            None
        };
        if Gate::builtin_takes_angle(&name) != angle.is_some() {
            let msg = if angle.is_some() {
                format!("gate `{name}` takes no angle")
            } else {
                format!("gate `{name}` needs an angle")
            };
            return Err(parse_err(pos, msg));
        }
        let targets = self.refs()?;
        if arity > 1 && targets.len() != arity {
            return Err(parse_err(pos, format!("gate `{name}` takes {arity} qubit operands, got {}", targets.len())));
        }
        self.expect_sym(";")?;
        Ok(StmtKind::Gate { name, angle, controls, targets })
    }

    fn variant(&mut self) -> Result<Variant> {
        let mut v = Variant::default();
        if !self.eat_sym("[") {
            return Ok(v);
        }
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Ident(s) if s == "adj" => {
                    self.bump();
                    v.adjoint = !v.adjoint;
                }
                Tok::Ident(s) if s == "ctl" => {
                    self.bump();
                    v.controls += 1;
                }
                Tok::Ident(s) if s == "pow" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    if v.power.is_some() {
                        return Err(parse_err(pos, "`pow` given twice".into()));
                    }
                    v.power = Some(e);
                }
                _ => return self.error("`adj`, `ctl` or `pow(...)`"),
            }
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        Ok(v)
    }

    fn list<T>(&mut self, close: &str, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        if !self.is_sym(close) {
            loop {
                out.push(item(self)?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(close)?;
        Ok(out)
    }

    fn refs(&mut self) -> Result<Vec<QubitRef>> {
        let mut out = vec![self.qref()?];
        while self.eat_sym(",") {
            out.push(self.qref()?);
        }
        Ok(out)
    }

    fn qref(&mut self) -> Result<QubitRef> {
        let array = self.ident()?;
        if !self.eat_sym("[") {
            return Ok(QubitRef { array, index: Index::All });
        }
        let first = self.expr()?;
        let index = if self.eat_sym("..") { Index::Range(first, self.expr()?) } else { Index::At(first) };
        self.expect_sym("]")?;
        Ok(QubitRef { array, index })
    }

    fn expr(&mut self) -> Result<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Tok::Sym(s) = self.peek() {
            let op = match *s {
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                "%" => BinOp::Mod,
                "**" => BinOp::Pow,
                "<" => BinOp::Lt,
                "<=" => BinOp::Le,
                ">" => BinOp::Gt,
                ">=" => BinOp::Ge,
                "==" => BinOp::Eq,
                "!=" => BinOp::Ne,
                "&&" => BinOp::And,
                "||" => BinOp::Or,
                _ => break,
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let next = if op == BinOp::Pow { prec } else { prec + 1 };
            let rhs = self.binary(next)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(match self.unary()? {
                Expr::Int(v) => Expr::Int(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        if self.eat_sym("!") {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        // exponent binds tighter than unary minus on its left operand only
        if self.is_sym("**") {
            self.bump();
            let rhs = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, rhs));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Real(v) => {
                self.bump();
                Ok(Expr::Real(v))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "pi" => {
                    self.bump();
                    Ok(Expr::Pi)
                }
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::Bool(s == "true"))
                }
                "len" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let a = self.ident()?;
                    self.expect_sym(")")?;
                    Ok(Expr::Len(a))
                }
                _ => Ok(Expr::Var(self.ident()?)),
            },
            _ => self.error("expression"),
        }
    }
}

/// Parses a program: `sub`, `oracle` and `entry` declarations. Without an
/// `entry` line the last subroutine is the entry point.
pub fn parse_program(src: &str) -> Result<Program> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    p.program()
}

/// Parses exactly one `sub` definition.
pub fn parse_subroutine(src: &str) -> Result<SubroutineDef> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let pos = p.pos();
    p.expect_kw("sub")?;
    let sub = p.sub_rest(pos)?;
    if *p.peek() != Tok::Eof {
        return p.error("end of input");
    }
    Ok(sub)
}

/// Parses a standalone expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.error("end of expression");
    }
    Ok(e)
}

/// Merges several sources into one program; later `entry` lines win.
pub fn parse_sources(sources: &[&str]) -> Result<Program> {
    let mut merged = Program::default();
    let mut subs = BTreeMap::new();
    for src in sources {
        let p = parse_program(src)?;
        for name in &p.order {
            if subs.contains_key(name) {
                return Err(ProgramError::Duplicate(name.clone()));
            }
            subs.insert(name.clone(), ());
            merged.order.push(name.clone());
        }
        merged.subs.extend(p.subs);
        merged.slots.extend(p.slots);
        merged.entry = p.entry;
    }
    Ok(merged)
}
