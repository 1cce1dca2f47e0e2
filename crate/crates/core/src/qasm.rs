//! OpenQASM 2.0 subset: parser and canonical serializer.
//!
//! Supported statements: the `OPENQASM 2.0;` header, an optional
//! `include "qelib1.inc";`, exactly one `qreg`, at most one `creg`, the gate
//! set of [`GateKind`] plus `rx`/`ry` (lowered to `prx`) and `r` (alias for
//! `prx`), `barrier`, and indexed `measure`. Angle expressions may use `pi`,
//! literals, `+ - * /`, unary minus and parentheses.
//!
//! Anything else — gate definitions, `if`, `reset`, broadcast operands —
//! is rejected with a line/column error, never silently dropped.

use crate::circuit::{Circuit, CircuitError, Gate, GateKind, Instruction};
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct QasmError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl QasmError {
    fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        QasmError { line, col, msg: msg.into() }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Int(usize),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    // Braces only appear in gate definitions; lexed so the parser can reject
    // them with a statement-level message instead of a character error.
    LBrace,
    RBrace,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(x) => write!(f, "number {x}"),
            Tok::Int(x) => write!(f, "integer {x}"),
            Tok::Str(s) => write!(f, "string \"{s}\""),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, QasmError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() == Some(&'/') {
                    // line comment
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump(&mut chars);
                    }
                } else {
                    out.push(Spanned { tok: Tok::Slash, line: tline, col: tcol });
                }
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push(Spanned { tok: Tok::Arrow, line: tline, col: tcol });
                } else {
                    out.push(Spanned { tok: Tok::Minus, line: tline, col: tcol });
                }
            }
            '(' | ')' | '[' | ']' | ',' | ';' | '+' | '*' | '{' | '}' => {
                bump(&mut chars);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    _ => unreachable!(),
                };
                out.push(Spanned { tok, line: tline, col: tcol });
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        Some(&'"') => {
                            bump(&mut chars);
                            break;
                        }
                        Some(_) => s.push(bump(&mut chars)),
                        None => return Err(QasmError::new(tline, tcol, "unterminated string literal")),
                    }
                }
                out.push(Spanned { tok: Tok::Str(s), line: tline, col: tcol });
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                let mut is_float = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(bump(&mut chars));
                    } else if c == '.' || c == 'e' || c == 'E' {
                        is_float = true;
                        s.push(bump(&mut chars));
                        if (chars.peek() == Some(&'-') || chars.peek() == Some(&'+'))
                            && (s.ends_with('e') || s.ends_with('E'))
                        {
                            s.push(bump(&mut chars));
                        }
                    } else {
                        break;
                    }
                }
                let tok = if is_float {
                    match s.parse::<f64>() {
                        Ok(x) => Tok::Number(x),
                        Err(_) => return Err(QasmError::new(tline, tcol, format!("malformed number `{s}`"))),
                    }
                } else {
                    match s.parse::<usize>() {
                        Ok(x) => Tok::Int(x),
                        Err(_) => return Err(QasmError::new(tline, tcol, format!("malformed integer `{s}`"))),
                    }
                };
                out.push(Spanned { tok, line: tline, col: tcol });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                        // `.` appears in `OPENQASM 2.0` version tokens only;
                        // harmless in identifiers we reject anyway.
                        if c == '.' {
                            break;
                        }
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line: tline, col: tcol });
            }
            other => {
                return Err(QasmError::new(tline, tcol, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> QasmError {
        let (line, col) = self.here();
        QasmError::new(line, col, msg)
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), QasmError> {
        match self.next() {
            Some(t) if &t.tok == want => Ok(()),
            Some(t) => Err(QasmError::new(t.line, t.col, format!("expected {what}, found {}", t.tok))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize, usize), QasmError> {
        match self.next() {
            Some(Spanned { tok: Tok::Ident(s), line, col }) => Ok((s, line, col)),
            Some(t) => Err(QasmError::new(t.line, t.col, format!("expected {what}, found {}", t.tok))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<usize, QasmError> {
        match self.next() {
            Some(Spanned { tok: Tok::Int(n), .. }) => Ok(n),
            Some(t) => Err(QasmError::new(t.line, t.col, format!("expected {what}, found {}", t.tok))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    /// `name[idx]` where name must match the declared register.
    fn qubit_operand(&mut self) -> Result<usize, QasmError> {
        let (name, line, col) = self.expect_ident("a qubit operand")?;
        let (qname, qsize) = self
            .qreg
            .clone()
            .ok_or_else(|| QasmError::new(line, col, "qubit used before qreg declaration"))?;
        if name != qname {
            return Err(QasmError::new(line, col, format!("unknown register `{name}` (declared qreg is `{qname}`)")));
        }
        if !matches!(self.peek().map(|t| &t.tok), Some(Tok::LBracket)) {
            return Err(QasmError::new(
                line,
                col,
                "whole-register operands are not supported here; index the qubit as q[i]",
            ));
        }
        self.expect(&Tok::LBracket, "`[`")?;
        let idx = self.expect_int("a qubit index")?;
        self.expect(&Tok::RBracket, "`]`")?;
        if idx >= qsize {
            return Err(QasmError::new(line, col, format!("qubit index {idx} out of range for qreg[{qsize}]")));
        }
        Ok(idx)
    }

    // Angle grammar: expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
    // factor := '-' factor | '+' factor | number | int | 'pi' | '(' expr ')'.
    fn angle_expr(&mut self) -> Result<f64, QasmError> {
        let mut acc = self.angle_term()?;
        loop {
            match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::Plus) => {
                    self.next();
                    acc += self.angle_term()?;
                }
                Some(Tok::Minus) => {
                    self.next();
                    acc -= self.angle_term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn angle_term(&mut self) -> Result<f64, QasmError> {
        let mut acc = self.angle_factor()?;
        loop {
            match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::Star) => {
                    self.next();
                    acc *= self.angle_factor()?;
                }
                Some(Tok::Slash) => {
                    self.next();
                    let d = self.angle_factor()?;
                    if d == 0.0 {
                        return Err(self.err("division by zero in angle expression"));
                    }
                    acc /= d;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn angle_factor(&mut self) -> Result<f64, QasmError> {
        match self.next() {
            Some(Spanned { tok: Tok::Minus, .. }) => Ok(-self.angle_factor()?),
            Some(Spanned { tok: Tok::Plus, .. }) => self.angle_factor(),
            Some(Spanned { tok: Tok::Number(x), .. }) => Ok(x),
            Some(Spanned { tok: Tok::Int(n), .. }) => Ok(n as f64),
            Some(Spanned { tok: Tok::Ident(s), line, col }) => {
                if s == "pi" {
                    Ok(PI)
                } else {
                    Err(QasmError::new(line, col, format!("unknown symbol `{s}` in angle expression")))
                }
            }
            Some(Spanned { tok: Tok::LParen, .. }) => {
                let v = self.angle_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(v)
            }
            Some(t) => Err(QasmError::new(t.line, t.col, format!("unexpected {} in angle expression", t.tok))),
            None => Err(self.err("unexpected end of input in angle expression")),
        }
    }

    fn angle_args(&mut self, count: usize, gate: &str) -> Result<Vec<f64>, QasmError> {
        self.expect(&Tok::LParen, &format!("`(` after `{gate}`"))?;
        let mut args = Vec::with_capacity(count);
        for k in 0..count {
            if k > 0 {
                self.expect(&Tok::Comma, "`,`")?;
            }
            args.push(self.angle_expr()?);
        }
        self.expect(&Tok::RParen, "`)`")?;
        Ok(args)
    }
}

/// Parse OpenQASM 2.0 source into a [`Circuit`].
pub fn parse(src: &str) -> Result<Circuit, QasmError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, qreg: None, creg: None };

    // Header: OPENQASM 2.0 ;
    let (kw, line, col) = p.expect_ident("`OPENQASM`")?;
    if kw != "OPENQASM" {
        return Err(QasmError::new(line, col, format!("expected `OPENQASM` header, found `{kw}`")));
    }
    match p.next() {
        Some(Spanned { tok: Tok::Number(v), line, col }) => {
            if (v - 2.0).abs() >= 0.5 {
                return Err(QasmError::new(line, col, format!("unsupported OpenQASM version {v}; only 2.0")));
            }
        }
        Some(t) => return Err(QasmError::new(t.line, t.col, format!("expected version number, found {}", t.tok))),
        None => return Err(p.err("expected version number")),
    }
    p.expect(&Tok::Semi, "`;`")?;

    let mut instructions: Vec<Instruction> = Vec::new();
    let mut measured: Vec<bool> = Vec::new();

    while let Some(t) = p.peek().cloned() {
        let (line, col) = (t.line, t.col);
        let ident = match t.tok {
            Tok::Ident(s) => s,
            other => return Err(QasmError::new(line, col, format!("expected a statement, found {other}"))),
        };
        p.next();
        match ident.as_str() {
            "include" => {
                let fname = match p.next() {
                    Some(Spanned { tok: Tok::Str(s), .. }) => s,
                    _ => return Err(QasmError::new(line, col, "expected a file name after `include`")),
                };
                if fname != "qelib1.inc" {
                    return Err(QasmError::new(line, col, format!("unsupported include \"{fname}\"; only \"qelib1.inc\"")));
                }
                p.expect(&Tok::Semi, "`;`")?;
            }
            "qreg" => {
                if p.qreg.is_some() {
                    return Err(QasmError::new(line, col, "multiple qreg declarations; this subset allows one"));
                }
                let (name, _, _) = p.expect_ident("a register name")?;
                p.expect(&Tok::LBracket, "`[`")?;
                let size = p.expect_int("a register size")?;
                p.expect(&Tok::RBracket, "`]`")?;
                p.expect(&Tok::Semi, "`;`")?;
                if size == 0 {
                    return Err(QasmError::new(line, col, "qreg size must be positive"));
                }
                measured = vec![false; size];
                p.qreg = Some((name, size));
            }
            "creg" => {
                if p.creg.is_some() {
                    return Err(QasmError::new(line, col, "multiple creg declarations; this subset allows one"));
                }
                let (name, _, _) = p.expect_ident("a register name")?;
                p.expect(&Tok::LBracket, "`[`")?;
                let size = p.expect_int("a register size")?;
                p.expect(&Tok::RBracket, "`]`")?;
                p.expect(&Tok::Semi, "`;`")?;
                p.creg = Some((name, size));
            }
            "measure" => {
                let q = p.qubit_operand()?;
                p.expect(&Tok::Arrow, "`->`")?;
                let (cname, cline, ccol) = p.expect_ident("a classical register")?;
                let (declared, csize) = p
                    .creg
                    .clone()
                    .ok_or_else(|| QasmError::new(cline, ccol, "measure used before creg declaration"))?;
                if cname != declared {
                    return Err(QasmError::new(cline, ccol, format!("unknown register `{cname}` (declared creg is `{declared}`)")));
                }
                p.expect(&Tok::LBracket, "`[`")?;
                let cbit = p.expect_int("a classical bit index")?;
                p.expect(&Tok::RBracket, "`]`")?;
                p.expect(&Tok::Semi, "`;`")?;
                if cbit >= csize {
                    return Err(QasmError::new(cline, ccol, format!("classical index {cbit} out of range for creg[{csize}]")));
                }
                if measured[q] {
                    return Err(QasmError::new(line, col, format!("qubit {q} is measured twice")));
                }
                measured[q] = true;
                instructions.push(Instruction::Measure { qubit: q, cbit });
            }
            "barrier" => {
                // Accept both `barrier q;` (whole register) and an indexed list.
                let mut qs = Vec::new();
                let whole_register = {
                    let save = p.pos;
                    let is_whole = match (p.next(), p.peek().map(|t| t.tok.clone())) {
                        (Some(Spanned { tok: Tok::Ident(_), .. }), Some(Tok::Semi)) => true,
                        _ => false,
                    };
                    p.pos = save;
                    is_whole
                };
                if whole_register {
                    let (name, nline, ncol) = p.expect_ident("a register name")?;
                    let (qname, qsize) = p
                        .qreg
                        .clone()
                        .ok_or_else(|| QasmError::new(nline, ncol, "barrier used before qreg declaration"))?;
                    if name != qname {
                        return Err(QasmError::new(nline, ncol, format!("unknown register `{name}`")));
                    }
                    qs.extend(0..qsize);
                } else {
                    loop {
                        qs.push(p.qubit_operand()?);
                        match p.peek().map(|t| t.tok.clone()) {
                            Some(Tok::Comma) => {
                                p.next();
                            }
                            _ => break,
                        }
                    }
                }
                p.expect(&Tok::Semi, "`;`")?;
                instructions.push(Instruction::Barrier(qs));
            }
            name => {
                let (kind, base_params) = match name {
                    "h" => (GateKind::H, None),
                    "x" => (GateKind::X, None),
                    "y" => (GateKind::Y, None),
                    "z" => (GateKind::Z, None),
                    "rz" => (GateKind::Rz, None),
                    "u1" => (GateKind::U1, None),
                    "u2" => (GateKind::U2, None),
                    "u3" => (GateKind::U3, None),
                    "prx" | "r" => (GateKind::Prx, None),
                    // rx(t) = prx(t, 0), ry(t) = prx(t, pi/2)
                    "rx" => (GateKind::Prx, Some(0.0)),
                    "ry" => (GateKind::Prx, Some(PI / 2.0)),
                    "cx" | "CX" => (GateKind::Cnot, None),
                    "cz" => (GateKind::Cz, None),
                    "swap" => (GateKind::Swap, None),
                    "gate" | "opaque" => {
                        return Err(QasmError::new(line, col, "gate definitions are not supported in this subset"));
                    }
                    "if" => {
                        return Err(QasmError::new(line, col, "classical control (`if`) is not supported in this subset"));
                    }
                    "reset" => {
                        return Err(QasmError::new(line, col, "`reset` is not supported in this subset"));
                    }
                    other => {
                        return Err(QasmError::new(line, col, format!("unknown statement or gate `{other}`")));
                    }
                };
                let params = match (kind.param_count(), base_params) {
                    (_, Some(fixed_phase)) => {
                        // rx/ry carry one parameter and a fixed phase.
                        let mut a = p.angle_args(1, name)?;
                        a.push(fixed_phase);
                        a
                    }
                    (0, None) => vec![],
                    (n, None) => p.angle_args(n, name)?,
                };
                let mut qubits = Vec::with_capacity(kind.arity());
                for k in 0..kind.arity() {
                    if k > 0 {
                        p.expect(&Tok::Comma, "`,`")?;
                    }
                    qubits.push(p.qubit_operand()?);
                }
                p.expect(&Tok::Semi, "`;`")?;
                for &q in &qubits {
                    if measured[q] {
                        return Err(QasmError::new(line, col, format!("qubit {q} has a gate after its measurement")));
                    }
                }
                if kind.arity() == 2 && qubits[0] == qubits[1] {
                    return Err(QasmError::new(line, col, format!("`{name}` needs two distinct qubits")));
                }
                instructions.push(Instruction::Gate(Gate::new(kind, qubits, params)));
            }
        }
    }

    let (_, num_qubits) = p
        .qreg
        .ok_or_else(|| QasmError::new(1, 1, "missing qreg declaration"))?;
    let num_clbits = p.creg.map(|(_, n)| n).unwrap_or(0);
    let circuit = Circuit { num_qubits, num_clbits, instructions };
    circuit.validate().map_err(|e: CircuitError| QasmError::new(0, 0, e.to_string()))?;
    Ok(circuit)
}

/// Canonical serialization: header, `q`/`c` register names, one statement per
/// line, angles printed with shortest round-trip precision. Satisfies
/// `parse(serialize(c)) == c` for valid circuits.
pub fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    out.push_str(&format!("qreg q[{}];\n", c.num_qubits));
    if c.num_clbits > 0 {
        out.push_str(&format!("creg c[{}];\n", c.num_clbits));
    }
    for inst in &c.instructions {
        match inst {
            Instruction::Gate(g) => {
                out.push_str(g.kind.name());
                if !g.params.is_empty() {
                    let ps: Vec<String> = g.params.iter().map(|x| format_angle(*x)).collect();
                    out.push_str(&format!("({})", ps.join(",")));
                }
                let qs: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
                out.push_str(&format!(" {};\n", qs.join(",")));
            }
            Instruction::Barrier(qs) => {
                if qs.len() == c.num_qubits && qs.iter().enumerate().all(|(i, &q)| i == q) {
                    out.push_str("barrier q;\n");
                } else {
                    let list: Vec<String> = qs.iter().map(|q| format!("q[{q}]")).collect();
                    out.push_str(&format!("barrier {};\n", list.join(",")));
                }
            }
            Instruction::Measure { qubit, cbit } => {
                out.push_str(&format!("measure q[{qubit}] -> c[{cbit}];\n"));
            }
        }
    }
    out
}

/// Shortest decimal form that round-trips to the same f64.
fn format_angle(x: f64) -> String {
    let s = format!("{x}");
    // `{}` on f64 is already shortest round-trip in Rust; keep integers
    // readable as e.g. `3` rather than `3.0`? No: keep the float form so the
    // lexer sees a number either way.
    s
}
