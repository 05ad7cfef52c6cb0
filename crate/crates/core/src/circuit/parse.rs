//! Hand-rolled parser for the OpenQASM 2.0 subset this toolkit consumes.
//!
//! Accepted programs: optional `OPENQASM 2.0;` header, optional includes,
//! exactly one `qreg`, any number of `creg`s, gate applications from the
//! supported alphabet, `measure`, and `barrier`. Controlled two-qubit gates
//! outside the alphabet (`cz`, `cp`, ...) are normalized to `cx`: routing
//! only needs the interaction pair. Angle arguments are literal radians,
//! optionally written as products/quotients involving `pi`.

use std::fmt;

use thiserror::Error;

use super::{Circuit, GateKind, GateOp};

#[derive(Debug, Error, PartialEq)]
#[error("line {line}, col {col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnsupportedGate(String),
    QubitOutOfRange { qubit: usize, size: usize },
    MultipleQregs,
    MissingQreg,
    UnknownRegister(String),
    IdenticalQubits(usize),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnsupportedGate(name) => write!(f, "unsupported gate `{name}`"),
            ParseErrorKind::QubitOutOfRange { qubit, size } => {
                write!(
                    f,
                    "qubit index {qubit} out of range for register of size {size}"
                )
            }
            ParseErrorKind::MultipleQregs => write!(f, "multiple qreg declarations"),
            ParseErrorKind::MissingQreg => write!(f, "no qreg declared before use"),
            ParseErrorKind::UnknownRegister(name) => write!(f, "unknown register `{name}`"),
            ParseErrorKind::IdenticalQubits(q) => {
                write!(f, "two-qubit gate references identical qubits ({q})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    Star,
    Slash,
    Minus,
    Plus,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, col, kind }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();

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
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '/' {
            // Either a comment or the division operator.
            bump(&mut chars);
            if chars.peek() == Some(&'/') {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            } else {
                toks.push(Spanned {
                    tok: Tok::Slash,
                    line: tline,
                    col: tcol,
                });
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '_' {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            toks.push(Spanned {
                tok: Tok::Ident(s),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut s = String::new();
            while let Some(&n) = chars.peek() {
                let exponent_sign = (n == '+' || n == '-')
                    && matches!(s.chars().last(), Some('e') | Some('E'));
                if n.is_ascii_digit() || n == '.' || n == 'e' || n == 'E' || exponent_sign {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            let v: f64 = s.parse().map_err(|_| {
                err(
                    tline,
                    tcol,
                    ParseErrorKind::Syntax(format!("bad number `{s}`")),
                )
            })?;
            toks.push(Spanned {
                tok: Tok::Number(v),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c == '"' {
            bump(&mut chars);
            let mut s = String::new();
            loop {
                match chars.peek() {
                    Some(&'"') => {
                        bump(&mut chars);
                        break;
                    }
                    Some(_) => s.push(bump(&mut chars)),
                    None => {
                        return Err(err(
                            tline,
                            tcol,
                            ParseErrorKind::Syntax("unterminated string".into()),
                        ))
                    }
                }
            }
            toks.push(Spanned {
                tok: Tok::Str(s),
                line: tline,
                col: tcol,
            });
            continue;
        }
        let tok = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    toks.push(Spanned {
                        tok: Tok::Arrow,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    toks.push(Spanned {
                        tok: Tok::Minus,
                        line: tline,
                        col: tcol,
                    });
                }
                continue;
            }
            other => {
                return Err(err(
                    tline,
                    tcol,
                    ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                ))
            }
        };
        bump(&mut chars);
        toks.push(Spanned {
            tok,
            line: tline,
            col: tcol,
        });
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    qreg: Option<(String, usize)>,
    cregs: Vec<(String, usize)>,
    gates: Vec<GateOp>,
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
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(err(line, col, ParseErrorKind::Syntax(msg.into())))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Spanned, ParseError> {
        match self.next() {
            Some(s) if s.tok == want => Ok(s),
            Some(s) => Err(err(
                s.line,
                s.col,
                ParseErrorKind::Syntax(format!("expected {what}")),
            )),
            None => self.syntax(format!("expected {what}, found end of input")),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize, usize), ParseError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            }) => Ok((s, line, col)),
            Some(s) => Err(err(
                s.line,
                s.col,
                ParseErrorKind::Syntax(format!("expected {what}")),
            )),
            None => self.syntax(format!("expected {what}, found end of input")),
        }
    }

    fn expect_uint(&mut self, what: &str) -> Result<usize, ParseError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Number(v),
                line,
                col,
            }) => {
                if v.fract() == 0.0 && v >= 0.0 {
                    Ok(v as usize)
                } else {
                    Err(err(
                        line,
                        col,
                        ParseErrorKind::Syntax(format!("expected {what}, got {v}")),
                    ))
                }
            }
            Some(s) => Err(err(
                s.line,
                s.col,
                ParseErrorKind::Syntax(format!("expected {what}")),
            )),
            None => self.syntax(format!("expected {what}, found end of input")),
        }
    }

    /// `reg[idx]` or a bare register name (meaning "all its qubits").
    fn parse_arg(&mut self) -> Result<(String, Option<usize>, usize, usize), ParseError> {
        let (name, line, col) = self.expect_ident("register reference")?;
        if matches!(self.peek(), Some(s) if s.tok == Tok::LBracket) {
            self.next();
            let idx = self.expect_uint("index")?;
            self.expect(Tok::RBracket, "`]`")?;
            Ok((name, Some(idx), line, col))
        } else {
            Ok((name, None, line, col))
        }
    }

    /// Resolve a qubit argument against the single qreg, range-checked.
    fn resolve_qubit(
        &self,
        name: &str,
        idx: usize,
        line: usize,
        col: usize,
    ) -> Result<usize, ParseError> {
        let (qname, size) = self
            .qreg
            .as_ref()
            .ok_or_else(|| err(line, col, ParseErrorKind::MissingQreg))?;
        if name != qname {
            return Err(err(line, col, ParseErrorKind::UnknownRegister(name.into())));
        }
        if idx >= *size {
            return Err(err(
                line,
                col,
                ParseErrorKind::QubitOutOfRange {
                    qubit: idx,
                    size: *size,
                },
            ));
        }
        Ok(idx)
    }

    /// Angle expression: `[-] factor ((*|/) factor)*`, factor = number | pi.
    fn parse_angle(&mut self) -> Result<f64, ParseError> {
        let mut sign = 1.0;
        while matches!(self.peek(), Some(s) if s.tok == Tok::Minus || s.tok == Tok::Plus) {
            if self.next().unwrap().tok == Tok::Minus {
                sign = -sign;
            }
        }
        let mut value = sign * self.parse_factor()?;
        loop {
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Star) => {
                    self.next();
                    value *= self.parse_factor()?;
                }
                Some(Tok::Slash) => {
                    self.next();
                    value /= self.parse_factor()?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<f64, ParseError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Number(v),
                ..
            }) => Ok(v),
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            }) => {
                if s == "pi" {
                    Ok(std::f64::consts::PI)
                } else {
                    Err(err(
                        line,
                        col,
                        ParseErrorKind::Syntax(format!("expected angle literal, got `{s}`")),
                    ))
                }
            }
            _ => self.syntax("expected angle literal"),
        }
    }

    fn parse_gate(&mut self, name: String, line: usize, col: usize) -> Result<(), ParseError> {
        // Optional parameter list; only rz keeps its angle.
        let mut params = Vec::new();
        if matches!(self.peek(), Some(s) if s.tok == Tok::LParen) {
            self.next();
            loop {
                params.push(self.parse_angle()?);
                match self.next() {
                    Some(s) if s.tok == Tok::Comma => continue,
                    Some(s) if s.tok == Tok::RParen => break,
                    _ => return self.syntax("expected `,` or `)` in parameter list"),
                }
            }
        }
        let mut args = Vec::new();
        loop {
            args.push(self.parse_arg()?);
            match self.next() {
                Some(s) if s.tok == Tok::Comma => continue,
                Some(s) if s.tok == Tok::Semi => break,
                _ => return self.syntax("expected `,` or `;` after gate arguments"),
            }
        }

        let single_kind = match name.as_str() {
            "h" => Some(GateKind::H),
            "x" => Some(GateKind::X),
            "s" => Some(GateKind::S),
            "t" => Some(GateKind::T),
            "rz" => {
                if params.len() != 1 {
                    return Err(err(
                        line,
                        col,
                        ParseErrorKind::Syntax("rz takes exactly one angle".into()),
                    ));
                }
                Some(GateKind::Rz(params[0]))
            }
            _ => None,
        };

        if let Some(kind) = single_kind {
            // Bare register broadcasts a single-qubit gate across all qubits.
            if args.len() == 1 && args[0].1.is_none() {
                let size = self.qreg.as_ref().map(|(_, s)| *s).unwrap_or(0);
                let (ref name, _, aline, acol) = args[0];
                for q in 0..size {
                    let q = self.resolve_qubit(name, q, aline, acol)?;
                    self.gates.push(GateOp::one(kind, q));
                }
                return Ok(());
            }
            for (name, idx, aline, acol) in &args {
                let idx = idx.ok_or_else(|| {
                    err(
                        *aline,
                        *acol,
                        ParseErrorKind::Syntax("expected an indexed qubit".into()),
                    )
                })?;
                let q = self.resolve_qubit(name, idx, *aline, *acol)?;
                self.gates.push(GateOp::one(kind, q));
            }
            return Ok(());
        }

        let two_kind = match name.as_str() {
            "cx" | "CX" => Some(GateKind::Cx),
            "swap" => Some(GateKind::Swap),
            // Controlled gates outside the alphabet: the interaction pair is
            // all routing needs, so normalize to cx.
            _ if args.len() == 2 => Some(GateKind::Cx),
            _ => None,
        };
        let Some(kind) = two_kind else {
            return Err(err(line, col, ParseErrorKind::UnsupportedGate(name)));
        };
        if args.len() != 2 {
            return Err(err(
                line,
                col,
                ParseErrorKind::Syntax(format!("`{name}` takes exactly two qubits")),
            ));
        }
        let mut qubits = [0usize; 2];
        for (slot, (name, idx, aline, acol)) in args.iter().enumerate() {
            let idx = idx.ok_or_else(|| {
                err(
                    *aline,
                    *acol,
                    ParseErrorKind::Syntax("expected an indexed qubit".into()),
                )
            })?;
            qubits[slot] = self.resolve_qubit(name, idx, *aline, *acol)?;
        }
        if qubits[0] == qubits[1] {
            return Err(err(line, col, ParseErrorKind::IdenticalQubits(qubits[0])));
        }
        self.gates.push(GateOp::two(kind, qubits[0], qubits[1]));
        Ok(())
    }

    fn parse_statement(&mut self) -> Result<(), ParseError> {
        let (name, line, col) = self.expect_ident("statement")?;
        match name.as_str() {
            "OPENQASM" => {
                self.next(); // version number
                self.expect(Tok::Semi, "`;`")?;
            }
            "include" => {
                match self.next() {
                    Some(Spanned {
                        tok: Tok::Str(_), ..
                    }) => {}
                    _ => return self.syntax("expected include path string"),
                }
                self.expect(Tok::Semi, "`;`")?;
            }
            "qreg" => {
                if self.qreg.is_some() {
                    return Err(err(line, col, ParseErrorKind::MultipleQregs));
                }
                let (rname, _, _) = self.expect_ident("register name")?;
                self.expect(Tok::LBracket, "`[`")?;
                let size = self.expect_uint("register size")?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::Semi, "`;`")?;
                if size == 0 {
                    return Err(err(
                        line,
                        col,
                        ParseErrorKind::Syntax("qreg size must be positive".into()),
                    ));
                }
                self.qreg = Some((rname, size));
            }
            "creg" => {
                let (rname, _, _) = self.expect_ident("register name")?;
                self.expect(Tok::LBracket, "`[`")?;
                let size = self.expect_uint("register size")?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::Semi, "`;`")?;
                self.cregs.push((rname, size));
            }
            "measure" => {
                let (qname, qidx, aline, acol) = self.parse_arg()?;
                self.expect(Tok::Arrow, "`->`")?;
                let (cname, cidx, cline, ccol) = self.parse_arg()?;
                self.expect(Tok::Semi, "`;`")?;
                let creg = self.cregs.iter().find(|(n, _)| *n == cname).cloned();
                let (_, csize) =
                    creg.ok_or_else(|| err(cline, ccol, ParseErrorKind::UnknownRegister(cname)))?;
                match (qidx, cidx) {
                    (Some(qi), Some(ci)) => {
                        if ci >= csize {
                            return Err(err(
                                cline,
                                ccol,
                                ParseErrorKind::Syntax(format!(
                                    "classical index {ci} out of range for size {csize}"
                                )),
                            ));
                        }
                        let q = self.resolve_qubit(&qname, qi, aline, acol)?;
                        self.gates.push(GateOp::one(GateKind::Measure, q));
                    }
                    (None, None) => {
                        // `measure q -> c;` broadcast form.
                        let size = self.qreg.as_ref().map(|(_, s)| *s).unwrap_or(0);
                        for q in 0..size {
                            let q = self.resolve_qubit(&qname, q, aline, acol)?;
                            self.gates.push(GateOp::one(GateKind::Measure, q));
                        }
                    }
                    _ => {
                        return Err(err(
                            aline,
                            acol,
                            ParseErrorKind::Syntax(
                                "measure arguments must both be indexed or both bare".into(),
                            ),
                        ))
                    }
                }
            }
            "barrier" => {
                let mut args = Vec::new();
                loop {
                    args.push(self.parse_arg()?);
                    match self.next() {
                        Some(s) if s.tok == Tok::Comma => continue,
                        Some(s) if s.tok == Tok::Semi => break,
                        _ => return self.syntax("expected `,` or `;` after barrier"),
                    }
                }
                // Multi-qubit barriers expand to one per qubit; they are
                // scheduling-transparent either way.
                for (name, idx, aline, acol) in args {
                    match idx {
                        Some(i) => {
                            let q = self.resolve_qubit(&name, i, aline, acol)?;
                            self.gates.push(GateOp::one(GateKind::Barrier, q));
                        }
                        None => {
                            let size = self.qreg.as_ref().map(|(_, s)| *s).unwrap_or(0);
                            for q in 0..size {
                                let q = self.resolve_qubit(&name, q, aline, acol)?;
                                self.gates.push(GateOp::one(GateKind::Barrier, q));
                            }
                        }
                    }
                }
            }
            _ => self.parse_gate(name, line, col)?,
        }
        Ok(())
    }
}

/// Parse an OpenQASM 2.0 program (restricted subset) into a [`Circuit`].
pub fn parse_qasm(text: &str) -> Result<Circuit, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        qreg: None,
        cregs: Vec::new(),
        gates: Vec::new(),
    };
    while p.peek().is_some() {
        p.parse_statement()?;
    }
    let (_, size) = p
        .qreg
        .clone()
        .ok_or_else(|| err(1, 1, ParseErrorKind::MissingQreg))?;
    Circuit::new(size, p.gates, "qasm")
        .map_err(|e| err(1, 1, ParseErrorKind::Syntax(e.to_string())))
}
