//! Reader for the OpenQASM 3 subset that [`emit_qasm3`](super::emit_qasm3)
//! produces. Used to check that register allocation preserves behavior.
//!
//! A qubit index gets a fresh wire at its first use after the declaration or
//! a reset. `reset` of a live qubit is read as a discard of a qubit in |0>,
//! which the simulator checks. All bits of `c` are returned, in order.

use super::BackendError;
use crate::circuit::{Gate, GateOp, QcModule, WOp, WireCircuit};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str,
    Punct(&'static str),
}

const PUNCT: [&str; 13] = ["==", "->", ";", ",", "[", "]", "(", ")", "{", "}", "@", "=", "-"];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, BackendError> {
    let mut toks = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line_no = i + 1;
        let err = |m: String| BackendError::Parse { line: line_no, message: m };
        let line = line.split("//").next().unwrap_or("");
        let b = line.as_bytes();
        let mut j = 0;
        while j < b.len() {
            let c = b[j] as char;
            if c.is_whitespace() {
                j += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let s = j;
                while j < b.len() && ((b[j] as char).is_ascii_alphanumeric() || b[j] == b'_') {
                    j += 1;
                }
                toks.push((Tok::Ident(line[s..j].to_string()), line_no));
            } else if c.is_ascii_digit() || c == '.' {
                let s = j;
                while j < b.len() && ((b[j] as char).is_ascii_digit() || b[j] == b'.') {
                    j += 1;
                }
                if j < b.len() && (b[j] == b'e' || b[j] == b'E') {
                    j += 1;
                    if j < b.len() && (b[j] == b'-' || b[j] == b'+') {
                        j += 1;
                    }
                    while j < b.len() && (b[j] as char).is_ascii_digit() {
                        j += 1;
                    }
                }
                let v = line[s..j].parse().map_err(|_| err(format!("bad number `{}`", &line[s..j])))?;
                toks.push((Tok::Num(v), line_no));
            } else if c == '"' {
                let end = line[j + 1..].find('"').ok_or_else(|| err("unterminated string".into()))?;
                toks.push((Tok::Str, line_no));
                j += end + 2;
            } else if let Some(p) = PUNCT.iter().find(|p| line[j..].starts_with(**p)) {
                toks.push((Tok::Punct(p), line_no));
                j += p.len();
            } else {
                return Err(err(format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(toks)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Slot {
    /// Unused since the declaration or the last reset.
    Fresh,
    Live(usize),
    Measured,
}

struct Reader {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    qubits: Vec<Slot>,
    /// Bit index held by each slot of `c`.
    slots: Vec<Option<usize>>,
    num_wires: usize,
    num_bits: usize,
    /// Allocations made while parsing the current top-level statement. They
    /// are placed before it, so none happens inside a conditional.
    hoisted: Vec<WOp>,
}

impl Reader {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.1)
    }

    fn err<T>(&self, m: impl Into<String>) -> Result<T, BackendError> {
        Err(BackendError::Parse { line: self.line(), message: m.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.peek() == Some(&Tok::Punct(punct(p))) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), BackendError> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(format!("expected `{p}`"))
        }
    }

    fn ident(&mut self) -> Result<String, BackendError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                self.err("expected an identifier")
            }
        }
    }

    fn keyword(&mut self, k: &str) -> Result<(), BackendError> {
        if self.ident()? == k {
            Ok(())
        } else {
            self.pos -= 1;
            self.err(format!("expected `{k}`"))
        }
    }

    fn int(&mut self) -> Result<usize, BackendError> {
        match self.next() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v >= 0.0 => Ok(v as usize),
            _ => {
                self.pos -= 1;
                self.err("expected an integer")
            }
        }
    }

    fn number(&mut self) -> Result<f64, BackendError> {
        let neg = self.eat("-");
        match self.next() {
            Some(Tok::Num(v)) => Ok(if neg { -v } else { v }),
            _ => {
                self.pos -= 1;
                self.err("expected a number")
            }
        }
    }

    /// `name[i]`, checked against the declared size.
    fn index(&mut self, reg: &str, size: usize) -> Result<usize, BackendError> {
        self.keyword(reg)?;
        self.expect("[")?;
        let i = self.int()?;
        self.expect("]")?;
        if i >= size {
            return self.err(format!("{reg}[{i}] is out of range"));
        }
        Ok(i)
    }

    fn qubit(&mut self) -> Result<usize, BackendError> {
        let i = self.index("q", self.qubits.len())?;
        self.qubit_at(i)
    }

    fn qubit_at(&mut self, i: usize) -> Result<usize, BackendError> {
        match self.qubits[i] {
            Slot::Live(w) => Ok(w),
            Slot::Fresh => {
                let w = self.num_wires;
                self.num_wires += 1;
                self.hoisted.push(WOp::Alloc(w));
                self.qubits[i] = Slot::Live(w);
                Ok(w)
            }
            Slot::Measured => self.err(format!("q[{i}] is used after measurement without a reset")),
        }
    }

    fn header(&mut self) -> Result<(), BackendError> {
        self.keyword("OPENQASM")?;
        match self.next() {
            Some(Tok::Num(v)) if v == 3.0 => {}
            _ => return self.err("expected version 3.0"),
        }
        self.expect(";")?;
        while self.peek() == Some(&Tok::Ident("include".into())) {
            self.pos += 1;
            if !matches!(self.next(), Some(Tok::Str)) {
                return self.err("expected a file name");
            }
            self.expect(";")?;
        }
        Ok(())
    }

    fn declarations(&mut self) -> Result<(), BackendError> {
        loop {
            let kw = match self.peek() {
                Some(Tok::Ident(k)) if k == "qubit" || k == "bit" => k.clone(),
                _ => return Ok(()),
            };
            self.pos += 1;
            self.expect("[")?;
            let n = self.int()?;
            self.expect("]")?;
            let name = self.ident()?;
            self.expect(";")?;
            match (kw.as_str(), name.as_str()) {
                ("qubit", "q") => self.qubits = vec![Slot::Fresh; n],
                ("bit", "c") => self.slots = vec![None; n],
                _ => return self.err(format!("unsupported register `{name}`")),
            }
        }
    }

    fn statements(&mut self, nested: bool) -> Result<Vec<WOp>, BackendError> {
        let mut ops = Vec::new();
        while let Some(t) = self.peek() {
            if t == &Tok::Punct("}") {
                break;
            }
            if nested {
                self.statement(&mut ops, true)?;
            } else {
                let mut stmt = Vec::new();
                self.statement(&mut stmt, false)?;
                ops.append(&mut self.hoisted);
                ops.append(&mut stmt);
            }
        }
        Ok(ops)
    }

    fn block(&mut self) -> Result<Vec<WOp>, BackendError> {
        if self.eat("{") {
            let ops = self.statements(true)?;
            self.expect("}")?;
            Ok(ops)
        } else {
            let mut ops = Vec::new();
            self.statement(&mut ops, true)?;
            Ok(ops)
        }
    }

    fn statement(&mut self, ops: &mut Vec<WOp>, nested: bool) -> Result<(), BackendError> {
        let name = self.ident()?;
        match name.as_str() {
            "reset" | "measure" if nested => self.err(format!("`{name}` inside a conditional is not supported")),
            "reset" => {
                let i = self.index("q", self.qubits.len())?;
                self.expect(";")?;
                if let Slot::Live(w) = self.qubits[i] {
                    ops.push(WOp::FreeZ(w));
                }
                self.qubits[i] = Slot::Fresh;
                Ok(())
            }
            "measure" => {
                let i = self.index("q", self.qubits.len())?;
                let q = self.qubit_at(i)?;
                self.expect("->")?;
                let j = self.index("c", self.slots.len())?;
                self.expect(";")?;
                self.measure(ops, i, q, j);
                Ok(())
            }
            "c" => {
                self.pos -= 1;
                let j = self.index("c", self.slots.len())?;
                self.expect("=")?;
                if self.peek() == Some(&Tok::Ident("measure".into())) {
                    if nested {
                        return self.err("`measure` inside a conditional is not supported");
                    }
                    self.pos += 1;
                    let i = self.index("q", self.qubits.len())?;
                    let q = self.qubit_at(i)?;
                    self.expect(";")?;
                    self.measure(ops, i, q, j);
                } else {
                    let src = self.index("c", self.slots.len())?;
                    self.expect(";")?;
                    if self.slots[src].is_none() {
                        return self.err(format!("c[{src}] is read before it is written"));
                    }
                    self.slots[j] = self.slots[src];
                }
                Ok(())
            }
            "if" => {
                self.expect("(")?;
                let j = self.index("c", self.slots.len())?;
                self.expect("==")?;
                let v = self.int()?;
                self.expect(")")?;
                let bit = match self.slots[j] {
                    Some(b) => b,
                    None => return self.err(format!("c[{j}] is read before it is written")),
                };
                let body = self.block()?;
                let other = if self.peek() == Some(&Tok::Ident("else".into())) {
                    self.pos += 1;
                    self.block()?
                } else {
                    vec![]
                };
                let (then_ops, else_ops) = match v {
                    1 => (body, other),
                    0 => (other, body),
                    _ => return self.err("a bit compares only with 0 or 1"),
                };
                ops.push(WOp::If { bit, then_ops, else_ops });
                Ok(())
            }
            _ => {
                self.pos -= 1;
                let g = self.gate()?;
                ops.push(WOp::Gate(g));
                Ok(())
            }
        }
    }

    fn measure(&mut self, ops: &mut Vec<WOp>, i: usize, q: usize, j: usize) {
        let bit = self.num_bits;
        self.num_bits += 1;
        ops.push(WOp::Measure { q, bit });
        self.qubits[i] = Slot::Measured;
        self.slots[j] = Some(bit);
    }

    fn gate(&mut self) -> Result<GateOp, BackendError> {
        let mut controls = 0;
        let mut name = self.ident()?;
        while name == "ctrl" {
            controls += if self.eat("(") {
                let k = self.int()?;
                self.expect(")")?;
                k
            } else {
                1
            };
            self.expect("@")?;
            name = self.ident()?;
        }
        let (base, extra) = match name.as_str() {
            "cx" | "cy" | "cz" | "ch" | "cp" | "cswap" => (&name[1..], 1),
            "ccx" => ("x", 2),
            n => (n, 0),
        };
        controls += extra;
        let param = if self.eat("(") {
            let v = self.number()?;
            self.expect(")")?;
            Some(v)
        } else {
            None
        };
        let Some(gate) = Gate::from_name(base, param) else {
            return self.err(format!("unsupported gate `{name}`"));
        };
        let mut qs = vec![self.qubit()?];
        while self.eat(",") {
            qs.push(self.qubit()?);
        }
        self.expect(";")?;
        if qs.len() != controls + gate.num_targets() {
            return self.err(format!("`{name}` takes {} qubits", controls + gate.num_targets()));
        }
        let targets = qs.split_off(controls);
        Ok(GateOp::new(gate, qs, targets))
    }
}

fn punct(p: &str) -> &'static str {
    PUNCT.into_iter().find(|q| *q == p).expect("known punctuation")
}

/// Parses emitted OpenQASM 3 back into a circuit module with entry `main`.
pub fn read_qasm3(src: &str) -> Result<QcModule, BackendError> {
    let mut r =
        Reader { toks: lex(src)?, pos: 0, qubits: vec![], slots: vec![], num_wires: 0, num_bits: 0, hoisted: vec![] };
    r.header()?;
    r.declarations()?;
    let ops = r.statements(false)?;
    if r.pos < r.toks.len() {
        return r.err("unexpected `}`");
    }
    let mut ret_bits = Vec::new();
    for (j, s) in r.slots.iter().enumerate() {
        match s {
            Some(b) => ret_bits.push(*b),
            None => return r.err(format!("c[{j}] is never written")),
        }
    }
    let ret_qubits = r.qubits.iter().filter_map(|s| if let Slot::Live(w) = s { Some(*w) } else { None }).collect();
    let w = WireCircuit { num_inputs: 0, num_wires: r.num_wires, num_bits: r.num_bits, ops, ret_qubits, ret_bits };
    Ok(QcModule::single(w.to_ssa("main")))
}
