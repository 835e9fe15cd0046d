//! Textual form of the gate-level IR.
//!
//! ```text
//! qcircuit @main() {
//!   %0 = qalloc
//!   %1 = h %0
//!   %2 = qalloc
//!   %3, %4 = x [%1] %2
//!   %5 = measure %3
//!   %6 = measure %4
//!   return () (%5, %6)
//! }
//! ```

use std::fmt::{self, Write};

use super::{Block, Circuit, Gate, Op, QcModule, Value};

fn list(vs: &[Value]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_ops(out: &mut String, ops: &[Op], depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    for op in ops {
        match op {
            Op::Alloc { out: v } => writeln!(out, "{pad}{v} = qalloc")?,
            Op::Free { q } => writeln!(out, "{pad}qfree {q}")?,
            Op::FreeZ { q } => writeln!(out, "{pad}qfreez {q}")?,
            Op::Measure { q, out: b } => writeln!(out, "{pad}{b} = measure {q}")?,
            Op::Gate { gate, controls, targets, outs } => {
                write!(out, "{pad}{} = {gate}", list(outs))?;
                if !controls.is_empty() {
                    write!(out, " [{}]", list(controls))?;
                }
                writeln!(out, " {}", list(targets))?;
            }
            Op::If { cond, qubits, then_block, else_block, outs } => {
                write!(out, "{pad}")?;
                if !outs.is_empty() {
                    write!(out, "{} = ", list(outs))?;
                }
                writeln!(out, "if {cond} ({}) {{", list(qubits))?;
                write_block(out, then_block, depth + 1)?;
                writeln!(out, "{pad}}} else {{")?;
                write_block(out, else_block, depth + 1)?;
                writeln!(out, "{pad}}}")?;
            }
        }
    }
    Ok(())
}

fn write_block(out: &mut String, b: &Block, depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    writeln!(out, "{pad}^({}):", list(&b.args))?;
    write_ops(out, &b.ops, depth)?;
    writeln!(out, "{pad}yield {}", list(&b.yields))
}

pub fn print_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "qcircuit @{}({}) {{", c.name, list(&c.inputs)).unwrap();
    write_ops(&mut out, &c.ops, 1).unwrap();
    writeln!(out, "  return ({}) ({})", list(&c.ret_qubits), list(&c.ret_bits)).unwrap();
    out.push_str("}\n");
    out
}

/// Prints every circuit; the entry is marked with `entry`.
pub fn print_module(m: &QcModule) -> String {
    m.circuits
        .iter()
        .map(|c| {
            let text = print_circuit(c);
            if c.name == m.entry {
                format!("entry {text}")
            } else {
                text
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&print_circuit(self))
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Val(u32),
    Sym(String),
    Ident(String),
    Num(f64),
    Punct(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line_no = ln + 1;
        let cs: Vec<char> = line.chars().collect();
        let mut i = 0;
        let err = |m: &str| ParseError { line: line_no, message: m.to_string() };
        while i < cs.len() {
            let c = cs[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '/' && cs.get(i + 1) == Some(&'/') {
                break;
            } else if c == '%' || c == '@' {
                let start = i + 1;
                i += 1;
                while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                    i += 1;
                }
                let word: String = cs[start..i].iter().collect();
                if c == '%' {
                    toks.push((Tok::Val(word.parse().map_err(|_| err("bad value name"))?), line_no));
                } else {
                    toks.push((Tok::Sym(word), line_no));
                }
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(cs[start..i].iter().collect()), line_no));
            } else if c.is_ascii_digit() || c == '-' || c == '.' {
                let start = i;
                i += 1;
                while i < cs.len()
                    && (cs[i].is_ascii_alphanumeric() || cs[i] == '.' || ((cs[i] == '-' || cs[i] == '+') && matches!(cs[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let word: String = cs[start..i].iter().collect();
                toks.push((Tok::Num(word.parse().map_err(|_| err(&format!("bad number '{word}'")))?), line_no));
            } else if "()[]{},=:^".contains(c) {
                toks.push((Tok::Punct(c), line_no));
                i += 1;
            } else {
                return Err(err(&format!("unexpected character '{c}'")));
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    max_value: u32,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        match self.next() {
            Some(Tok::Punct(d)) if d == c => Ok(()),
            other => self.err(format!("expected '{c}', found {other:?}")),
        }
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn keyword(&mut self, k: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(Tok::Ident(s)) if s == k => Ok(()),
            other => self.err(format!("expected '{k}', found {other:?}")),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.next() {
            Some(Tok::Val(v)) => {
                self.max_value = self.max_value.max(v + 1);
                Ok(Value(v))
            }
            other => self.err(format!("expected a value, found {other:?}")),
        }
    }

    /// Comma-separated values up to (not including) a token that is not a value.
    fn values(&mut self) -> Result<Vec<Value>, ParseError> {
        let mut vs = Vec::new();
        if !matches!(self.peek(), Some(Tok::Val(_))) {
            return Ok(vs);
        }
        vs.push(self.value()?);
        while self.is_punct(',') {
            self.pos += 1;
            vs.push(self.value()?);
        }
        Ok(vs)
    }

    fn paren_values(&mut self) -> Result<Vec<Value>, ParseError> {
        self.punct('(')?;
        let vs = self.values()?;
        self.punct(')')?;
        Ok(vs)
    }

    fn circuit(&mut self) -> Result<Circuit, ParseError> {
        self.keyword("qcircuit")?;
        let name = match self.next() {
            Some(Tok::Sym(s)) => s,
            other => return self.err(format!("expected circuit name, found {other:?}")),
        };
        self.max_value = 0;
        let inputs = self.paren_values()?;
        self.punct('{')?;
        let ops = self.ops()?;
        self.keyword("return")?;
        let ret_qubits = self.paren_values()?;
        let ret_bits = self.paren_values()?;
        self.punct('}')?;
        Ok(Circuit { name, inputs, ops, ret_qubits, ret_bits, next_value: self.max_value })
    }

    fn ops(&mut self) -> Result<Vec<Op>, ParseError> {
        let mut ops = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Ident(k)) if k == "return" || k == "yield" => return Ok(ops),
                Some(Tok::Punct('}')) => return Ok(ops),
                None => return self.err("unexpected end of input"),
                _ => ops.push(self.op()?),
            }
        }
    }

    fn op(&mut self) -> Result<Op, ParseError> {
        match self.peek() {
            Some(Tok::Ident(k)) if k == "qfree" || k == "qfreez" => {
                let z = k == "qfreez";
                self.pos += 1;
                let q = self.value()?;
                return Ok(if z { Op::FreeZ { q } } else { Op::Free { q } });
            }
            Some(Tok::Ident(k)) if k == "if" => return self.if_op(vec![]),
            _ => {}
        }
        let outs = self.values()?;
        self.punct('=')?;
        let name = match self.next() {
            Some(Tok::Ident(s)) => s,
            other => return self.err(format!("expected an operation, found {other:?}")),
        };
        match name.as_str() {
            "qalloc" => match outs[..] {
                [out] => Ok(Op::Alloc { out }),
                _ => self.err("qalloc defines one value"),
            },
            "measure" => {
                let q = self.value()?;
                match outs[..] {
                    [out] => Ok(Op::Measure { q, out }),
                    _ => self.err("measure defines one value"),
                }
            }
            "if" => {
                self.pos -= 1;
                self.if_op(outs)
            }
            _ => {
                let param = if self.is_punct('(') {
                    self.pos += 1;
                    let t = match self.next() {
                        Some(Tok::Num(x)) => x,
                        other => return self.err(format!("expected an angle, found {other:?}")),
                    };
                    self.punct(')')?;
                    Some(t)
                } else {
                    None
                };
                let Some(gate) = Gate::from_name(&name, param) else {
                    return self.err(format!("unknown gate '{name}'"));
                };
                let controls = if self.is_punct('[') {
                    self.pos += 1;
                    let c = self.values()?;
                    self.punct(']')?;
                    c
                } else {
                    vec![]
                };
                let targets = self.values()?;
                if targets.len() != gate.num_targets() || outs.len() != controls.len() + targets.len() {
                    return self.err(format!("wrong operand count for {name}"));
                }
                Ok(Op::Gate { gate, controls, targets, outs })
            }
        }
    }

    fn if_op(&mut self, outs: Vec<Value>) -> Result<Op, ParseError> {
        self.keyword("if")?;
        let cond = self.value()?;
        let qubits = self.paren_values()?;
        self.punct('{')?;
        let then_block = self.block()?;
        self.punct('}')?;
        self.keyword("else")?;
        self.punct('{')?;
        let else_block = self.block()?;
        self.punct('}')?;
        Ok(Op::If { cond, qubits, then_block, else_block, outs })
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        self.punct('^')?;
        let args = self.paren_values()?;
        self.punct(':')?;
        let ops = self.ops()?;
        self.keyword("yield")?;
        let yields = self.values()?;
        Ok(Block { args, ops, yields })
    }
}

pub fn parse_module(src: &str) -> Result<QcModule, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, max_value: 0 };
    let mut circuits = Vec::new();
    let mut entry = None;
    while p.peek().is_some() {
        if p.peek() == Some(&Tok::Ident("entry".into())) && p.peek_at(1) == Some(&Tok::Ident("qcircuit".into())) {
            p.pos += 1;
            let c = p.circuit()?;
            entry = Some(c.name.clone());
            circuits.push(c);
        } else {
            circuits.push(p.circuit()?);
        }
    }
    let entry = match (entry, circuits.len()) {
        (Some(e), _) => e,
        (None, 1) => circuits[0].name.clone(),
        _ => return Err(ParseError { line: 0, message: "no entry circuit".into() }),
    };
    Ok(QcModule { circuits, entry })
}

pub fn parse_circuit(src: &str) -> Result<Circuit, ParseError> {
    let mut m = parse_module(src)?;
    if m.circuits.len() != 1 {
        return Err(ParseError { line: 0, message: "expected exactly one circuit".into() });
    }
    Ok(m.circuits.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::wires::{WOp, WireCircuit};
    use crate::circuit::GateOp;

    #[test]
    fn roundtrip() {
        let w = WireCircuit {
            num_inputs: 2,
            num_wires: 3,
            num_bits: 1,
            ops: vec![
                WOp::Gate(GateOp::single(Gate::H, 0)),
                WOp::Gate(GateOp::new(Gate::P(-0.25), vec![0], vec![1])),
                WOp::Alloc(2),
                WOp::Gate(GateOp::new(Gate::Swap, vec![2], vec![0, 1])),
                WOp::Measure { q: 2, bit: 0 },
                WOp::If { bit: 0, then_ops: vec![WOp::Gate(GateOp::single(Gate::Sdg, 1))], else_ops: vec![] },
            ],
            ret_qubits: vec![0, 1],
            ret_bits: vec![0],
        };
        let c = w.to_ssa("t");
        let text = print_circuit(&c);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(back, c, "{text}");
        let m = QcModule::single(c);
        assert_eq!(parse_module(&print_module(&m)).unwrap(), m);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_circuit("qcircuit @t() { %0 = frob %1\n return () () }").is_err());
        assert!(parse_circuit("qcircuit @t() {").is_err());
    }
}
