//! Structural checks for gate-level circuits: SSA definitions, linear qubit
//! use, operand kinds and arities.

use std::collections::HashMap;

use super::{Block, Circuit, Op, QcModule, Value};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{circuit}: op {path}: {message}")]
pub struct VerifyError {
    pub circuit: String,
    pub path: String,
    pub message: String,
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Kind {
    Qubit,
    Bit,
}

struct Scope {
    kinds: HashMap<Value, Kind>,
    /// Qubit values defined in this scope and not yet consumed.
    live: Vec<Value>,
}

struct Verifier<'a> {
    circuit: &'a str,
    kinds: HashMap<Value, Kind>,
    consumed: HashMap<Value, String>,
}

impl<'a> Verifier<'a> {
    fn err<T>(&self, path: &str, message: impl Into<String>) -> Result<T, VerifyError> {
        Err(VerifyError { circuit: self.circuit.to_string(), path: path.to_string(), message: message.into() })
    }

    fn define(&mut self, scope: &mut Scope, v: Value, k: Kind, path: &str) -> Result<(), VerifyError> {
        if self.kinds.insert(v, k).is_some() {
            return self.err(path, format!("value {v} defined twice"));
        }
        scope.kinds.insert(v, k);
        if k == Kind::Qubit {
            scope.live.push(v);
        }
        Ok(())
    }

    fn consume(&mut self, scope: &mut Scope, v: Value, path: &str) -> Result<(), VerifyError> {
        match scope.kinds.get(&v) {
            None => return self.err(path, format!("qubit {v} is not visible here")),
            Some(Kind::Bit) => return self.err(path, format!("{v} is a bit, expected a qubit")),
            Some(Kind::Qubit) => {}
        }
        if let Some(prev) = self.consumed.insert(v, path.to_string()) {
            return self.err(path, format!("qubit {v} used more than once (first use at op {prev})"));
        }
        scope.live.retain(|&x| x != v);
        Ok(())
    }

    fn bit(&self, scope: &Scope, v: Value, path: &str) -> Result<(), VerifyError> {
        match scope.kinds.get(&v) {
            Some(Kind::Bit) => Ok(()),
            Some(Kind::Qubit) => self.err(path, format!("{v} is a qubit, expected a bit")),
            None => self.err(path, format!("bit {v} is not defined")),
        }
    }

    fn ops(&mut self, scope: &mut Scope, ops: &[Op], prefix: &str) -> Result<(), VerifyError> {
        for (i, op) in ops.iter().enumerate() {
            let path = if prefix.is_empty() { i.to_string() } else { format!("{prefix}.{i}") };
            match op {
                Op::Alloc { out } => self.define(scope, *out, Kind::Qubit, &path)?,
                Op::Free { q } | Op::FreeZ { q } => self.consume(scope, *q, &path)?,
                Op::Measure { q, out } => {
                    self.consume(scope, *q, &path)?;
                    self.define(scope, *out, Kind::Bit, &path)?;
                }
                Op::Gate { gate, controls, targets, outs } => {
                    if targets.len() != gate.num_targets() {
                        return self.err(&path, format!("{} expects {} targets, got {}", gate.name(), gate.num_targets(), targets.len()));
                    }
                    if outs.len() != controls.len() + targets.len() {
                        return self.err(&path, "gate result count differs from operand count");
                    }
                    let mut seen = Vec::new();
                    for &q in controls.iter().chain(targets) {
                        if seen.contains(&q) {
                            return self.err(&path, format!("qubit {q} appears twice in one gate"));
                        }
                        seen.push(q);
                        self.consume(scope, q, &path)?;
                    }
                    for &o in outs {
                        self.define(scope, o, Kind::Qubit, &path)?;
                    }
                }
                Op::If { cond, qubits, then_block, else_block, outs } => {
                    self.bit(scope, *cond, &path)?;
                    for &q in qubits {
                        self.consume(scope, q, &path)?;
                    }
                    self.block(then_block, qubits.len(), scope, &format!("{path}.then"))?;
                    self.block(else_block, qubits.len(), scope, &format!("{path}.else"))?;
                    if outs.len() != qubits.len() {
                        return self.err(&path, "conditional result count differs from operand count");
                    }
                    for &o in outs {
                        self.define(scope, o, Kind::Qubit, &path)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn block(&mut self, b: &Block, arity: usize, outer: &Scope, path: &str) -> Result<(), VerifyError> {
        if b.args.len() != arity || b.yields.len() != arity {
            return self.err(path, "branch arity differs from conditional operands");
        }
        let bits = outer.kinds.iter().filter(|(_, k)| **k == Kind::Bit).map(|(v, k)| (*v, *k)).collect();
        let mut scope = Scope { kinds: bits, live: vec![] };
        for &a in &b.args {
            self.define(&mut scope, a, Kind::Qubit, path)?;
        }
        self.ops(&mut scope, &b.ops, path)?;
        for &y in &b.yields {
            self.consume(&mut scope, y, &format!("{path}.yield"))?;
        }
        if let Some(v) = scope.live.first() {
            return self.err(path, format!("qubit {v} is never consumed"));
        }
        Ok(())
    }
}

pub fn verify_circuit(c: &Circuit) -> Result<(), VerifyError> {
    let mut v = Verifier { circuit: &c.name, kinds: HashMap::new(), consumed: HashMap::new() };
    let mut scope = Scope { kinds: HashMap::new(), live: vec![] };
    for &i in &c.inputs {
        v.define(&mut scope, i, Kind::Qubit, "input")?;
    }
    v.ops(&mut scope, &c.ops, "")?;
    for &q in &c.ret_qubits {
        v.consume(&mut scope, q, "return")?;
    }
    for &b in &c.ret_bits {
        v.bit(&scope, b, "return")?;
    }
    if let Some(q) = scope.live.first() {
        return v.err("end", format!("qubit {q} is never consumed"));
    }
    Ok(())
}

pub fn verify_module(m: &QcModule) -> Result<(), VerifyError> {
    if !m.circuits.iter().any(|c| c.name == m.entry) {
        return Err(VerifyError { circuit: m.entry.clone(), path: "module".into(), message: "entry circuit missing".into() });
    }
    m.circuits.iter().try_for_each(verify_circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn accepts_and_rejects() {
        let mut c = Circuit::new("t");
        let a = c.fresh();
        let b = c.fresh();
        c.ops.push(Op::Alloc { out: a });
        c.ops.push(Op::Gate { gate: Gate::H, controls: vec![], targets: vec![a], outs: vec![b] });
        let m = c.fresh();
        c.ops.push(Op::Measure { q: b, out: m });
        c.ret_bits = vec![m];
        assert!(verify_circuit(&c).is_ok());

        let mut dangling = c.clone();
        dangling.ops.truncate(2);
        dangling.ret_bits.clear();
        let e = verify_circuit(&dangling).unwrap_err();
        assert!(e.message.contains("never consumed"), "{e}");

        let mut twice = Circuit::new("t");
        let a = twice.fresh();
        let o1 = twice.fresh();
        let o2 = twice.fresh();
        twice.ops.push(Op::Alloc { out: a });
        twice.ops.push(Op::Gate { gate: Gate::X, controls: vec![a], targets: vec![a], outs: vec![o1, o2] });
        let e = verify_circuit(&twice).unwrap_err();
        assert!(e.message.contains("twice"), "{e}");
    }
}
