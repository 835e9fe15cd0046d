//! Wire view of a circuit: qubit values collapsed onto fixed wire indices.
//! Inputs occupy wires `0..num_inputs`; each allocation takes the next wire.

use std::collections::HashMap;

use super::{Block, Circuit, GateOp, Op, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum WOp {
    Alloc(usize),
    Free(usize),
    FreeZ(usize),
    Measure { q: usize, bit: usize },
    Gate(GateOp),
    If { bit: usize, then_ops: Vec<WOp>, else_ops: Vec<WOp> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WireCircuit {
    pub num_inputs: usize,
    pub num_wires: usize,
    pub num_bits: usize,
    pub ops: Vec<WOp>,
    pub ret_qubits: Vec<usize>,
    pub ret_bits: Vec<usize>,
}

impl WireCircuit {
    /// A circuit of gates over `n` input wires, all returned in order.
    pub fn from_gates(n: usize, gates: &[GateOp]) -> Self {
        WireCircuit {
            num_inputs: n,
            num_wires: n,
            num_bits: 0,
            ops: gates.iter().cloned().map(WOp::Gate).collect(),
            ret_qubits: (0..n).collect(),
            ret_bits: vec![],
        }
    }

    pub fn gate_count(&self) -> usize {
        fn count(ops: &[WOp]) -> usize {
            ops.iter()
                .map(|op| match op {
                    WOp::Gate(_) => 1,
                    WOp::If { then_ops, else_ops, .. } => count(then_ops) + count(else_ops),
                    _ => 0,
                })
                .sum()
        }
        count(&self.ops)
    }

    pub fn has_conditionals(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, WOp::If { .. }))
    }

    /// Rebuilds the SSA form.
    pub fn to_ssa(&self, name: &str) -> Circuit {
        let mut c = Circuit::new(name);
        let mut cur: Vec<Option<Value>> = vec![None; self.num_wires];
        let mut bits: Vec<Option<Value>> = vec![None; self.num_bits];
        for w in 0..self.num_inputs {
            let v = c.fresh();
            c.inputs.push(v);
            cur[w] = Some(v);
        }
        let ops = ssa_ops(&mut c, &self.ops, &mut cur, &mut bits);
        c.ops = ops;
        c.ret_qubits = self.ret_qubits.iter().map(|&w| cur[w].expect("returned wire is live")).collect();
        c.ret_bits = self.ret_bits.iter().map(|&b| bits[b].expect("returned bit is measured")).collect();
        c
    }
}

fn take(cur: &mut [Option<Value>], w: usize) -> Value {
    cur[w].take().unwrap_or_else(|| panic!("wire {w} is not live"))
}

fn ssa_ops(c: &mut Circuit, ops: &[WOp], cur: &mut Vec<Option<Value>>, bits: &mut Vec<Option<Value>>) -> Vec<Op> {
    let mut out = Vec::new();
    for op in ops {
        match op {
            WOp::Alloc(w) => {
                assert!(cur[*w].is_none(), "wire {w} allocated while live");
                let v = c.fresh();
                cur[*w] = Some(v);
                out.push(Op::Alloc { out: v });
            }
            WOp::Free(w) => out.push(Op::Free { q: take(cur, *w) }),
            WOp::FreeZ(w) => out.push(Op::FreeZ { q: take(cur, *w) }),
            WOp::Measure { q, bit } => {
                let qv = take(cur, *q);
                let b = c.fresh();
                bits[*bit] = Some(b);
                out.push(Op::Measure { q: qv, out: b });
            }
            WOp::Gate(g) => {
                let controls: Vec<Value> = g.controls.iter().map(|&w| take(cur, w)).collect();
                let targets: Vec<Value> = g.targets.iter().map(|&w| take(cur, w)).collect();
                let mut outs = Vec::new();
                for &w in g.controls.iter().chain(&g.targets) {
                    let v = c.fresh();
                    cur[w] = Some(v);
                    outs.push(v);
                }
                out.push(Op::Gate { gate: g.gate, controls, targets, outs });
            }
            WOp::If { bit, then_ops, else_ops } => {
                let cond = bits[*bit].expect("condition bit is measured");
                let live: Vec<usize> = (0..cur.len()).filter(|&w| cur[w].is_some()).collect();
                let used = touched_wires(then_ops).into_iter().chain(touched_wires(else_ops)).collect::<std::collections::BTreeSet<_>>();
                let passed: Vec<usize> = live.into_iter().filter(|w| used.contains(w)).collect();
                let qubits: Vec<Value> = passed.iter().map(|&w| take(cur, w)).collect();
                let branch = |body: &[WOp], c: &mut Circuit, bits: &mut Vec<Option<Value>>| {
                    let mut inner: Vec<Option<Value>> = vec![None; cur.len()];
                    let args: Vec<Value> = passed
                        .iter()
                        .map(|&w| {
                            let v = c.fresh();
                            inner[w] = Some(v);
                            v
                        })
                        .collect();
                    let ops = ssa_ops(c, body, &mut inner, bits);
                    let yields = passed.iter().map(|&w| take(&mut inner, w)).collect();
                    Block { args, ops, yields }
                };
                let then_block = branch(then_ops, c, bits);
                let else_block = branch(else_ops, c, bits);
                let outs: Vec<Value> = passed
                    .iter()
                    .map(|&w| {
                        let v = c.fresh();
                        cur[w] = Some(v);
                        v
                    })
                    .collect();
                out.push(Op::If { cond, qubits, then_block, else_block, outs });
            }
        }
    }
    out
}

/// Wires referenced anywhere in an op list.
pub fn touched_wires(ops: &[WOp]) -> Vec<usize> {
    let mut out = std::collections::BTreeSet::new();
    fn walk(ops: &[WOp], out: &mut std::collections::BTreeSet<usize>) {
        for op in ops {
            match op {
                WOp::Alloc(w) | WOp::Free(w) | WOp::FreeZ(w) => {
                    out.insert(*w);
                }
                WOp::Measure { q, .. } => {
                    out.insert(*q);
                }
                WOp::Gate(g) => out.extend(g.qubits()),
                WOp::If { then_ops, else_ops, .. } => {
                    walk(then_ops, out);
                    walk(else_ops, out);
                }
            }
        }
    }
    walk(ops, &mut out);
    out.into_iter().collect()
}

impl Circuit {
    /// Assigns wires: inputs first, then one fresh wire per allocation in
    /// program order.
    pub fn to_wires(&self) -> WireCircuit {
        let mut st = WireState { wire_of: HashMap::new(), bit_of: HashMap::new(), num_wires: 0, num_bits: 0 };
        for &v in &self.inputs {
            let w = st.num_wires;
            st.num_wires += 1;
            st.wire_of.insert(v, w);
        }
        let ops = st.ops(&self.ops);
        WireCircuit {
            num_inputs: self.inputs.len(),
            num_wires: st.num_wires,
            num_bits: st.num_bits,
            ops,
            ret_qubits: self.ret_qubits.iter().map(|v| st.wire_of[v]).collect(),
            ret_bits: self.ret_bits.iter().map(|v| st.bit_of[v]).collect(),
        }
    }
}

struct WireState {
    wire_of: HashMap<Value, usize>,
    bit_of: HashMap<Value, usize>,
    num_wires: usize,
    num_bits: usize,
}

impl WireState {
    fn wire(&self, v: &Value) -> usize {
        *self.wire_of.get(v).unwrap_or_else(|| panic!("qubit value {v} has no wire"))
    }

    fn ops(&mut self, ops: &[Op]) -> Vec<WOp> {
        let mut out = Vec::new();
        for op in ops {
            match op {
                Op::Alloc { out: v } => {
                    let w = self.num_wires;
                    self.num_wires += 1;
                    self.wire_of.insert(*v, w);
                    out.push(WOp::Alloc(w));
                }
                Op::Free { q } => out.push(WOp::Free(self.wire(q))),
                Op::FreeZ { q } => out.push(WOp::FreeZ(self.wire(q))),
                Op::Measure { q, out: b } => {
                    let bit = self.num_bits;
                    self.num_bits += 1;
                    self.bit_of.insert(*b, bit);
                    out.push(WOp::Measure { q: self.wire(q), bit });
                }
                Op::Gate { gate, controls, targets, outs } => {
                    let cw: Vec<usize> = controls.iter().map(|v| self.wire(v)).collect();
                    let tw: Vec<usize> = targets.iter().map(|v| self.wire(v)).collect();
                    for (o, w) in outs.iter().zip(cw.iter().chain(&tw)) {
                        self.wire_of.insert(*o, *w);
                    }
                    out.push(WOp::Gate(GateOp { gate: *gate, controls: cw, targets: tw }));
                }
                Op::If { cond, qubits, then_block, else_block, outs } => {
                    let ws: Vec<usize> = qubits.iter().map(|v| self.wire(v)).collect();
                    let branch = |b: &Block, st: &mut WireState| {
                        for (a, w) in b.args.iter().zip(&ws) {
                            st.wire_of.insert(*a, *w);
                        }
                        let ops = st.ops(&b.ops);
                        for (y, w) in b.yields.iter().zip(&ws) {
                            assert_eq!(st.wire(y), *w, "conditional branch must return each qubit to its wire");
                        }
                        ops
                    };
                    let then_ops = branch(then_block, self);
                    let else_ops = branch(else_block, self);
                    for (o, w) in outs.iter().zip(&ws) {
                        self.wire_of.insert(*o, *w);
                    }
                    out.push(WOp::If { bit: self.bit_of[cond], then_ops, else_ops });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn roundtrip_through_ssa() {
        let w = WireCircuit {
            num_inputs: 1,
            num_wires: 3,
            num_bits: 1,
            ops: vec![
                WOp::Alloc(1),
                WOp::Gate(GateOp::single(Gate::H, 1)),
                WOp::Gate(GateOp::cx(1, 0)),
                WOp::Measure { q: 1, bit: 0 },
                WOp::Alloc(2),
                WOp::If { bit: 0, then_ops: vec![WOp::Gate(GateOp::single(Gate::X, 2))], else_ops: vec![] },
                WOp::FreeZ(2),
            ],
            ret_qubits: vec![0],
            ret_bits: vec![0],
        };
        let c = w.to_ssa("t");
        assert_eq!(c.to_wires(), w);
    }
}
