//! Structural synthesis of classical functions into reversible circuits.
//!
//! XOR-linear parts stay as parities over existing wires; each AND gets a
//! fresh ancilla written by a Toffoli. Outputs are copied out with CNOTs and
//! every ancilla is uncomputed and freed in reverse allocation order.

use std::collections::BTreeSet;

use super::SynthError;
use crate::circuit::wires::WOp;
use crate::circuit::{Gate, GateOp};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LogicNode {
    Input(usize),
    Const(bool),
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Xor(NodeId, NodeId),
}

/// A combinational circuit over `num_inputs` bits.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LogicNetwork {
    pub num_inputs: usize,
    pub nodes: Vec<LogicNode>,
    pub outputs: Vec<NodeId>,
}

impl LogicNetwork {
    pub fn new(num_inputs: usize) -> Self {
        LogicNetwork { num_inputs, nodes: vec![], outputs: vec![] }
    }

    /// Adds a node, reusing an identical existing one.
    pub fn add(&mut self, n: LogicNode) -> NodeId {
        if let Some(i) = self.nodes.iter().position(|m| *m == n) {
            return i;
        }
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    pub fn input(&mut self, i: usize) -> NodeId {
        self.add(LogicNode::Input(i))
    }

    pub fn constant(&mut self, b: bool) -> NodeId {
        self.add(LogicNode::Const(b))
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        self.add(LogicNode::Not(a))
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.add(LogicNode::And(a, b))
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.add(LogicNode::Or(a, b))
    }

    pub fn xor(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.add(LogicNode::Xor(a, b))
    }

    /// Folds `op` over `ids`; `empty` is used for an empty list.
    pub fn reduce(&mut self, ids: &[NodeId], empty: bool, op: fn(&mut Self, NodeId, NodeId) -> NodeId) -> NodeId {
        match ids.split_first() {
            None => self.constant(empty),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &x| op(self, acc, x)),
        }
    }

    pub fn eval(&self, inputs: &[bool]) -> Vec<bool> {
        let mut v: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let x = match *n {
                LogicNode::Input(i) => inputs[i],
                LogicNode::Const(b) => b,
                LogicNode::Not(a) => !v[a],
                LogicNode::And(a, b) => v[a] && v[b],
                LogicNode::Or(a, b) => v[a] || v[b],
                LogicNode::Xor(a, b) => v[a] ^ v[b],
            };
            v.push(x);
        }
        self.outputs.iter().map(|&o| v[o]).collect()
    }
}

/// A value as the parity of some wires, possibly negated.
#[derive(Clone, Debug, PartialEq)]
struct Lin {
    wires: BTreeSet<usize>,
    negated: bool,
}

impl Lin {
    fn xor(&self, o: &Lin) -> Lin {
        Lin { wires: self.wires.symmetric_difference(&o.wires).copied().collect(), negated: self.negated ^ o.negated }
    }
}

struct Builder<'a> {
    next_wire: &'a mut usize,
    compute: Vec<WOp>,
    ancillas: Vec<usize>,
}

impl Builder<'_> {
    fn alloc(&mut self) -> usize {
        let w = *self.next_wire;
        *self.next_wire += 1;
        self.compute.push(WOp::Alloc(w));
        self.ancillas.push(w);
        w
    }

    fn gate(&mut self, g: GateOp) {
        self.compute.push(WOp::Gate(g));
    }

    /// A single wire holding `l` up to negation.
    fn single(&mut self, l: &Lin) -> (usize, bool) {
        if l.wires.len() == 1 {
            return (*l.wires.iter().next().unwrap(), l.negated);
        }
        let a = self.alloc();
        for &w in &l.wires {
            self.gate(GateOp::cx(w, a));
        }
        (a, l.negated)
    }

    /// A fresh ancilla holding `(a ^ na) & (b ^ nb)`.
    fn and(&mut self, (a, na): (usize, bool), (b, nb): (usize, bool)) -> usize {
        let t = self.alloc();
        let flips: Vec<usize> = [(a, na), (b, nb)].iter().filter(|(_, n)| *n).map(|(w, _)| *w).collect();
        for &w in &flips {
            self.gate(GateOp::single(Gate::X, w));
        }
        self.gate(GateOp::new(Gate::X, vec![a, b], vec![t]));
        for &w in &flips {
            self.gate(GateOp::single(Gate::X, w));
        }
        t
    }
}

fn constant_lin(b: bool) -> Lin {
    Lin { wires: BTreeSet::new(), negated: b }
}

/// Computes every output as a [`Lin`], recording compute gates in `b`.
fn compute(net: &LogicNetwork, x: &[usize], b: &mut Builder) -> Result<Vec<Lin>, SynthError> {
    if x.len() != net.num_inputs {
        return Err(SynthError::Internal(format!("network takes {} inputs, got {} wires", net.num_inputs, x.len())));
    }
    let mut vals: Vec<Lin> = Vec::with_capacity(net.nodes.len());
    for n in &net.nodes {
        let v = match *n {
            LogicNode::Input(i) => Lin { wires: BTreeSet::from([x[i]]), negated: false },
            LogicNode::Const(c) => constant_lin(c),
            LogicNode::Not(a) => Lin { negated: !vals[a].negated, ..vals[a].clone() },
            LogicNode::Xor(a, c) => vals[a].xor(&vals[c]),
            LogicNode::And(a, c) | LogicNode::Or(a, c) => {
                let or = matches!(n, LogicNode::Or(..));
                let (la, lc) = (vals[a].clone(), vals[c].clone());
                if la.wires.is_empty() || lc.wires.is_empty() {
                    // one side is a constant
                    let (k, other) = if la.wires.is_empty() { (la.negated, lc) } else { (lc.negated, la) };
                    match (or, k) {
                        (false, false) => constant_lin(false),
                        (false, true) | (true, false) => other,
                        (true, true) => constant_lin(true),
                    }
                } else if la.wires == lc.wires {
                    match (or, la.negated == lc.negated) {
                        (_, true) => la,
                        (false, false) => constant_lin(false),
                        (true, false) => constant_lin(true),
                    }
                } else {
                    let sa = b.single(&la);
                    let sc = b.single(&lc);
                    // a | c = !(!a & !c)
                    let (sa, sc) = if or { ((sa.0, !sa.1), (sc.0, !sc.1)) } else { (sa, sc) };
                    let t = b.and(sa, sc);
                    Lin { wires: BTreeSet::from([t]), negated: or }
                }
            }
        };
        vals.push(v);
    }
    Ok(net.outputs.iter().map(|&o| vals[o].clone()).collect())
}

fn uncompute(compute: &[WOp], ancillas: &[usize]) -> Vec<WOp> {
    let mut out: Vec<WOp> = compute
        .iter()
        .rev()
        .filter_map(|op| match op {
            WOp::Gate(g) => Some(WOp::Gate(g.adjoint())),
            _ => None,
        })
        .collect();
    out.extend(ancillas.iter().rev().map(|&a| WOp::FreeZ(a)));
    out
}

/// Ops for `|x>|y> -> |x>|y ^ f(x)>`, with the copy-out controlled on
/// `ctrls`. Ancillas are numbered from `*next_wire` upward.
pub fn embed_xor(
    net: &LogicNetwork,
    x: &[usize],
    y: &[usize],
    ctrls: &[usize],
    next_wire: &mut usize,
) -> Result<Vec<WOp>, SynthError> {
    if y.len() != net.outputs.len() {
        return Err(SynthError::Internal(format!("network has {} outputs, got {} wires", net.outputs.len(), y.len())));
    }
    let mut b = Builder { next_wire, compute: vec![], ancillas: vec![] };
    let outs = compute(net, x, &mut b)?;
    let mut ops = b.compute.clone();
    for (l, &t) in outs.iter().zip(y) {
        for &w in &l.wires {
            ops.push(WOp::Gate(GateOp::new(Gate::X, [ctrls, &[w]].concat(), vec![t])));
        }
        if l.negated {
            ops.push(WOp::Gate(GateOp::new(Gate::X, ctrls.to_vec(), vec![t])));
        }
    }
    ops.extend(uncompute(&b.compute, &b.ancillas));
    Ok(ops)
}

/// Ops for `|x> -> (-1)^f(x) |x>` for a single-output network, applied only
/// when every wire in `ctrls` is 1. A parity output becomes Z gates; anything
/// else is kicked back through a |-> ancilla.
pub fn embed_sign(
    net: &LogicNetwork,
    x: &[usize],
    ctrls: &[usize],
    next_wire: &mut usize,
) -> Result<Vec<WOp>, SynthError> {
    if net.outputs.len() != 1 {
        return Err(SynthError::Unsupported(format!(
            "sign embedding needs a single output bit, not {}",
            net.outputs.len()
        )));
    }
    let mut b = Builder { next_wire, compute: vec![], ancillas: vec![] };
    let l = compute(net, x, &mut b)?.remove(0);
    if b.ancillas.is_empty() {
        let mut ops: Vec<WOp> =
            l.wires.iter().map(|&w| WOp::Gate(GateOp::new(Gate::Z, ctrls.to_vec(), vec![w]))).collect();
        if l.negated {
            if let Some((&last, rest)) = ctrls.split_last() {
                ops.push(WOp::Gate(GateOp::new(Gate::Z, rest.to_vec(), vec![last])));
            }
        }
        return Ok(ops);
    }
    let minus = *b.next_wire;
    *b.next_wire += 1;
    let mut ops = vec![WOp::Alloc(minus), WOp::Gate(GateOp::single(Gate::X, minus)), WOp::Gate(GateOp::single(Gate::H, minus))];
    ops.extend(b.compute.iter().cloned());
    for &w in &l.wires {
        ops.push(WOp::Gate(GateOp::new(Gate::X, [ctrls, &[w]].concat(), vec![minus])));
    }
    if l.negated {
        ops.push(WOp::Gate(GateOp::new(Gate::X, ctrls.to_vec(), vec![minus])));
    }
    ops.extend(uncompute(&b.compute, &b.ancillas));
    ops.extend([WOp::Gate(GateOp::single(Gate::H, minus)), WOp::Gate(GateOp::single(Gate::X, minus)), WOp::FreeZ(minus)]);
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{bits_to_index, index_to_bits};
    use crate::circuit::wires::WireCircuit;
    use crate::linalg::ONE;
    use crate::sim::circuit_unitary;

    fn wire_circuit(n: usize, next: usize, ops: Vec<WOp>) -> WireCircuit {
        WireCircuit { num_inputs: n, num_wires: next, num_bits: 0, ops, ret_qubits: (0..n).collect(), ret_bits: vec![] }
    }

    /// Checks `|x>|y> -> |x>|y ^ f(x)>` on every basis state.
    pub(crate) fn check_xor(net: &LogicNetwork) {
        let (n, k) = (net.num_inputs, net.outputs.len());
        let x: Vec<usize> = (0..n).collect();
        let y: Vec<usize> = (n..n + k).collect();
        let mut next = n + k;
        let ops = embed_xor(net, &x, &y, &[], &mut next).unwrap();
        let u = circuit_unitary(&wire_circuit(n + k, next, ops)).unwrap();
        for xi in 0..1usize << n {
            let f = net.eval(&index_to_bits(xi, n));
            let col = xi << k;
            let row = (xi << k) | bits_to_index(&f);
            assert_eq!(u[(row, col)], ONE, "x={xi}");
        }
    }

    fn parity(n: usize) -> LogicNetwork {
        let mut net = LogicNetwork::new(n);
        let ins: Vec<NodeId> = (0..n).map(|i| net.input(i)).collect();
        let o = net.reduce(&ins, false, LogicNetwork::xor);
        net.outputs.push(o);
        net
    }

    fn and_tree(n: usize) -> LogicNetwork {
        let mut net = LogicNetwork::new(n);
        let ins: Vec<NodeId> = (0..n).map(|i| net.input(i)).collect();
        let o = net.reduce(&ins, true, LogicNetwork::and);
        net.outputs.push(o);
        net
    }

    #[test]
    fn xor_embeddings() {
        let mut id = LogicNetwork::new(3);
        id.outputs = (0..3).map(|i| id.input(i)).collect();
        check_xor(&id);
        check_xor(&parity(4));
        check_xor(&and_tree(4));
        let mut mixed = LogicNetwork::new(3);
        let (a, b, c) = (mixed.input(0), mixed.input(1), mixed.input(2));
        let ab = mixed.or(a, b);
        let nc = mixed.not(c);
        let x = mixed.xor(ab, nc);
        let y = mixed.and(x, a);
        let t = mixed.constant(true);
        mixed.outputs = vec![x, y, t, nc];
        check_xor(&mixed);
    }

    #[test]
    fn sign_embedding() {
        for net in [parity(3), and_tree(3)] {
            let mut next = 3;
            let ops = embed_sign(&net, &[0, 1, 2], &[], &mut next).unwrap();
            let u = circuit_unitary(&wire_circuit(3, next, ops)).unwrap();
            for xi in 0..8 {
                let s = if net.eval(&index_to_bits(xi, 3))[0] { -ONE } else { ONE };
                assert!((u[(xi, xi)] - s).norm() < 1e-12);
            }
        }
    }
}
