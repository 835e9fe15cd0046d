//! Rewrites gates with two or more controls into gates with at most one.
//!
//! Toffolis use the exact seven-T decomposition. Any other multi-controlled
//! gate computes the AND of its controls into clean ancillas with
//! controlled-iX gates (four T gates each), applies the singly-controlled
//! gate from the last ancilla, and uncomputes with the inverse controlled-iX
//! gates, which also cancels their phases.

use super::{adjoint_gates, Circuit, Gate, GateOp, QcModule, WOp, WireCircuit};

/// Exact Toffoli on controls `a`, `b` and target `t`.
pub fn toffoli(a: usize, b: usize, t: usize) -> Vec<GateOp> {
    use Gate::*;
    let g = GateOp::single;
    vec![
        g(H, t),
        GateOp::cx(b, t),
        g(Tdg, t),
        GateOp::cx(a, t),
        g(T, t),
        GateOp::cx(b, t),
        g(Tdg, t),
        GateOp::cx(a, t),
        g(T, b),
        g(T, t),
        g(H, t),
        GateOp::cx(a, b),
        g(T, a),
        g(Tdg, b),
        GateOp::cx(a, b),
    ]
}

/// Maps |a b t> to i^(ab) |a b (t xor ab)>.
pub fn controlled_ix(a: usize, b: usize, t: usize) -> Vec<GateOp> {
    use Gate::*;
    let g = GateOp::single;
    vec![
        g(H, t),
        g(S, a),
        g(S, b),
        GateOp::cx(a, b),
        g(Sdg, b),
        GateOp::cx(a, b),
        g(T, t),
        GateOp::cx(a, t),
        g(Tdg, t),
        GateOp::cx(b, t),
        g(T, t),
        GateOp::cx(a, t),
        g(Tdg, t),
        GateOp::cx(b, t),
        g(H, t),
    ]
}

struct Decomposer {
    next_wire: usize,
}

impl Decomposer {
    fn gate(&mut self, g: GateOp, out: &mut Vec<WOp>) {
        if g.gate == Gate::Swap && !g.controls.is_empty() {
            let (a, b) = (g.targets[0], g.targets[1]);
            let mut controls = g.controls.clone();
            controls.push(a);
            out.push(WOp::Gate(GateOp::cx(b, a)));
            self.gate(GateOp::new(Gate::X, controls, vec![b]), out);
            out.push(WOp::Gate(GateOp::cx(b, a)));
            return;
        }
        match g.controls.len() {
            0 | 1 => out.push(WOp::Gate(g)),
            2 if g.gate == Gate::X => {
                out.extend(toffoli(g.controls[0], g.controls[1], g.targets[0]).into_iter().map(WOp::Gate))
            }
            _ => {
                let mut compute = Vec::new();
                let mut ancillas = Vec::new();
                let mut acc = g.controls[0];
                for &c in &g.controls[1..] {
                    let a = self.next_wire;
                    self.next_wire += 1;
                    ancillas.push(a);
                    compute.push((a, controlled_ix(acc, c, a)));
                    acc = a;
                }
                for (a, gates) in &compute {
                    out.push(WOp::Alloc(*a));
                    out.extend(gates.iter().cloned().map(WOp::Gate));
                }
                out.push(WOp::Gate(GateOp { controls: vec![acc], ..g }));
                for (a, gates) in compute.iter().rev() {
                    out.extend(adjoint_gates(gates).into_iter().map(WOp::Gate));
                    out.push(WOp::FreeZ(*a));
                }
            }
        }
    }

    fn ops(&mut self, ops: &[WOp]) -> Vec<WOp> {
        let mut out = Vec::new();
        for op in ops {
            match op {
                WOp::Gate(g) => self.gate(g.clone(), &mut out),
                WOp::If { bit, then_ops, else_ops } => {
                    let then_ops = self.ops(then_ops);
                    let else_ops = self.ops(else_ops);
                    out.push(WOp::If { bit: *bit, then_ops, else_ops });
                }
                other => out.push(other.clone()),
            }
        }
        out
    }
}

pub fn decompose_wires(w: &WireCircuit) -> WireCircuit {
    let mut d = Decomposer { next_wire: w.num_wires };
    let ops = d.ops(&w.ops);
    WireCircuit { ops, num_wires: d.next_wire, ..w.clone() }
}

pub fn decompose(c: &Circuit) -> Circuit {
    decompose_wires(&c.to_wires()).to_ssa(&c.name)
}

pub fn decompose_module(m: &QcModule) -> QcModule {
    QcModule { circuits: m.circuits.iter().map(decompose).collect(), entry: m.entry.clone() }
}
