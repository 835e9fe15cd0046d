//! Local rewrites along qubit wires: inverse-pair cancellation, phase
//! merging, `H X H -> Z`, `H Z H -> X`, and the relaxed rule that turns a
//! multi-controlled X onto a `|->` ancilla into a multi-controlled Z.
//!
//! No rule increases the gate count.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use super::wires::touched_wires;
use super::{Circuit, Gate, GateOp, QcModule, WOp, WireCircuit};

fn op_wires(op: &WOp) -> Vec<usize> {
    match op {
        WOp::Alloc(w) | WOp::Free(w) | WOp::FreeZ(w) => vec![*w],
        WOp::Measure { q, .. } => vec![*q],
        WOp::Gate(g) => g.qubits().collect(),
        WOp::If { then_ops, else_ops, .. } => {
            let mut ws = touched_wires(then_ops);
            ws.extend(touched_wires(else_ops));
            ws
        }
    }
}

/// Index of the next live op after `i` touching any of `wires`.
fn next_touch(ops: &[Option<WOp>], i: usize, wires: &[usize]) -> Option<usize> {
    (i + 1..ops.len()).find(|&j| ops[j].as_ref().is_some_and(|op| op_wires(op).iter().any(|w| wires.contains(w))))
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

fn same_operands(a: &GateOp, b: &GateOp) -> bool {
    let targets_match = if a.gate == Gate::Swap || b.gate == Gate::Swap {
        same_set(&a.targets, &b.targets)
    } else {
        a.targets == b.targets
    };
    targets_match && same_set(&a.controls, &b.controls)
}

fn gate_at(ops: &[Option<WOp>], i: usize) -> Option<&GateOp> {
    match &ops[i] {
        Some(WOp::Gate(g)) => Some(g),
        _ => None,
    }
}

/// The gate for a phase angle, or `None` for the identity.
pub fn phase_gate(theta: f64) -> Option<Gate> {
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    let close = |x: f64| (t - x).abs() <= 1e-12;
    if close(0.0) {
        None
    } else if close(PI) || close(-PI) {
        Some(Gate::Z)
    } else if close(FRAC_PI_2) {
        Some(Gate::S)
    } else if close(-FRAC_PI_2) {
        Some(Gate::Sdg)
    } else if close(FRAC_PI_4) {
        Some(Gate::T)
    } else if close(-FRAC_PI_4) {
        Some(Gate::Tdg)
    } else {
        Some(Gate::P(theta))
    }
}

fn try_pair(ops: &mut [Option<WOp>], i: usize) -> bool {
    let Some(g1) = gate_at(ops, i).cloned() else { return false };
    let wires: Vec<usize> = g1.qubits().collect();
    let Some(j) = next_touch(ops, i, &wires) else { return false };
    let Some(g2) = gate_at(ops, j).cloned() else { return false };
    if !same_operands(&g1, &g2) {
        return false;
    }
    if g1.gate.cancels(&g2.gate) {
        ops[i] = None;
        ops[j] = None;
        return true;
    }
    if let (Some(a), Some(b)) = (g1.gate.phase_angle(), g2.gate.phase_angle()) {
        ops[i] = None;
        ops[j] = phase_gate(a + b).map(|gate| WOp::Gate(GateOp { gate, ..g2 }));
        return true;
    }
    false
}

fn is_plain(g: &GateOp, gate: Gate, w: usize) -> bool {
    g.gate == gate && g.controls.is_empty() && g.targets == [w]
}

fn try_conjugate_h(ops: &mut [Option<WOp>], i: usize) -> bool {
    let Some(g1) = gate_at(ops, i) else { return false };
    if g1.gate != Gate::H || !g1.controls.is_empty() {
        return false;
    }
    let t = g1.targets[0];
    let Some(j) = next_touch(ops, i, &[t]) else { return false };
    let Some(g2) = gate_at(ops, j).cloned() else { return false };
    let swapped = match g2.gate {
        Gate::X => Gate::Z,
        Gate::Z => Gate::X,
        _ => return false,
    };
    if g2.targets != [t] {
        return false;
    }
    let Some(k) = next_touch(ops, j, &[t]) else { return false };
    if !gate_at(ops, k).is_some_and(|g3| is_plain(g3, Gate::H, t)) {
        return false;
    }
    ops[i] = None;
    ops[k] = None;
    ops[j] = Some(WOp::Gate(GateOp { gate: swapped, ..g2 }));
    true
}

/// qalloc a; x a; h a; (mcx [..] a)+; h a; x a; qfreez a
fn try_minus_ancilla(ops: &mut [Option<WOp>], i: usize) -> bool {
    let Some(WOp::Alloc(a)) = ops[i] else { return false };
    let mut chain = vec![i];
    let mut cur = i;
    let step = |cur: &mut usize| -> Option<usize> {
        let j = next_touch(ops, *cur, &[a])?;
        *cur = j;
        Some(j)
    };
    let Some(x1) = step(&mut cur) else { return false };
    let Some(h1) = step(&mut cur) else { return false };
    if !(gate_at(ops, x1).is_some_and(|g| is_plain(g, Gate::X, a)) && gate_at(ops, h1).is_some_and(|g| is_plain(g, Gate::H, a))) {
        return false;
    }
    chain.extend([x1, h1]);
    let mut flips = Vec::new();
    let h2 = loop {
        let Some(j) = step(&mut cur) else { return false };
        match gate_at(ops, j) {
            Some(g) if g.gate == Gate::X && g.targets == [a] && !g.controls.is_empty() => flips.push(j),
            Some(g) if is_plain(g, Gate::H, a) => break j,
            _ => return false,
        }
    };
    let Some(x2) = step(&mut cur) else { return false };
    let Some(fz) = step(&mut cur) else { return false };
    if flips.is_empty() || !gate_at(ops, x2).is_some_and(|g| is_plain(g, Gate::X, a)) || ops[fz] != Some(WOp::FreeZ(a)) {
        return false;
    }
    chain.extend([h2, x2, fz]);
    for j in flips {
        let g = gate_at(ops, j).unwrap();
        let mut controls = g.controls.clone();
        let target = controls.pop().unwrap();
        ops[j] = Some(WOp::Gate(GateOp::new(Gate::Z, controls, vec![target])));
    }
    for j in chain {
        ops[j] = None;
    }
    true
}

fn optimize_ops(ops: Vec<WOp>) -> Vec<WOp> {
    let mut ops: Vec<Option<WOp>> = ops
        .into_iter()
        .map(|op| match op {
            WOp::If { bit, then_ops, else_ops } => {
                Some(WOp::If { bit, then_ops: optimize_ops(then_ops), else_ops: optimize_ops(else_ops) })
            }
            op => Some(op),
        })
        .collect();
    let limit = ops.len().pow(2).max(16);
    for _ in 0..limit {
        let mut changed = false;
        for i in 0..ops.len() {
            if ops[i].is_none() {
                continue;
            }
            changed |= try_pair(&mut ops, i) || try_conjugate_h(&mut ops, i) || try_minus_ancilla(&mut ops, i);
        }
        if !changed {
            break;
        }
    }
    ops.into_iter().flatten().collect()
}

pub fn peephole_wires(w: &WireCircuit) -> WireCircuit {
    WireCircuit { ops: optimize_ops(w.ops.clone()), ..w.clone() }
}

pub fn peephole(c: &Circuit) -> Circuit {
    peephole_wires(&c.to_wires()).to_ssa(&c.name)
}

pub fn peephole_module(m: &QcModule) -> QcModule {
    QcModule { circuits: m.circuits.iter().map(peephole).collect(), entry: m.entry.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(n: usize, gates: Vec<GateOp>) -> Vec<WOp> {
        peephole_wires(&WireCircuit::from_gates(n, &gates)).ops
    }

    #[test]
    fn fixtures() {
        assert!(run(1, vec![GateOp::single(Gate::H, 0), GateOp::single(Gate::H, 0)]).is_empty());
        let hxh = run(1, vec![GateOp::single(Gate::H, 0), GateOp::single(Gate::X, 0), GateOp::single(Gate::H, 0)]);
        assert_eq!(hxh, vec![WOp::Gate(GateOp::single(Gate::Z, 0))]);
        let ss = run(1, vec![GateOp::single(Gate::S, 0), GateOp::single(Gate::S, 0)]);
        assert_eq!(ss, vec![WOp::Gate(GateOp::single(Gate::Z, 0))]);
        let blocked = run(2, vec![GateOp::single(Gate::H, 0), GateOp::cx(0, 1), GateOp::single(Gate::H, 0)]);
        assert_eq!(blocked.len(), 3);
    }

    #[test]
    fn minus_ancilla_becomes_cz() {
        let w = WireCircuit {
            num_inputs: 2,
            num_wires: 3,
            num_bits: 0,
            ops: vec![
                WOp::Alloc(2),
                WOp::Gate(GateOp::single(Gate::X, 2)),
                WOp::Gate(GateOp::single(Gate::H, 2)),
                WOp::Gate(GateOp::new(Gate::X, vec![0, 1], vec![2])),
                WOp::Gate(GateOp::single(Gate::H, 2)),
                WOp::Gate(GateOp::single(Gate::X, 2)),
                WOp::FreeZ(2),
            ],
            ret_qubits: vec![0, 1],
            ret_bits: vec![],
        };
        assert_eq!(peephole_wires(&w).ops, vec![WOp::Gate(GateOp::new(Gate::Z, vec![0], vec![1]))]);
    }
}
