//! OpenQASM 3 emission.

use std::fmt::Write;

use super::{allocate, angle, entry_wires, BackendError, Registers};
use crate::circuit::{Gate, GateOp, QcModule, WOp};

/// Names from `stdgates.inc` for gates with one control.
fn std_controlled(g: Gate) -> Option<&'static str> {
    Some(match g {
        Gate::X => "cx",
        Gate::Y => "cy",
        Gate::Z => "cz",
        Gate::H => "ch",
        Gate::P(_) => "cp",
        Gate::Swap => "cswap",
        _ => return None,
    })
}

fn gate_text(g: &GateOp, wire_q: &[usize]) -> String {
    let name = match (g.controls.len(), std_controlled(g.gate)) {
        (0, _) => g.gate.name().to_string(),
        (1, Some(n)) => n.to_string(),
        (2, _) if g.gate == Gate::X => "ccx".to_string(),
        (1, None) => format!("ctrl @ {}", g.gate.name()),
        (k, _) => format!("ctrl({k}) @ {}", g.gate.name()),
    };
    let name = match g.gate.param() {
        Some(theta) => format!("{name}({})", angle(theta)),
        None => name,
    };
    let args: Vec<String> = g.qubits().map(|w| format!("q[{}]", wire_q[w])).collect();
    format!("{name} {};", args.join(", "))
}

fn emit_ops(out: &mut String, ops: &[WOp], r: &Registers, depth: usize) {
    let pad = "    ".repeat(depth);
    for op in ops {
        match op {
            WOp::Alloc(w) if r.reused.contains(w) => {
                writeln!(out, "{pad}reset q[{}];", r.qubit_of_wire[*w]).unwrap();
            }
            WOp::FreeZ(w) if depth == 0 => {
                writeln!(out, "{pad}reset q[{}];", r.qubit_of_wire[*w]).unwrap();
            }
            WOp::Alloc(_) | WOp::Free(_) | WOp::FreeZ(_) => {}
            WOp::Measure { q, bit } => {
                writeln!(out, "{pad}measure q[{}] -> c[{}];", r.qubit_of_wire[*q], r.slot_of_bit[*bit]).unwrap();
            }
            WOp::Gate(g) => {
                writeln!(out, "{pad}{}", gate_text(g, &r.qubit_of_wire)).unwrap();
            }
            WOp::If { bit, then_ops, else_ops } => {
                writeln!(out, "{pad}if (c[{}] == 1) {{", r.slot_of_bit[*bit]).unwrap();
                emit_ops(out, then_ops, r, depth + 1);
                if else_ops.is_empty() {
                    writeln!(out, "{pad}}}").unwrap();
                } else {
                    writeln!(out, "{pad}}} else {{").unwrap();
                    emit_ops(out, else_ops, r, depth + 1);
                    writeln!(out, "{pad}}}").unwrap();
                }
            }
        }
    }
}

/// Emits the entry circuit as OpenQASM 3. The first bits of `c` are the
/// returned bits, in order. A qubit discarded in a known |0> state is reset
/// at that point; other discards emit nothing.
pub fn emit_qasm3(m: &QcModule, reuse_qubits: bool) -> Result<String, BackendError> {
    let w = entry_wires(m)?;
    let r = allocate(&w, reuse_qubits);
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    if r.num_qubits > 0 {
        writeln!(out, "qubit[{}] q;", r.num_qubits).unwrap();
    }
    if r.num_slots > 0 {
        writeln!(out, "bit[{}] c;", r.num_slots).unwrap();
    }
    emit_ops(&mut out, &w.ops, &r, 0);
    for (dst, src) in &r.copies {
        writeln!(out, "c[{dst}] = c[{src}];").unwrap();
    }
    Ok(out)
}
