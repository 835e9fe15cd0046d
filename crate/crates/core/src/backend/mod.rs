//! Text backends: OpenQASM 3 and QIR (Base Profile), plus a reader for the
//! OpenQASM subset the emitter produces.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{QcModule, WOp, WireCircuit};

pub mod qasm;
pub mod qasm_read;
pub mod qir;

pub use qasm::emit_qasm3;
pub use qasm_read::read_qasm3;
pub use qir::emit_qir_base;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("the QIR base profile has no branching on measurement results; emit OpenQASM 3 instead (--emit qasm)")]
    Conditional,
    #[error("qubit inputs on the entry circuit are not supported by this backend")]
    Inputs,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Fixed register positions for every wire and measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Registers {
    pub qubit_of_wire: Vec<usize>,
    /// Wires whose allocation reuses a measured index; each needs a reset
    /// first.
    pub reused: BTreeSet<usize>,
    pub num_qubits: usize,
    /// Result slot of each measured bit. Slot `i` holds the `i`th returned
    /// bit; measurements that are not returned follow in program order.
    pub slot_of_bit: Vec<usize>,
    pub num_slots: usize,
    /// `(dst, src)` slot copies for bits returned more than once.
    pub copies: Vec<(usize, usize)>,
}

/// Assigns qubit indices in allocation order. With `reuse`, an allocation
/// takes the lowest index released by a measurement or a clean discard.
/// Indices of qubits discarded in an unknown state are never reused.
pub fn allocate(w: &WireCircuit, reuse: bool) -> Registers {
    let mut r = Registers {
        qubit_of_wire: vec![usize::MAX; w.num_wires],
        reused: BTreeSet::new(),
        num_qubits: 0,
        slot_of_bit: vec![usize::MAX; w.num_bits],
        num_slots: 0,
        copies: vec![],
    };
    let mut pool = BTreeMap::new();
    for i in 0..w.num_inputs {
        r.qubit_of_wire[i] = i;
        r.num_qubits += 1;
    }
    assign_qubits(&w.ops, reuse, &mut pool, &mut r, true);
    for &b in &w.ret_bits {
        if r.slot_of_bit[b] != usize::MAX {
            r.copies.push((r.num_slots, r.slot_of_bit[b]));
        } else {
            r.slot_of_bit[b] = r.num_slots;
        }
        r.num_slots += 1;
    }
    assign_bits(&w.ops, &mut r);
    r
}

/// `pool` maps each released index to whether it was measured, in which case
/// it must be reset before reuse.
fn assign_qubits(ops: &[WOp], reuse: bool, pool: &mut BTreeMap<usize, bool>, r: &mut Registers, top: bool) {
    for op in ops {
        match op {
            WOp::Alloc(wire) => {
                let q = match (reuse && top).then(|| pool.pop_first()).flatten() {
                    Some((q, measured)) => {
                        if measured {
                            r.reused.insert(*wire);
                        }
                        q
                    }
                    None => {
                        r.num_qubits += 1;
                        r.num_qubits - 1
                    }
                };
                r.qubit_of_wire[*wire] = q;
            }
            // Indices released inside a branch are not known to be free
            // after it.
            WOp::FreeZ(wire) if top => {
                pool.insert(r.qubit_of_wire[*wire], false);
            }
            WOp::Measure { q, .. } if top => {
                pool.insert(r.qubit_of_wire[*q], true);
            }
            WOp::If { then_ops, else_ops, .. } => {
                assign_qubits(then_ops, reuse, pool, r, false);
                assign_qubits(else_ops, reuse, pool, r, false);
            }
            _ => {}
        }
    }
}

fn assign_bits(ops: &[WOp], r: &mut Registers) {
    for op in ops {
        match op {
            WOp::Measure { bit, .. } if r.slot_of_bit[*bit] == usize::MAX => {
                r.slot_of_bit[*bit] = r.num_slots;
                r.num_slots += 1;
            }
            WOp::If { then_ops, else_ops, .. } => {
                assign_bits(then_ops, r);
                assign_bits(else_ops, r);
            }
            _ => {}
        }
    }
}

fn entry_wires(m: &QcModule) -> Result<WireCircuit, BackendError> {
    let w = m.entry().to_wires();
    if w.num_inputs > 0 {
        return Err(BackendError::Inputs);
    }
    Ok(w)
}

/// Formats an angle so that parsing it back gives the same `f64`.
pub(crate) fn angle(theta: f64) -> String {
    format!("{theta:?}")
}
