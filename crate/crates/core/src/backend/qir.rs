//! QIR Base Profile emission as LLVM assembly text.
//!
//! Qubits and results are static: index `i` is written as
//! `inttoptr (i64 i to %Qubit*)`. Gates outside the intrinsic set are
//! rewritten into it; `p` becomes `rz`, which differs by a global phase.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write;

use super::{allocate, angle, entry_wires, BackendError};
use crate::circuit::decompose::{decompose_wires, toffoli};
use crate::circuit::{Gate, GateOp, QcModule, WOp};

/// One intrinsic call: `__quantum__qis__{name}__body`.
#[derive(Clone, Debug, PartialEq)]
pub struct QisCall {
    pub name: &'static str,
    pub angle: Option<f64>,
    pub qubits: Vec<usize>,
}

fn call(name: &'static str, qubits: Vec<usize>) -> QisCall {
    QisCall { name, angle: None, qubits }
}

fn rz(theta: f64, q: usize) -> QisCall {
    QisCall { name: "rz", angle: Some(theta), qubits: vec![q] }
}

fn controlled_phase(theta: f64, c: usize, t: usize) -> Vec<QisCall> {
    vec![rz(theta / 2.0, c), call("cnot", vec![c, t]), rz(-theta / 2.0, t), call("cnot", vec![c, t]), rz(theta / 2.0, t)]
}

/// Intrinsic calls for a gate with at most one control.
pub fn qis_calls(g: &GateOp) -> Vec<QisCall> {
    let t = g.targets[0];
    match (g.controls.as_slice(), g.gate) {
        ([], Gate::X) => vec![call("x", vec![t])],
        ([], Gate::Y) => vec![call("y", vec![t])],
        ([], Gate::Z) => vec![call("z", vec![t])],
        ([], Gate::H) => vec![call("h", vec![t])],
        ([], Gate::S) => vec![call("s", vec![t])],
        ([], Gate::Sdg) => vec![call("s__adj", vec![t])],
        ([], Gate::T) => vec![call("t", vec![t])],
        ([], Gate::Tdg) => vec![call("t__adj", vec![t])],
        ([], Gate::P(theta)) => vec![rz(theta, t)],
        ([], Gate::Swap) => vec![call("swap", vec![t, g.targets[1]])],
        (&[c], Gate::X) => vec![call("cnot", vec![c, t])],
        (&[c], Gate::Z) => vec![call("cz", vec![c, t])],
        (&[c], Gate::Y) => vec![call("s__adj", vec![t]), call("cnot", vec![c, t]), call("s", vec![t])],
        (&[c], Gate::H) => vec![
            call("s", vec![t]),
            call("h", vec![t]),
            call("t", vec![t]),
            call("cnot", vec![c, t]),
            call("t__adj", vec![t]),
            call("h", vec![t]),
            call("s__adj", vec![t]),
        ],
        (&[c], Gate::S) => controlled_phase(PI / 2.0, c, t),
        (&[c], Gate::Sdg) => controlled_phase(-PI / 2.0, c, t),
        (&[c], Gate::T) => controlled_phase(PI / 4.0, c, t),
        (&[c], Gate::Tdg) => controlled_phase(-PI / 4.0, c, t),
        (&[c], Gate::P(theta)) => controlled_phase(theta, c, t),
        (&[c], Gate::Swap) => {
            let u = g.targets[1];
            let mut v = vec![call("cnot", vec![u, t])];
            v.extend(toffoli(c, t, u).iter().flat_map(qis_calls));
            v.push(call("cnot", vec![u, t]));
            v
        }
        _ => panic!("gate {g} has more than one control; decompose first"),
    }
}

fn qubit(i: usize) -> String {
    format!("%Qubit* inttoptr (i64 {i} to %Qubit*)")
}

fn result(i: usize) -> String {
    format!("%Result* inttoptr (i64 {i} to %Result*)")
}

/// Emits the entry circuit for the QIR Base Profile. Returned bits are
/// recorded as output in return order.
pub fn emit_qir_base(m: &QcModule) -> Result<String, BackendError> {
    let w = decompose_wires(&entry_wires(m)?);
    if w.has_conditionals() {
        return Err(BackendError::Conditional);
    }
    let r = allocate(&w, false);
    let mut body = String::new();
    let mut used: BTreeSet<&'static str> = BTreeSet::new();
    for op in &w.ops {
        match op {
            WOp::Gate(g) => {
                for c in qis_calls(&g.remap(|x| r.qubit_of_wire[x])) {
                    used.insert(c.name);
                    let mut args: Vec<String> = c.angle.map(|a| format!("double {}", angle(a))).into_iter().collect();
                    args.extend(c.qubits.iter().map(|&q| qubit(q)));
                    writeln!(body, "  call void @__quantum__qis__{}__body({})", c.name, args.join(", ")).unwrap();
                }
            }
            WOp::Measure { q, bit } => {
                used.insert("mz");
                let (q, s) = (r.qubit_of_wire[*q], r.slot_of_bit[*bit]);
                writeln!(body, "  call void @__quantum__qis__mz__body({}, {})", qubit(q), result(s)).unwrap();
            }
            _ => {}
        }
    }
    let ret: Vec<usize> = w.ret_bits.iter().map(|&b| r.slot_of_bit[b]).collect();
    writeln!(body, "  call void @__quantum__rt__array_record_output(i64 {}, i8* null)", ret.len()).unwrap();
    for s in ret {
        writeln!(body, "  call void @__quantum__rt__result_record_output({}, i8* null)", result(s)).unwrap();
    }

    let mut out = String::new();
    out.push_str("; ModuleID = 'main'\nsource_filename = \"main\"\n\n%Qubit = type opaque\n%Result = type opaque\n\n");
    out.push_str("define void @main() #0 {\nentry:\n  call void @__quantum__rt__initialize(i8* null)\n");
    out.push_str(&body);
    out.push_str("  ret void\n}\n\n");
    out.push_str("declare void @__quantum__rt__initialize(i8*)\n");
    for name in &used {
        let params = match *name {
            "rz" => "double, %Qubit*",
            "cnot" | "cz" | "swap" => "%Qubit*, %Qubit*",
            "mz" => "%Qubit*, %Result* writeonly",
            _ => "%Qubit*",
        };
        let attr = if *name == "mz" { " #1" } else { "" };
        writeln!(out, "declare void @__quantum__qis__{name}__body({params}){attr}").unwrap();
    }
    out.push_str("declare void @__quantum__rt__array_record_output(i64, i8*)\n");
    out.push_str("declare void @__quantum__rt__result_record_output(%Result*, i8*)\n\n");
    writeln!(
        out,
        "attributes #0 = {{ \"entry_point\" \"output_labeling_schema\" \"qir_profiles\"=\"base_profile\" \"required_num_qubits\"=\"{}\" \"required_num_results\"=\"{}\" }}",
        r.num_qubits, r.num_slots
    )
    .unwrap();
    out.push_str("attributes #1 = { \"irreversible\" }\n\n");
    out.push_str("!llvm.module.flags = !{!0, !1, !2, !3}\n\n");
    out.push_str("!0 = !{i32 1, !\"qir_major_version\", i32 1}\n");
    out.push_str("!1 = !{i32 7, !\"qir_minor_version\", i32 0}\n");
    out.push_str("!2 = !{i32 1, !\"dynamic_qubit_management\", i1 false}\n");
    out.push_str("!3 = !{i32 1, !\"dynamic_result_management\", i1 false}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::unitary_of;

    fn as_gates(calls: &[QisCall]) -> Vec<GateOp> {
        calls
            .iter()
            .map(|c| {
                let q = &c.qubits;
                match c.name {
                    "rz" => GateOp::single(Gate::P(c.angle.unwrap()), q[0]),
                    "cnot" => GateOp::cx(q[0], q[1]),
                    "cz" => GateOp::new(Gate::Z, vec![q[0]], vec![q[1]]),
                    "swap" => GateOp::new(Gate::Swap, vec![], vec![q[0], q[1]]),
                    "s__adj" => GateOp::single(Gate::Sdg, q[0]),
                    "t__adj" => GateOp::single(Gate::Tdg, q[0]),
                    n => GateOp::single(Gate::from_name(n, None).unwrap(), q[0]),
                }
            })
            .collect()
    }

    #[test]
    fn rewrites_match_up_to_global_phase() {
        use Gate::*;
        for gate in [X, Y, Z, H, S, Sdg, T, Tdg, P(0.7), P(-2.1)] {
            for g in [GateOp::single(gate, 1), GateOp::new(gate, vec![0], vec![1])] {
                let got = unitary_of(&as_gates(&qis_calls(&g)), 2);
                assert!(got.max_abs_diff_up_to_phase(&unitary_of(std::slice::from_ref(&g), 2)) < 1e-12, "{g}");
            }
        }
        let g = GateOp::new(Swap, vec![2], vec![0, 1]);
        let got = unitary_of(&as_gates(&qis_calls(&g)), 3);
        assert!(got.max_abs_diff_up_to_phase(&unitary_of(&[g], 3)) < 1e-12);
    }
}
