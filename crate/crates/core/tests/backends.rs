//! Golden files for the text backends and QASM re-ingestion.
//!
//! Set `QBC_BLESS=1` to rewrite the golden files after checking a change by
//! hand.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qbc::backend::{emit_qasm3, read_qasm3, BackendError};
use qbc::driver::{self, emit, CompileError, Emit, Options};
use qbc::sim::exact_distribution;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn example(name: &str) -> String {
    std::fs::read_to_string(root().join("examples").join(format!("{name}.qw"))).unwrap()
}

fn golden(file: &str, got: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(file);
    if std::env::var_os("QBC_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, got).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(got, want, "{file} differs from its golden file");
}

fn emit_example(name: &str, what: Emit, opts: &Options) -> String {
    emit(&example(name), opts, what).unwrap_or_else(|e| panic!("{e}"))
}

#[test]
fn bell_golden() {
    let o = Options::default();
    golden("bell.qasm", &emit_example("bell", Emit::Qasm, &o));
    golden("bell.ll", &emit_example("bell", Emit::Qir, &o));
}

#[test]
fn benchmark_goldens() {
    let o = Options::default();
    for name in ["bv", "dj", "simon", "period", "teleport"] {
        golden(&format!("{name}.qasm"), &emit_example(name, Emit::Qasm, &o));
    }
    for name in ["bv", "simon"] {
        golden(&format!("{name}.ll"), &emit_example(name, Emit::Qir, &o));
    }
    let reuse = Options { reuse_qubits: true, ..Options::default() };
    golden("grover_reuse.qasm", &emit_example("grover", Emit::Qasm, &reuse));
}

#[test]
fn output_is_deterministic_with_lf_endings() {
    for what in Emit::ALL {
        let a = emit_example("grover", what, &Options::default());
        let b = emit_example("grover", what, &Options::default());
        assert_eq!(a, b);
        assert!(!a.contains('\r'));
        assert!(a.ends_with('\n'));
    }
}

#[test]
fn one_qubit_register() {
    let qasm = emit_example("bv", Emit::Qasm, &Options::default());
    assert_eq!(qasm.matches("qubit[").count(), 1);
    assert_eq!(qasm.matches("bit[").count(), 2);
}

#[test]
fn qir_indices_are_dense_in_allocation_order() {
    let src = example("simon");
    let qc = driver::compile(&src, &Options::default()).unwrap();
    let wires = qbc::circuit::decompose::decompose_wires(&qc.entry().to_wires()).num_wires;
    let ll = emit(&src, &Options::default(), Emit::Qir).unwrap();
    assert!(ll.contains(&format!("\"required_num_qubits\"=\"{wires}\"")));
    let mut first_uses = Vec::new();
    for part in ll.split("inttoptr (i64 ").skip(1) {
        let (n, rest) = part.split_once(' ').unwrap();
        let n: usize = n.parse().unwrap();
        if rest.starts_with("to %Qubit*") && !first_uses.contains(&n) {
            first_uses.push(n);
        }
    }
    assert!(first_uses.iter().all(|&q| q < wires));
    assert!(first_uses.windows(2).all(|p| p[0] < p[1]), "{first_uses:?}");
}

#[test]
fn qir_refuses_conditionals() {
    match emit(&example("teleport"), &Options::default(), Emit::Qir) {
        Err(CompileError::Backend(e @ BackendError::Conditional)) => assert!(e.to_string().contains("--emit qasm")),
        other => panic!("expected a refusal, got {other:?}"),
    }
}

#[test]
fn surviving_calls_are_an_error() {
    let o = Options { inline: false, ..Options::default() };
    for what in [Emit::QcircuitIr, Emit::Qasm, Emit::Qir] {
        assert!(emit(&example("bv"), &o, what).is_err());
    }
    assert!(emit(&example("bv"), &o, Emit::QwertyIr).is_ok());
}

/// Sums probabilities over all but the first `keep` bits.
fn marginal(d: &BTreeMap<String, f64>, keep: usize) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (k, p) in d {
        *out.entry(k[..keep].to_string()).or_insert(0.0) += p;
    }
    out
}

#[test]
fn qasm_reingestion_preserves_distributions() {
    for name in ["bell", "bv", "dj", "grover", "simon", "period", "teleport"] {
        let qc = driver::compile(&example(name), &Options::default()).unwrap();
        let w = qc.entry().to_wires();
        let want = exact_distribution(&w).unwrap();
        for reuse in [false, true] {
            let text = emit_qasm3(&qc, reuse).unwrap();
            let back = read_qasm3(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
            let got = marginal(&exact_distribution(&back.entry().to_wires()).unwrap(), w.ret_bits.len());
            assert_eq!(got, want, "{name} (reuse = {reuse})");
        }
    }
}

#[test]
fn reuse_shrinks_the_register() {
    let plain = emit_example("grover", Emit::Qasm, &Options::default());
    let reuse = emit_example("grover", Emit::Qasm, &Options { reuse_qubits: true, ..Options::default() });
    let width = |s: &str| -> usize {
        let line = s.lines().find(|l| l.starts_with("qubit[")).unwrap();
        line["qubit[".len()..line.find(']').unwrap()].parse().unwrap()
    };
    assert!(width(&reuse) < width(&plain));
    assert!(reuse.contains("reset q["));
}

#[test]
fn reader_rejects_use_after_measurement() {
    let src = "OPENQASM 3.0;\nqubit[1] q;\nbit[1] c;\nmeasure q[0] -> c[0];\nx q[0];\n";
    let e = read_qasm3(src).unwrap_err();
    assert_eq!(e, BackendError::Parse { line: 5, message: "q[0] is used after measurement without a reset".into() });
}
