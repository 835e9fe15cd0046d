//! Acceptance suite. Each test covers one criterion and prints one
//! `criterion N: PASS|FAIL ...` line (visible with `--nocapture`).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbc::backend::{emit_qasm3, emit_qir_base, read_qasm3};
use qbc::basis::oracle::{span_projector, spans_equal};
use qbc::basis::{check_span_equivalence, index_to_bits, parse_basis, validate_basis, Basis};
use qbc::circuit::decompose::decompose_wires;
use qbc::circuit::peephole::peephole_wires;
use qbc::circuit::{Gate, GateOp, WOp, WireCircuit};
use qbc::driver::{self, Options};
use qbc::ir::adjoint::adjoint_block;
use qbc::ir::lower::lower_func;
use qbc::ir::predicate::predicate_block;
use qbc::ir::{unbind_phases, verify, Builder, Func, Module, OpKind, Type, Values};
use qbc::linalg::Matrix;
use qbc::sim::{circuit_unitary, exact_distribution, sample, translation_unitary, unitary_of};
use qbc::synth::classical::{embed_xor, LogicNetwork, NodeId};
use qbc::synth::translation::lower_translation;
use qbc::testgen::{random_circuit, random_predicate, random_reversible_func, random_span_pair, random_translation};

const SPAN_PAIRS: usize = 10_000;
const SPAN_BUDGET: Duration = Duration::from_secs(60);
const SCALE_BUDGET: Duration = Duration::from_secs(1);
const TRANSLATIONS: usize = 500;
const TRANSLATION_TOL: f64 = 1e-9;
const TRANSLATION_BUDGET: Duration = Duration::from_secs(300);
const BLOCKS: usize = 100;
const BLOCK_TOL: f64 = 1e-9;
const BV_MIN_PROB: f64 = 1.0 - 1e-9;
const GROVER_TOL: f64 = 1e-6;
const SIMON_SAMPLES: usize = 200;
const ALGORITHM_BUDGET: Duration = Duration::from_secs(120);
const CIRCUITS: usize = 200;
const CIRCUIT_TOL: f64 = 1e-9;
/// Probabilities at or below this count as impossible outcomes.
const ZERO_PROB: f64 = 1e-12;

fn report(n: u32, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn example(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples").join(format!("{name}.qw"));
    std::fs::read_to_string(p).unwrap()
}

fn basis(s: &str) -> Basis {
    parse_basis(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn lit_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[test]
fn criterion_1_span_check_agrees_with_rank_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut equal, mut disagreements) = (0, 0, Vec::new());
    while checked < SPAN_PAIRS {
        let (a, b) = random_span_pair(&mut rng, 3);
        if validate_basis(&a).is_err() || validate_basis(&b).is_err() {
            continue;
        }
        checked += 1;
        let oracle = spans_equal(&a, &b).unwrap();
        equal += oracle as usize;
        if check_span_equivalence(&a, &b).is_ok() != oracle {
            disagreements.push(format!("{a} >> {b} (oracle: {oracle})"));
        }
    }
    let t = start.elapsed();
    let ok = disagreements.is_empty() && t < SPAN_BUDGET && equal > 0 && equal < checked;
    report(
        1,
        ok,
        format!("{checked} pairs, {equal} span-equal, {} disagreements {:?}, {t:.1?}", disagreements.len(), disagreements.first()),
    );
}

#[test]
fn criterion_2_span_check_scales_to_64_qubits() {
    let src = "qpu main() -> bit[64] { '0'[64] | {'0','1'}[64] >> {'1','0'}[64] | std[64].measure }".to_string();
    let start = Instant::now();
    let res = driver::check(&src, &BTreeMap::new());
    let t = start.elapsed();
    let direct = check_span_equivalence(&basis("{'0','1'}[64]"), &basis("{'1','0'}[64]"));
    report(2, res.is_ok() && direct.is_ok() && t < SCALE_BUDGET, format!("type checked in {t:.1?}"));
}

#[test]
fn criterion_3_translation_synthesis_matches_oracle() {
    let start = Instant::now();
    let named = [
        ("{'01','10'}", "{'10','01'}"),
        ("{'p','m'} + ij", "{'p','m'} + pm"),
        ("{'m'} + ij", "{'m'} + pm"),
        ("std + fourier[3]", "fourier[3] + std"),
        ("fourier[3]", "std[3]"),
        ("std[2] + fourier[2]", "{'1','0'} + fourier[2] + std"),
        ("{'1'} + std", "{'11','10'}"),
        ("{'1'} + {'0','1'}", "{'1'} + {'1','0'}"),
        ("{'0','1'} + {'0','1'}", "{'00','10','01','11'}"),
        ("{'mmm'@pi}", "{'mmm'}"),
        ("{'ppp'}", "{'ppp'@pi}"),
        ("{'1'@pi}", "{'1'}"),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases: Vec<(Basis, Basis)> = named.iter().map(|(a, b)| (basis(a), basis(b))).collect();
    cases.extend((0..TRANSLATIONS).map(|_| random_translation(&mut rng, 5, 2)));
    let (mut worst, mut failures) = (0.0f64, Vec::new());
    for (a, b) in &cases {
        match lower_translation(a, b) {
            Ok(gates) => {
                let d = unitary_of(&gates, a.dim()).max_abs_diff(&translation_unitary(a, b).unwrap());
                worst = worst.max(d);
                if d > TRANSLATION_TOL {
                    failures.push(format!("{a} >> {b}: {d:e}"));
                }
            }
            Err(e) => failures.push(format!("{a} >> {b}: {e}")),
        }
    }
    let t = start.elapsed();
    report(
        3,
        failures.is_empty() && t < TRANSLATION_BUDGET,
        format!("{} translations, max |diff| {worst:.1e}, {} failures {:?}, {t:.1?}", cases.len(), failures.len(), failures.first()),
    );
}

fn func_unitary(f: &Func) -> Matrix {
    let m = Module { funcs: vec![f.clone()], classicals: Default::default(), entry: f.name.clone() };
    verify::verify_module(&m).unwrap_or_else(|e| panic!("{e}"));
    circuit_unitary(&lower_func(&m, f).unwrap()).unwrap()
}

/// P (x) U + (I - P) (x) I.
fn predicated(p: &Matrix, u: &Matrix) -> Matrix {
    let i = Matrix::identity(p.rows);
    p.kron(u).add(&i.sub(p).kron(&Matrix::identity(u.rows)))
}

/// Four qubits whose last two are swapped by renaming, then translated.
fn renaming_block() -> Func {
    let mut values = Values::default();
    let arg = values.fresh(Type::QBundle(4));
    let mut b = Builder::new(&mut values);
    let qs = b.unpack(arg);
    let swapped = b.qpack(vec![qs[0], qs[1], qs[3], qs[2]]);
    let (bi, _) = unbind_phases(&basis("pm + std[3]"));
    let (bo, _) = unbind_phases(&basis("std + pm + fourier[2]"));
    let y = b.op1(OpKind::QbTrans { b_in: bi, b_out: bo }, vec![swapped], Type::QBundle(4));
    let body = b.finish(vec![arg], vec![y]);
    Func { name: "f".into(), rev: true, body, values }
}

#[test]
fn criterion_4_adjoint_and_predication() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..BLOCKS {
        let n = rng.gen_range(1..=4);
        let mut f = random_reversible_func(&mut rng, n, i % 2 == 0);
        let u = func_unitary(&f);
        f.body = adjoint_block(&f.body, &mut f.values).unwrap();
        let d = (&func_unitary(&f) * &u).max_abs_diff(&Matrix::identity(u.rows));
        worst = worst.max(d);
        if d > BLOCK_TOL {
            failures.push(format!("adjoint {i}: {d:e}"));
        }
    }
    let mut cases: Vec<(Func, Basis)> = vec![(renaming_block(), basis("{'111'}"))];
    for i in 0..BLOCKS {
        let n = rng.gen_range(1..=3);
        let f = random_reversible_func(&mut rng, n, i % 2 == 0);
        let k = rng.gen_range(1..=2);
        cases.push((f, random_predicate(&mut rng, k)));
    }
    for (i, (mut f, pred)) in cases.into_iter().enumerate() {
        let u = func_unitary(&f);
        let want = predicated(&span_projector(&pred).unwrap(), &u);
        f.body = predicate_block(&f.body, &mut f.values, &pred).unwrap();
        let d = func_unitary(&f).max_abs_diff(&want);
        worst = worst.max(d);
        if d > BLOCK_TOL {
            failures.push(format!("predication {i} on {pred}: {d:e}"));
        }
    }
    report(
        4,
        failures.is_empty(),
        format!("{BLOCKS} adjoints, {} predications, max |diff| {worst:.1e}, failures {failures:?}", BLOCKS + 1),
    );
}

#[test]
fn criterion_5_inlining_removes_every_call() {
    let mut rows = Vec::new();
    let mut ok = true;
    for name in ["bv", "dj", "grover", "simon", "period"] {
        let src = example(name);
        let o1 = driver::stats(&src, &Options::default()).unwrap().calls;
        let raw = driver::stats(&src, &Options { inline: false, ..Options::default() }).unwrap().calls;
        let (opt, no_opt) = (o1.calls + o1.indirect_calls, raw.calls + raw.indirect_calls);
        ok &= opt == 0 && no_opt >= 1;
        rows.push(format!("{name} {opt}/{no_opt}"));
    }
    report(5, ok, format!("calls at -O1 / --no-inline: {}", rows.join(", ")));
}

fn dist(src: &str, defines: &[(&str, i64)]) -> BTreeMap<String, f64> {
    let opts = Options { defines: defines.iter().map(|(k, v)| (k.to_string(), *v)).collect(), ..Options::default() };
    driver::distribution(src, &opts).unwrap_or_else(|e| panic!("{e}"))
}

fn support(d: &BTreeMap<String, f64>) -> impl Iterator<Item = &String> {
    d.iter().filter(|(_, &p)| p > ZERO_PROB).map(|(k, _)| k)
}

fn dot(a: &str, b: &str) -> bool {
    a.chars().zip(b.chars()).filter(|&(x, y)| x == '1' && y == '1').count() % 2 == 1
}

#[test]
fn criterion_6_algorithms() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();

    let bv = example("bv");
    let mut bv_runs = 0;
    for n in 1..=8usize {
        let mut secrets: Vec<usize> = if n <= 4 { (0..1 << n).collect() } else { (0..6).map(|_| rng.gen_range(0..1 << n)).collect() };
        secrets.push((1 << n) - 1);
        for s in secrets {
            let s = lit_bits(&index_to_bits(s, n));
            let d = dist(&bv.replace("bit'1101'", &format!("bit'{s}'")), &[]);
            bv_runs += 1;
            if d.get(&s).copied().unwrap_or(0.0) < BV_MIN_PROB {
                failures.push(format!("BV secret {s}: {d:?}"));
            }
        }
    }

    let dj = example("dj");
    for n in 2..=6 {
        let zeros = "0".repeat(n as usize);
        let d = dist(&dj, &[("N", n)]);
        let hits = sample(&d, 1000, n as u64).get(&zeros).copied().unwrap_or(0);
        if d.get(&zeros).copied().unwrap_or(0.0) > ZERO_PROB || hits > 0 {
            failures.push(format!("DJ n={n} returned all zeros"));
        }
    }

    let (n, k) = (4i64, 3i64);
    let grover = dist(&example("grover"), &[("N", n), ("K", k)]);
    let want = ((2 * k + 1) as f64 * (2f64.powf(-n as f64 / 2.0)).asin()).sin().powi(2);
    let got = grover.get("1011").copied().unwrap_or(0.0);
    if (got - want).abs() > GROVER_TOL {
        failures.push(format!("Grover: {got} vs {want}"));
    }

    let simon = example("simon");
    for n in 2..=5usize {
        let s = format!("1{}", lit_bits(&index_to_bits(rng.gen_range(0..1 << (n - 1)), n - 1)));
        let d = dist(&simon.replace("bit'110'", &format!("bit'{s}'")), &[]);
        let samples = sample(&d, SIMON_SAMPLES, n as u64);
        if samples.values().sum::<usize>() != SIMON_SAMPLES || samples.keys().chain(support(&d)).any(|y| dot(y, &s)) {
            failures.push(format!("Simon secret {s}: {samples:?}"));
        }
    }

    let period = example("period");
    for (m, r) in [(4i64, 1i64), (5, 2), (6, 3), (6, 1)] {
        let d = dist(&period, &[("M", m), ("R", r)]);
        let step = 1usize << (m - r);
        let bad = support(&d).find(|y| usize::from_str_radix(y, 2).unwrap() % step != 0).cloned();
        if let Some(y) = bad {
            failures.push(format!("period M={m} R={r}: outcome {y}"));
        }
    }

    let t = start.elapsed();
    report(
        6,
        failures.is_empty() && t < ALGORITHM_BUDGET,
        format!("{bv_runs} BV secrets, DJ n=2..6, Grover p={got:.9} (want {want:.9}), Simon n=2..5, 4 period configs, {t:.1?}, failures {failures:?}"),
    );
}

fn gates(w: &WireCircuit) -> usize {
    w.gate_count()
}

#[test]
fn criterion_7_optimizer_safety() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let (mut fired, mut worst) = (0, 0.0f64);
    for i in 0..CIRCUITS {
        let n = rng.gen_range(1..=6);
        let len = rng.gen_range(1..=60);
        let w = random_circuit(&mut rng, n, len);
        let u = circuit_unitary(&w).unwrap();
        let p = peephole_wires(&w);
        fired += (p != w) as usize;
        let d = circuit_unitary(&p).unwrap().max_abs_diff(&u);
        let dd = circuit_unitary(&decompose_wires(&w)).unwrap().max_abs_diff_up_to_phase(&u);
        worst = worst.max(d).max(dd);
        if d > CIRCUIT_TOL || dd > CIRCUIT_TOL || gates(&p) > gates(&w) {
            failures.push(format!("circuit {i}: peephole {d:e}, decompose {dd:e}, gates {} -> {}", gates(&w), gates(&p)));
        }
    }
    let hxh = WireCircuit::from_gates(1, &[GateOp::single(Gate::H, 0), GateOp::single(Gate::X, 0), GateOp::single(Gate::H, 0)]);
    let hxh_ok = peephole_wires(&hxh).ops == vec![WOp::Gate(GateOp::single(Gate::Z, 0))];
    let kick = WireCircuit {
        num_inputs: 3,
        num_wires: 4,
        num_bits: 0,
        ops: vec![
            WOp::Alloc(3),
            WOp::Gate(GateOp::single(Gate::X, 3)),
            WOp::Gate(GateOp::single(Gate::H, 3)),
            WOp::Gate(GateOp::new(Gate::X, vec![0, 1, 2], vec![3])),
            WOp::Gate(GateOp::single(Gate::H, 3)),
            WOp::Gate(GateOp::single(Gate::X, 3)),
            WOp::FreeZ(3),
        ],
        ret_qubits: vec![0, 1, 2],
        ret_bits: vec![],
    };
    let mcz_ok = peephole_wires(&kick).ops == vec![WOp::Gate(GateOp::new(Gate::Z, vec![0, 1], vec![2]))];
    report(
        7,
        failures.is_empty() && hxh_ok && mcz_ok,
        format!(
            "{CIRCUITS} circuits ({fired} changed by peephole), max |diff| {worst:.1e}, HXH->Z {hxh_ok}, MCX|->->MCZ {mcz_ok}, failures {failures:?}"
        ),
    );
}

fn network(n: usize, outs: impl FnOnce(&mut LogicNetwork, &[NodeId]) -> Vec<NodeId>) -> LogicNetwork {
    let mut net = LogicNetwork::new(n);
    let ins: Vec<NodeId> = (0..n).map(|i| net.input(i)).collect();
    net.outputs = outs(&mut net, &ins);
    net
}

/// Checks U|x>|y> = |x>|y ^ f(x)> on every basis state.
fn truth_table_holds(net: &LogicNetwork, n: usize) -> Result<(), String> {
    let m = net.outputs.len();
    let x: Vec<usize> = (0..n).collect();
    let y: Vec<usize> = (n..n + m).collect();
    let mut next = n + m;
    let ops = embed_xor(net, &x, &y, &[], &mut next).map_err(|e| e.to_string())?;
    let w = WireCircuit { num_inputs: n + m, num_wires: next, num_bits: 0, ops, ret_qubits: (0..n + m).collect(), ret_bits: vec![] };
    let u = circuit_unitary(&w).map_err(|e| e.to_string())?;
    for xi in 0..1usize << n {
        let f = net.eval(&index_to_bits(xi, n)).iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
        for yi in 0..1usize << m {
            let (col, row) = (xi << m | yi, xi << m | (yi ^ f));
            if (u[(row, col)].re - 1.0).abs() > 1e-9 {
                return Err(format!("x={xi} y={yi}"));
            }
        }
    }
    Ok(())
}

#[test]
fn criterion_8_classical_synthesis_truth_tables() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 1..=6 {
        let mut fixtures = vec![
            ("identity", network(n, |_, ins| ins.to_vec())),
            ("parity", network(n, |net, ins| vec![net.reduce(ins, false, LogicNetwork::xor)])),
            ("and-tree", network(n, |net, ins| vec![net.reduce(ins, true, LogicNetwork::and)])),
        ];
        for s in [(1usize << n) - 1, 0b101101 & ((1 << n) - 1)] {
            fixtures.push((
                "inner product",
                network(n, |net, ins| {
                    let terms: Vec<NodeId> =
                        ins.iter().enumerate().filter(|(i, _)| s >> (n - 1 - i) & 1 == 1).map(|(_, &x)| x).collect();
                    vec![net.reduce(&terms, false, LogicNetwork::xor)]
                }),
            ));
        }
        for (name, net) in fixtures {
            checked += 1;
            if let Err(e) = truth_table_holds(&net, n) {
                failures.push(format!("{name} n={n}: {e}"));
            }
        }
    }
    report(8, failures.is_empty(), format!("{checked} networks with n <= 6, failures {failures:?}"));
}

#[test]
fn criterion_9_backend_goldens_and_reingestion() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut failures = Vec::new();
    let mut files = 0;
    for name in ["bell", "bv", "dj", "simon", "period", "teleport"] {
        let src = example(name);
        let qc = driver::compile(&src, &Options::default()).unwrap();
        let qasm = emit_qasm3(&qc, false).unwrap();
        let again = emit_qasm3(&driver::compile(&src, &Options::default()).unwrap(), false).unwrap();
        files += 1;
        if qasm != again || std::fs::read_to_string(golden.join(format!("{name}.qasm"))).ok().as_deref() != Some(&qasm) {
            failures.push(format!("{name}.qasm"));
        }
        if ["bell", "bv", "simon"].contains(&name) {
            files += 1;
            let ll = emit_qir_base(&qc).unwrap();
            if std::fs::read_to_string(golden.join(format!("{name}.ll"))).ok().as_deref() != Some(&ll) {
                failures.push(format!("{name}.ll"));
            }
        }
        let w = qc.entry().to_wires();
        let want = sample(&exact_distribution(&w).unwrap(), 2000, 9);
        let back = read_qasm3(&qasm).unwrap().entry().to_wires();
        let r = w.ret_bits.len();
        let mut marginal = BTreeMap::new();
        for (k, p) in exact_distribution(&back).unwrap() {
            *marginal.entry(k[..r].to_string()).or_insert(0.0) += p;
        }
        if sample(&marginal, 2000, 9) != want {
            failures.push(format!("{name} re-ingestion"));
        }
    }
    report(9, failures.is_empty(), format!("{files} golden files, 6 re-ingested programs, failures {failures:?}"));
}

#[test]
fn named_rotations_have_exact_phase() {
    // The oracle compares phases exactly, so a global phase error would show.
    let g = lower_translation(&basis("{'1'@(pi/2)}"), &basis("{'1'}")).unwrap();
    let u = unitary_of(&g, 1);
    assert!((u[(1, 1)] - num_complex::Complex64::from_polar(1.0, -PI / 2.0)).norm() < 1e-12);
}
