//! The compilation pipeline, from source text to circuits and histograms.

use std::collections::BTreeMap;

use crate::backend::{emit_qasm3, emit_qir_base, BackendError};
use crate::circuit::decompose::decompose_module;
use crate::circuit::peephole::peephole_module;
use crate::circuit::verify::verify_module as verify_circuit;
use crate::circuit::QcModule;
use crate::frontend::ast::Program;
use crate::frontend::canon::canonicalize_ast;
use crate::frontend::diag::{Diagnostic, Diagnostics};
use crate::frontend::expand::expand;
use crate::frontend::lower::lower_program;
use crate::frontend::parser::parse;
use crate::frontend::typecheck::{typecheck, Signatures};
use crate::ir::canon::lift_lambdas;
use crate::ir::inline::inline;
use crate::ir::lower::lower_module;
use crate::ir::specialize::specialize;
use crate::ir::verify::verify_module;
use crate::ir::{call_counts, CallCounts, IrError, Module};
use crate::sim::{exact_distribution, sample, Histogram, SimError};

pub const ENTRY: &str = "main";

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    /// `-O1`: IR canonicalization beyond what lowering needs, and peephole.
    pub optimize: bool,
    pub inline: bool,
    /// Rewrite gates with several controls into one- and two-qubit gates.
    pub decompose: bool,
    /// Let the QASM register allocator reuse freed qubit indices.
    pub reuse_qubits: bool,
    pub defines: BTreeMap<String, i64>,
}

impl Default for Options {
    fn default() -> Self {
        Options { optimize: true, inline: true, decompose: true, reuse_qubits: false, defines: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Diagnostics(Diagnostics),
    #[error("{0}")]
    Ir(#[from] IrError),
    #[error("{0}")]
    Circuit(String),
    #[error("{0}")]
    Sim(#[from] SimError),
    #[error("{0}")]
    Backend(#[from] BackendError),
}

impl From<Diagnostic> for CompileError {
    fn from(d: Diagnostic) -> Self {
        CompileError::Diagnostics(vec![d])
    }
}

impl CompileError {
    /// Messages prefixed with the file name, one per line.
    pub fn render(&self, file: &str) -> String {
        match self {
            CompileError::Diagnostics(ds) => ds.iter().map(|d| d.render(file)).collect::<Vec<_>>().join("\n"),
            e => format!("{file}: error: {e}"),
        }
    }
}

/// Parses, expands and type checks.
pub fn check(src: &str, defines: &BTreeMap<String, i64>) -> Result<(Program, Signatures), CompileError> {
    let p = parse(src).map_err(|d| CompileError::Diagnostics(vec![d]))?;
    let p = expand(&p, defines).map_err(CompileError::Diagnostics)?;
    let sigs = typecheck(&p).map_err(CompileError::Diagnostics)?;
    Ok((p, sigs))
}

/// The canonicalized AST.
pub fn compile_ast(src: &str, opts: &Options) -> Result<Program, CompileError> {
    let (p, _) = check(src, &opts.defines)?;
    Ok(canonicalize_ast(&p))
}

/// Lowers to the IR and runs the IR passes: lifting and inlining (or only
/// lifting when inlining is off), then specialization.
pub fn compile_ir(src: &str, opts: &Options) -> Result<Module, CompileError> {
    let (p, sigs) = check(src, &opts.defines)?;
    let p = canonicalize_ast(&p);
    let mut m = lower_program(&p, &sigs, ENTRY)?;
    verify_module(&m)?;
    if opts.inline {
        inline(&mut m, opts.optimize)?;
    } else {
        lift_lambdas(&mut m);
    }
    specialize(&mut m)?;
    verify_module(&m)?;
    Ok(m)
}

/// Lowers an inlined module to gates, then optionally runs peephole and
/// decomposition.
pub fn compile_circuit(m: &Module, opts: &Options) -> Result<QcModule, CompileError> {
    let mut qc = lower_module(m)?;
    if opts.optimize {
        qc = peephole_module(&qc);
    }
    if opts.decompose {
        qc = decompose_module(&qc);
    }
    verify_circuit(&qc).map_err(|e| CompileError::Circuit(e.to_string()))?;
    Ok(qc)
}

pub fn compile(src: &str, opts: &Options) -> Result<QcModule, CompileError> {
    compile_circuit(&compile_ir(src, opts)?, opts)
}

/// Exact outcome probabilities of the compiled program.
pub fn distribution(src: &str, opts: &Options) -> Result<BTreeMap<String, f64>, CompileError> {
    let qc = compile(src, opts)?;
    Ok(exact_distribution(&qc.entry().to_wires())?)
}

pub fn run(src: &str, opts: &Options, shots: usize, seed: u64) -> Result<Histogram, CompileError> {
    Ok(sample(&distribution(src, opts)?, shots, seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emit {
    Ast,
    QwertyIr,
    QcircuitIr,
    Qasm,
    Qir,
}

impl Emit {
    pub const ALL: [Emit; 5] = [Emit::Ast, Emit::QwertyIr, Emit::QcircuitIr, Emit::Qasm, Emit::Qir];

    pub fn name(self) -> &'static str {
        match self {
            Emit::Ast => "ast",
            Emit::QwertyIr => "qwerty-ir",
            Emit::QcircuitIr => "qcircuit-ir",
            Emit::Qasm => "qasm",
            Emit::Qir => "qir",
        }
    }

    pub fn from_name(s: &str) -> Option<Emit> {
        Emit::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Compiles to the requested textual form.
pub fn emit(src: &str, opts: &Options, what: Emit) -> Result<String, CompileError> {
    if what == Emit::Ast {
        return Ok(crate::frontend::printer::print_program(&compile_ast(src, opts)?));
    }
    let m = compile_ir(src, opts)?;
    if what == Emit::QwertyIr {
        return Ok(crate::ir::print::print_module(&m));
    }
    let c = call_counts(&m);
    if c.calls + c.indirect_calls + c.lambdas > 0 {
        return Err(CompileError::Circuit(format!(
            "{} call(s), {} indirect call(s) and {} lambda(s) survive; circuits need every call inlined",
            c.calls, c.indirect_calls, c.lambdas
        )));
    }
    let qc = compile_circuit(&m, opts)?;
    Ok(match what {
        Emit::QcircuitIr => crate::circuit::print::print_module(&qc),
        Emit::Qasm => emit_qasm3(&qc, opts.reuse_qubits)?,
        _ => emit_qir_base(&qc)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stats {
    pub calls: CallCounts,
    /// Gate statistics, when the module could be lowered to a circuit.
    pub circuit: Option<crate::circuit::CircuitStats>,
}

pub fn stats(src: &str, opts: &Options) -> Result<Stats, CompileError> {
    let m = compile_ir(src, opts)?;
    let calls = call_counts(&m);
    let circuit = if calls.calls + calls.indirect_calls == 0 {
        Some(compile_circuit(&m, opts)?.entry().stats())
    } else {
        None
    };
    Ok(Stats { calls, circuit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(src: &str) -> BTreeMap<String, f64> {
        distribution(src, &Options::default()).unwrap_or_else(|e| panic!("{e}"))
    }

    fn close(d: &BTreeMap<String, f64>, want: &[(&str, f64)]) {
        let got: Vec<(String, f64)> = d.iter().map(|(k, v)| (k.clone(), *v)).collect();
        assert_eq!(got.len(), want.len(), "{got:?}");
        for ((k, v), (wk, wv)) in got.iter().zip(want) {
            assert_eq!(k, wk);
            assert!((v - wv).abs() < 1e-9, "{got:?}");
        }
    }

    #[test]
    fn bell_pair() {
        close(&dist("qpu main() -> bit[2] { 'p0' | {'10','11'} >> {'11','10'} | std[2].measure }"), &[("00", 0.5), ("11", 0.5)]);
    }

    #[test]
    fn adjoint_and_predicate() {
        close(&dist("qpu main() -> bit[1] { 'p' | ~(std >> pm) | std.measure }"), &[("0", 1.0)]);
        close(&dist("qpu main() -> bit[2] { '10' | {'1'} & std.flip | std[2].measure }"), &[("11", 1.0)]);
        close(&dist("qpu main() -> bit[2] { '00' | {'1'} & std.flip | std[2].measure }"), &[("00", 1.0)]);
    }

    #[test]
    fn bernstein_vazirani() {
        let src = "classical f[N](x: bit[N]) -> bit captures(s: bit[N] = bit'1101') { (x & s).xor_reduce() }
                   qpu kernel[N](q: qubit[N]) -> qubit[N] rev captures(s: bit[N] = bit'1101') { q | f[[N]].sign }
                   qpu main() -> bit[4] { 'pppp' | kernel[[4]] | pm[4].measure }";
        close(&dist(src), &[("1101", 1.0)]);
        let s = stats(src, &Options { inline: false, ..Options::default() }).unwrap();
        assert!(s.calls.indirect_calls >= 1);
        let s = stats(src, &Options::default()).unwrap();
        assert_eq!(s.calls.calls + s.calls.indirect_calls, 0);
    }

    #[test]
    fn conditional_on_measurement() {
        close(&dist("qpu main() -> bit[2] { let m = 'p' | std.measure; m + ('0' | (std.flip if m else id) | std.measure) }"), &[("00", 0.5), ("11", 0.5)]);
    }

    #[test]
    fn optimization_levels_agree() {
        let src = "qpu main() -> bit[3] { 'p1i' | {'1'} & (std[2] >> fourier[2]) | ~({'0','1'} + pm >> {'1','0'} + pm) + id | std[3].measure }";
        let o1 = dist(src);
        let o0 = distribution(src, &Options { optimize: false, ..Options::default() }).unwrap();
        assert_eq!(o1.keys().collect::<Vec<_>>(), o0.keys().collect::<Vec<_>>());
        for (k, v) in &o1 {
            assert!((v - o0[k]).abs() < 1e-9);
        }
    }
}
