//! Browser bindings for the demo page in `www/`.
//!
//! The plain functions are what the tests call; the `#[wasm_bindgen]`
//! wrappers only turn their errors into JS exceptions.

use qbc::basis::{check_span_equivalence, parse_basis, validate_basis};
use qbc::driver::{self, Emit, Options};
use wasm_bindgen::prelude::*;

const FILE: &str = "input.qw";

fn options(optimize: bool) -> Options {
    Options { optimize, ..Options::default() }
}

/// Compiles to `qasm`, `qir`, `qcircuit-ir`, `qwerty-ir` or `ast`.
pub fn compile_text(src: &str, emit: &str, optimize: bool) -> Result<String, String> {
    let what = Emit::from_name(emit).ok_or_else(|| format!("unknown output form `{emit}`"))?;
    driver::emit(src, &options(optimize), what).map_err(|e| e.render(FILE))
}

/// Samples the program and returns `bits\tcount` lines.
pub fn run_text(src: &str, shots: usize, seed: u64) -> Result<String, String> {
    let hist = driver::run(src, &options(true), shots, seed).map_err(|e| e.render(FILE))?;
    Ok(hist.iter().map(|(bits, n)| format!("{bits}\t{n}\n")).collect())
}

/// Checks that `b_in >> b_out` is a well-formed translation.
pub fn span_check_text(b_in: &str, b_out: &str) -> Result<String, String> {
    let a = parse_basis(b_in).map_err(|e| format!("left basis: {e}"))?;
    let b = parse_basis(b_out).map_err(|e| format!("right basis: {e}"))?;
    validate_basis(&a).map_err(|e| format!("left basis: {e}"))?;
    validate_basis(&b).map_err(|e| format!("right basis: {e}"))?;
    if a.dim() != b.dim() {
        return Err(format!("dimensions differ: {} vs {}", a.dim(), b.dim()));
    }
    check_span_equivalence(&a, &b).map_err(|e| e.to_string())?;
    Ok(format!("{a} and {b} span the same {}-qubit subspace", a.dim()))
}

#[wasm_bindgen]
pub fn compile(src: &str, emit: &str, optimize: bool) -> Result<String, JsError> {
    compile_text(src, emit, optimize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn run(src: &str, shots: usize, seed: u64) -> Result<String, JsError> {
    run_text(src, shots, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn span_check(b_in: &str, b_out: &str) -> Result<String, JsError> {
    span_check_text(b_in, b_out).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BELL: &str = "qpu main() -> bit[2] { 'p0' | {'1'} & std.flip | std[2].measure }\n";

    #[test]
    fn compiles_and_runs() {
        assert!(compile_text(BELL, "qasm", true).unwrap().starts_with("OPENQASM 3.0;"));
        assert!(compile_text(BELL, "wat", true).is_err());
        let out = run_text(BELL, 100, 1).unwrap();
        assert!(out.lines().all(|l| l.starts_with("00\t") || l.starts_with("11\t")));
    }

    #[test]
    fn span_check_reports_both_outcomes() {
        assert!(span_check_text("{'0','1'}", "{'1','0'}").is_ok());
        assert!(span_check_text("{'0'}", "{'1'}").is_err());
        assert!(span_check_text("std", "std[2]").is_err());
        assert!(span_check_text("{'0'", "std").is_err());
    }
}
