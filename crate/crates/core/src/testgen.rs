//! Random generators for property tests and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;
use std::f64::consts::PI;

use crate::basis::{index_to_bits, Basis, BasisElement, BasisLiteral, BasisVector, Prim};
use crate::circuit::{Gate, GateOp, WOp, WireCircuit};
use crate::ir::{unbind_phases, Builder, Func, OpKind, Type, Value, Values};

const SEPARABLE: [Prim; 3] = [Prim::Std, Prim::Pm, Prim::Ij];

fn random_phase<R: Rng>(rng: &mut R) -> Option<f64> {
    match rng.gen_range(0..4) {
        0 => Some(PI * rng.gen_range(1..8) as f64 / 4.0),
        1 => Some(rng.gen_range(0.1..6.0)),
        _ => None,
    }
}

fn literal<R: Rng>(rng: &mut R, prim: Prim, dim: usize, idx: &[usize]) -> BasisElement {
    BasisElement::Literal(BasisLiteral::new(
        idx.iter()
            .map(|&k| {
                let v = BasisVector::new(prim, index_to_bits(k, dim));
                match random_phase(rng) {
                    Some(t) => v.with_phase(t),
                    None => v,
                }
            })
            .collect(),
    ))
}

/// A fully spanning element of dimension `dim`: a builtin or a reordered
/// literal of a separable prim.
fn full_element<R: Rng>(rng: &mut R, dim: usize) -> BasisElement {
    if rng.gen_bool(0.5) {
        let prim = if dim <= 3 && rng.gen_bool(0.3) { Prim::Fourier } else { *SEPARABLE.choose(rng).unwrap() };
        BasisElement::builtin(prim, dim)
    } else {
        let mut idx: Vec<usize> = (0..1 << dim).collect();
        idx.shuffle(rng);
        let prim = *SEPARABLE.choose(rng).unwrap();
        literal(rng, prim, dim, &idx)
    }
}

/// Fully spanning elements whose dimensions sum to `dim`.
fn full_run<R: Rng>(rng: &mut R, mut dim: usize) -> Vec<BasisElement> {
    let mut out = Vec::new();
    while dim > 0 {
        let d = rng.gen_range(1..=dim);
        out.push(full_element(rng, d));
        dim -= d;
    }
    out
}

/// A random span-equivalent translation of total dimension at most
/// `max_dim`, with non-fully-spanning literals of at most `max_pred` qubits.
pub fn random_translation<R: Rng>(rng: &mut R, max_dim: usize, max_pred: usize) -> (Basis, Basis) {
    let total = rng.gen_range(1..=max_dim);
    random_translation_dim(rng, total, max_pred)
}

/// A random span-equivalent translation of dimension exactly `dim`.
pub fn random_translation_dim<R: Rng>(rng: &mut R, dim: usize, max_pred: usize) -> (Basis, Basis) {
    let (mut l, mut r) = (Vec::new(), Vec::new());
    let mut left = dim;
    while left > 0 {
        let d = rng.gen_range(1..=left.min(3));
        if d <= max_pred && rng.gen_bool(0.35) {
            let prim = *SEPARABLE.choose(rng).unwrap();
            let n = 1usize << d;
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            idx.truncate(rng.gen_range(1..n));
            let lhs = literal(rng, prim, d, &idx);
            if rng.gen_bool(0.5) {
                idx.shuffle(rng);
            }
            let rhs = literal(rng, prim, d, &idx);
            l.push(lhs);
            r.push(rhs);
        } else {
            l.extend(full_run(rng, d));
            r.extend(full_run(rng, d));
        }
        left -= d;
    }
    (Basis::new(l), Basis::new(r))
}

/// A random element of dimension `dim`: a builtin, or a literal holding any
/// nonempty set of distinct vectors.
fn random_element<R: Rng>(rng: &mut R, dim: usize) -> BasisElement {
    if rng.gen_bool(0.3) {
        let prim = if dim <= 3 && rng.gen_bool(0.2) { Prim::Fourier } else { *SEPARABLE.choose(rng).unwrap() };
        return BasisElement::builtin(prim, dim);
    }
    let n = 1usize << dim;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(rng.gen_range(1..=n));
    let prim = *SEPARABLE.choose(rng).unwrap();
    literal(rng, prim, dim, &idx)
}

/// A random basis of dimension `dim`, possibly not fully spanning.
pub fn random_basis<R: Rng>(rng: &mut R, dim: usize) -> Basis {
    let mut els = Vec::new();
    let mut left = dim;
    while left > 0 {
        let d = rng.gen_range(1..=left);
        els.push(random_element(rng, d));
        left -= d;
    }
    Basis::new(els)
}

/// Changes one element of `b` so that its span most likely changes.
fn mutate<R: Rng>(rng: &mut R, b: &Basis) -> Basis {
    let mut els = b.elements.clone();
    let i = rng.gen_range(0..els.len());
    let d = els[i].dim();
    els[i] = match &els[i] {
        BasisElement::Literal(l) if l.vectors.len() > 1 && rng.gen_bool(0.5) => {
            let mut l = l.clone();
            l.vectors.remove(rng.gen_range(0..l.vectors.len()));
            BasisElement::Literal(l)
        }
        BasisElement::Literal(l) if rng.gen_bool(0.5) => {
            let mut l = l.clone();
            let prim = *SEPARABLE.choose(rng).unwrap();
            for v in &mut l.vectors {
                v.prim = prim;
            }
            BasisElement::Literal(l)
        }
        _ => random_element(rng, d),
    };
    Basis::new(els)
}

/// A pair of bases of equal dimension, at most `max_dim`, drawn so that both
/// equal and unequal spans are common.
pub fn random_span_pair<R: Rng>(rng: &mut R, max_dim: usize) -> (Basis, Basis) {
    let dim = rng.gen_range(1..=max_dim);
    match rng.gen_range(0..4) {
        0 => random_translation_dim(rng, dim, dim),
        1 => {
            let (a, b) = random_translation_dim(rng, dim, dim);
            (a, mutate(rng, &b))
        }
        2 => (random_basis(rng, dim), random_basis(rng, dim)),
        _ => {
            let a = random_basis(rng, dim);
            let b = if rng.gen_bool(0.5) { mutate(rng, &a) } else { a.clone() };
            (a, b)
        }
    }
}

/// A predicate basis on `dim` qubits that does not fully span.
pub fn random_predicate<R: Rng>(rng: &mut R, dim: usize) -> Basis {
    loop {
        let mut els = Vec::new();
        let mut left = dim;
        while left > 0 {
            let d = rng.gen_range(1..=left);
            let e = if rng.gen_bool(0.2) {
                BasisElement::builtin(*SEPARABLE.choose(rng).unwrap(), d)
            } else {
                let n = 1usize << d;
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(rng);
                idx.truncate(rng.gen_range(1..n));
                let prim = *SEPARABLE.choose(rng).unwrap();
                BasisElement::Literal(BasisLiteral::new(
                    idx.iter().map(|&k| BasisVector::new(prim, index_to_bits(k, d))).collect(),
                ))
            };
            els.push(e);
            left -= d;
        }
        let b = Basis::new(els);
        if !b.fully_spans() {
            return b;
        }
    }
}

/// Applies `b_in >> b_out` to `q`, binding phases to angle values.
fn apply_translation(b: &mut Builder, q: Value, b_in: &Basis, b_out: &Basis) -> Value {
    let (bi, ti) = unbind_phases(b_in);
    let (bo, to) = unbind_phases(b_out);
    let mut operands = vec![q];
    for t in ti.into_iter().chain(to) {
        operands.push(b.angle(t));
    }
    b.op1(OpKind::QbTrans { b_in: bi, b_out: bo }, operands, Type::QBundle(b_in.dim()))
}

/// A reversible function on `qbundle[n]` built from one to three random
/// translations, some acting on a subset of the qubits. With `rename`, one
/// step permutes qubits by unpacking and repacking in a different order.
pub fn random_reversible_func<R: Rng>(rng: &mut R, n: usize, rename: bool) -> Func {
    let mut values = Values::default();
    let arg = values.fresh(Type::QBundle(n));
    let mut b = Builder::new(&mut values);
    let steps = rng.gen_range(1..=3);
    let rename_at = if rename && n > 1 { Some(rng.gen_range(0..=steps)) } else { None };
    let mut q = arg;
    for step in 0..=steps {
        if rename_at == Some(step) {
            let mut qs = b.unpack(q);
            let orig = qs.clone();
            while qs == orig {
                qs.shuffle(rng);
            }
            q = b.qpack(qs);
        }
        if step == steps {
            break;
        }
        let k = rng.gen_range(1..=n);
        if k == n {
            let (bi, bo) = random_translation_dim(rng, n, 2);
            q = apply_translation(&mut b, q, &bi, &bo);
        } else {
            let mut qs = b.unpack(q);
            let mut pos: Vec<usize> = (0..n).collect();
            pos.shuffle(rng);
            pos.truncate(k);
            let sub = b.qpack(pos.iter().map(|&i| qs[i]).collect());
            let (bi, bo) = random_translation_dim(rng, k, 2);
            let out = apply_translation(&mut b, sub, &bi, &bo);
            for (&i, v) in pos.iter().zip(b.unpack(out)) {
                qs[i] = v;
            }
            q = b.qpack(qs);
        }
    }
    let body = b.finish(vec![arg], vec![q]);
    Func { name: "f".into(), rev: true, body, values }
}

/// A random gate circuit on `n` qubits with up to `len` gates. Some steps
/// kick a multi-controlled X back through a |-> ancilla.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, len: usize) -> WireCircuit {
    let mut ops = Vec::new();
    let mut num_wires = n;
    let mut gates = 0;
    while gates < len {
        let mut qs: Vec<usize> = (0..n).collect();
        qs.shuffle(rng);
        if n > 1 && rng.gen_bool(0.05) {
            let k = rng.gen_range(1..=n.min(3));
            let a = num_wires;
            num_wires += 1;
            ops.push(WOp::Alloc(a));
            ops.push(WOp::Gate(GateOp::single(Gate::X, a)));
            ops.push(WOp::Gate(GateOp::single(Gate::H, a)));
            ops.push(WOp::Gate(GateOp::new(Gate::X, qs[..k].to_vec(), vec![a])));
            ops.push(WOp::Gate(GateOp::single(Gate::H, a)));
            ops.push(WOp::Gate(GateOp::single(Gate::X, a)));
            ops.push(WOp::FreeZ(a));
            gates += 5;
            continue;
        }
        let gate = match rng.gen_range(0..11) {
            0 => Gate::X,
            1 => Gate::Y,
            2 => Gate::Z,
            3 | 4 => Gate::H,
            5 => Gate::S,
            6 => Gate::Sdg,
            7 => Gate::T,
            8 => Gate::Tdg,
            9 => Gate::P(PI * rng.gen_range(-8..8) as f64 / 8.0),
            _ if n > 1 => Gate::Swap,
            _ => Gate::X,
        };
        let t = gate.num_targets();
        let c = rng.gen_range(0..=(n - t).min(3));
        let c = if rng.gen_bool(0.5) { 0 } else { c };
        ops.push(WOp::Gate(GateOp::new(gate, qs[t..t + c].to_vec(), qs[..t].to_vec())));
        gates += 1;
    }
    WireCircuit { num_inputs: n, num_wires, num_bits: 0, ops, ret_qubits: (0..n).collect(), ret_bits: vec![] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::check_span_equivalence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_translations_typecheck() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (a, b) = random_translation(&mut rng, 5, 2);
            assert_eq!(a.dim(), b.dim());
            check_span_equivalence(&a, &b).unwrap_or_else(|e| panic!("{a} >> {b}: {e}"));
        }
    }
}
