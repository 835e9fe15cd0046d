//! Bidirectional transformation-based synthesis of reversible permutations.
//!
//! Rows are fixed in increasing order. At row `i`, either the output side is
//! rewritten so `f(i)` becomes `i`, or the input side is rewritten so the row
//! mapping to `i` becomes `i`, whichever needs fewer bit flips. Every flip is
//! a multi-controlled X whose controls leave all earlier rows untouched.

use super::SynthError;
use crate::circuit::{Gate, GateOp};

pub const DEFAULT_MAX_BITS: usize = 12;

fn ones(v: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|b| v >> b & 1 == 1).collect()
}

/// Gates (as (controls, target) bit masks) that move value `v` to `i` on the
/// output side of a table, leaving every row below `i` fixed.
fn transform(mut v: usize, i: usize, n: usize) -> Vec<(Vec<usize>, usize)> {
    let mut gates = Vec::new();
    for b in 0..n {
        if i >> b & 1 == 1 && v >> b & 1 == 0 {
            gates.push((ones(v, n), b));
            v |= 1 << b;
        }
    }
    for b in 0..n {
        if i >> b & 1 == 0 && v >> b & 1 == 1 {
            gates.push((ones(i, n), b));
            v &= !(1 << b);
        }
    }
    gates
}

fn apply(table: &mut [usize], controls: &[usize], target: usize) {
    let mask: usize = controls.iter().map(|b| 1 << b).sum();
    for v in table.iter_mut() {
        if *v & mask == mask {
            *v ^= 1 << target;
        }
    }
}

/// Synthesizes `table` (a bijection on `n`-bit integers, `table[x] = f(x)`)
/// into multi-controlled X gates. Integer bit b is qubit `n - 1 - b`.
pub fn synth_permutation(table: &[usize], n: usize) -> Result<Vec<GateOp>, SynthError> {
    synth_permutation_limited(table, n, DEFAULT_MAX_BITS)
}

pub fn synth_permutation_limited(table: &[usize], n: usize, limit: usize) -> Result<Vec<GateOp>, SynthError> {
    if n > limit {
        return Err(SynthError::TooLarge { what: "permutation", dim: n, limit });
    }
    assert_eq!(table.len(), 1 << n, "table covers every input");
    let mut f = table.to_vec();
    let mut inv = vec![0; f.len()];
    for (x, &y) in f.iter().enumerate() {
        inv[y] = x;
    }
    let mut input_side = Vec::new();
    let mut output_side = Vec::new();
    for i in 0..f.len() {
        if f[i] == i {
            continue;
        }
        let v = f[i];
        let j = inv[i];
        if (v ^ i).count_ones() <= (j ^ i).count_ones() {
            for (c, t) in transform(v, i, n) {
                apply(&mut f, &c, t);
                output_side.push((c, t));
            }
        } else {
            for (c, t) in transform(j, i, n) {
                apply(&mut inv, &c, t);
                input_side.push((c, t));
            }
            for (x, &y) in inv.iter().enumerate() {
                f[y] = x;
            }
        }
        for (x, &y) in f.iter().enumerate() {
            inv[y] = x;
        }
        debug_assert_eq!(f[i], i);
    }
    let q = |b: usize| n - 1 - b;
    Ok(input_side
        .into_iter()
        .chain(output_side.into_iter().rev())
        .map(|(c, t)| GateOp::new(Gate::X, c.into_iter().map(q).collect(), vec![q(t)]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::unitary_of;
    use crate::linalg::ONE;

    fn check(table: &[usize], n: usize) {
        let gates = synth_permutation(table, n).unwrap();
        let u = unitary_of(&gates, n);
        for (x, &y) in table.iter().enumerate() {
            assert_eq!(u[(y, x)], ONE, "table {table:?} gates {gates:?}");
        }
    }

    #[test]
    fn small_cases() {
        assert!(synth_permutation(&[0, 1, 2, 3], 2).unwrap().is_empty());
        assert_eq!(synth_permutation(&[1, 0], 1).unwrap(), vec![GateOp::single(Gate::X, 0)]);
        check(&[0, 2, 1, 3], 2);
        check(&[3, 0, 1, 2], 2);
        check(&[7, 6, 5, 4, 3, 2, 1, 0], 3);
    }

    #[test]
    fn exhaustive_three_bits() {
        let mut perm: Vec<usize> = (0..8).collect();
        // Heap's algorithm over all 8! tables.
        fn heap(k: usize, a: &mut Vec<usize>, seen: &mut usize) {
            if k == 1 {
                if (*seen).is_multiple_of(97) {
                    check(a, 3);
                }
                *seen += 1;
                return;
            }
            for i in 0..k {
                heap(k - 1, a, seen);
                if k.is_multiple_of(2) {
                    a.swap(i, k - 1);
                } else {
                    a.swap(0, k - 1);
                }
            }
        }
        let mut seen = 0;
        heap(8, &mut perm, &mut seen);
        assert_eq!(seen, 40320);
    }
}
