//! Standardization planning and the gates that move a primitive basis to and
//! from std.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::basis::{Basis, BasisElement, Prim};
use crate::circuit::{adjoint_gates, Gate, GateOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditionality {
    Unconditional,
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StdEntry {
    pub prim: Prim,
    pub dim: usize,
    pub cond: Conditionality,
}

pub type StdPlan = Vec<StdEntry>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    StdWard,
    PrimWard,
}

/// An element reduced to what planning needs: a primitive basis (`None` for
/// padding) and a dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Slot {
    prim: Option<Prim>,
    dim: usize,
}

fn slots(b: &Basis) -> VecDeque<Slot> {
    b.elements
        .iter()
        .map(|e| match e {
            BasisElement::Padding(d) => Slot { prim: None, dim: *d },
            e => Slot { prim: e.prim(), dim: e.dim() },
        })
        .collect()
}

fn push_entry(plan: &mut StdPlan, s: Slot, dim: usize, cond: Conditionality) {
    if let Some(prim) = s.prim {
        plan.push(StdEntry { prim, dim, cond });
    }
}

/// Determines the standardizations (`lstd`) and destandardizations (`rstd`)
/// of a translation, keeping both deque heads at the same qubit by pushing
/// padding after inseparable elements.
pub fn plan_standardization(b_in: &Basis, b_out: &Basis) -> (StdPlan, StdPlan) {
    use Conditionality::*;
    let (mut lstd, mut rstd) = (StdPlan::new(), StdPlan::new());
    let (mut ldeque, mut rdeque) = (slots(b_in), slots(b_out));
    while let (Some(l), Some(r)) = (ldeque.pop_front(), rdeque.pop_front()) {
        let kind = match (l.prim, r.prim) {
            (Some(a), Some(b)) if a == b => Unconditional,
            _ => Conditional,
        };
        if l.dim == r.dim {
            push_entry(&mut lstd, l, l.dim, kind);
            push_entry(&mut rstd, r, r.dim, kind);
            continue;
        }
        let left_big = l.dim > r.dim;
        let (big, small) = if left_big { (l, r) } else { (r, l) };
        let (bigstd, smallstd, bigdeque) =
            if left_big { (&mut lstd, &mut rstd, &mut ldeque) } else { (&mut rstd, &mut lstd, &mut rdeque) };
        let delta = big.dim - small.dim;
        match big.prim {
            Some(p) if p.separable() => {
                push_entry(smallstd, small, small.dim, kind);
                push_entry(bigstd, big, small.dim, kind);
                bigdeque.push_front(Slot { prim: Some(p), dim: delta });
            }
            _ => {
                push_entry(smallstd, small, small.dim, Conditional);
                push_entry(bigstd, big, big.dim, Conditional);
                bigdeque.push_front(Slot { prim: None, dim: delta });
            }
        }
    }
    (lstd, rstd)
}

/// Quantum Fourier transform on `qubits` (first = most significant), with
/// explicit SWAPs for the bit reversal. Column k of its matrix is the k-th
/// fourier basis vector.
pub fn qft(qubits: &[usize]) -> Vec<GateOp> {
    let n = qubits.len();
    let mut gates = Vec::new();
    for i in 0..n {
        gates.push(GateOp::single(Gate::H, qubits[i]));
        for j in i + 1..n {
            let theta = PI / (1u64 << (j - i)) as f64;
            gates.push(GateOp::new(Gate::P(theta), vec![qubits[j]], vec![qubits[i]]));
        }
    }
    for i in 0..n / 2 {
        gates.push(GateOp::new(Gate::Swap, vec![], vec![qubits[i], qubits[n - 1 - i]]));
    }
    gates
}

/// Gates for one entry acting on `qubits`.
pub fn entry_gates(prim: Prim, qubits: &[usize], dir: Direction) -> Vec<GateOp> {
    let forward: Vec<GateOp> = match prim {
        Prim::Std => vec![],
        Prim::Pm => qubits.iter().map(|&q| GateOp::single(Gate::H, q)).collect(),
        // prim-ward: |b> -> S H |b>
        Prim::Ij => qubits.iter().flat_map(|&q| [GateOp::single(Gate::H, q), GateOp::single(Gate::S, q)]).collect(),
        Prim::Fourier => qft(qubits),
    };
    match dir {
        Direction::PrimWard => forward,
        Direction::StdWard => adjoint_gates(&forward),
    }
}

/// Gates for the entries of `plan` with conditionality `which`, laid out
/// consecutively from qubit `base`.
pub fn emit_standardization(plan: &StdPlan, which: Conditionality, dir: Direction, base: usize) -> Vec<GateOp> {
    let mut gates = Vec::new();
    let mut q = base;
    for e in plan {
        if e.cond == which {
            let qubits: Vec<usize> = (q..q + e.dim).collect();
            gates.extend(entry_gates(e.prim, &qubits, dir));
        }
        q += e.dim;
    }
    gates
}

/// Qubit ranges covered by entries of the given conditionality.
pub fn regions(plan: &StdPlan, which: Conditionality) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = 0;
    for e in plan {
        if e.cond == which {
            out.extend(q..q + e.dim);
        }
        q += e.dim;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::oracle::fourier_state;
    use crate::sim::unitary_of;
    use Conditionality::*;

    fn e(prim: Prim, dim: usize, cond: Conditionality) -> StdEntry {
        StdEntry { prim, dim, cond }
    }

    fn plan(a: &str, b: &str) -> (StdPlan, StdPlan) {
        plan_standardization(&a.parse().unwrap(), &b.parse().unwrap())
    }

    #[test]
    fn plans() {
        let (l, r) = plan("{'p','m'} + ij", "{'p','m'} + pm");
        assert_eq!(l, vec![e(Prim::Pm, 1, Unconditional), e(Prim::Ij, 1, Conditional)]);
        assert_eq!(r, vec![e(Prim::Pm, 1, Unconditional), e(Prim::Pm, 1, Conditional)]);
        let (l, r) = plan("std + fourier[3]", "fourier[3] + std");
        assert_eq!(l, vec![e(Prim::Std, 1, Conditional), e(Prim::Fourier, 3, Conditional)]);
        assert_eq!(r, vec![e(Prim::Fourier, 3, Conditional), e(Prim::Std, 1, Conditional)]);
        let (l, r) = plan("std[2]", "std[2]");
        assert_eq!(l, vec![e(Prim::Std, 2, Unconditional)]);
        assert_eq!(l, r);
    }

    #[test]
    fn qft_columns_are_fourier_vectors() {
        for n in 1..=3 {
            let qs: Vec<usize> = (0..n).collect();
            let u = unitary_of(&qft(&qs), n);
            for k in 0..1 << n {
                let col = u.column(k);
                let want = fourier_state(n, k);
                for (a, b) in col.iter().zip(&want) {
                    assert!((a - b).norm() < 1e-12, "n={n} k={k}");
                }
            }
        }
    }
}
