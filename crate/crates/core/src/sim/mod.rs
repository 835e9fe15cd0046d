//! Dense statevector simulator.
//!
//! Measurements are deferred: a measured (or freed) qubit stays in the state
//! vector and is never touched again, so its std-basis value is the recorded
//! bit. A conditional on a bit becomes a control on that qubit. The result of
//! a run is therefore the exact outcome distribution; shots are drawn from it
//! with `ChaCha8Rng::seed_from_u64(seed)` over outcomes in sorted order, so
//! histograms are reproducible across platforms.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::oracle::{basis_vectors, OracleError};
use crate::basis::Basis;
use crate::circuit::{Gate, GateOp, QcModule, WOp, WireCircuit};
use crate::linalg::{Matrix, C64, ONE, ZERO};

/// Largest number of simultaneously held positions (live plus measured).
pub const MAX_POSITIONS: usize = 24;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("qfreez on wire {wire}: qubit is not |0> (probability of |1> is {prob:.3e})")]
    NotZero { wire: usize, prob: f64 },
    #[error("simulation needs more than {MAX_POSITIONS} qubits")]
    TooManyQubits,
    #[error("circuit is not unitary: {0}")]
    NotUnitary(String),
    #[error("circuit has unresolved calls and cannot be simulated")]
    Unresolved,
}

pub fn gate_matrix(g: Gate) -> [[C64; 2]; 2] {
    let h = FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    match g {
        Gate::X => [[ZERO, ONE], [ONE, ZERO]],
        Gate::Y => [[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]],
        Gate::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        Gate::Swap => panic!("swap is a two-qubit gate"),
        g => {
            let theta = g.phase_angle().expect("remaining gates are diagonal");
            [[ONE, ZERO], [ZERO, C64::from_polar(1.0, theta)]]
        }
    }
}

/// Amplitudes over positions; position p is bit p of the internal index.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn new(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        StateVector { n, amps }
    }

    /// Adds a position in |0>.
    pub fn grow(&mut self) -> Result<usize, SimError> {
        if self.n >= MAX_POSITIONS {
            return Err(SimError::TooManyQubits);
        }
        self.amps.resize(self.amps.len() * 2, ZERO);
        self.n += 1;
        Ok(self.n - 1)
    }

    /// Applies `g` to target positions when every `(pos, val)` in `ctrl` holds.
    pub fn apply(&mut self, g: Gate, targets: &[usize], ctrl: &[(usize, bool)]) {
        let mask: usize = ctrl.iter().map(|&(p, _)| 1 << p).sum();
        let want: usize = ctrl.iter().filter(|c| c.1).map(|&(p, _)| 1 << p).sum();
        if g == Gate::Swap {
            let (a, b) = (1 << targets[0], 1 << targets[1]);
            for i in 0..self.amps.len() {
                if i & mask == want && i & a != 0 && i & b == 0 {
                    self.amps.swap(i, i ^ a ^ b);
                }
            }
            return;
        }
        let m = gate_matrix(g);
        let t = 1 << targets[0];
        for i in 0..self.amps.len() {
            if i & t == 0 && i & mask == want {
                let (x, y) = (self.amps[i], self.amps[i | t]);
                self.amps[i] = m[0][0] * x + m[0][1] * y;
                self.amps[i | t] = m[1][0] * x + m[1][1] * y;
            }
        }
    }

    pub fn prob_one(&self, p: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(i, _)| i & (1 << p) != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects position `p` onto |0> and renormalizes.
    pub fn project_zero(&mut self, p: usize) {
        let mut norm = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & (1 << p) != 0 {
                *a = ZERO;
            } else {
                norm += a.norm_sqr();
            }
        }
        let s = 1.0 / norm.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Executes a wire circuit on a statevector.
pub struct Machine {
    pub state: StateVector,
    wire_pos: Vec<Option<usize>>,
    bit_pos: Vec<Option<usize>>,
    recycled: Vec<usize>,
}

impl Machine {
    fn new(w: &WireCircuit) -> Result<Self, SimError> {
        if w.num_inputs > MAX_POSITIONS {
            return Err(SimError::TooManyQubits);
        }
        let mut wire_pos = vec![None; w.num_wires];
        for (i, p) in wire_pos.iter_mut().enumerate().take(w.num_inputs) {
            *p = Some(i);
        }
        Ok(Machine { state: StateVector::new(w.num_inputs), wire_pos, bit_pos: vec![None; w.num_bits], recycled: vec![] })
    }

    fn pos(&self, w: usize) -> usize {
        self.wire_pos[w].unwrap_or_else(|| panic!("wire {w} is not live"))
    }

    fn run(&mut self, ops: &[WOp], ctrl: &mut Vec<(usize, bool)>) -> Result<(), SimError> {
        for op in ops {
            match op {
                WOp::Alloc(w) => {
                    let p = match self.recycled.pop() {
                        Some(p) => p,
                        None => self.state.grow()?,
                    };
                    self.wire_pos[*w] = Some(p);
                }
                WOp::Free(w) => {
                    self.wire_pos[*w] = None;
                }
                WOp::FreeZ(w) => {
                    let p = self.pos(*w);
                    let prob = self.state.prob_one(p);
                    if prob > 1e-9 {
                        return Err(SimError::NotZero { wire: *w, prob });
                    }
                    self.state.project_zero(p);
                    self.wire_pos[*w] = None;
                    self.recycled.push(p);
                }
                WOp::Measure { q, bit } => {
                    self.bit_pos[*bit] = Some(self.pos(*q));
                    self.wire_pos[*q] = None;
                }
                WOp::Gate(g) => {
                    let targets: Vec<usize> = g.targets.iter().map(|&w| self.pos(w)).collect();
                    let base = ctrl.len();
                    ctrl.extend(g.controls.iter().map(|&w| (self.pos(w), true)));
                    self.state.apply(g.gate, &targets, ctrl);
                    ctrl.truncate(base);
                }
                WOp::If { bit, then_ops, else_ops } => {
                    let p = self.bit_pos[*bit].expect("condition bit is measured");
                    for (body, val) in [(then_ops, true), (else_ops, false)] {
                        ctrl.push((p, val));
                        self.run(body, ctrl)?;
                        ctrl.pop();
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs the circuit from |0...0> and returns the machine in its final state.
pub fn execute(w: &WireCircuit) -> Result<Machine, SimError> {
    let mut m = Machine::new(w)?;
    m.run(&w.ops, &mut vec![])?;
    Ok(m)
}

/// Exact probabilities of the returned bit strings (first returned bit
/// leftmost). Outcomes with probability below 1e-14 are dropped.
pub fn exact_distribution(w: &WireCircuit) -> Result<BTreeMap<String, f64>, SimError> {
    let m = execute(w)?;
    let positions: Vec<usize> = w.ret_bits.iter().map(|&b| m.bit_pos[b].expect("returned bit is measured")).collect();
    let mut dist: BTreeMap<String, f64> = BTreeMap::new();
    for (i, a) in m.state.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let key: String = positions.iter().map(|&q| if i & (1 << q) != 0 { '1' } else { '0' }).collect();
        *dist.entry(key).or_default() += p;
    }
    dist.retain(|_, p| *p > 1e-14);
    Ok(dist)
}

/// Shot counts keyed by bit string.
pub type Histogram = BTreeMap<String, usize>;

/// Draws `shots` samples from a distribution.
pub fn sample(dist: &BTreeMap<String, f64>, shots: usize, seed: u64) -> Histogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = dist.values().sum();
    let mut hist = Histogram::new();
    for _ in 0..shots {
        let mut r = rng.gen::<f64>() * total;
        let mut chosen = dist.keys().next_back();
        for (k, p) in dist {
            if r < *p {
                chosen = Some(k);
                break;
            }
            r -= p;
        }
        if let Some(k) = chosen {
            *hist.entry(k.clone()).or_default() += 1;
        }
    }
    hist
}

pub fn simulate(m: &QcModule, shots: usize, seed: u64) -> Result<Histogram, SimError> {
    let dist = exact_distribution(&m.entry().to_wires())?;
    Ok(sample(&dist, shots, seed))
}

fn to_internal(idx: usize, n: usize) -> usize {
    (0..n).filter(|q| idx & (1 << (n - 1 - q)) != 0).map(|q| 1 << q).sum()
}

/// The matrix of a gate list on `n` qubits, qubit 0 most significant.
pub fn unitary_of(gates: &[GateOp], n: usize) -> Matrix {
    let dim = 1 << n;
    let mut u = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector { n, amps: vec![ZERO; dim] };
        s.amps[to_internal(col, n)] = ONE;
        for g in gates {
            let ctrl: Vec<(usize, bool)> = g.controls.iter().map(|&c| (c, true)).collect();
            s.apply(g.gate, &g.targets, &ctrl);
        }
        for row in 0..dim {
            u[(row, col)] = s.amps[to_internal(row, n)];
        }
    }
    u
}

/// The matrix of a circuit that may allocate and cleanly free ancillas.
/// Returned qubits form the output register, in return order.
pub fn circuit_unitary(w: &WireCircuit) -> Result<Matrix, SimError> {
    if !w.ret_bits.is_empty() || w.ret_qubits.len() != w.num_inputs {
        return Err(SimError::NotUnitary("circuit must return exactly its input register".into()));
    }
    let n = w.num_inputs;
    let dim = 1 << n;
    let mut u = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let mut m = Machine::new(w)?;
        m.state.amps[0] = ZERO;
        m.state.amps[to_internal(col, n)] = ONE;
        m.run(&w.ops, &mut vec![])?;
        if m.bit_pos.iter().any(Option::is_some) || m.wire_pos.iter().flatten().count() != n {
            return Err(SimError::NotUnitary("circuit measures or discards qubits".into()));
        }
        let outs: Vec<usize> = w.ret_qubits.iter().map(|&q| m.pos(q)).collect();
        for (i, a) in m.state.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let row = outs.iter().enumerate().filter(|(_, &p)| i & (1 << p) != 0).map(|(k, _)| 1 << (n - 1 - k)).sum::<usize>();
            let rest = i & !outs.iter().map(|&p| 1usize << p).sum::<usize>();
            if rest != 0 {
                if a.norm() > 1e-9 {
                    return Err(SimError::NotUnitary("ancilla left entangled".into()));
                }
                continue;
            }
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}

/// The translation `b_in >> b_out` as a matrix: each input vector maps to the
/// output vector at the same position, and the orthogonal complement of
/// span(b_in) is left fixed.
pub fn translation_unitary(b_in: &Basis, b_out: &Basis) -> Result<Matrix, OracleError> {
    let vin = basis_vectors(b_in)?;
    let vout = basis_vectors(b_out)?;
    assert_eq!(vin.len(), vout.len(), "translation sides have the same vector count");
    let dim = 1 << b_in.dim();
    let mut u = Matrix::identity(dim);
    for (a, b) in vin.iter().zip(&vout) {
        for i in 0..dim {
            for j in 0..dim {
                u[(i, j)] += b[i] * a[j].conj() - a[i] * a[j].conj();
            }
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::decompose::{controlled_ix, toffoli};

    fn z_matrix() -> Matrix {
        Matrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]])
    }

    #[test]
    fn small_unitaries() {
        assert_eq!(unitary_of(&[], 1), Matrix::identity(2));
        let x = unitary_of(&[GateOp::single(Gate::X, 0)], 1);
        assert_eq!(x, Matrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]));
        let hh = unitary_of(&[GateOp::single(Gate::H, 0), GateOp::single(Gate::H, 0)], 1);
        assert!(hh.max_abs_diff(&Matrix::identity(2)) < 1e-12);
        let cx = unitary_of(&[GateOp::cx(0, 1)], 2);
        assert_eq!(cx[(3, 2)], ONE);
        assert_eq!(cx[(1, 1)], ONE);
    }

    #[test]
    fn toffoli_and_ix_are_exact() {
        let ccx = unitary_of(&[GateOp::new(Gate::X, vec![0, 1], vec![2])], 3);
        assert!(unitary_of(&toffoli(0, 1, 2), 3).max_abs_diff(&ccx) < 1e-12);
        let cs = unitary_of(&[GateOp::new(Gate::S, vec![0], vec![1])], 3);
        let want = &ccx * &cs;
        assert!(unitary_of(&controlled_ix(0, 1, 2), 3).max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn translations() {
        let b = |s: &str| s.parse::<Basis>().unwrap();
        let swap = translation_unitary(&b("{'01','10'}"), &b("{'10','01'}")).unwrap();
        assert!(swap.max_abs_diff(&unitary_of(&[GateOp::new(Gate::Swap, vec![], vec![0, 1])], 2)) < 1e-12);
        let z = translation_unitary(&b("{'1'@pi}"), &b("{'1'}")).unwrap();
        assert!(z.max_abs_diff(&z_matrix()) < 1e-12);
        let id = translation_unitary(&b("pm + {'i'}"), &b("pm + {'i'}")).unwrap();
        assert!(id.max_abs_diff(&Matrix::identity(4)) < 1e-12);
        let fwd = translation_unitary(&b("fourier[2]"), &b("std[2]")).unwrap();
        let back = translation_unitary(&b("std[2]"), &b("fourier[2]")).unwrap();
        assert!(fwd.adjoint().max_abs_diff(&back) < 1e-12);
        assert!(fwd.is_unitary(1e-12));
    }

    #[test]
    fn bell_distribution() {
        let w = WireCircuit {
            num_inputs: 0,
            num_wires: 2,
            num_bits: 2,
            ops: vec![
                WOp::Alloc(0),
                WOp::Alloc(1),
                WOp::Gate(GateOp::single(Gate::H, 0)),
                WOp::Gate(GateOp::cx(0, 1)),
                WOp::Measure { q: 0, bit: 0 },
                WOp::Measure { q: 1, bit: 1 },
            ],
            ret_qubits: vec![],
            ret_bits: vec![0, 1],
        };
        let d = exact_distribution(&w).unwrap();
        assert_eq!(d.keys().collect::<Vec<_>>(), ["00", "11"]);
        let h = sample(&d, 1000, 7);
        assert_eq!(h.values().sum::<usize>(), 1000);
        assert_eq!(h, sample(&d, 1000, 7));
    }

    #[test]
    fn freez_checks_zero() {
        let w = WireCircuit {
            num_inputs: 0,
            num_wires: 1,
            num_bits: 0,
            ops: vec![WOp::Alloc(0), WOp::Gate(GateOp::single(Gate::X, 0)), WOp::FreeZ(0)],
            ret_qubits: vec![],
            ret_bits: vec![],
        };
        assert!(matches!(execute(&w), Err(SimError::NotZero { .. })));
    }

    #[test]
    fn conditional_is_controlled() {
        // measure |+>, then flip a fresh qubit iff the bit is 1: outcomes agree.
        let w = WireCircuit {
            num_inputs: 0,
            num_wires: 2,
            num_bits: 2,
            ops: vec![
                WOp::Alloc(0),
                WOp::Gate(GateOp::single(Gate::H, 0)),
                WOp::Measure { q: 0, bit: 0 },
                WOp::Alloc(1),
                WOp::If { bit: 0, then_ops: vec![WOp::Gate(GateOp::single(Gate::X, 1))], else_ops: vec![] },
                WOp::Measure { q: 1, bit: 1 },
            ],
            ret_qubits: vec![],
            ret_bits: vec![0, 1],
        };
        let d = exact_distribution(&w).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d["11"] - 0.5).abs() < 1e-12);
    }
}
