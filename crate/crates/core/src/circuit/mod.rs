//! Gate-level dataflow IR. Every op consumes qubit values and produces fresh
//! ones; a qubit value is used exactly once.
//!
//! Passes that care about physical positions work on the [`wires`] view, in
//! which each allocation owns a fixed wire index.

use std::fmt;

pub mod decompose;
pub mod peephole;
pub mod print;
pub mod verify;
pub mod wires;

pub use wires::{WireCircuit, WOp};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    P(f64),
    Swap,
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::X => "x",
            Gate::Y => "y",
            Gate::Z => "z",
            Gate::H => "h",
            Gate::S => "s",
            Gate::Sdg => "sdg",
            Gate::T => "t",
            Gate::Tdg => "tdg",
            Gate::P(_) => "p",
            Gate::Swap => "swap",
        }
    }

    pub fn from_name(name: &str, param: Option<f64>) -> Option<Gate> {
        Some(match (name, param) {
            ("x", None) => Gate::X,
            ("y", None) => Gate::Y,
            ("z", None) => Gate::Z,
            ("h", None) => Gate::H,
            ("s", None) => Gate::S,
            ("sdg", None) => Gate::Sdg,
            ("t", None) => Gate::T,
            ("tdg", None) => Gate::Tdg,
            ("p", Some(theta)) => Gate::P(theta),
            ("swap", None) => Gate::Swap,
            _ => return None,
        })
    }

    pub fn param(&self) -> Option<f64> {
        match self {
            Gate::P(t) => Some(*t),
            _ => None,
        }
    }

    pub fn num_targets(&self) -> usize {
        match self {
            Gate::Swap => 2,
            _ => 1,
        }
    }

    /// Self-adjoint gates.
    pub fn hermitian(&self) -> bool {
        matches!(self, Gate::X | Gate::Y | Gate::Z | Gate::H | Gate::Swap)
    }

    pub fn adjoint(&self) -> Gate {
        match *self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            Gate::P(t) => Gate::P(-t),
            g => g,
        }
    }

    /// Whether `self` followed by `other` is the identity (same operands).
    pub fn cancels(&self, other: &Gate) -> bool {
        match (self, other) {
            (Gate::P(a), Gate::P(b)) => (a + b).abs() <= 1e-12,
            _ => self.adjoint() == *other,
        }
    }

    /// The diagonal gate's phase on |1>, if the gate is a phase gate.
    pub fn phase_angle(&self) -> Option<f64> {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
        match self {
            Gate::Z => Some(PI),
            Gate::S => Some(FRAC_PI_2),
            Gate::Sdg => Some(-FRAC_PI_2),
            Gate::T => Some(FRAC_PI_4),
            Gate::Tdg => Some(-FRAC_PI_4),
            Gate::P(t) => Some(*t),
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Gate::P(t) => write!(f, "p({t})"),
            g => f.write_str(g.name()),
        }
    }
}

/// A gate applied to register positions, possibly controlled (all controls
/// positive). This is the currency of synthesis.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub gate: Gate,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn new(gate: Gate, controls: Vec<usize>, targets: Vec<usize>) -> Self {
        assert_eq!(targets.len(), gate.num_targets());
        GateOp { gate, controls, targets }
    }

    pub fn single(gate: Gate, t: usize) -> Self {
        GateOp::new(gate, vec![], vec![t])
    }

    pub fn cx(c: usize, t: usize) -> Self {
        GateOp::new(Gate::X, vec![c], vec![t])
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(&self.targets).copied()
    }

    pub fn adjoint(&self) -> GateOp {
        GateOp { gate: self.gate.adjoint(), ..self.clone() }
    }

    /// Adds controls in front of the existing ones.
    pub fn with_controls(mut self, extra: &[usize]) -> GateOp {
        let mut c = extra.to_vec();
        c.extend(self.controls);
        self.controls = c;
        self
    }

    /// Applies an index map to every position.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> GateOp {
        GateOp {
            gate: self.gate,
            controls: self.controls.iter().map(|&q| f(q)).collect(),
            targets: self.targets.iter().map(|&q| f(q)).collect(),
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.gate)?;
        if !self.controls.is_empty() {
            write!(f, " {:?}", self.controls)?;
        }
        write!(f, " {:?}", self.targets)
    }
}

/// Inverse of a gate list.
pub fn adjoint_gates(gates: &[GateOp]) -> Vec<GateOp> {
    gates.iter().rev().map(GateOp::adjoint).collect()
}

/// An SSA value: a qubit or a classical bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value(pub u32);

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "%{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub args: Vec<Value>,
    pub ops: Vec<Op>,
    pub yields: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Alloc { out: Value },
    /// Measure in std and discard.
    Free { q: Value },
    /// Discard a qubit known to be |0>.
    FreeZ { q: Value },
    Measure { q: Value, out: Value },
    Gate { gate: Gate, controls: Vec<Value>, targets: Vec<Value>, outs: Vec<Value> },
    /// Classically conditioned region. Both branches receive `qubits` as block
    /// arguments and yield the same number of qubits, which become `outs`.
    If { cond: Value, qubits: Vec<Value>, then_block: Block, else_block: Block, outs: Vec<Value> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub name: String,
    pub inputs: Vec<Value>,
    pub ops: Vec<Op>,
    pub ret_qubits: Vec<Value>,
    pub ret_bits: Vec<Value>,
    pub next_value: u32,
}

impl Circuit {
    pub fn new(name: impl Into<String>) -> Self {
        Circuit { name: name.into(), inputs: vec![], ops: vec![], ret_qubits: vec![], ret_bits: vec![], next_value: 0 }
    }

    pub fn fresh(&mut self) -> Value {
        let v = Value(self.next_value);
        self.next_value += 1;
        v
    }

    /// Counts gates (recursively through conditionals).
    pub fn stats(&self) -> CircuitStats {
        let mut s = CircuitStats::default();
        fn walk(ops: &[Op], s: &mut CircuitStats) {
            for op in ops {
                match op {
                    Op::Alloc { .. } => s.allocs += 1,
                    Op::Measure { .. } => s.measurements += 1,
                    Op::Gate { gate, controls, .. } => {
                        s.gates += 1;
                        s.max_controls = s.max_controls.max(controls.len());
                        *s.by_kind.entry(gate_key(gate, controls.len())).or_default() += 1;
                    }
                    Op::If { then_block, else_block, .. } => {
                        s.conditionals += 1;
                        walk(&then_block.ops, s);
                        walk(&else_block.ops, s);
                    }
                    _ => {}
                }
            }
        }
        walk(&self.ops, &mut s);
        s.qubits = self.to_wires().num_wires;
        s
    }
}

fn gate_key(g: &Gate, ncontrols: usize) -> String {
    match ncontrols {
        0 => g.name().to_string(),
        1 => format!("c{}", g.name()),
        n => format!("c{n}{}", g.name()),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CircuitStats {
    pub gates: usize,
    pub qubits: usize,
    pub allocs: usize,
    pub measurements: usize,
    pub conditionals: usize,
    pub max_controls: usize,
    pub by_kind: std::collections::BTreeMap<String, usize>,
}

/// A set of circuits with a designated entry.
#[derive(Clone, Debug, PartialEq)]
pub struct QcModule {
    pub circuits: Vec<Circuit>,
    pub entry: String,
}

impl QcModule {
    pub fn single(c: Circuit) -> Self {
        QcModule { entry: c.name.clone(), circuits: vec![c] }
    }

    pub fn entry(&self) -> &Circuit {
        self.circuits.iter().find(|c| c.name == self.entry).expect("entry circuit exists")
    }

    pub fn entry_mut(&mut self) -> &mut Circuit {
        let name = self.entry.clone();
        self.circuits.iter_mut().find(|c| c.name == name).expect("entry circuit exists")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_is_involution() {
        for g in [Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::S, Gate::Sdg, Gate::T, Gate::Tdg, Gate::P(0.3), Gate::Swap] {
            assert_eq!(g.adjoint().adjoint(), g);
            assert!(g.cancels(&g.adjoint()));
            assert_eq!(g.hermitian(), g.adjoint() == g && !matches!(g, Gate::P(_)));
        }
    }

    #[test]
    fn gate_keys() {
        assert_eq!(gate_key(&Gate::X, 0), "x");
        assert_eq!(gate_key(&Gate::X, 1), "cx");
        assert_eq!(gate_key(&Gate::Z, 3), "c3z");
    }
}
