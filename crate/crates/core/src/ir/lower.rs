//! Lowering of fully inlined IR functions to wire circuits.

use std::collections::HashMap;

use super::*;
use crate::circuit::wires::{touched_wires, WireCircuit, WOp};
use crate::circuit::{Gate, GateOp, QcModule};
use crate::synth::classical::{embed_sign, embed_xor};
use crate::synth::standardize::{entry_gates, Direction};
use crate::synth::translation::lower_translation;

#[derive(Clone, Debug)]
enum Slot {
    Qubits(Vec<usize>),
    Bits(Vec<usize>),
    Angle(f64),
    /// A function value; only legal if it is never called.
    Func,
}

struct Lowerer<'m> {
    m: &'m Module,
    f: &'m Func,
    next_wire: usize,
    next_bit: usize,
}

fn unsupported(msg: impl Into<String>) -> IrError {
    IrError::Unsupported(msg.into())
}

fn gates(ops: &mut Vec<WOp>, gs: impl IntoIterator<Item = GateOp>) {
    ops.extend(gs.into_iter().map(WOp::Gate));
}

/// Std-ward gates for each element of `b`, laid over `wires`.
fn standardize(b: &Basis, wires: &[usize], dir: Direction) -> Vec<GateOp> {
    let mut out = Vec::new();
    let mut at = 0;
    for e in &b.elements {
        let d = e.dim();
        let prim = match e {
            BasisElement::Builtin { prim, .. } => *prim,
            BasisElement::Literal(l) => l.prim(),
            BasisElement::Padding(_) => Prim::Std,
        };
        out.extend(entry_gates(prim, &wires[at..at + d], dir));
        at += d;
    }
    out
}

/// Control patterns selecting the predicate subspace after standardization:
/// one pattern (wire, value) list per combination of literal vectors.
fn predicate_patterns(b: &Basis, wires: &[usize]) -> Vec<Vec<(usize, bool)>> {
    let mut pats: Vec<Vec<(usize, bool)>> = vec![vec![]];
    let mut at = 0;
    for e in &b.elements {
        let d = e.dim();
        if let BasisElement::Literal(l) = e {
            if !l.fully_spans() {
                pats = pats
                    .iter()
                    .flat_map(|p| {
                        l.vectors.iter().map(move |v| {
                            let mut q = p.clone();
                            q.extend(v.eigenbits.iter().enumerate().map(|(i, &bit)| (wires[at + i], bit)));
                            q
                        })
                    })
                    .collect();
            }
        }
        at += d;
    }
    pats
}

impl Lowerer<'_> {
    fn wire(&mut self) -> usize {
        self.next_wire += 1;
        self.next_wire - 1
    }

    fn qubits<'a>(&self, env: &'a HashMap<Value, Slot>, v: Value) -> Result<&'a [usize], IrError> {
        match env.get(&v) {
            Some(Slot::Qubits(w)) => Ok(w),
            _ => Err(unsupported(format!("{v} is not a lowered qubit value"))),
        }
    }

    fn bits<'a>(&self, env: &'a HashMap<Value, Slot>, v: Value) -> Result<&'a [usize], IrError> {
        match env.get(&v) {
            Some(Slot::Bits(b)) => Ok(b),
            _ => Err(unsupported(format!("{v} is not a lowered bit value"))),
        }
    }

    fn block(&mut self, b: &Block, env: &mut HashMap<Value, Slot>, out: &mut Vec<WOp>) -> Result<(), IrError> {
        for op in &b.ops {
            self.op(op, env, out)?;
        }
        Ok(())
    }

    fn op(&mut self, op: &Op, env: &mut HashMap<Value, Slot>, out: &mut Vec<WOp>) -> Result<(), IrError> {
        let res = |env: &mut HashMap<Value, Slot>, s: Slot| {
            env.insert(op.results[0], s);
        };
        match &op.kind {
            OpKind::QbPrep { prim, eigenbits } => {
                let ws: Vec<usize> = eigenbits.iter().map(|_| self.wire()).collect();
                out.extend(ws.iter().map(|&w| WOp::Alloc(w)));
                for (&w, &bit) in ws.iter().zip(eigenbits) {
                    if bit {
                        out.push(WOp::Gate(GateOp::single(Gate::X, w)));
                    }
                }
                gates(out, entry_gates(*prim, &ws, Direction::PrimWard));
                res(env, Slot::Qubits(ws));
            }
            OpKind::QbTrans { b_in, b_out } => {
                let ws = self.qubits(env, op.operands[0])?.to_vec();
                let mut thetas = Vec::new();
                for &p in &op.operands[1..] {
                    match env.get(&p) {
                        Some(Slot::Angle(t)) => thetas.push(*t),
                        _ => return Err(unsupported(format!("phase {p} is not a constant angle"))),
                    }
                }
                let mut it = thetas.into_iter();
                let bi = bind_phases(b_in, &mut it);
                let bo = bind_phases(b_out, &mut it);
                let gs = lower_translation(&bi, &bo).map_err(|e| unsupported(e.to_string()))?;
                gates(out, gs.iter().map(|g| g.remap(|q| ws[q])));
                res(env, Slot::Qubits(ws));
            }
            OpKind::QbMeas { basis } => {
                let ws = self.qubits(env, op.operands[0])?.to_vec();
                gates(out, standardize(basis, &ws, Direction::StdWard));
                let mut bits = Vec::new();
                for &q in &ws {
                    out.push(WOp::Measure { q, bit: self.next_bit });
                    bits.push(self.next_bit);
                    self.next_bit += 1;
                }
                res(env, Slot::Bits(bits));
            }
            OpKind::QbDiscard | OpKind::QbDiscardZ => {
                let ws = self.qubits(env, op.operands[0])?;
                let z = matches!(op.kind, OpKind::QbDiscardZ);
                out.extend(ws.iter().map(|&w| if z { WOp::FreeZ(w) } else { WOp::Free(w) }));
            }
            OpKind::QbPack => {
                let mut ws = Vec::new();
                for &q in &op.operands {
                    ws.extend_from_slice(self.qubits(env, q)?);
                }
                res(env, Slot::Qubits(ws));
            }
            OpKind::QbUnpack => {
                let ws = self.qubits(env, op.operands[0])?.to_vec();
                for (&r, w) in op.results.iter().zip(ws) {
                    env.insert(r, Slot::Qubits(vec![w]));
                }
            }
            OpKind::BitPack => {
                let mut bs = Vec::new();
                for &b in &op.operands {
                    bs.extend_from_slice(self.bits(env, b)?);
                }
                res(env, Slot::Bits(bs));
            }
            OpKind::BitUnpack => {
                let bs = self.bits(env, op.operands[0])?.to_vec();
                for (&r, b) in op.results.iter().zip(bs) {
                    env.insert(r, Slot::Bits(vec![b]));
                }
            }
            OpKind::Angle(t) => res(env, Slot::Angle(*t)),
            OpKind::FuncConst { .. } | OpKind::FuncAdj | OpKind::FuncPred { .. } | OpKind::Lambda { .. } => {
                res(env, Slot::Func)
            }
            OpKind::Call { sym, .. } => {
                return Err(unsupported(format!("call to @{sym} remains; inline before lowering to a circuit")))
            }
            OpKind::CallIndirect => {
                return Err(unsupported("indirect call remains; inline before lowering to a circuit"))
            }
            OpKind::Embed { sym, mode, pred } => {
                let net = self.m.classicals.get(sym).ok_or_else(|| IrError::UnknownFunc(sym.clone()))?;
                let ws = self.qubits(env, op.operands[0])?.to_vec();
                let k = pred.as_ref().map_or(0, |p| p.dim());
                let (pw, body) = ws.split_at(k);
                let pats = match pred {
                    Some(p) => predicate_patterns(p, pw),
                    None => vec![vec![]],
                };
                if let Some(p) = pred {
                    gates(out, standardize(p, pw, Direction::StdWard));
                }
                for pat in pats {
                    let flips: Vec<GateOp> =
                        pat.iter().filter(|(_, v)| !v).map(|&(w, _)| GateOp::single(Gate::X, w)).collect();
                    let ctrls: Vec<usize> = pat.iter().map(|&(w, _)| w).collect();
                    gates(out, flips.clone());
                    let n = net.num_inputs;
                    let ops = match mode {
                        EmbedMode::Xor => embed_xor(net, &body[..n], &body[n..], &ctrls, &mut self.next_wire),
                        EmbedMode::Sign => embed_sign(net, body, &ctrls, &mut self.next_wire),
                    }
                    .map_err(|e| unsupported(e.to_string()))?;
                    out.extend(ops);
                    gates(out, flips);
                }
                if let Some(p) = pred {
                    gates(out, standardize(p, pw, Direction::PrimWard));
                }
                res(env, Slot::Qubits(ws));
            }
            OpKind::Cond { then_block, else_block } => self.cond(op, then_block, else_block, env, out)?,
        }
        Ok(())
    }

    fn cond(
        &mut self,
        op: &Op,
        then_block: &Block,
        else_block: &Block,
        env: &mut HashMap<Value, Slot>,
        out: &mut Vec<WOp>,
    ) -> Result<(), IrError> {
        let bit = match self.bits(env, op.operands[0])? {
            [b] => *b,
            _ => return Err(unsupported("condition is not a single bit")),
        };
        let mut arms = Vec::new();
        for b in [then_block, else_block] {
            let mut inner = env.clone();
            for (&a, &v) in b.args.iter().zip(&op.operands[1..]) {
                let s = inner.get(&v).cloned().ok_or_else(|| unsupported(format!("{v} is not lowered")))?;
                inner.insert(a, s);
            }
            let mut ops = Vec::new();
            self.block(b, &mut inner, &mut ops)?;
            let yields: Vec<Slot> = b.ret.iter().map(|r| inner[r].clone()).collect();
            arms.push((ops, yields));
        }
        let (mut else_ops, else_y) = arms.pop().unwrap();
        let (then_ops, then_y) = arms.pop().unwrap();
        for ((&r, t), e) in op.results.iter().zip(then_y).zip(else_y) {
            match (t, e) {
                (Slot::Qubits(tw), Slot::Qubits(mut ew)) => {
                    let mut sorted = (tw.clone(), ew.clone());
                    sorted.0.sort_unstable();
                    sorted.1.sort_unstable();
                    if sorted.0 != sorted.1 {
                        return Err(unsupported("conditional branches yield different qubits"));
                    }
                    for j in 0..tw.len() {
                        if ew[j] != tw[j] {
                            let k = ew.iter().position(|&w| w == tw[j]).unwrap();
                            else_ops.push(WOp::Gate(GateOp::new(Gate::Swap, vec![], vec![ew[j], ew[k]])));
                            ew.swap(j, k);
                        }
                    }
                    env.insert(r, Slot::Qubits(tw));
                }
                (Slot::Bits(tb), Slot::Bits(eb)) if tb == eb => {
                    env.insert(r, Slot::Bits(tb));
                }
                (Slot::Func, Slot::Func) => {
                    env.insert(r, Slot::Func);
                }
                (Slot::Angle(a), Slot::Angle(b)) if a == b => {
                    env.insert(r, Slot::Angle(a));
                }
                _ => return Err(unsupported("conditional branches yield values that differ classically")),
            }
        }
        let touched = touched_wires(&then_ops).into_iter().chain(touched_wires(&else_ops));
        for w in touched {
            if !op.operands[1..].iter().any(|v| matches!(env.get(v), Some(Slot::Qubits(ws)) if ws.contains(&w))) {
                return Err(unsupported("conditional branch allocates or frees qubits"));
            }
        }
        out.push(WOp::If { bit, then_ops, else_ops });
        Ok(())
    }

    fn func(&mut self) -> Result<WireCircuit, IrError> {
        let f = self.f;
        let mut env = HashMap::new();
        let mut num_inputs = 0;
        for &a in &f.body.args {
            match f.values.ty(a) {
                Type::QBundle(n) => {
                    let ws: Vec<usize> = (0..*n).map(|_| self.wire()).collect();
                    num_inputs += n;
                    env.insert(a, Slot::Qubits(ws));
                }
                t => return Err(unsupported(format!("@{} takes {t}; only qubit arguments can become circuit inputs", f.name))),
            }
        }
        let mut ops = Vec::new();
        self.block(&f.body, &mut env, &mut ops)?;
        let (mut ret_qubits, mut ret_bits) = (Vec::new(), Vec::new());
        for r in &f.body.ret {
            match &env[r] {
                Slot::Qubits(ws) => ret_qubits.extend(ws),
                Slot::Bits(bs) => ret_bits.extend(bs),
                _ => return Err(unsupported(format!("@{} returns a classical value a circuit cannot", f.name))),
            }
        }
        Ok(WireCircuit { num_inputs, num_wires: self.next_wire, num_bits: self.next_bit, ops, ret_qubits, ret_bits })
    }
}

/// Lowers one function, which must contain no calls, to a wire circuit.
pub fn lower_func(m: &Module, f: &Func) -> Result<WireCircuit, IrError> {
    Lowerer { m, f, next_wire: 0, next_bit: 0 }.func()
}

/// Lowers the entry function of an inlined module.
pub fn lower_module(m: &Module) -> Result<QcModule, IrError> {
    let f = m.func(&m.entry).ok_or_else(|| IrError::UnknownFunc(m.entry.clone()))?;
    Ok(QcModule::single(lower_func(m, f)?.to_ssa(&f.name)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::adjoint::adjoint_block;
    use crate::ir::predicate::predicate_block;
    use crate::linalg::Matrix;
    use crate::sim::circuit_unitary;

    fn lit(vs: &[&str]) -> Basis {
        Basis::literal(BasisLiteral::from_symbols(vs))
    }

    /// A function applying `b_in >> b_out` to its argument.
    fn trans_func(b_in: &Basis, b_out: &Basis) -> Func {
        let mut values = Values::default();
        let arg = values.fresh(Type::QBundle(b_in.dim()));
        let (bi, ti) = unbind_phases(b_in);
        let (bo, to) = unbind_phases(b_out);
        let mut b = Builder::new(&mut values);
        let mut operands = vec![arg];
        for t in ti.into_iter().chain(to) {
            operands.push(b.angle(t));
        }
        let y = b.op1(OpKind::QbTrans { b_in: bi, b_out: bo }, operands, Type::QBundle(b_in.dim()));
        let body = b.finish(vec![arg], vec![y]);
        Func { name: "t".into(), rev: true, body, values }
    }

    fn unitary(f: &Func) -> Matrix {
        let m = Module { funcs: vec![f.clone()], classicals: Default::default(), entry: f.name.clone() };
        verify::verify_module(&m).unwrap();
        circuit_unitary(&lower_func(&m, f).unwrap()).unwrap()
    }

    #[test]
    fn adjoint_inverts() {
        let b_in = Basis::builtin(Prim::Std, 2);
        let mut b_out = lit(&["01", "00", "11", "10"]);
        if let BasisElement::Literal(l) = &mut b_out.elements[0] {
            l.vectors[2].phase = Some(0.7);
        }
        let mut f = trans_func(&b_in, &b_out);
        let u = unitary(&f);
        f.body = adjoint_block(&f.body, &mut f.values).unwrap();
        let v = unitary(&f);
        assert!(u.adjoint().max_abs_diff(&v) < 1e-9);
    }

    /// P (x) U + (I - P) (x) I for the one-qubit predicate {'1'}.
    fn controlled(u: &Matrix) -> Matrix {
        let (mut p1, mut p0) = (Matrix::zeros(2, 2), Matrix::zeros(2, 2));
        p1[(1, 1)] = 1.0.into();
        p0[(0, 0)] = 1.0.into();
        p1.kron(u).add(&p0.kron(&Matrix::identity(u.rows)))
    }

    #[test]
    fn predication_controls() {
        let mut f = trans_func(&Basis::builtin(Prim::Std, 1), &Basis::builtin(Prim::Pm, 1));
        let u = unitary(&f);
        f.body = predicate_block(&f.body, &mut f.values, &lit(&["1"])).unwrap();
        assert!(unitary(&f).max_abs_diff(&controlled(&u)) < 1e-9);
    }

    #[test]
    fn predicated_renaming_swaps_back() {
        // Reverses three qubits by unpacking and repacking only.
        let mut values = Values::default();
        let arg = values.fresh(Type::QBundle(3));
        let mut b = Builder::new(&mut values);
        let mut qs = b.unpack(arg);
        qs.reverse();
        let y = b.qpack(qs);
        let body = b.finish(vec![arg], vec![y]);
        let mut f = Func { name: "rev3".into(), rev: true, body, values };
        let u = unitary(&f);
        assert!(u.max_abs_diff(&Matrix::identity(8)) > 0.5);
        f.body = predicate_block(&f.body, &mut f.values, &lit(&["1"])).unwrap();
        assert!(unitary(&f).max_abs_diff(&controlled(&u)) < 1e-9);
    }
}
