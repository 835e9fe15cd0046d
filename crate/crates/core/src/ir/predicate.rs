//! Predication of blocks, including the swap-unswap fix for qubits the
//! block permutes by renaming alone.

use std::collections::HashMap;

use super::*;

/// Assigns indices `0..n` to the qubits of the block's argument bundle
/// (fresh indices to prepared qubits) and propagates them through packing,
/// unpacking and every op that acts on its operand in place.
pub fn qubit_index_analysis(b: &Block, values: &Values) -> HashMap<Value, Vec<usize>> {
    let mut idx: HashMap<Value, Vec<usize>> = HashMap::new();
    let mut next = 0;
    for &a in &b.args {
        if let Type::QBundle(n) = values.ty(a) {
            idx.insert(a, (next..next + n).collect());
            next += n;
        }
    }
    for op in &b.ops {
        let get = |v: &Value| idx.get(v).cloned().unwrap_or_default();
        match &op.kind {
            OpKind::QbUnpack => {
                let ix = get(&op.operands[0]);
                for (r, i) in op.results.iter().zip(ix) {
                    idx.insert(*r, vec![i]);
                }
            }
            OpKind::QbPack => {
                let ix: Vec<usize> = op.operands.iter().flat_map(get).collect();
                idx.insert(op.results[0], ix);
            }
            OpKind::QbPrep { eigenbits, .. } => {
                idx.insert(op.results[0], (next..next + eigenbits.len()).collect());
                next += eigenbits.len();
            }
            OpKind::QbTrans { .. } | OpKind::Embed { .. } => {
                let ix = get(&op.operands[0]);
                idx.insert(op.results[0], ix);
            }
            OpKind::Call { .. } | OpKind::CallIndirect => {
                let ix = get(op.operands.last().unwrap());
                if values.is_quantum(op.results[0]) {
                    idx.insert(op.results[0], ix);
                }
            }
            _ => {}
        }
    }
    idx
}

/// Transpositions, lowest index first, that restore positions `0..n` from
/// a renaming in which position `j` holds original qubit `perm[j]`.
pub fn restoring_swaps(perm: &[usize]) -> Vec<(usize, usize)> {
    let mut idx = perm.to_vec();
    let mut out = Vec::new();
    for j in 0..idx.len() {
        while idx[j] != j {
            let t = idx[j];
            out.push((j, t));
            idx.swap(j, t);
        }
    }
    out
}

fn swap_bases() -> (Basis, Basis) {
    let lit = |a: &str, b: &str| Basis::literal(BasisLiteral::from_symbols(&[a, b]));
    (lit("01", "10"), lit("10", "01"))
}

struct Pred<'a, 'v> {
    bld: Builder<'v>,
    pred: &'a Basis,
    /// Current values of the predicate qubits.
    p: Vec<Value>,
}

impl Pred<'_, '_> {
    /// Prepends the predicate qubits to a bundle.
    fn join(&mut self, x: Value) -> Value {
        let mut qs = std::mem::take(&mut self.p);
        qs.extend(self.bld.unpack(x));
        self.bld.qpack(qs)
    }

    /// Splits the predicate qubits back off.
    fn split(&mut self, y: Value) -> Value {
        let mut qs = self.bld.unpack(y);
        let rest = qs.split_off(self.pred.dim());
        self.p = qs;
        self.bld.qpack(rest)
    }

    fn width(&self, v: Value) -> usize {
        match self.bld.values.ty(v) {
            Type::QBundle(n) => *n,
            t => panic!("expected a qbundle, got {t}"),
        }
    }

    fn trans(&mut self, x: Value, b_in: Basis, b_out: Basis, phases: Vec<Value>, predicated: bool) -> Value {
        let (b_in, b_out, x) = if predicated {
            (self.pred.tensor(&b_in), self.pred.tensor(&b_out), self.join(x))
        } else {
            (b_in, b_out, x)
        };
        let n = self.width(x);
        let mut operands = vec![x];
        operands.extend(phases);
        let y = self.bld.op1(OpKind::QbTrans { b_in, b_out }, operands, Type::QBundle(n));
        if predicated {
            self.split(y)
        } else {
            y
        }
    }
}

/// Predicates a block (captures, then a qbundle; returning a qbundle of the
/// same width) on `pred`: the result takes the predicate qubits first.
pub fn predicate_block(b: &Block, values: &mut Values, pred: &Basis) -> Result<Block, IrError> {
    if pred.has_phases() {
        return Err(IrError::Unsupported("predicate bases cannot carry phases".into()));
    }
    let src = values.clone();
    let (&arg, caps) = b.args.split_last().ok_or_else(|| IrError::Unsupported("block without arguments".into()))?;
    let n = match src.ty(arg) {
        Type::QBundle(n) => *n,
        t => return Err(IrError::Unsupported(format!("predicated block takes {t}"))),
    };
    let &ret = match b.ret.as_slice() {
        [r] if *src.ty(*r) == Type::QBundle(n) => r,
        _ => return Err(IrError::Unsupported("predicated block must return its argument width".into())),
    };
    let k = pred.dim();
    let mut map: HashMap<Value, Value> = HashMap::new();
    let mut args: Vec<Value> = caps
        .iter()
        .map(|&c| {
            let v = values.fresh(src.ty(c).clone());
            map.insert(c, v);
            v
        })
        .collect();
    let new_arg = values.fresh(Type::QBundle(k + n));
    args.push(new_arg);
    let mut st = Pred { bld: Builder::new(values), pred, p: vec![] };
    let mut qs = st.bld.unpack(new_arg);
    let rest = qs.split_off(k);
    st.p = qs;
    let inner = st.bld.qpack(rest);
    map.insert(arg, inner);
    let m = |map: &HashMap<Value, Value>, v: &Value| map[v];

    for op in &b.ops {
        if is_stationary(op, &src) || matches!(op.kind, OpKind::QbPack | OpKind::QbUnpack) {
            let cloned = clone_op(op, &src, st.bld.values, &mut map);
            st.bld.ops.push(cloned);
            continue;
        }
        let result = op.results[0];
        let out = match &op.kind {
            OpKind::QbTrans { b_in, b_out } => {
                let x = m(&map, &op.operands[0]);
                let phases = op.operands[1..].iter().map(|v| m(&map, v)).collect();
                st.trans(x, b_in.clone(), b_out.clone(), phases, true)
            }
            OpKind::Call { sym, adj, pred: p0 } => {
                let (a, cs) = op.operands.split_last().unwrap();
                let x = st.join(m(&map, a));
                let mut operands: Vec<Value> = cs.iter().map(|v| m(&map, v)).collect();
                operands.push(x);
                let full = match p0 {
                    Some(p0) => pred.tensor(p0),
                    None => pred.clone(),
                };
                let w = st.width(x);
                let y = st.bld.op1(OpKind::Call { sym: sym.clone(), adj: *adj, pred: Some(full) }, operands, Type::QBundle(w));
                st.split(y)
            }
            OpKind::CallIndirect => {
                let fv = m(&map, &op.operands[0]);
                let x = st.join(m(&map, &op.operands[1]));
                let w = st.width(x);
                let fp = st.bld.op1(OpKind::FuncPred { basis: pred.clone() }, vec![fv], Type::func(w, Type::QBundle(w), true));
                let y = st.bld.op1(OpKind::CallIndirect, vec![fp, x], Type::QBundle(w));
                st.split(y)
            }
            OpKind::Embed { sym, mode, pred: p0 } => {
                let x = st.join(m(&map, &op.operands[0]));
                let full = match p0 {
                    Some(p0) => pred.tensor(p0),
                    None => pred.clone(),
                };
                let w = st.width(x);
                let y = st.bld.op1(OpKind::Embed { sym: sym.clone(), mode: *mode, pred: Some(full) }, vec![x], Type::QBundle(w));
                st.split(y)
            }
            k => return Err(IrError::NotInvertible { op: k.name(), what: "predicated" }),
        };
        map.insert(result, out);
    }

    let perm = qubit_index_analysis(b, &src).remove(&ret).unwrap_or_default();
    let mut outs = st.bld.unpack(map[&ret]);
    if perm.len() == n && perm.iter().any(|&i| i >= n) {
        return Err(IrError::Unsupported("predicated block returns qubits it did not receive".into()));
    }
    for (j, t) in restoring_swaps(&perm) {
        let (s_in, s_out) = swap_bases();
        for predicated in [false, true] {
            let pair = st.bld.qpack(vec![outs[j], outs[t]]);
            let swapped = st.trans(pair, s_in.clone(), s_out.clone(), vec![], predicated);
            let two = st.bld.unpack(swapped);
            outs[j] = two[0];
            outs[t] = two[1];
        }
    }
    let mut all = std::mem::take(&mut st.p);
    all.extend(outs);
    let r = st.bld.qpack(all);
    Ok(st.bld.finish(args, vec![r]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swaps_restore_order() {
        assert!(restoring_swaps(&[0, 1, 2]).is_empty());
        assert_eq!(restoring_swaps(&[0, 1, 3, 2]), vec![(2, 3)]);
        let perm = [2, 0, 3, 1];
        let mut pos: Vec<usize> = perm.to_vec();
        for (a, b) in restoring_swaps(&perm) {
            pos.swap(a, b);
        }
        assert_eq!(pos, vec![0, 1, 2, 3]);
    }
}
