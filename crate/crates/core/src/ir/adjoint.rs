//! Adjoints of blocks.

use std::collections::HashMap;

use super::*;

fn rename(map: &HashMap<Value, Value>, v: Value) -> Value {
    map.get(&v).copied().unwrap_or(v)
}

/// The adjoint of a block taking captures and a qbundle and returning a
/// qbundle of the same width. Stationary ops are copied first, unchanged;
/// the quantum ops are then rebuilt in reverse, each replaced by its adjoint.
pub fn adjoint_block(b: &Block, values: &mut Values) -> Result<Block, IrError> {
    let src = values.clone();
    let (&arg, caps) = b.args.split_last().ok_or_else(|| IrError::Unsupported("block without arguments".into()))?;
    let &ret = match b.ret.as_slice() {
        [r] if src.is_quantum(*r) => r,
        _ => return Err(IrError::Unsupported("adjoint of a block not returning one qbundle".into())),
    };
    let mut map: HashMap<Value, Value> = HashMap::new();
    let new_caps: Vec<Value> = caps.iter().map(|&c| {
        let n = values.fresh(src.ty(c).clone());
        map.insert(c, n);
        n
    }).collect();
    let new_arg = values.fresh(src.ty(ret).clone());
    let mut bld = Builder::new(values);
    for op in &b.ops {
        if is_stationary(op, &src) {
            let cloned = clone_op(op, &src, bld.values, &mut map);
            bld.ops.push(cloned);
        }
    }
    // Quantum values of the original block mapped to their counterparts
    // flowing backward.
    let mut q: HashMap<Value, Value> = HashMap::new();
    q.insert(ret, new_arg);
    let take = |q: &mut HashMap<Value, Value>, v: Value| {
        q.remove(&v).ok_or_else(|| IrError::Unsupported(format!("{v} is not consumed in the block")))
    };
    for op in b.ops.iter().rev() {
        if is_stationary(op, &src) {
            continue;
        }
        let ty_of = |v: Value| src.ty(v).clone();
        match &op.kind {
            OpKind::QbTrans { b_in, b_out } => {
                let y = take(&mut q, op.results[0])?;
                let n_in = phase_slots(b_in);
                let phases: Vec<Value> = op.operands[1..].iter().map(|&p| rename(&map, p)).collect();
                let mut operands = vec![y];
                operands.extend_from_slice(&phases[n_in..]);
                operands.extend_from_slice(&phases[..n_in]);
                let x = bld.op1(OpKind::QbTrans { b_in: b_out.clone(), b_out: b_in.clone() }, operands, ty_of(op.operands[0]));
                q.insert(op.operands[0], x);
            }
            OpKind::QbPack => {
                let y = take(&mut q, op.results[0])?;
                let xs = bld.unpack(y);
                for (&o, x) in op.operands.iter().zip(xs) {
                    q.insert(o, x);
                }
            }
            OpKind::QbUnpack => {
                let ys = op.results.iter().map(|&r| take(&mut q, r)).collect::<Result<Vec<_>, _>>()?;
                let x = bld.qpack(ys);
                q.insert(op.operands[0], x);
            }
            OpKind::Call { sym, adj, pred } => {
                let (&a, cs) = op.operands.split_last().unwrap();
                let y = take(&mut q, op.results[0])?;
                let mut operands: Vec<Value> = cs.iter().map(|&c| rename(&map, c)).collect();
                operands.push(y);
                let kind = OpKind::Call { sym: sym.clone(), adj: !adj, pred: pred.clone() };
                let x = bld.op1(kind, operands, ty_of(a));
                q.insert(a, x);
            }
            OpKind::CallIndirect => {
                let (fv, a) = (op.operands[0], op.operands[1]);
                let y = take(&mut q, op.results[0])?;
                let fa = bld.op1(OpKind::FuncAdj, vec![rename(&map, fv)], ty_of(fv));
                let x = bld.op1(OpKind::CallIndirect, vec![fa, y], ty_of(a));
                q.insert(a, x);
            }
            OpKind::Embed { .. } => {
                let y = take(&mut q, op.results[0])?;
                let x = bld.op1(op.kind.clone(), vec![y], ty_of(op.operands[0]));
                q.insert(op.operands[0], x);
            }
            k => return Err(IrError::NotInvertible { op: k.name(), what: "adjointed" }),
        }
    }
    let out = take(&mut q, arg)?;
    let mut args = new_caps;
    args.push(new_arg);
    Ok(bld.finish(args, vec![out]))
}
