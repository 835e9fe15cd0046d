//! Inlining of direct calls, alternated with canonicalization.

use std::collections::{HashMap, HashSet};

use super::adjoint::adjoint_block;
use super::canon::{canonicalize, lift_lambdas};
use super::predicate::predicate_block;
use super::*;

/// Rounds of inlining before the call graph is declared cyclic.
const MAX_ROUNDS: usize = 64;

/// The body a call of `callee` with the given attributes executes, in the
/// callee's value table `values`.
pub fn call_body(callee: &Func, adj: bool, pred: Option<&Basis>, values: &mut Values) -> Result<Block, IrError> {
    let mut body = callee.body.clone();
    if adj {
        body = adjoint_block(&body, values)?;
    }
    if let Some(p) = pred {
        body = predicate_block(&body, values, p)?;
    }
    Ok(body)
}

fn inline_block(
    b: &mut Block,
    values: &mut Values,
    funcs: &HashMap<String, Func>,
    rename: &mut HashMap<Value, Value>,
) -> Result<bool, IrError> {
    let mut changed = false;
    let mut out = Vec::with_capacity(b.ops.len());
    for mut op in std::mem::take(&mut b.ops) {
        for r in regions_mut(&mut op) {
            changed |= inline_block(r, values, funcs, rename)?;
        }
        let OpKind::Call { sym, adj, pred } = &op.kind else {
            out.push(op);
            continue;
        };
        let callee = funcs.get(sym).ok_or_else(|| IrError::UnknownFunc(sym.clone()))?;
        let mut cv = callee.values.clone();
        let body = call_body(callee, *adj, pred.as_ref(), &mut cv)?;
        let mut map: HashMap<Value, Value> = body.args.iter().copied().zip(op.operands.iter().copied()).collect();
        out.extend(body.ops.iter().map(|o| clone_op(o, &cv, values, &mut map)));
        for (&r, v) in op.results.iter().zip(&body.ret) {
            rename.insert(r, map[v]);
        }
        changed = true;
    }
    b.ops = out;
    Ok(changed)
}

fn resolve(rename: &HashMap<Value, Value>, mut v: Value) -> Value {
    while let Some(&n) = rename.get(&v) {
        v = n;
    }
    v
}

fn apply_rename(b: &mut Block, rename: &HashMap<Value, Value>) {
    for op in &mut b.ops {
        for v in &mut op.operands {
            *v = resolve(rename, *v);
        }
        for r in regions_mut(op) {
            apply_rename(r, rename);
        }
    }
    for v in &mut b.ret {
        *v = resolve(rename, *v);
    }
}

/// Inlines every direct call once. Returns whether any call was inlined.
pub fn inline_calls(m: &mut Module) -> Result<bool, IrError> {
    let funcs: HashMap<String, Func> = m.funcs.iter().map(|f| (f.name.clone(), f.clone())).collect();
    let mut changed = false;
    for f in &mut m.funcs {
        let mut rename = HashMap::new();
        changed |= inline_block(&mut f.body, &mut f.values, &funcs, &mut rename)?;
        apply_rename(&mut f.body, &rename);
    }
    Ok(changed)
}

/// Functions referenced, directly or not, from the entry.
pub fn reachable(m: &Module) -> HashSet<String> {
    let mut seen = HashSet::new();
    let mut stack = vec![m.entry.clone()];
    while let Some(name) = stack.pop() {
        if !seen.insert(name.clone()) {
            continue;
        }
        if let Some(f) = m.func(&name) {
            walk_ops(&f.body, &mut |op| match &op.kind {
                OpKind::Call { sym, .. } | OpKind::FuncConst { sym } => stack.push(sym.clone()),
                _ => {}
            });
        }
    }
    seen
}

pub fn drop_unreachable(m: &mut Module) {
    let live = reachable(m);
    m.funcs.retain(|f| live.contains(&f.name));
}

/// Lifts lambdas, then inlines and canonicalizes until no direct call is
/// left or nothing changes.
pub fn inline(m: &mut Module, full: bool) -> Result<(), IrError> {
    lift_lambdas(m);
    for _ in 0..MAX_ROUNDS {
        canonicalize(m, full);
        if !inline_calls(m)? {
            drop_unreachable(m);
            return Ok(());
        }
    }
    Err(IrError::Unsupported("inlining did not terminate; the call graph may be cyclic".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Prim;

    fn trans(b_in: Basis, b_out: Basis) -> Func {
        let mut v = Values::default();
        let a = v.fresh(Type::QBundle(b_in.dim()));
        let n = b_in.dim();
        let mut b = Builder::new(&mut v);
        let y = b.op1(OpKind::QbTrans { b_in, b_out }, vec![a], Type::QBundle(n));
        Func { name: "f".into(), rev: true, body: b.finish(vec![a], vec![y]), values: v }
    }

    #[test]
    fn adjoint_call_splices_reversed_translation() {
        let f = trans(Basis::builtin(Prim::Std, 1), Basis::builtin(Prim::Pm, 1));
        let mut v = Values::default();
        let a = v.fresh(Type::QBundle(1));
        let mut b = Builder::new(&mut v);
        let y = b.op1(OpKind::Call { sym: "f".into(), adj: true, pred: None }, vec![a], Type::QBundle(1));
        let g = Func { name: "g".into(), rev: true, body: b.finish(vec![a], vec![y]), values: v };
        let mut m = Module { funcs: vec![f, g], classicals: Default::default(), entry: "g".into() };
        inline(&mut m, true).unwrap();
        verify::verify_module(&m).unwrap();
        assert_eq!(m.funcs.len(), 1);
        let ops = &m.func("g").unwrap().body.ops;
        assert_eq!(ops.len(), 1);
        assert_eq!(ops[0].kind, OpKind::QbTrans { b_in: Basis::builtin(Prim::Pm, 1), b_out: Basis::builtin(Prim::Std, 1) });
    }

    #[test]
    fn cyclic_calls_are_reported() {
        let mut v = Values::default();
        let a = v.fresh(Type::QBundle(1));
        let mut b = Builder::new(&mut v);
        let y = b.op1(OpKind::Call { sym: "f".into(), adj: false, pred: None }, vec![a], Type::QBundle(1));
        let f = Func { name: "f".into(), rev: true, body: b.finish(vec![a], vec![y]), values: v };
        let mut m = Module { funcs: vec![f], classicals: Default::default(), entry: "f".into() };
        assert!(inline(&mut m, true).is_err());
    }
}
