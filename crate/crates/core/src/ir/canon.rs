//! IR canonicalization and lambda lifting.
//!
//! The canonicalizer resolves `call_indirect` through chains of
//! `func_const`, `func_adj` and `func_pred` into direct `call`s, pushes
//! indirect calls on conditional results into both branches, folds
//! pack/unpack pairs and removes dead stationary ops.

use std::collections::{HashMap, HashSet};

use super::*;

fn resolve(rename: &HashMap<Value, Value>, mut v: Value) -> Value {
    while let Some(&n) = rename.get(&v) {
        v = n;
    }
    v
}

/// What a function value is known to be.
#[derive(Clone, Debug)]
enum Callee {
    Direct { sym: String, captures: Vec<Value>, adj: bool, preds: Vec<Basis> },
    /// Result `index` of a conditional whose branches yield functions.
    Cond { op: Op, index: usize, adj: bool, preds: Vec<Basis> },
}

struct Canon<'a> {
    values: &'a mut Values,
    full: bool,
    /// Function-producing stationary ops, by result.
    defs: HashMap<Value, Op>,
    rename: HashMap<Value, Value>,
    changed: bool,
}

impl Canon<'_> {
    fn callee(&self, mut v: Value) -> Option<Callee> {
        let (mut adj, mut preds) = (false, Vec::new());
        loop {
            let op = self.defs.get(&v)?;
            match &op.kind {
                OpKind::FuncConst { sym } => {
                    return Some(Callee::Direct { sym: sym.clone(), captures: op.operands.clone(), adj, preds })
                }
                OpKind::FuncAdj => {
                    adj = !adj;
                    v = op.operands[0];
                }
                OpKind::FuncPred { basis } => {
                    preds.push(basis.clone());
                    v = op.operands[0];
                }
                OpKind::Cond { .. } => {
                    let index = op.results.iter().position(|&r| r == v)?;
                    return Some(Callee::Cond { op: op.clone(), index, adj, preds });
                }
                _ => return None,
            }
        }
    }

    /// Applies the `adj`/`preds` wrappers collected on the way to a
    /// conditional to a function value inside one of its branches.
    fn rewrap(&mut self, ops: &mut Vec<Op>, mut fv: Value, adj: bool, preds: &[Basis]) -> Value {
        let mut b = Builder::new(self.values);
        if adj {
            let t = b.ty(fv);
            fv = b.op1(OpKind::FuncAdj, vec![fv], t);
        }
        for p in preds.iter().rev() {
            let n = match b.ty(fv) {
                Type::Func(ft) => ft.input + p.dim(),
                t => panic!("predicating {t}"),
            };
            fv = b.op1(OpKind::FuncPred { basis: p.clone() }, vec![fv], Type::func(n, Type::QBundle(n), true));
        }
        ops.extend(b.ops);
        fv
    }

    fn push_in(&mut self, cond: &Op, index: usize, adj: bool, preds: &[Basis], call: &Op) -> Op {
        let (then_block, else_block) = match &cond.kind {
            OpKind::Cond { then_block, else_block } => (then_block, else_block),
            _ => unreachable!(),
        };
        let arg = call.operands[1];
        let result = call.results[0];
        let rty = self.values.ty(result).clone();
        let mut operands = cond.operands.clone();
        operands.push(arg);
        let branch = |this: &mut Self, b: &Block| {
            let src = this.values.clone();
            let mut map: HashMap<Value, Value> = HashMap::new();
            let mut args = Vec::new();
            for &a in &b.args {
                let n = this.values.fresh(src.ty(a).clone());
                map.insert(a, n);
                args.push(n);
            }
            let mut ops: Vec<Op> = b.ops.iter().map(|op| clone_op_open(op, &src, this.values, &mut map)).collect();
            let x = this.values.fresh(src.ty(arg).clone());
            args.push(x);
            let y = b.ret[index];
            let fv = map.get(&y).copied().unwrap_or(y);
            let fv = this.rewrap(&mut ops, fv, adj, preds);
            let r = this.values.fresh(rty.clone());
            ops.push(Op { kind: OpKind::CallIndirect, operands: vec![fv, x], results: vec![r] });
            Block { args, ops, ret: vec![r] }
        };
        let t = branch(self, then_block);
        let e = branch(self, else_block);
        Op { kind: OpKind::Cond { then_block: t, else_block: e }, operands, results: vec![result] }
    }

    fn block(&mut self, b: &mut Block) {
        let mut out = Vec::with_capacity(b.ops.len());
        for mut op in std::mem::take(&mut b.ops) {
            for v in &mut op.operands {
                *v = resolve(&self.rename, *v);
            }
            for r in regions_mut(&mut op) {
                self.block(r);
            }
            if let Some(new) = self.rewrite(&op, &out) {
                self.changed = true;
                match new {
                    Rewrite::Replace(ops) => {
                        for o in &ops {
                            self.record(o);
                        }
                        out.extend(ops);
                    }
                    Rewrite::Forward(pairs) => {
                        for (from, to) in pairs {
                            self.rename.insert(from, to);
                        }
                    }
                }
                continue;
            }
            self.record(&op);
            out.push(op);
        }
        b.ops = out;
        for v in &mut b.ret {
            *v = resolve(&self.rename, *v);
        }
    }

    fn record(&mut self, op: &Op) {
        let func_valued = op.results.iter().any(|&r| matches!(self.values.ty(r), Type::Func(_)));
        if func_valued && is_stationary(op, self.values) {
            for &r in &op.results {
                self.defs.insert(r, op.clone());
            }
        }
    }

    fn rewrite(&mut self, op: &Op, before: &[Op]) -> Option<Rewrite> {
        match &op.kind {
            OpKind::CallIndirect => match self.callee(op.operands[0])? {
                Callee::Direct { sym, mut captures, adj, preds } => {
                    let pred = preds.into_iter().reduce(|a, b| a.tensor(&b));
                    captures.push(op.operands[1]);
                    Some(Rewrite::Replace(vec![Op { kind: OpKind::Call { sym, adj, pred }, operands: captures, results: op.results.clone() }]))
                }
                Callee::Cond { op: cond, index, adj, preds } => {
                    Some(Rewrite::Replace(vec![self.push_in(&cond, index, adj, &preds, op)]))
                }
            },
            OpKind::FuncAdj => match self.defs.get(&op.operands[0]) {
                Some(inner) if inner.kind == OpKind::FuncAdj => Some(Rewrite::Forward(vec![(op.results[0], inner.operands[0])])),
                _ => None,
            },
            OpKind::QbUnpack | OpKind::BitUnpack if self.full => {
                let pack = pack_for(&op.kind);
                let def = before.iter().rev().find(|o| o.results.contains(&op.operands[0]))?;
                (def.kind == pack && def.operands.len() == op.results.len())
                    .then(|| Rewrite::Forward(op.results.iter().copied().zip(def.operands.iter().copied()).collect()))
            }
            OpKind::QbPack | OpKind::BitPack if self.full => {
                let first = *op.operands.first()?;
                let def = before.iter().rev().find(|o| o.results.contains(&first))?;
                let unpack = if op.kind == OpKind::QbPack { OpKind::QbUnpack } else { OpKind::BitUnpack };
                (def.kind == unpack && def.results == op.operands)
                    .then(|| Rewrite::Forward(vec![(op.results[0], def.operands[0])]))
            }
            _ => None,
        }
    }
}

enum Rewrite {
    Replace(Vec<Op>),
    /// The op disappears; each result is replaced by the paired value.
    Forward(Vec<(Value, Value)>),
}

fn pack_for(unpack: &OpKind) -> OpKind {
    match unpack {
        OpKind::QbUnpack => OpKind::QbPack,
        _ => OpKind::BitPack,
    }
}

/// Like [`clone_op`], but operands defined outside the cloned op keep
/// their names. Used for non-isolated regions.
fn clone_op_open(op: &Op, src: &Values, dst: &mut Values, map: &mut HashMap<Value, Value>) -> Op {
    let mut defs = HashSet::new();
    collect_defs(op, &mut defs);
    let mut uses = Vec::new();
    collect_uses(op, &mut uses);
    for v in uses {
        if !defs.contains(&v) {
            map.entry(v).or_insert(v);
        }
    }
    clone_op(op, src, dst, map)
}

fn collect_defs(op: &Op, out: &mut HashSet<Value>) {
    out.extend(op.results.iter().copied());
    for b in regions(op) {
        out.extend(b.args.iter().copied());
        for o in &b.ops {
            collect_defs(o, out);
        }
    }
}

fn collect_uses(op: &Op, out: &mut Vec<Value>) {
    out.extend(op.operands.iter().copied());
    for b in regions(op) {
        for o in &b.ops {
            collect_uses(o, out);
        }
        out.extend(b.ret.iter().copied());
    }
}

/// Values used anywhere in a block, including its regions and terminators.
fn used_values(b: &Block, out: &mut HashSet<Value>) {
    out.extend(b.ret.iter().copied());
    for op in &b.ops {
        out.extend(op.operands.iter().copied());
        for r in regions(op) {
            used_values(r, out);
        }
    }
}

fn removable(op: &Op, values: &Values, full: bool) -> bool {
    match op.kind {
        OpKind::QbPack | OpKind::QbUnpack | OpKind::BitPack | OpKind::BitUnpack => true,
        _ if is_stationary(op, values) => {
            full || op.results.iter().any(|&r| matches!(values.ty(r), Type::Func(_)))
        }
        _ => false,
    }
}

/// Removes ops whose results are all unused. Returns whether any were.
fn dce(b: &mut Block, values: &Values, full: bool) -> bool {
    let mut any = false;
    loop {
        let mut used = HashSet::new();
        used_values(b, &mut used);
        let mut removed = false;
        prune(b, values, full, &used, &mut removed);
        if !removed {
            return any;
        }
        any = true;
    }
}

fn prune(b: &mut Block, values: &Values, full: bool, used: &HashSet<Value>, removed: &mut bool) {
    b.ops.retain(|op| {
        let dead = !op.results.is_empty()
            && op.results.iter().all(|r| !used.contains(r))
            && removable(op, values, full);
        *removed |= dead;
        !dead
    });
    for op in &mut b.ops {
        for r in regions_mut(op) {
            prune(r, values, full, used, removed);
        }
    }
}

/// One canonicalization of a function to a fixpoint. Returns whether
/// anything changed.
pub fn canonicalize_func(f: &mut Func, full: bool) -> bool {
    let mut any = false;
    loop {
        let mut c = Canon { values: &mut f.values, full, defs: HashMap::new(), rename: HashMap::new(), changed: false };
        c.block(&mut f.body);
        let changed = c.changed | dce(&mut f.body, &f.values, full);
        if !changed {
            return any;
        }
        any = true;
    }
}

pub fn canonicalize(m: &mut Module, full: bool) -> bool {
    let mut any = false;
    for f in &mut m.funcs {
        any |= canonicalize_func(f, full);
    }
    any
}

/// Replaces every lambda, innermost first, by a `func_const` of a new
/// function named after the enclosing one.
pub fn lift_lambdas(m: &mut Module) {
    let mut lifted = Vec::new();
    let mut taken: HashSet<String> = m.funcs.iter().map(|f| f.name.clone()).collect();
    for f in &mut m.funcs {
        let mut k = 0;
        let name = f.name.clone();
        lift_block(&mut f.body, &f.values, &name, &mut k, &mut taken, &mut lifted);
    }
    m.funcs.extend(lifted);
}

fn lift_block(b: &mut Block, values: &Values, fname: &str, k: &mut usize, taken: &mut HashSet<String>, out: &mut Vec<Func>) {
    for op in &mut b.ops {
        for r in regions_mut(op) {
            lift_block(r, values, fname, k, taken, out);
        }
        if let OpKind::Lambda { body } = &op.kind {
            let name = loop {
                let n = format!("{fname}__lambda{k}");
                *k += 1;
                if taken.insert(n.clone()) {
                    break n;
                }
            };
            let rev = matches!(values.ty(op.results[0]), Type::Func(ft) if ft.rev);
            let mut nv = Values::default();
            let body = clone_block(body, values, &mut nv, &mut HashMap::new());
            out.push(Func { name: name.clone(), rev, body, values: nv });
            op.kind = OpKind::FuncConst { sym: name };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Prim;

    /// @f applies std >> pm; @main calls it through a chain of function values.
    fn module(wrap: impl FnOnce(&mut Builder, Value) -> Value) -> Module {
        let mut fv = Values::default();
        let a = fv.fresh(Type::QBundle(1));
        let mut b = Builder::new(&mut fv);
        let y = b.op1(
            OpKind::QbTrans { b_in: Basis::builtin(Prim::Std, 1), b_out: Basis::builtin(Prim::Pm, 1) },
            vec![a],
            Type::QBundle(1),
        );
        let body = b.finish(vec![a], vec![y]);
        let f = Func { name: "f".into(), rev: true, body, values: fv };

        let mut mv = Values::default();
        let mut b = Builder::new(&mut mv);
        let q = b.op1(OpKind::QbPrep { prim: Prim::Std, eigenbits: vec![false, false, false] }, vec![], Type::QBundle(3));
        let c = b.op1(OpKind::FuncConst { sym: "f".into() }, vec![], Type::func(1, Type::QBundle(1), true));
        let g = wrap(&mut b, c);
        let w = match b.ty(g) {
            Type::Func(ft) => ft.input,
            _ => unreachable!(),
        };
        let mut qs = b.unpack(q);
        let rest = qs.split_off(w);
        let x = b.qpack(qs);
        let y = b.op1(OpKind::CallIndirect, vec![g, x], Type::QBundle(w));
        let mut ys = b.unpack(y);
        ys.extend(rest);
        let r = b.qpack(ys);
        let bits = b.op1(OpKind::QbMeas { basis: Basis::builtin(Prim::Std, 3) }, vec![r], Type::BitBundle(3));
        let body = b.finish(vec![], vec![bits]);
        let main = Func { name: "main".into(), rev: false, body, values: mv };
        Module { funcs: vec![f, main], classicals: Default::default(), entry: "main".into() }
    }

    fn ops(m: &Module, name: &str) -> Vec<&'static str> {
        let mut out = vec![];
        walk_ops(&m.func(name).unwrap().body, &mut |op| out.push(op.kind.name()));
        out
    }

    #[test]
    fn folds_wrappers_into_call() {
        let mut m = module(|b, c| {
            let a = b.op1(OpKind::FuncAdj, vec![c], Type::func(1, Type::QBundle(1), true));
            let p = Basis::literal(BasisLiteral::from_symbols(&["10"]));
            b.op1(OpKind::FuncPred { basis: p }, vec![a], Type::func(3, Type::QBundle(3), true))
        });
        verify::verify_module(&m).unwrap();
        canonicalize(&mut m, true);
        verify::verify_module(&m).unwrap();
        let calls: Vec<&Op> = m.func("main").unwrap().body.ops.iter().filter(|o| o.kind.name() == "call").collect();
        assert_eq!(calls.len(), 1);
        let p = Basis::literal(BasisLiteral::from_symbols(&["10"]));
        assert_eq!(calls[0].kind, OpKind::Call { sym: "f".into(), adj: true, pred: Some(p) });
        assert!(!ops(&m, "main").contains(&"func_adj"));
    }

    #[test]
    fn double_adjoint_cancels() {
        let mut m = module(|b, c| {
            let t = Type::func(1, Type::QBundle(1), true);
            let a = b.op1(OpKind::FuncAdj, vec![c], t.clone());
            b.op1(OpKind::FuncAdj, vec![a], t)
        });
        canonicalize(&mut m, true);
        verify::verify_module(&m).unwrap();
        let call = m.func("main").unwrap().body.ops.iter().find(|o| o.kind.name() == "call").unwrap();
        assert_eq!(call.kind, OpKind::Call { sym: "f".into(), adj: false, pred: None });
    }

    #[test]
    fn canonical_module_is_unchanged() {
        let mut m = module(|_, c| c);
        canonicalize(&mut m, true);
        let before = m.clone();
        assert!(!canonicalize(&mut m, true));
        assert_eq!(m, before);
    }

    #[test]
    fn lifts_nested_lambdas_innermost_first() {
        let mut v = Values::default();
        let outer_arg = v.fresh(Type::QBundle(1));
        let inner_arg = v.fresh(Type::QBundle(1));
        let inner = Block { args: vec![inner_arg], ops: vec![], ret: vec![inner_arg] };
        let mut b = Builder::new(&mut v);
        b.op1(OpKind::Lambda { body: inner }, vec![], Type::func(1, Type::QBundle(1), true));
        let body = b.finish(vec![outer_arg], vec![outer_arg]);
        let mut v2 = v.clone();
        let mut b = Builder::new(&mut v2);
        let l = b.op1(OpKind::Lambda { body }, vec![], Type::func(1, Type::QBundle(1), true));
        let main_body = b.finish(vec![], vec![]);
        let _ = l;
        let mut m = Module {
            funcs: vec![Func { name: "main".into(), rev: false, body: main_body, values: v2 }],
            classicals: Default::default(),
            entry: "main".into(),
        };
        lift_lambdas(&mut m);
        let names: Vec<&str> = m.funcs.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, vec!["main", "main__lambda0", "main__lambda1"]);
        assert_eq!(ops(&m, "main"), vec!["func_const"]);
        assert_eq!(ops(&m, "main__lambda1"), vec!["func_const"]);
        match &m.func("main__lambda1").unwrap().body.ops[0].kind {
            OpKind::FuncConst { sym } => assert_eq!(sym, "main__lambda0"),
            k => panic!("{k:?}"),
        }
        verify::verify_module(&m).unwrap();
    }
}
