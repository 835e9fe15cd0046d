//! Function specializations: which adjoint and predicated variants a module
//! needs, and their generation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::inline::call_body;
use super::*;

/// A variant of a function: forward or adjoint, with some number of
/// predicate qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpecKey {
    pub func: String,
    pub adj: bool,
    pub num_ctrls: usize,
}

impl SpecKey {
    pub fn forward(func: &str) -> Self {
        SpecKey { func: func.to_string(), adj: false, num_ctrls: 0 }
    }
}

type Targets = BTreeSet<(String, bool, usize)>;

/// Dataflow over function values, to a fixpoint over function-typed
/// parameters.
struct Flow<'m> {
    m: &'m Module,
    params: HashMap<(String, usize), Targets>,
    edges: BTreeMap<String, Targets>,
    changed: bool,
}

impl Flow<'_> {
    fn param_in(&mut self, sym: &str, i: usize, t: &Targets) {
        let slot = self.params.entry((sym.to_string(), i)).or_default();
        let before = slot.len();
        slot.extend(t.iter().cloned());
        self.changed |= slot.len() != before;
    }

    fn block(&mut self, fname: &str, b: &Block, vals: &mut HashMap<Value, Targets>) {
        for op in &b.ops {
            let get = |vals: &HashMap<Value, Targets>, v: &Value| vals.get(v).cloned().unwrap_or_default();
            match &op.kind {
                OpKind::FuncConst { sym } => {
                    for (i, c) in op.operands.iter().enumerate() {
                        let t = get(vals, c);
                        self.param_in(sym, i, &t);
                    }
                    vals.insert(op.results[0], [(sym.clone(), false, 0)].into());
                }
                OpKind::FuncAdj => {
                    let t = get(vals, &op.operands[0]).into_iter().map(|(s, a, k)| (s, !a, k)).collect();
                    vals.insert(op.results[0], t);
                }
                OpKind::FuncPred { basis } => {
                    let d = basis.dim();
                    let t = get(vals, &op.operands[0]).into_iter().map(|(s, a, k)| (s, a, k + d)).collect();
                    vals.insert(op.results[0], t);
                }
                OpKind::Call { sym, adj, pred } => {
                    let n = op.operands.len().saturating_sub(1);
                    for (i, c) in op.operands[..n].iter().enumerate() {
                        let t = get(vals, c);
                        self.param_in(sym, i, &t);
                    }
                    let k = pred.as_ref().map_or(0, |p| p.dim());
                    self.edges.entry(fname.to_string()).or_default().insert((sym.clone(), *adj, k));
                }
                OpKind::CallIndirect => {
                    let t = get(vals, &op.operands[0]);
                    self.edges.entry(fname.to_string()).or_default().extend(t);
                }
                OpKind::Lambda { body } => {
                    for (&a, c) in body.args.iter().zip(&op.operands) {
                        vals.insert(a, get(vals, c));
                    }
                    self.block(fname, body, vals);
                }
                OpKind::Cond { then_block, else_block } => {
                    let mut out: Vec<Targets> = vec![Targets::new(); op.results.len()];
                    for blk in [then_block, else_block] {
                        for (&a, c) in blk.args.iter().zip(&op.operands[1..]) {
                            vals.insert(a, get(vals, c));
                        }
                        self.block(fname, blk, vals);
                        for (o, r) in out.iter_mut().zip(&blk.ret) {
                            o.extend(get(vals, r));
                        }
                    }
                    for (&r, t) in op.results.iter().zip(out) {
                        vals.insert(r, t);
                    }
                }
                _ => {}
            }
        }
    }

    fn run(&mut self) {
        loop {
            self.changed = false;
            for f in &self.m.funcs {
                let mut vals = HashMap::new();
                for (i, &a) in f.body.args.iter().enumerate() {
                    if let Some(t) = self.params.get(&(f.name.clone(), i)) {
                        vals.insert(a, t.clone());
                    }
                }
                self.block(&f.name, &f.body, &mut vals);
            }
            if !self.changed {
                return;
            }
        }
    }
}

/// The specializations reachable from the entry's forward variant: each
/// invocation edge composes with the invoking variant by XOR of the
/// adjoint flags and sum of the predicate widths.
pub fn specialization_analysis(m: &Module) -> BTreeSet<SpecKey> {
    let mut flow = Flow { m, params: HashMap::new(), edges: BTreeMap::new(), changed: false };
    flow.run();
    let mut seen = BTreeSet::new();
    let mut stack = vec![SpecKey::forward(&m.entry)];
    while let Some(key) = stack.pop() {
        if !seen.insert(key.clone()) {
            continue;
        }
        for (g, a, k) in flow.edges.get(&key.func).into_iter().flatten() {
            stack.push(SpecKey { func: g.clone(), adj: key.adj ^ a, num_ctrls: key.num_ctrls + k });
        }
    }
    seen
}

fn spec_name(m: &Module, sym: &str, adj: bool, pred: Option<&Basis>) -> String {
    let mut base = sym.to_string();
    if adj {
        base.push_str("__adj");
    }
    if let Some(p) = pred {
        base.push_str(&format!("__pred{}", p.dim()));
    }
    m.fresh_name(&base)
}

struct Gen {
    /// Functions as they were before any call was retargeted.
    orig: HashMap<String, Func>,
    made: HashMap<(String, bool, Option<String>), String>,
    pending: Vec<String>,
}

impl Gen {
    fn variant(&mut self, m: &mut Module, sym: &str, adj: bool, pred: Option<&Basis>) -> Result<String, IrError> {
        let key = (sym.to_string(), adj, pred.map(|p| p.to_string()));
        if let Some(n) = self.made.get(&key) {
            return Ok(n.clone());
        }
        let base = self.orig.get(sym).ok_or_else(|| IrError::UnknownFunc(sym.to_string()))?;
        if !base.rev {
            return Err(IrError::Unsupported(format!("@{sym} is not reversible, so it has no adjoint or predicated form")));
        }
        let mut values = base.values.clone();
        let body = call_body(base, adj, pred, &mut values)?;
        let name = spec_name(m, sym, adj, pred);
        m.funcs.push(Func { name: name.clone(), rev: true, body, values });
        self.made.insert(key, name.clone());
        self.pending.push(name.clone());
        Ok(name)
    }

    fn block(&mut self, m: &mut Module, b: &mut Block) -> Result<(), IrError> {
        let mut consts: HashMap<Value, (String, Vec<Value>)> = HashMap::new();
        for op in &mut b.ops {
            for r in regions_mut(op) {
                self.block(m, r)?;
            }
            match &op.kind {
                OpKind::Call { sym, adj, pred } if *adj || pred.is_some() => {
                    let sym = self.variant(m, sym, *adj, pred.as_ref())?;
                    op.kind = OpKind::Call { sym, adj: false, pred: None };
                }
                OpKind::FuncConst { sym } => {
                    consts.insert(op.results[0], (sym.clone(), op.operands.clone()));
                }
                OpKind::FuncAdj | OpKind::FuncPred { .. } => {
                    if let Some((sym, caps)) = consts.get(&op.operands[0]).cloned() {
                        let name = match &op.kind {
                            OpKind::FuncPred { basis } => self.variant(m, &sym, false, Some(basis))?,
                            _ => self.variant(m, &sym, true, None)?,
                        };
                        op.kind = OpKind::FuncConst { sym: name.clone() };
                        op.operands = caps.clone();
                        consts.insert(op.results[0], (name, caps));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Materializes the adjoint and predicated variants requested by call sites
/// and by `func_adj`/`func_pred` of known functions, retargeting them to
/// plain forward calls and references. `keys` must come from
/// [`specialization_analysis`]; a non-forward key on an irreversible
/// function is an error.
pub fn generate_specializations(m: &mut Module, keys: &BTreeSet<SpecKey>) -> Result<(), IrError> {
    for k in keys {
        if k.adj || k.num_ctrls > 0 {
            let f = m.func(&k.func).ok_or_else(|| IrError::UnknownFunc(k.func.clone()))?;
            if !f.rev {
                return Err(IrError::Unsupported(format!("@{} is not reversible, so it has no adjoint or predicated form", f.name)));
            }
        }
    }
    let orig = m.funcs.iter().map(|f| (f.name.clone(), f.clone())).collect();
    let mut gen = Gen { orig, made: HashMap::new(), pending: m.funcs.iter().map(|f| f.name.clone()).collect() };
    while let Some(name) = gen.pending.pop() {
        let idx = m.funcs.iter().position(|f| f.name == name).unwrap();
        let mut f = m.funcs[idx].clone();
        gen.block(m, &mut f.body)?;
        let idx = m.funcs.iter().position(|f| f.name == name).unwrap();
        m.funcs[idx] = f;
    }
    Ok(())
}

pub fn specialize(m: &mut Module) -> Result<(), IrError> {
    let keys = specialization_analysis(m);
    generate_specializations(m, &keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Prim;

    /// A one-qubit function that calls each `(callee, adj, pred)` in turn.
    fn caller(name: &str, calls: &[(&str, bool, Option<Basis>)]) -> Func {
        let mut v = Values::default();
        let n = 1 + calls.iter().filter_map(|c| c.2.as_ref()).map(|p| p.dim()).max().unwrap_or(0);
        let a = v.fresh(Type::QBundle(n));
        let mut b = Builder::new(&mut v);
        let mut x = a;
        for (sym, adj, pred) in calls {
            let w = 1 + pred.as_ref().map_or(0, |p| p.dim());
            let mut qs = b.unpack(x);
            let rest = qs.split_off(w);
            let arg = b.qpack(qs);
            let y = b.op1(OpKind::Call { sym: sym.to_string(), adj: *adj, pred: pred.clone() }, vec![arg], Type::QBundle(w));
            let mut ys = b.unpack(y);
            ys.extend(rest);
            x = b.qpack(ys);
        }
        let body = b.finish(vec![a], vec![x]);
        Func { name: name.into(), rev: true, body, values: v }
    }

    fn leaf(name: &str) -> Func {
        let mut v = Values::default();
        let a = v.fresh(Type::QBundle(1));
        let mut b = Builder::new(&mut v);
        let y = b.op1(
            OpKind::QbTrans { b_in: Basis::builtin(Prim::Std, 1), b_out: Basis::builtin(Prim::Pm, 1) },
            vec![a],
            Type::QBundle(1),
        );
        Func { name: name.into(), rev: true, body: b.finish(vec![a], vec![y]), values: v }
    }

    fn key(f: &str, adj: bool, k: usize) -> SpecKey {
        SpecKey { func: f.into(), adj, num_ctrls: k }
    }

    fn one() -> Basis {
        Basis::literal(BasisLiteral::from_symbols(&["1"]))
    }

    #[test]
    fn adjoint_propagates_through_calls() {
        let m = Module {
            funcs: vec![caller("f", &[("g", true, None)]), caller("g", &[("h", false, None)]), leaf("h")],
            classicals: Default::default(),
            entry: "f".into(),
        };
        let keys = specialization_analysis(&m);
        assert!(keys.contains(&key("h", true, 0)));
        assert_eq!(keys, [key("f", false, 0), key("g", true, 0), key("h", true, 0)].into());
    }

    #[test]
    fn controls_accumulate() {
        let m = Module {
            funcs: vec![caller("f", &[("g", false, Some(one()))]), caller("g", &[("h", true, Some(one()))]), leaf("h")],
            classicals: Default::default(),
            entry: "f".into(),
        };
        let keys = specialization_analysis(&m);
        assert!(keys.contains(&key("h", true, 2)));
    }

    #[test]
    fn entry_only() {
        let m = Module { funcs: vec![leaf("main")], classicals: Default::default(), entry: "main".into() };
        assert_eq!(specialization_analysis(&m), [key("main", false, 0)].into());
    }

    #[test]
    fn generation_reaches_fixpoint() {
        let mut m = Module {
            funcs: vec![caller("f", &[("g", true, Some(one()))]), caller("g", &[("h", true, None)]), leaf("h")],
            classicals: Default::default(),
            entry: "f".into(),
        };
        specialize(&mut m).unwrap();
        verify::verify_module(&m).unwrap();
        let again = specialization_analysis(&m);
        assert!(again.iter().all(|k| !k.adj && k.num_ctrls == 0), "{again:?}");
        assert!(m.func("g__adj__pred1").is_some());
        let names: Vec<&str> = m.funcs.iter().map(|f| f.name.as_str()).collect();
        assert!(m.func("h__pred1").is_some(), "{names:?}");
    }
}
