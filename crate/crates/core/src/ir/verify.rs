//! Structural, type and linearity checks for IR modules.

use std::collections::HashMap;

use super::*;

struct Scope {
    defined: Vec<Value>,
}

struct Verifier<'m> {
    m: &'m Module,
    f: &'m Func,
    /// Quantum values defined so far and not yet consumed.
    live: HashMap<Value, usize>,
    scopes: Vec<Scope>,
    seen: Vec<bool>,
}

type VResult = Result<(), String>;

fn expect(cond: bool, msg: impl FnOnce() -> String) -> VResult {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

impl Verifier<'_> {
    fn ty(&self, v: Value) -> &Type {
        self.f.values.ty(v)
    }

    fn define(&mut self, v: Value) -> VResult {
        let i = v.0 as usize;
        expect(i < self.f.values.len(), || format!("{v} has no type"))?;
        expect(!self.seen[i], || format!("{v} is defined twice"))?;
        self.seen[i] = true;
        self.scopes.last_mut().unwrap().defined.push(v);
        if self.ty(v).is_quantum() {
            self.live.insert(v, self.scopes.len() - 1);
        }
        Ok(())
    }

    fn visible(&self, v: Value) -> bool {
        self.scopes.iter().any(|s| s.defined.contains(&v))
    }

    fn use_value(&mut self, v: Value) -> VResult {
        expect(self.visible(v), || format!("{v} is used but not defined in scope"))?;
        if self.ty(v).is_quantum() {
            match self.live.remove(&v) {
                Some(depth) => expect(depth == self.scopes.len() - 1, || {
                    format!("{v} is a qubit value captured from an enclosing region")
                })?,
                None => return Err(format!("{v} is a qubit value used more than once")),
            }
        }
        Ok(())
    }

    /// Verifies a region. Isolated regions see nothing from outside.
    fn block(&mut self, b: &Block, isolated: bool) -> VResult {
        let saved = if isolated { Some(std::mem::take(&mut self.scopes)) } else { None };
        self.scopes.push(Scope { defined: vec![] });
        for &a in &b.args {
            self.define(a)?;
        }
        for (i, op) in b.ops.iter().enumerate() {
            self.op(op).map_err(|e| format!("op {i} ({}): {e}", op.kind.name()))?;
        }
        for &r in &b.ret {
            self.use_value(r).map_err(|e| format!("terminator: {e}"))?;
        }
        let scope = self.scopes.pop().unwrap();
        for v in scope.defined {
            expect(!self.live.contains_key(&v), || format!("qubit value {v} is never used"))?;
        }
        if let Some(s) = saved {
            self.scopes = s;
        }
        Ok(())
    }

    fn types(&self, vs: &[Value]) -> Vec<Type> {
        vs.iter().map(|&v| self.ty(v).clone()).collect()
    }

    fn results(&self, op: &Op, want: &[Type]) -> VResult {
        let got = self.types(&op.results);
        expect(got == want, || format!("results have types {} but should be {}", list(&got), list(want)))
    }

    fn bundle_width(&self, v: Value) -> Result<usize, String> {
        match self.ty(v) {
            Type::QBundle(n) => Ok(*n),
            t => Err(format!("{v} should be a qbundle, not {t}")),
        }
    }

    fn endo(&self, v: Value) -> Result<usize, String> {
        match self.ty(v) {
            Type::Func(ft) if ft.rev && *ft.output == Type::QBundle(ft.input) => Ok(ft.input),
            t => Err(format!("{v} should be a reversible qbundle[N] -> qbundle[N] function, not {t}")),
        }
    }

    fn callee(&self, sym: &str) -> Result<&Func, String> {
        self.m.func(sym).ok_or_else(|| format!("unknown function @{sym}"))
    }

    fn op(&mut self, op: &Op) -> VResult {
        match &op.kind {
            OpKind::Lambda { body } => {
                self.block(body, true)?;
            }
            OpKind::Cond { then_block, else_block } => {
                for b in [then_block, else_block] {
                    self.block(b, false)?;
                }
            }
            _ => {}
        }
        for &v in &op.operands {
            self.use_value(v)?;
        }
        self.check_types(op)?;
        for &r in &op.results {
            self.define(r)?;
        }
        Ok(())
    }

    fn check_types(&self, op: &Op) -> VResult {
        let ops = &op.operands;
        let arity = |n: usize| expect(ops.len() == n, || format!("expected {n} operands, got {}", ops.len()));
        match &op.kind {
            OpKind::QbPrep { prim, eigenbits } => {
                arity(0)?;
                expect(*prim != Prim::Fourier && !eigenbits.is_empty(), || "invalid preparation".into())?;
                self.results(op, &[Type::QBundle(eigenbits.len())])
            }
            OpKind::QbTrans { b_in, b_out } => {
                let n = self.bundle_width(*ops.first().ok_or("missing operand")?)?;
                expect(b_in.dim() == n && b_out.dim() == n, || format!("bases of {} and {} qubits applied to {n}", b_in.dim(), b_out.dim()))?;
                let slots = phase_slots(b_in) + phase_slots(b_out);
                arity(1 + slots)?;
                for &p in &ops[1..] {
                    expect(*self.ty(p) == Type::Angle, || format!("phase operand {p} is not an angle"))?;
                }
                self.results(op, &[Type::QBundle(n)])
            }
            OpKind::QbMeas { basis } => {
                arity(1)?;
                let n = self.bundle_width(ops[0])?;
                expect(basis.dim() == n && basis.fully_spans(), || format!("cannot measure {n} qubits in {basis}"))?;
                self.results(op, &[Type::BitBundle(n)])
            }
            OpKind::QbDiscard | OpKind::QbDiscardZ => {
                arity(1)?;
                self.bundle_width(ops[0])?;
                self.results(op, &[])
            }
            OpKind::QbPack => {
                for &q in ops {
                    expect(*self.ty(q) == Type::Qubit, || format!("{q} is not a qubit"))?;
                }
                self.results(op, &[Type::QBundle(ops.len())])
            }
            OpKind::QbUnpack => {
                arity(1)?;
                let n = self.bundle_width(ops[0])?;
                self.results(op, &vec![Type::Qubit; n])
            }
            OpKind::BitPack => {
                for &b in ops {
                    expect(*self.ty(b) == Type::Bit, || format!("{b} is not a bit"))?;
                }
                self.results(op, &[Type::BitBundle(ops.len())])
            }
            OpKind::BitUnpack => {
                arity(1)?;
                match self.ty(ops[0]) {
                    Type::BitBundle(n) => self.results(op, &vec![Type::Bit; *n]),
                    t => Err(format!("cannot unpack {t} as bits")),
                }
            }
            OpKind::Angle(theta) => {
                arity(0)?;
                expect(theta.is_finite(), || "angle is not finite".into())?;
                self.results(op, &[Type::Angle])
            }
            OpKind::FuncConst { sym } => {
                let f = self.callee(sym)?;
                let caps = &f.arg_types()[..f.num_captures()];
                expect(self.types(ops) == caps, || format!("captures of @{sym} should be {}", list(caps)))?;
                let t = f.value_type().ok_or_else(|| format!("@{sym} cannot be a function value"))?;
                self.results(op, &[t])
            }
            OpKind::FuncAdj => {
                arity(1)?;
                self.endo(ops[0])?;
                self.results(op, &[self.ty(ops[0]).clone()])
            }
            OpKind::FuncPred { basis } => {
                arity(1)?;
                expect(!basis.has_phases(), || "predicate has phases".into())?;
                let n = self.endo(ops[0])? + basis.dim();
                self.results(op, &[Type::func(n, Type::QBundle(n), true)])
            }
            OpKind::Call { sym, adj, pred } => {
                let f = self.callee(sym)?;
                let mut want = f.arg_types();
                let mut rets = f.ret_types();
                if *adj || pred.is_some() {
                    expect(f.rev, || format!("@{sym} is not reversible"))?;
                }
                if let Some(p) = pred {
                    expect(!p.has_phases(), || "predicate has phases".into())?;
                    let n = f.input_width().ok_or("predicated call of a function without an argument")?;
                    *want.last_mut().unwrap() = Type::QBundle(n + p.dim());
                    rets = vec![Type::QBundle(n + p.dim())];
                }
                if *adj {
                    let endo = f.input_width().is_some_and(|n| f.ret_types() == [Type::QBundle(n)]);
                    expect(endo, || format!("adjoint call of @{sym}, which is not qbundle[N] -> qbundle[N]"))?;
                }
                expect(self.types(ops) == want, || format!("operands should be {}", list(&want)))?;
                self.results(op, &rets)
            }
            OpKind::CallIndirect => {
                arity(2)?;
                let ft = match self.ty(ops[0]) {
                    Type::Func(ft) => ft.clone(),
                    t => return Err(format!("callee {} is {t}, not a function", ops[0])),
                };
                expect(*self.ty(ops[1]) == Type::QBundle(ft.input), || format!("argument should be qbundle[{}]", ft.input))?;
                self.results(op, &[*ft.output])
            }
            OpKind::Lambda { body } => {
                let args = self.types(&body.args);
                let (last, caps) = args.split_last().ok_or("lambda without arguments")?;
                expect(self.types(ops) == caps, || "lambda captures do not match its arguments".into())?;
                let input = match last {
                    Type::QBundle(n) => *n,
                    t => return Err(format!("lambda argument is {t}")),
                };
                let rets = self.types(&body.ret);
                expect(rets.len() == 1, || "lambda must return one value".into())?;
                match self.types(&op.results).as_slice() {
                    [Type::Func(ft)] if ft.input == input && *ft.output == rets[0] => Ok(()),
                    _ => Err(format!("lambda result should be func[{input} -> {}]", rets[0])),
                }
            }
            OpKind::Cond { then_block, else_block } => {
                expect(!ops.is_empty() && *self.ty(ops[0]) == Type::Bit, || "condition must be a bit".into())?;
                let passed = self.types(&ops[1..]);
                for b in [then_block, else_block] {
                    expect(self.types(&b.args) == passed, || "branch arguments do not match operands".into())?;
                    expect(self.types(&b.ret) == self.types(&op.results), || "branch yields do not match results".into())?;
                }
                Ok(())
            }
            OpKind::Embed { sym, mode, pred } => {
                arity(1)?;
                let net = self.m.classicals.get(sym).ok_or_else(|| format!("unknown classical function @{sym}"))?;
                let (n, k) = (net.num_inputs, net.outputs.len());
                let base = match mode {
                    EmbedMode::Xor => n + k,
                    EmbedMode::Sign => {
                        expect(k == 1, || "sign embedding needs one output".into())?;
                        n
                    }
                };
                let width = base + pred.as_ref().map_or(0, |p| p.dim());
                expect(*self.ty(ops[0]) == Type::QBundle(width), || format!("argument should be qbundle[{width}]"))?;
                self.results(op, &[Type::QBundle(width)])
            }
        }
    }
}

fn list(ts: &[Type]) -> String {
    format!("({})", ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", "))
}

pub fn verify_func(m: &Module, f: &Func) -> Result<(), IrError> {
    let mut v = Verifier { m, f, live: HashMap::new(), scopes: vec![], seen: vec![false; f.values.len()] };
    v.block(&f.body, true).map_err(|e| IrError::Verify(format!("in @{}: {e}", f.name)))
}

pub fn verify_module(m: &Module) -> Result<(), IrError> {
    let mut names = std::collections::HashSet::new();
    for f in &m.funcs {
        if !names.insert(&f.name) {
            return Err(IrError::Verify(format!("function @{} is defined twice", f.name)));
        }
        verify_func(m, f)?;
    }
    if m.func(&m.entry).is_none() {
        return Err(IrError::Verify(format!("entry @{} is missing", m.entry)));
    }
    Ok(())
}
