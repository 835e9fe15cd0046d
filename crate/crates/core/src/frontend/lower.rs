//! Lowering of canonicalized, type-checked programs to the basis-level IR.
//!
//! Every function-valued expression becomes a value: kernel references are
//! `func_const`s, and translations, measurements, embeddings, tensors and
//! compositions of functions are lambdas. Applying a function with `|`
//! always emits `call_indirect`; resolving those is left to the IR
//! canonicalizer.

use std::collections::{BTreeMap, HashMap};

use super::ast::*;
use super::classical::build_network;
use super::diag::Diagnostic;
use super::typecheck::{eval_basis, is_basis_expr, literal_runs, Signatures, Ty};
use crate::basis::{Basis, BasisElement, BasisLiteral, BasisVector, Prim};
use crate::ir::{self, unbind_phases, Block, Builder, Func, Module, OpKind, Type, Value, Values};

type LResult<T> = Result<T, Diagnostic>;

pub fn ir_type(t: &Ty) -> Type {
    match t {
        Ty::Qubit(n) => Type::QBundle(*n),
        Ty::Bit(n) => Type::BitBundle(*n),
        Ty::Basis(n) => panic!("basis[{n}] has no IR type"),
        Ty::Func { ins, out, rev } => Type::func(*ins, ir_type(out), *rev),
    }
}

enum Lowered {
    Val(Value),
    Basis,
}

struct Lowerer<'a, 'v> {
    sigs: &'a Signatures,
    b: Builder<'v>,
    env: HashMap<String, Value>,
}

fn internal(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(span, format!("internal: {}", msg.into()))
}

impl Lowerer<'_, '_> {
    fn ty(&self, v: Value) -> Type {
        self.b.ty(v)
    }

    fn func_type(&self, v: Value) -> ir::FuncType {
        match self.ty(v) {
            Type::Func(ft) => ft,
            t => panic!("expected a function value, got {t}"),
        }
    }

    /// Builds a lambda whose body receives the captures and a qbundle of
    /// width `input`.
    fn lambda(
        &mut self,
        captures: Vec<Value>,
        input: usize,
        output: Type,
        rev: bool,
        body: impl FnOnce(&mut Self, &[Value], Value) -> Value,
    ) -> Value {
        let saved = std::mem::take(&mut self.b.ops);
        let cap_args: Vec<Value> = captures.iter().map(|&c| { let t = self.ty(c); self.b.values.fresh(t) }).collect();
        let arg = self.b.values.fresh(Type::QBundle(input));
        let ret = body(self, &cap_args, arg);
        let ops = std::mem::replace(&mut self.b.ops, saved);
        let mut args = cap_args;
        args.push(arg);
        let block = Block { args, ops, ret: vec![ret] };
        self.b.op1(OpKind::Lambda { body: block }, captures, Type::func(input, output, rev))
    }

    fn translation(&mut self, b_in: &Basis, b_out: &Basis) -> Value {
        let (bi, ti) = unbind_phases(b_in);
        let (bo, to) = unbind_phases(b_out);
        let n = bi.dim();
        self.lambda(vec![], n, Type::QBundle(n), true, |lw, _, q| {
            let mut operands = vec![q];
            for t in ti.iter().chain(&to) {
                operands.push(lw.b.angle(*t));
            }
            lw.b.op1(OpKind::QbTrans { b_in: bi, b_out: bo }, operands, Type::QBundle(n))
        })
    }

    /// Concatenates two bundles; an empty qbundle disappears.
    fn concat(&mut self, x: Value, y: Value) -> Value {
        let (tx, ty) = (self.ty(x), self.ty(y));
        let mut xs = self.b.unpack(x);
        let ys = self.b.unpack(y);
        match (tx, ty) {
            (Type::QBundle(_), Type::QBundle(_)) => {
                xs.extend(ys);
                self.b.qpack(xs)
            }
            (Type::BitBundle(_), Type::BitBundle(_)) => {
                xs.extend(ys);
                self.b.bpack(xs)
            }
            (Type::QBundle(0), Type::BitBundle(_)) => self.b.bpack(ys),
            (Type::BitBundle(_), Type::QBundle(0)) => self.b.bpack(xs),
            (a, b) => panic!("cannot concatenate {a} and {b}"),
        }
    }

    fn value(&mut self, e: &Expr) -> LResult<Value> {
        match self.expr(e)? {
            Lowered::Val(v) => Ok(v),
            Lowered::Basis => Err(internal(e.span, "basis used as a value")),
        }
    }

    fn expr(&mut self, e: &Expr) -> LResult<Lowered> {
        let span = e.span;
        if is_basis_expr(e) {
            eval_basis(e)?;
            return Ok(Lowered::Basis);
        }
        let v = match &e.kind {
            ExprKind::Str(s) => {
                let mut parts = Vec::new();
                for (prim, bits) in literal_runs(s, span)? {
                    let n = bits.len();
                    parts.push(self.b.op1(OpKind::QbPrep { prim, eigenbits: bits }, vec![], Type::QBundle(n)));
                }
                let first = parts.remove(0);
                parts.into_iter().fold(first, |acc, p| self.concat(acc, p))
            }
            ExprKind::Phase(x, _) => self.value(x)?,
            ExprKind::Id(d) => {
                let n = *match d {
                    DimExpr::Const(n) => n,
                    _ => return Err(internal(span, "unexpanded dimension")),
                } as usize;
                let std = Basis::builtin(Prim::Std, n);
                self.translation(&std, &std)
            }
            ExprKind::Discard(d) | ExprKind::DiscardZ(d) => {
                let n = match d {
                    DimExpr::Const(n) => *n as usize,
                    _ => return Err(internal(span, "unexpanded dimension")),
                };
                let kind = if matches!(e.kind, ExprKind::Discard(_)) { OpKind::QbDiscard } else { OpKind::QbDiscardZ };
                self.lambda(vec![], n, Type::QBundle(0), false, |lw, _, q| {
                    lw.b.op(kind, vec![q], vec![]);
                    lw.b.qpack(vec![])
                })
            }
            ExprKind::Var(v) => *self.env.get(v).ok_or_else(|| internal(span, format!("unbound '{v}'")))?,
            ExprKind::FnRef(name, _) => {
                let t = self.sigs.kernels.get(name).ok_or_else(|| internal(span, format!("unknown kernel {name}")))?;
                self.b.op1(OpKind::FuncConst { sym: name.clone() }, vec![], ir_type(t))
            }
            ExprKind::Embed(name, _, mode) => {
                let &(n, k) = self.sigs.classicals.get(name).ok_or_else(|| internal(span, format!("unknown {name}")))?;
                let (width, mode) = match mode {
                    EmbedMode::Xor => (n + k, ir::EmbedMode::Xor),
                    EmbedMode::Sign => (n, ir::EmbedMode::Sign),
                };
                let sym = name.clone();
                self.lambda(vec![], width, Type::QBundle(width), true, |lw, _, q| {
                    lw.b.op1(OpKind::Embed { sym, mode, pred: None }, vec![q], Type::QBundle(width))
                })
            }
            ExprKind::Tensor(a, b) => {
                let (x, y) = (self.value(a)?, self.value(b)?);
                match (self.ty(x), self.ty(y)) {
                    (Type::Func(fa), Type::Func(fb)) => {
                        let output = match (&*fa.output, &*fb.output) {
                            (Type::QBundle(p), Type::QBundle(q)) => Type::QBundle(p + q),
                            (Type::BitBundle(p), Type::BitBundle(q)) => Type::BitBundle(p + q),
                            (Type::QBundle(0), t) | (t, Type::QBundle(0)) => t.clone(),
                            (p, q) => return Err(internal(span, format!("tensor of outputs {p} and {q}"))),
                        };
                        let (na, nb) = (fa.input, fb.input);
                        self.lambda(vec![x, y], na + nb, output, fa.rev && fb.rev, |lw, caps, q| {
                            let mut qs = lw.b.unpack(q);
                            let rest = qs.split_off(na);
                            let qa = lw.b.qpack(qs);
                            let qb = lw.b.qpack(rest);
                            let ra = lw.b.op1(OpKind::CallIndirect, vec![caps[0], qa], *fa.output.clone());
                            let rb = lw.b.op1(OpKind::CallIndirect, vec![caps[1], qb], *fb.output.clone());
                            lw.concat(ra, rb)
                        })
                    }
                    _ => self.concat(x, y),
                }
            }
            ExprKind::Translate(a, b) => {
                let (bi, bo) = (eval_basis(a)?, eval_basis(b)?);
                self.translation(&bi, &bo)
            }
            ExprKind::Pipe(x, f) => {
                let xv = self.value(x)?;
                let fv = self.value(f)?;
                let ft = self.func_type(fv);
                match self.ty(xv) {
                    Type::Func(f0) => self.lambda(vec![xv, fv], f0.input, *ft.output.clone(), f0.rev && ft.rev, |lw, caps, q| {
                        let mid = lw.b.op1(OpKind::CallIndirect, vec![caps[0], q], *f0.output.clone());
                        lw.b.op1(OpKind::CallIndirect, vec![caps[1], mid], *ft.output.clone())
                    }),
                    _ => self.b.op1(OpKind::CallIndirect, vec![fv, xv], *ft.output.clone()),
                }
            }
            ExprKind::Adjoint(f) => {
                let fv = self.value(f)?;
                let t = self.ty(fv);
                self.b.op1(OpKind::FuncAdj, vec![fv], t)
            }
            ExprKind::Pred(b, f) => {
                let basis = eval_basis(b)?;
                let fv = self.value(f)?;
                let n = self.func_type(fv).input + basis.dim();
                self.b.op1(OpKind::FuncPred { basis }, vec![fv], Type::func(n, Type::QBundle(n), true))
            }
            ExprKind::Measure(b) => {
                let basis = eval_basis(b)?.strip_phases();
                let n = basis.dim();
                self.lambda(vec![], n, Type::BitBundle(n), false, |lw, _, q| {
                    lw.b.op1(OpKind::QbMeas { basis }, vec![q], Type::BitBundle(n))
                })
            }
            ExprKind::Flip(b) => {
                let basis = eval_basis(b)?;
                let (b_in, b_out) = flip_bases(&basis).ok_or_else(|| internal(span, format!("cannot flip {basis}")))?;
                self.translation(&b_in, &b_out)
            }
            ExprKind::Cond { then, cond, otherwise } => {
                let c = self.value(cond)?;
                let bit = self.b.unpack(c)[0];
                let t = self.value(then)?;
                let o = self.value(otherwise)?;
                let ty = self.ty(t);
                let then_block = Block { args: vec![], ops: vec![], ret: vec![t] };
                let else_block = Block { args: vec![], ops: vec![], ret: vec![o] };
                self.b.op1(OpKind::Cond { then_block, else_block }, vec![bit], ty)
            }
            ExprKind::BasisLit(_) | ExprKind::Builtin(..) | ExprKind::Repeat(..) | ExprKind::Loop { .. } => {
                return Err(internal(span, "unexpected expression after expansion"))
            }
        };
        Ok(Lowered::Val(v))
    }
}

/// `b >> b'` where `b'` lists the two vectors of `b` in reverse order.
fn flip_bases(b: &Basis) -> Option<(Basis, Basis)> {
    let lit = match b.elements.as_slice() {
        [BasisElement::Builtin { prim: Prim::Fourier, dim: 1 }] => BasisLiteral::from_symbols(&["p", "m"]),
        [BasisElement::Builtin { prim, dim: 1 }] => {
            BasisLiteral::new(vec![BasisVector::new(*prim, vec![false]), BasisVector::new(*prim, vec![true])])
        }
        [BasisElement::Literal(l)] if l.len() == 2 && l.dim() == 1 => BasisLiteral::new(
            l.vectors.iter().map(|v| BasisVector { phase: None, ..v.clone() }).collect(),
        ),
        _ => return None,
    };
    let mut rev = lit.clone();
    rev.vectors.reverse();
    Some((Basis::literal(lit), Basis::literal(rev)))
}

fn lower_kernel(k: &QpuFn, sigs: &Signatures) -> LResult<Func> {
    let mut values = Values::default();
    let mut args = vec![];
    let mut env = HashMap::new();
    if let Some(p) = &k.param {
        let n = match &p.ty {
            TypeExpr::Qubit(DimExpr::Const(n)) => *n as usize,
            _ => return Err(internal(p.span, "unexpanded parameter type")),
        };
        let a = values.fresh(Type::QBundle(n));
        args.push(a);
        env.insert(p.name.clone(), a);
    }
    let mut lw = Lowerer { sigs, b: Builder::new(&mut values), env };
    for l in &k.lets {
        let v = lw.value(&l.value)?;
        if l.names.len() == 1 {
            lw.env.insert(l.names[0].0.clone(), v);
            continue;
        }
        let ty = lw.ty(v);
        let parts = lw.b.unpack(v);
        let chunk = parts.len() / l.names.len();
        for ((name, _), c) in l.names.iter().zip(parts.chunks(chunk)) {
            let packed = match ty {
                Type::QBundle(_) => lw.b.qpack(c.to_vec()),
                _ => lw.b.bpack(c.to_vec()),
            };
            lw.env.insert(name.clone(), packed);
        }
    }
    let ret = lw.value(&k.body)?;
    let ops = lw.b.ops;
    Ok(Func { name: k.name.clone(), rev: k.rev, body: Block { args, ops, ret: vec![ret] }, values })
}

/// Lowers every kernel of an expanded, checked and canonicalized program.
pub fn lower_program(p: &Program, sigs: &Signatures, entry: &str) -> LResult<Module> {
    let funcs = p.kernels.iter().map(|k| lower_kernel(k, sigs)).collect::<LResult<Vec<_>>>()?;
    let mut classicals = BTreeMap::new();
    for c in &p.classicals {
        classicals.insert(c.name.clone(), build_network(c)?);
    }
    Ok(Module { funcs, classicals, entry: entry.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::canon::canonicalize_ast;
    use crate::frontend::expand::expand;
    use crate::frontend::parser::parse;
    use crate::frontend::typecheck::typecheck;
    use crate::ir::verify::verify_module;

    pub(crate) fn lower_src(src: &str) -> Module {
        let p = expand(&parse(src).unwrap(), &BTreeMap::new()).unwrap();
        let sigs = typecheck(&p).unwrap();
        let p = canonicalize_ast(&p);
        lower_program(&p, &sigs, "main").unwrap()
    }

    fn ops_of(m: &Module, f: &str) -> Vec<&'static str> {
        let mut names = vec![];
        ir::walk_ops(&m.func(f).unwrap().body, &mut |op| names.push(op.kind.name()));
        names
    }

    #[test]
    fn pipe_is_indirect() {
        let m = lower_src("qpu main() -> bit[1] { '0' | std >> pm | std.measure }");
        verify_module(&m).unwrap();
        assert_eq!(ops_of(&m, "main"), ["qbprep", "lambda", "qbtrans", "call_indirect", "lambda", "qbmeas", "call_indirect"]);
    }

    #[test]
    fn conditional_yields_function() {
        let m = lower_src(
            "qpu main() -> bit[2] { let m = 'p' | std.measure; m + ('0' | (std.flip if m else id) | std.measure) }",
        );
        verify_module(&m).unwrap();
        assert!(ops_of(&m, "main").contains(&"cond"));
    }

    #[test]
    fn bv_lowers() {
        let m = lower_src(
            "classical f[N](x: bit[N]) -> bit captures(s: bit[N] = bit'1010') { (x & s).xor_reduce() }
             qpu kernel[N](q: qubit[N]) -> qubit[N] rev captures(s: bit[N] = bit'1010') { q | f[[N]].sign }
             qpu main() -> bit[4] { 'pppp' | kernel[[4]] | pm[4].measure }",
        );
        verify_module(&m).unwrap();
        assert!(m.classicals.contains_key("f__4"));
        assert_eq!(m.funcs.len(), 2);
    }
}
