//! Type checking of expanded programs: types, linear use of qubits,
//! reversibility, basis validity and span equivalence of translations.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use super::ast::*;
use super::classical::build_network;
use super::diag::{Diagnostic, Diagnostics};
use crate::basis::span::check_span_equivalence;
use crate::basis::{validate_literal, Basis, BasisElement, BasisLiteral, BasisVector, Prim};

type TResult<T> = Result<T, Diagnostic>;

#[derive(Clone, Debug, PartialEq)]
pub enum Ty {
    /// `Qubit(0)` is the empty result of a discard.
    Qubit(usize),
    Bit(usize),
    Basis(usize),
    Func { ins: usize, out: Box<Ty>, rev: bool },
}

impl Ty {
    fn func(ins: usize, out: Ty, rev: bool) -> Ty {
        Ty::Func { ins, out: Box::new(out), rev }
    }

    pub fn is_func(&self) -> bool {
        matches!(self, Ty::Func { .. })
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Ty::Qubit(n) => write!(f, "qubit[{n}]"),
            Ty::Bit(n) => write!(f, "bit[{n}]"),
            Ty::Basis(n) => write!(f, "basis[{n}]"),
            Ty::Func { ins, out, rev } => write!(f, "qubit[{ins}] -> {out}{}", if *rev { " rev" } else { "" }),
        }
    }
}

fn const_dim(d: &DimExpr, span: Span) -> TResult<usize> {
    match d {
        DimExpr::Const(n) if *n >= 0 => Ok(*n as usize),
        _ => Err(Diagnostic::error(span, "dimension is not a non-negative constant")),
    }
}

fn positive_dim(d: &DimExpr, span: Span, what: &str) -> TResult<usize> {
    let n = const_dim(d, span)?;
    if n == 0 {
        return Err(Diagnostic::error(span, format!("{what} must have at least one qubit")));
    }
    Ok(n)
}

pub fn eval_angle(a: &AngleExpr) -> Result<f64, String> {
    Ok(match a {
        AngleExpr::Num(x) => *x,
        AngleExpr::Pi => PI,
        AngleExpr::Var(v, _) => return Err(format!("unbound angle '{v}'")),
        AngleExpr::Neg(x) => -eval_angle(x)?,
        AngleExpr::Add(x, y) => eval_angle(x)? + eval_angle(y)?,
        AngleExpr::Sub(x, y) => eval_angle(x)? - eval_angle(y)?,
        AngleExpr::Mul(x, y) => eval_angle(x)? * eval_angle(y)?,
        AngleExpr::Div(x, y) => {
            let d = eval_angle(y)?;
            if d == 0.0 {
                return Err("division by zero in angle".into());
            }
            eval_angle(x)? / d
        }
    })
}

fn angle(a: &AngleExpr, span: Span) -> TResult<f64> {
    let v = eval_angle(a).map_err(|m| Diagnostic::error(span, m))?;
    if !v.is_finite() {
        return Err(Diagnostic::error(span, "angle is not finite"));
    }
    Ok(v)
}

/// The std/pm/ij runs of a qubit literal such as `'0p1'`.
pub fn literal_runs(s: &str, span: Span) -> TResult<Vec<(Prim, Vec<bool>)>> {
    if s.is_empty() {
        return Err(Diagnostic::error(span, "empty qubit literal"));
    }
    let mut runs: Vec<(Prim, Vec<bool>)> = Vec::new();
    for c in s.chars() {
        let (p, b) = Prim::from_symbol(c).ok_or_else(|| Diagnostic::error(span, format!("invalid qubit symbol '{c}'")))?;
        match runs.last_mut() {
            Some((q, bits)) if *q == p => bits.push(b),
            _ => runs.push((p, vec![b])),
        }
    }
    Ok(runs)
}

fn eval_vector(e: &Expr) -> TResult<BasisVector> {
    match &e.kind {
        ExprKind::Str(s) => {
            if s.is_empty() {
                return Err(Diagnostic::error(e.span, "empty basis vector"));
            }
            BasisVector::from_symbols(s)
                .ok_or_else(|| Diagnostic::error(e.span, format!("basis vector '{s}' must use a single primitive basis")))
        }
        ExprKind::Phase(v, a) => {
            let v = eval_vector(v)?;
            let theta = angle(a, e.span)? + v.phase.unwrap_or(0.0);
            Ok(v.with_phase(theta))
        }
        ExprKind::Tensor(a, b) => {
            let (a, b) = (eval_vector(a)?, eval_vector(b)?);
            if a.prim != b.prim {
                return Err(Diagnostic::error(e.span, format!("basis vector mixes {} and {}", a.prim, b.prim)));
            }
            let phase = match (a.phase, b.phase) {
                (None, None) => None,
                (x, y) => Some(x.unwrap_or(0.0) + y.unwrap_or(0.0)),
            };
            Ok(BasisVector { prim: a.prim, eigenbits: [a.eigenbits, b.eigenbits].concat(), phase })
        }
        _ => Err(Diagnostic::error(e.span, "expected a basis vector such as '01'")),
    }
}

fn push_element(out: &mut Vec<BasisElement>, e: BasisElement) {
    if let (Some(BasisElement::Builtin { prim: p, dim: d }), BasisElement::Builtin { prim, dim }) = (out.last_mut(), &e) {
        if p == prim && prim.separable() {
            *d += dim;
            return;
        }
    }
    out.push(e);
}

/// Evaluates a basis expression of an expanded program into canon form.
pub fn eval_basis(e: &Expr) -> TResult<Basis> {
    let mut elements = Vec::new();
    collect_elements(e, &mut elements)?;
    Ok(Basis::new(elements))
}

fn collect_elements(e: &Expr, out: &mut Vec<BasisElement>) -> TResult<()> {
    match &e.kind {
        ExprKind::Builtin(p, d) => {
            let n = positive_dim(d, e.span, "a built-in basis")?;
            push_element(out, BasisElement::builtin(*p, n));
        }
        ExprKind::BasisLit(vs) => {
            let vectors = vs.iter().map(eval_vector).collect::<TResult<Vec<_>>>()?;
            let lit = BasisLiteral::new(vectors);
            validate_literal(&lit).map_err(|err| Diagnostic::error(e.span, err.to_string()))?;
            out.push(BasisElement::Literal(lit));
        }
        ExprKind::Tensor(a, b) => {
            collect_elements(a, out)?;
            collect_elements(b, out)?;
        }
        ExprKind::Repeat(a, d) => {
            for _ in 0..positive_dim(d, e.span, "a repeated basis")? {
                collect_elements(a, out)?;
            }
        }
        _ => return Err(Diagnostic::error(e.span, "expected a basis")),
    }
    Ok(())
}

/// True for expressions that denote bases rather than values or functions.
pub fn is_basis_expr(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Builtin(..) | ExprKind::BasisLit(_) => true,
        ExprKind::Tensor(a, b) => is_basis_expr(a) || is_basis_expr(b),
        ExprKind::Repeat(a, _) => is_basis_expr(a),
        _ => false,
    }
}

/// Signatures of the callables a program defines.
pub struct Signatures {
    pub kernels: HashMap<String, Ty>,
    pub classicals: HashMap<String, (usize, usize)>,
}

impl Signatures {
    pub fn of(p: &Program) -> Result<Signatures, Diagnostics> {
        let mut errs = Vec::new();
        let mut kernels = HashMap::new();
        for k in &p.kernels {
            let ret = match &k.ret {
                TypeExpr::Qubit(d) => const_dim(d, k.span).map(Ty::Qubit),
                TypeExpr::Bit(d) => const_dim(d, k.span).map(Ty::Bit),
                TypeExpr::Angle => Err(Diagnostic::error(k.span, "kernels cannot return angles")),
            };
            let ins = match &k.param {
                None => Ok(None),
                Some(Param { ty: TypeExpr::Qubit(d), span, .. }) => positive_dim(d, *span, "a kernel parameter").map(Some),
                Some(p) => Err(Diagnostic::error(p.span, "kernel parameters must have type qubit[N]")),
            };
            match (ins, ret) {
                (Ok(Some(n)), Ok(ret)) => {
                    kernels.insert(k.name.clone(), Ty::func(n, ret, k.rev));
                }
                (Ok(None), Ok(ret)) => {
                    kernels.insert(k.name.clone(), ret);
                }
                (Err(e), _) | (_, Err(e)) => errs.push(e),
            }
        }
        let mut classicals = HashMap::new();
        for c in &p.classicals {
            match build_network(c) {
                Ok(net) => {
                    classicals.insert(c.name.clone(), (net.num_inputs, net.outputs.len()));
                }
                Err(e) => errs.push(e),
            }
        }
        if errs.is_empty() {
            Ok(Signatures { kernels, classicals })
        } else {
            Err(errs)
        }
    }
}

struct Local {
    ty: Ty,
    uses: usize,
    span: Span,
}

/// Infers expression types within one kernel.
pub struct Checker<'a> {
    sigs: &'a Signatures,
    rev: bool,
    locals: HashMap<String, Local>,
}

impl<'a> Checker<'a> {
    pub fn new(sigs: &'a Signatures, rev: bool) -> Self {
        Checker { sigs, rev, locals: HashMap::new() }
    }

    pub fn bind(&mut self, name: &str, ty: Ty, span: Span) -> TResult<()> {
        if self.locals.contains_key(name) {
            return Err(Diagnostic::error(span, format!("'{name}' is already defined")));
        }
        self.locals.insert(name.to_string(), Local { ty, uses: 0, span });
        Ok(())
    }

    fn irreversible(&self, span: Span, what: &str) -> TResult<()> {
        if self.rev {
            return Err(Diagnostic::error(span, format!("{what} is not allowed in a reversible kernel")));
        }
        Ok(())
    }

    fn expect_func(&self, t: Ty, span: Span, what: &str) -> TResult<(usize, Ty, bool)> {
        match t {
            Ty::Func { ins, out, rev } => Ok((ins, *out, rev)),
            other => Err(Diagnostic::error(span, format!("{what} must be a function, not {other}"))),
        }
    }

    /// `qubit[N] -> qubit[N] rev`, as required by `~f` and `b & f`.
    fn expect_rev_endo(&self, t: Ty, span: Span, op: &str) -> TResult<usize> {
        let (ins, out, rev) = self.expect_func(t.clone(), span, &format!("the operand of {op}"))?;
        if !rev || out != Ty::Qubit(ins) {
            return Err(Diagnostic::error(
                span,
                format!("the operand of {op} must have type qubit[N] -> qubit[N] rev, not {t}"),
            ));
        }
        Ok(ins)
    }

    pub fn infer(&mut self, e: &Expr) -> TResult<Ty> {
        let span = e.span;
        match &e.kind {
            ExprKind::Str(s) => {
                self.irreversible(span, "preparing a qubit literal")?;
                let n: usize = literal_runs(s, span)?.iter().map(|(_, b)| b.len()).sum();
                Ok(Ty::Qubit(n))
            }
            ExprKind::Phase(inner, a) => match &inner.kind {
                ExprKind::Str(_) => {
                    angle(a, span)?;
                    self.infer(inner)
                }
                _ => Err(Diagnostic::error(span, "phases attach only to qubit literals and basis vectors")),
            },
            ExprKind::BasisLit(_) | ExprKind::Builtin(..) => Ok(Ty::Basis(eval_basis(e)?.dim())),
            ExprKind::Id(d) => Ok(Ty::func(positive_dim(d, span, "id")?, Ty::Qubit(const_dim(d, span)?), true)),
            ExprKind::Discard(d) | ExprKind::DiscardZ(d) => {
                self.irreversible(span, "discarding qubits")?;
                Ok(Ty::func(positive_dim(d, span, "discard")?, Ty::Qubit(0), false))
            }
            ExprKind::Var(v) => {
                let l = self.locals.get_mut(v).ok_or_else(|| Diagnostic::error(span, format!("unknown name '{v}'")))?;
                l.uses += 1;
                if matches!(l.ty, Ty::Qubit(n) if n > 0) && l.uses > 1 {
                    return Err(Diagnostic::error(span, format!("qubit '{v}' is used more than once")));
                }
                Ok(l.ty.clone())
            }
            ExprKind::FnRef(name, _) => match self.sigs.kernels.get(name) {
                Some(t @ Ty::Func { .. }) => Ok(t.clone()),
                Some(_) => Err(Diagnostic::error(span, format!("kernel '{name}' takes no argument and is not a function"))),
                None => Err(Diagnostic::error(span, format!("unknown kernel '{name}'"))),
            },
            ExprKind::Embed(name, _, mode) => {
                let &(n, k) = self
                    .sigs
                    .classicals
                    .get(name)
                    .ok_or_else(|| Diagnostic::error(span, format!("unknown classical function '{name}'")))?;
                match mode {
                    EmbedMode::Xor => Ok(Ty::func(n + k, Ty::Qubit(n + k), true)),
                    EmbedMode::Sign if k == 1 => Ok(Ty::func(n, Ty::Qubit(n), true)),
                    EmbedMode::Sign => Err(Diagnostic::error(
                        span,
                        format!("'.sign' needs a function returning one bit, but it returns bit[{k}]"),
                    )),
                }
            }
            ExprKind::Tensor(a, b) => {
                let (ta, tb) = (self.infer(a)?, self.infer(b)?);
                match (ta, tb) {
                    (Ty::Basis(x), Ty::Basis(y)) => Ok(Ty::Basis(x + y)),
                    (Ty::Qubit(x), Ty::Qubit(y)) => Ok(Ty::Qubit(x + y)),
                    (Ty::Bit(x), Ty::Bit(y)) => Ok(Ty::Bit(x + y)),
                    (Ty::Qubit(0), t @ Ty::Bit(_)) | (t @ Ty::Bit(_), Ty::Qubit(0)) => Ok(t),
                    (Ty::Func { ins: i1, out: o1, rev: r1 }, Ty::Func { ins: i2, out: o2, rev: r2 }) => {
                        let out = match (*o1, *o2) {
                            (Ty::Qubit(x), Ty::Qubit(y)) => Ty::Qubit(x + y),
                            (Ty::Bit(x), Ty::Bit(y)) => Ty::Bit(x + y),
                            (Ty::Qubit(0), t) | (t, Ty::Qubit(0)) => t,
                            (x, y) => {
                                return Err(Diagnostic::error(span, format!("cannot combine outputs {x} and {y} in a tensor product")))
                            }
                        };
                        Ok(Ty::func(i1 + i2, out, r1 && r2))
                    }
                    (x, y) => Err(Diagnostic::error(span, format!("cannot take the tensor product of {x} and {y}"))),
                }
            }
            ExprKind::Repeat(..) | ExprKind::Loop { .. } => Err(Diagnostic::error(span, "internal: unexpanded repetition")),
            ExprKind::Translate(a, b) => {
                let (bi, bo) = (eval_basis(a)?, eval_basis(b)?);
                if bi.dim() != bo.dim() {
                    return Err(Diagnostic::error(
                        span,
                        format!("translation between bases of {} and {} qubits", bi.dim(), bo.dim()),
                    ));
                }
                check_span_equivalence(&bi, &bo)
                    .map_err(|err| Diagnostic::error(span, format!("translation {bi} >> {bo} does not preserve span: {err}")))?;
                Ok(Ty::func(bi.dim(), Ty::Qubit(bi.dim()), true))
            }
            ExprKind::Pipe(x, f) => {
                let tx = self.infer(x)?;
                let tf = self.infer(f)?;
                let (ins, out, rev) = self.expect_func(tf, f.span, "the right side of '|'")?;
                if self.rev && !rev {
                    return Err(Diagnostic::error(f.span, "reversible kernels may only apply reversible functions"));
                }
                match tx {
                    Ty::Qubit(n) if n == ins => Ok(out),
                    Ty::Func { ins: i0, out: o0, rev: r0 } => match *o0 {
                        Ty::Qubit(n) if n == ins => Ok(Ty::func(i0, out, r0 && rev)),
                        o => Err(Diagnostic::error(span, format!("cannot compose a function returning {o} with one taking qubit[{ins}]"))),
                    },
                    t => Err(Diagnostic::error(span, format!("function expects qubit[{ins}] but got {t}"))),
                }
            }
            ExprKind::Adjoint(f) => {
                let t = self.infer(f)?;
                let n = self.expect_rev_endo(t, f.span, "'~'")?;
                Ok(Ty::func(n, Ty::Qubit(n), true))
            }
            ExprKind::Pred(b, f) => {
                let basis = eval_basis(b)?;
                if basis.has_phases() {
                    return Err(Diagnostic::error(b.span, "predicate bases cannot carry phases"));
                }
                let t = self.infer(f)?;
                let n = self.expect_rev_endo(t, f.span, "'&'")? + basis.dim();
                Ok(Ty::func(n, Ty::Qubit(n), true))
            }
            ExprKind::Measure(b) => {
                self.irreversible(span, "measurement")?;
                let basis = eval_basis(b)?;
                if !basis.fully_spans() {
                    return Err(Diagnostic::error(b.span, format!("measurement basis {basis} does not fully span")));
                }
                Ok(Ty::func(basis.dim(), Ty::Bit(basis.dim()), false))
            }
            ExprKind::Flip(b) => {
                let basis = eval_basis(b)?;
                if basis.dim() != 1 || !basis.fully_spans() {
                    return Err(Diagnostic::error(b.span, format!(".flip needs a one-qubit basis with two vectors, not {basis}")));
                }
                Ok(Ty::func(1, Ty::Qubit(1), true))
            }
            ExprKind::Cond { then, cond, otherwise } => {
                self.irreversible(span, "a classical conditional")?;
                match self.infer(cond)? {
                    Ty::Bit(1) => {}
                    t => return Err(Diagnostic::error(cond.span, format!("condition must be bit[1], not {t}"))),
                }
                let t1 = self.infer(then)?;
                let t2 = self.infer(otherwise)?;
                let (i1, o1, _) = self.expect_func(t1, then.span, "a conditional branch")?;
                let (i2, o2, _) = self.expect_func(t2, otherwise.span, "a conditional branch")?;
                if i1 != i2 || o1 != o2 {
                    let (a, b) = (Ty::func(i1, o1, false), Ty::func(i2, o2, false));
                    return Err(Diagnostic::error(span, format!("conditional branches have different types: {a} and {b}")));
                }
                Ok(Ty::func(i1, o1, false))
            }
        }
    }

    /// Reports qubit variables that were never consumed.
    fn unused(&self) -> Diagnostics {
        let mut out: Vec<(&String, &Local)> =
            self.locals.iter().filter(|(_, l)| matches!(l.ty, Ty::Qubit(n) if n > 0) && l.uses == 0).collect();
        out.sort_by_key(|(n, l)| (l.span.line, l.span.col, n.to_string()));
        out.into_iter()
            .map(|(n, l)| Diagnostic::error(l.span, format!("qubit '{n}' is never used; discard it explicitly")))
            .collect()
    }
}

/// The declared result type of a kernel.
fn declared_ret(k: &QpuFn) -> TResult<Ty> {
    match &k.ret {
        TypeExpr::Qubit(d) => Ok(Ty::Qubit(const_dim(d, k.span)?)),
        TypeExpr::Bit(d) => Ok(Ty::Bit(const_dim(d, k.span)?)),
        TypeExpr::Angle => Err(Diagnostic::error(k.span, "kernels cannot return angles")),
    }
}

/// Splits a let-bound type among `k` names.
pub fn split_type(t: &Ty, k: usize, span: Span) -> TResult<Ty> {
    if k == 1 {
        return match t {
            Ty::Basis(_) => Err(Diagnostic::error(span, "bases are not values; use them in a translation or measurement")),
            t => Ok(t.clone()),
        };
    }
    match t {
        Ty::Qubit(n) if n % k == 0 => Ok(Ty::Qubit(n / k)),
        Ty::Bit(n) if n % k == 0 => Ok(Ty::Bit(n / k)),
        Ty::Qubit(_) | Ty::Bit(_) => Err(Diagnostic::error(span, format!("cannot split {t} evenly among {k} names"))),
        t => Err(Diagnostic::error(span, format!("only qubits and bits can be unpacked, not {t}"))),
    }
}

fn check_kernel(k: &QpuFn, sigs: &Signatures) -> TResult<Diagnostics> {
    let mut ck = Checker::new(sigs, k.rev);
    if let Some(p) = &k.param {
        match &p.ty {
            TypeExpr::Qubit(d) => ck.bind(&p.name, Ty::Qubit(const_dim(d, p.span)?), p.span)?,
            _ => return Err(Diagnostic::error(p.span, "kernel parameters must have type qubit[N]")),
        }
    }
    for l in &k.lets {
        let t = ck.infer(&l.value)?;
        let part = split_type(&t, l.names.len(), l.value.span)?;
        for (n, sp) in &l.names {
            ck.bind(n, part.clone(), *sp)?;
        }
    }
    let t = ck.infer(&k.body)?;
    let want = declared_ret(k)?;
    if t != want {
        return Err(Diagnostic::error(k.body.span, format!("'{}' returns {want} but its body has type {t}", k.name)));
    }
    Ok(ck.unused())
}

/// Checks an expanded program.
pub fn typecheck(p: &Program) -> Result<Signatures, Diagnostics> {
    let sigs = Signatures::of(p)?;
    let mut errs = Vec::new();
    for k in &p.kernels {
        match check_kernel(k, &sigs) {
            Ok(d) => errs.extend(d),
            Err(e) => errs.push(e),
        }
    }
    if errs.is_empty() {
        Ok(sigs)
    } else {
        Err(errs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::expand::expand;
    use crate::frontend::parser::parse;
    use std::collections::BTreeMap;

    fn check(src: &str) -> Result<(), String> {
        let p = parse(src).map_err(|d| d.message)?;
        let p = expand(&p, &BTreeMap::new()).map_err(|d| d[0].message.clone())?;
        typecheck(&p).map(|_| ()).map_err(|d| d.iter().map(|x| x.message.clone()).collect::<Vec<_>>().join("; "))
    }

    fn main_body(body: &str, ret: &str) -> String {
        format!("qpu main() -> {ret} {{ {body} }}")
    }

    #[test]
    fn translations() {
        check(&main_body("'01' | {'01','10'} >> {'10','01'} | std[2].measure", "bit[2]")).unwrap();
        let e = check(&main_body("'00' | std + {'0'} >> {'0'} + std | std[2].measure", "bit[2]")).unwrap_err();
        assert!(e.contains("does not preserve span"), "{e}");
        let e = check(&main_body("'0' | {'0','0'} >> std | std.measure", "bit[1]")).unwrap_err();
        assert!(e.contains("duplicate eigenbits"), "{e}");
        let e = check(&main_body("'0' | {'0','11'} >> std | std.measure", "bit[1]")).unwrap_err();
        assert!(e.contains("dimension mismatch"), "{e}");
    }

    #[test]
    fn span_check_scales() {
        let t = std::time::Instant::now();
        check(&main_body("'0'[64] | {'0','1'}[64] >> {'1','0'}[64] | std[64].measure", "bit[64]")).unwrap();
        assert!(t.elapsed().as_secs_f64() < 1.0);
    }

    #[test]
    fn linearity() {
        let src = "qpu main() -> bit[2] { let x = '0'; x + x | std[2].measure }";
        assert!(check(src).unwrap_err().contains("used more than once"));
        let src = "qpu main() -> bit[1] { let x, y = '01'; x | std.measure }";
        assert!(check(src).unwrap_err().contains("'y' is never used"));
        let src = "qpu main() -> bit[1] { let x, y = '01'; (x | std.measure) + (y | discard) }";
        check(src).unwrap();
    }

    #[test]
    fn reversibility() {
        let src = "qpu f(q: qubit[1]) -> qubit[1] rev { q | std.measure }
                   qpu main() -> bit[1] { '0' | f | std.measure }";
        assert!(check(src).unwrap_err().contains("not allowed in a reversible kernel"));
        let src = "qpu g(q: qubit[1]) -> qubit[1] { q | std >> pm }
                   qpu f(q: qubit[1]) -> qubit[1] rev { q | g }
                   qpu main() -> bit[1] { '0' | f | std.measure }";
        assert!(check(src).unwrap_err().contains("only apply reversible"));
        let src = "qpu g(q: qubit[1]) -> qubit[1] { q | std >> pm }
                   qpu main() -> bit[1] { '0' | ~g | std.measure }";
        assert!(check(src).unwrap_err().contains("qubit[N] -> qubit[N] rev"));
    }

    #[test]
    fn function_types() {
        let src = "classical f(x: bit[2]) -> bit { x[0] & x[1] }
                   qpu main() -> bit[3] { 'pp' + '0' | ({'1'} & f.xor) + id | std[3].measure }";
        let e = check(src).unwrap_err();
        assert!(e.contains("expects qubit[5] but got qubit[3]"), "{e}");
        let src = "classical f(x: bit[2]) -> bit { x[0] & x[1] }
                   qpu main() -> bit[3] { 'pp' + '0' | f.xor | std[3].measure }";
        check(src).unwrap();
        let src = "qpu main() -> bit[2] { let m = 'p' | std.measure; '0' | (std.flip if m else id) | std.measure }";
        assert!(check(src).unwrap_err().contains("returns bit[2]"));
        let src = "qpu main() -> bit[2] { let m = 'p' | std.measure; m + ('0' | (std.flip if m else id) | std.measure) }";
        check(src).unwrap();
        let src = "qpu main() -> bit[1] { let m = 'p' | std.measure; '0' | (std.flip if m else '1') | std.measure }";
        assert!(check(src).unwrap_err().contains("must be a function"));
    }

    #[test]
    fn bases() {
        assert!(check(&main_body("'0' | std.flip | {'0'}.measure", "bit[1]")).unwrap_err().contains("does not fully span"));
        assert!(check(&main_body("'0' | std[2].flip | std.measure", "bit[1]")).is_err());
        let e = check(&main_body("'0' | {'0'@pi} & id | std.measure", "bit[1]")).unwrap_err();
        assert!(e.contains("cannot carry phases"), "{e}");
        let b = eval_basis(&crate::frontend::parser::parse_expr("std + std + {'0'@(pi/2) + '1', '11'} + fourier[2]").unwrap())
            .unwrap();
        assert_eq!(b.to_string(), "std[2] + {'01'@1.5707963267948966,'11'} + fourier[2]");
    }
}
