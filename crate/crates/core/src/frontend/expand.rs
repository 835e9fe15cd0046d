//! Dimension-variable expansion.
//!
//! Every kernel and classical function reachable from `main` is instantiated
//! once per distinct binding of its dimension variables. Instances other than
//! the entry get mangled names (`f__4`). Repeats become tensors, loops become
//! pipelines, and bare kernel names become resolved references.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::diag::{Diagnostic, Diagnostics};

pub const ENTRY: &str = "main";

/// Largest dimension or repeat count accepted.
pub const MAX_DIM: i64 = 4096;

type EResult<T> = Result<T, Diagnostic>;

pub fn eval_dim(d: &DimExpr, env: &HashMap<String, i64>) -> EResult<i64> {
    let v = match d {
        DimExpr::Const(n) => *n,
        DimExpr::Var(v, sp) => {
            *env.get(v).ok_or_else(|| Diagnostic::error(*sp, format!("unbound dimension variable '{v}'")))?
        }
        DimExpr::Add(a, b) => eval_dim(a, env)? + eval_dim(b, env)?,
        DimExpr::Sub(a, b) => eval_dim(a, env)? - eval_dim(b, env)?,
        DimExpr::Mul(a, b) => eval_dim(a, env)?.saturating_mul(eval_dim(b, env)?),
    };
    Ok(v)
}

fn mangle(name: &str, vals: &[i64]) -> String {
    if name == ENTRY || vals.is_empty() {
        return name.to_string();
    }
    let parts: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
    format!("{name}__{}", parts.join("_"))
}

enum Bound<'a> {
    Positional(&'a [i64], Span),
    Named(&'a BTreeMap<String, i64>),
}

/// Binds every dimension variable of a function.
fn bind_dims(
    fname: &str,
    fspan: Span,
    dims: &[DimVar],
    captures: &[Capture],
    given: Bound,
) -> EResult<HashMap<String, i64>> {
    let mut env = HashMap::new();
    if let Bound::Positional(vals, sp) = given {
        if vals.len() != dims.len() {
            return Err(Diagnostic::error(
                sp,
                format!("'{fname}' takes {} dimension argument(s), got {}", dims.len(), vals.len()),
            ));
        }
    }
    for (i, dv) in dims.iter().enumerate() {
        let explicit = match &given {
            Bound::Positional(vals, _) => Some(vals[i]),
            Bound::Named(m) => m.get(&dv.name).copied(),
        };
        let inferred = captures.iter().find_map(|c| match (&c.ty, &c.value) {
            (TypeExpr::Bit(DimExpr::Var(v, _)), CaptureValue::Bits(b)) if *v == dv.name => Some((b.len() as i64, &c.name)),
            _ => None,
        });
        let value = match (explicit, inferred) {
            (Some(x), Some((y, cap))) if x != y => {
                let sp = match given {
                    Bound::Positional(_, sp) => sp,
                    Bound::Named(_) => dv.span,
                };
                return Err(Diagnostic::error(
                    sp,
                    format!("dimension {} of '{fname}' is bound to {x}, but capture '{cap}' has {y} bits", dv.name),
                ));
            }
            (Some(x), _) => x,
            (None, Some((y, _))) => y,
            (None, None) => match &dv.default {
                Some(d) => eval_dim(d, &env)?,
                None => {
                    return Err(Diagnostic::error(
                        fspan,
                        format!("cannot determine dimension {} of '{fname}'; bind it explicitly", dv.name),
                    ))
                }
            },
        };
        if !(0..=MAX_DIM).contains(&value) {
            return Err(Diagnostic::error(dv.span, format!("dimension {} = {value} is out of range", dv.name)));
        }
        env.insert(dv.name.clone(), value);
    }
    Ok(env)
}

fn resolve_type(t: &TypeExpr, env: &HashMap<String, i64>) -> EResult<TypeExpr> {
    Ok(match t {
        TypeExpr::Qubit(d) => TypeExpr::Qubit(DimExpr::Const(eval_dim(d, env)?)),
        TypeExpr::Bit(d) => TypeExpr::Bit(DimExpr::Const(eval_dim(d, env)?)),
        TypeExpr::Angle => TypeExpr::Angle,
    })
}

fn subst_angle(a: &AngleExpr, dims: &HashMap<String, i64>, angles: &HashMap<String, AngleExpr>) -> EResult<AngleExpr> {
    let s = |x: &AngleExpr| subst_angle(x, dims, angles).map(Box::new);
    Ok(match a {
        AngleExpr::Num(_) | AngleExpr::Pi => a.clone(),
        AngleExpr::Var(v, sp) => match (angles.get(v), dims.get(v)) {
            (Some(x), _) => x.clone(),
            (None, Some(n)) => AngleExpr::Num(*n as f64),
            (None, None) => return Err(Diagnostic::error(*sp, format!("unknown angle '{v}'"))),
        },
        AngleExpr::Neg(x) => AngleExpr::Neg(s(x)?),
        AngleExpr::Add(x, y) => AngleExpr::Add(s(x)?, s(y)?),
        AngleExpr::Sub(x, y) => AngleExpr::Sub(s(x)?, s(y)?),
        AngleExpr::Mul(x, y) => AngleExpr::Mul(s(x)?, s(y)?),
        AngleExpr::Div(x, y) => AngleExpr::Div(s(x)?, s(y)?),
    })
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Qpu,
    Classical,
}

struct Expander<'p> {
    prog: &'p Program,
    done: BTreeSet<(Kind, String)>,
    queue: Vec<(Kind, String, String, Vec<i64>, Span)>,
    out: Program,
}

struct Scope {
    dims: HashMap<String, i64>,
    angles: HashMap<String, AngleExpr>,
    locals: BTreeSet<String>,
}

impl Expander<'_> {
    fn dim_values(&self, ds: &[DimExpr], sc: &Scope) -> EResult<Vec<i64>> {
        ds.iter().map(|d| eval_dim(d, &sc.dims)).collect()
    }

    /// Resolves a reference to a kernel or classical function and queues
    /// its instance.
    fn request(&mut self, kind: Kind, name: &str, dims: Vec<i64>, explicit: bool, span: Span) -> EResult<String> {
        let (fdims, fcaps, fspan) = match kind {
            Kind::Qpu => {
                let k = self.prog.kernel(name).ok_or_else(|| Diagnostic::error(span, format!("unknown kernel '{name}'")))?;
                (&k.dims, &k.captures, k.span)
            }
            Kind::Classical => {
                let c = self
                    .prog
                    .classical(name)
                    .ok_or_else(|| Diagnostic::error(span, format!("unknown classical function '{name}'")))?;
                (&c.dims, &c.captures, c.span)
            }
        };
        let env = if explicit {
            bind_dims(name, fspan, fdims, fcaps, Bound::Positional(&dims, span))?
        } else {
            let empty = BTreeMap::new();
            bind_dims(name, span, fdims, fcaps, Bound::Named(&empty))?
        };
        let vals: Vec<i64> = fdims.iter().map(|d| env[&d.name]).collect();
        let mangled = mangle(name, &vals);
        if !self.done.contains(&(kind, mangled.clone())) {
            self.done.insert((kind, mangled.clone()));
            self.queue.push((kind, name.to_string(), mangled.clone(), vals, span));
        }
        Ok(mangled)
    }

    fn expr(&mut self, e: &Expr, sc: &mut Scope) -> EResult<Expr> {
        let span = e.span;
        let mk = |k| Ok(Expr::new(k, span));
        let dim = |d: &DimExpr, sc: &Scope| -> EResult<DimExpr> { Ok(DimExpr::Const(eval_dim(d, &sc.dims)?)) };
        match &e.kind {
            ExprKind::Str(_) => mk(e.kind.clone()),
            ExprKind::BasisLit(vs) => {
                let vs = vs.iter().map(|v| self.expr(v, sc)).collect::<EResult<_>>()?;
                mk(ExprKind::BasisLit(vs))
            }
            ExprKind::Builtin(p, d) => mk(ExprKind::Builtin(*p, dim(d, sc)?)),
            ExprKind::Id(d) => mk(ExprKind::Id(dim(d, sc)?)),
            ExprKind::Discard(d) => mk(ExprKind::Discard(dim(d, sc)?)),
            ExprKind::DiscardZ(d) => mk(ExprKind::DiscardZ(dim(d, sc)?)),
            ExprKind::Var(v) => {
                if sc.locals.contains(v) {
                    mk(ExprKind::Var(v.clone()))
                } else if self.prog.kernel(v).is_some() {
                    let m = self.request(Kind::Qpu, v, vec![], false, span)?;
                    mk(ExprKind::FnRef(m, vec![]))
                } else if self.prog.classical(v).is_some() {
                    Err(Diagnostic::error(span, format!("classical function '{v}' must be embedded with .xor or .sign")))
                } else {
                    Err(Diagnostic::error(span, format!("unknown name '{v}'")))
                }
            }
            ExprKind::FnRef(n, ds) => {
                let vals = self.dim_values(ds, sc)?;
                let m = self.request(Kind::Qpu, n, vals, true, span)?;
                mk(ExprKind::FnRef(m, vec![]))
            }
            ExprKind::Embed(n, ds, mode) => {
                let vals = self.dim_values(ds, sc)?;
                let m = self.request(Kind::Classical, n, vals, !ds.is_empty(), span)?;
                mk(ExprKind::Embed(m, vec![], *mode))
            }
            ExprKind::Repeat(a, d) => {
                let n = eval_dim(d, &sc.dims)?;
                if !(1..=MAX_DIM).contains(&n) {
                    return Err(Diagnostic::error(span, format!("repeat count {n} must be between 1 and {MAX_DIM}")));
                }
                let a = self.expr(a, sc)?;
                let mut acc = a.clone();
                for _ in 1..n {
                    acc = Expr::new(ExprKind::Tensor(Box::new(acc), Box::new(a.clone())), span);
                }
                Ok(acc)
            }
            ExprKind::Loop { body, var, count } => {
                let n = eval_dim(count, &sc.dims)?;
                if !(1..=MAX_DIM).contains(&n) {
                    return Err(Diagnostic::error(span, format!("loop count {n} must be between 1 and {MAX_DIM}")));
                }
                let saved = sc.dims.get(var).copied();
                let mut acc: Option<Expr> = None;
                for i in 0..n {
                    sc.dims.insert(var.clone(), i);
                    let b = self.expr(body, sc)?;
                    acc = Some(match acc {
                        None => b,
                        Some(prev) => Expr::new(ExprKind::Pipe(Box::new(prev), Box::new(b)), span),
                    });
                }
                match saved {
                    Some(v) => sc.dims.insert(var.clone(), v),
                    None => sc.dims.remove(var),
                };
                Ok(acc.unwrap())
            }
            ExprKind::Phase(a, t) => {
                let a = self.expr(a, sc)?;
                mk(ExprKind::Phase(Box::new(a), subst_angle(t, &sc.dims, &sc.angles)?))
            }
            ExprKind::Tensor(a, b) => mk(ExprKind::Tensor(Box::new(self.expr(a, sc)?), Box::new(self.expr(b, sc)?))),
            ExprKind::Translate(a, b) => {
                mk(ExprKind::Translate(Box::new(self.expr(a, sc)?), Box::new(self.expr(b, sc)?)))
            }
            ExprKind::Pipe(a, b) => mk(ExprKind::Pipe(Box::new(self.expr(a, sc)?), Box::new(self.expr(b, sc)?))),
            ExprKind::Pred(a, b) => mk(ExprKind::Pred(Box::new(self.expr(a, sc)?), Box::new(self.expr(b, sc)?))),
            ExprKind::Adjoint(a) => mk(ExprKind::Adjoint(Box::new(self.expr(a, sc)?))),
            ExprKind::Measure(a) => mk(ExprKind::Measure(Box::new(self.expr(a, sc)?))),
            ExprKind::Flip(a) => mk(ExprKind::Flip(Box::new(self.expr(a, sc)?))),
            ExprKind::Cond { then, cond, otherwise } => mk(ExprKind::Cond {
                then: Box::new(self.expr(then, sc)?),
                cond: Box::new(self.expr(cond, sc)?),
                otherwise: Box::new(self.expr(otherwise, sc)?),
            }),
        }
    }

    fn cexpr(&self, e: &CExpr, env: &HashMap<String, i64>) -> EResult<CExpr> {
        let span = e.span;
        let d = |x: &DimExpr| -> EResult<DimExpr> { Ok(DimExpr::Const(eval_dim(x, env)?)) };
        let b = |x: &CExpr| self.cexpr(x, env).map(Box::new);
        let kind = match &e.kind {
            CExprKind::Var(_) | CExprKind::Bits(_) => e.kind.clone(),
            CExprKind::Not(a) => CExprKind::Not(b(a)?),
            CExprKind::Bin(op, x, y) => CExprKind::Bin(*op, b(x)?, b(y)?),
            CExprKind::Concat(x, y) => CExprKind::Concat(b(x)?, b(y)?),
            CExprKind::Index(x, i) => CExprKind::Index(b(x)?, d(i)?),
            CExprKind::Slice(x, lo, hi) => CExprKind::Slice(b(x)?, d(lo)?, d(hi)?),
            CExprKind::Reduce(r, x) => CExprKind::Reduce(*r, b(x)?),
            CExprKind::Repeat(x, n) => CExprKind::Repeat(b(x)?, d(n)?),
        };
        Ok(CExpr::new(kind, span))
    }

    fn captures(&self, cs: &[Capture], env: &HashMap<String, i64>, fname: &str) -> EResult<Vec<Capture>> {
        let mut out = Vec::new();
        let mut angles = HashMap::new();
        for c in cs {
            let ty = resolve_type(&c.ty, env)?;
            let value = match &c.value {
                CaptureValue::Bits(b) => CaptureValue::Bits(b.clone()),
                CaptureValue::Angle(a) => CaptureValue::Angle(subst_angle(a, env, &angles)?),
            };
            if let (TypeExpr::Bit(DimExpr::Const(n)), CaptureValue::Bits(b)) = (&ty, &value) {
                if *n != b.len() as i64 {
                    return Err(Diagnostic::error(
                        c.span,
                        format!("capture '{}' of '{fname}' is declared with {n} bits but has {}", c.name, b.len()),
                    ));
                }
            }
            if let CaptureValue::Angle(a) = &value {
                angles.insert(c.name.clone(), a.clone());
            }
            out.push(Capture { ty, value, ..c.clone() });
        }
        Ok(out)
    }

    fn kernel(&mut self, k: &QpuFn, mangled: String, env: HashMap<String, i64>) -> EResult<QpuFn> {
        let captures = self.captures(&k.captures, &env, &k.name)?;
        let angles: HashMap<String, AngleExpr> = captures
            .iter()
            .filter_map(|c| match &c.value {
                CaptureValue::Angle(a) => Some((c.name.clone(), a.clone())),
                _ => None,
            })
            .collect();
        let mut sc = Scope { dims: env, angles, locals: BTreeSet::new() };
        let param = match &k.param {
            Some(p) => {
                sc.locals.insert(p.name.clone());
                Some(Param { ty: resolve_type(&p.ty, &sc.dims)?, ..p.clone() })
            }
            None => None,
        };
        let mut lets = Vec::new();
        for l in &k.lets {
            let value = self.expr(&l.value, &mut sc)?;
            for (n, _) in &l.names {
                sc.locals.insert(n.clone());
            }
            lets.push(Let { names: l.names.clone(), value });
        }
        let body = self.expr(&k.body, &mut sc)?;
        Ok(QpuFn {
            name: mangled,
            dims: vec![],
            param,
            ret: resolve_type(&k.ret, &sc.dims)?,
            rev: k.rev,
            captures,
            lets,
            body,
            span: k.span,
        })
    }

    fn classical(&mut self, c: &ClassicalFn, mangled: String, env: HashMap<String, i64>) -> EResult<ClassicalFn> {
        Ok(ClassicalFn {
            name: mangled,
            dims: vec![],
            params: c
                .params
                .iter()
                .map(|p| Ok(Param { ty: resolve_type(&p.ty, &env)?, ..p.clone() }))
                .collect::<EResult<_>>()?,
            ret: resolve_type(&c.ret, &env)?,
            captures: self.captures(&c.captures, &env, &c.name)?,
            body: self.cexpr(&c.body, &env)?,
            span: c.span,
        })
    }
}

fn referenced_kernels(e: &Expr, out: &mut BTreeSet<String>) {
    match &e.kind {
        ExprKind::Var(n) | ExprKind::FnRef(n, _) => {
            out.insert(n.clone());
        }
        ExprKind::BasisLit(vs) => vs.iter().for_each(|v| referenced_kernels(v, out)),
        ExprKind::Tensor(a, b) | ExprKind::Translate(a, b) | ExprKind::Pipe(a, b) | ExprKind::Pred(a, b) => {
            referenced_kernels(a, out);
            referenced_kernels(b, out);
        }
        ExprKind::Repeat(a, _)
        | ExprKind::Adjoint(a)
        | ExprKind::Measure(a)
        | ExprKind::Flip(a)
        | ExprKind::Phase(a, _)
        | ExprKind::Loop { body: a, .. } => referenced_kernels(a, out),
        ExprKind::Cond { then, cond, otherwise } => {
            referenced_kernels(then, out);
            referenced_kernels(cond, out);
            referenced_kernels(otherwise, out);
        }
        _ => {}
    }
}

/// Rejects duplicate names and recursive kernels.
pub fn check_declarations(p: &Program) -> Diagnostics {
    let mut diags = Vec::new();
    let mut seen = BTreeSet::new();
    for (name, span) in p.kernels.iter().map(|k| (&k.name, k.span)).chain(p.classicals.iter().map(|c| (&c.name, c.span))) {
        if !seen.insert(name.clone()) {
            diags.push(Diagnostic::error(span, format!("'{name}' is defined more than once")));
        }
    }
    let names: BTreeSet<&str> = p.kernels.iter().map(|k| k.name.as_str()).collect();
    let edges: BTreeMap<&str, Vec<String>> = p
        .kernels
        .iter()
        .map(|k| {
            let mut refs = BTreeSet::new();
            for l in &k.lets {
                referenced_kernels(&l.value, &mut refs);
            }
            referenced_kernels(&k.body, &mut refs);
            (k.name.as_str(), refs.into_iter().filter(|r| names.contains(r.as_str())).collect())
        })
        .collect();
    // colors: 1 on stack, 2 finished
    fn visit<'a>(n: &'a str, edges: &'a BTreeMap<&str, Vec<String>>, color: &mut BTreeMap<&'a str, u8>) -> Option<String> {
        color.insert(n, 1);
        for m in edges.get(n).into_iter().flatten() {
            match color.get(m.as_str()) {
                Some(1) => return Some(m.clone()),
                Some(_) => {}
                None => {
                    if let Some(c) = visit(m, edges, color) {
                        return Some(c);
                    }
                }
            }
        }
        color.insert(n, 2);
        None
    }
    let mut color = BTreeMap::new();
    for k in &p.kernels {
        if !color.contains_key(k.name.as_str()) {
            if let Some(c) = visit(&k.name, &edges, &mut color) {
                let sp = p.kernel(&c).map(|k| k.span).unwrap_or_default();
                diags.push(Diagnostic::error(sp, format!("kernel '{c}' is recursive")));
                break;
            }
        }
    }
    diags
}

/// Instantiates everything reachable from `main`, with `bindings` applied to
/// main's dimension variables.
pub fn expand(p: &Program, bindings: &BTreeMap<String, i64>) -> Result<Program, Diagnostics> {
    let diags = check_declarations(p);
    if !diags.is_empty() {
        return Err(diags);
    }
    let main = p.kernel(ENTRY).ok_or_else(|| vec![Diagnostic::error(Span { line: 1, col: 1 }, "missing entry kernel 'main'")])?;
    if let Some(param) = &main.param {
        return Err(vec![Diagnostic::error(param.span, "entry kernel 'main' must take no arguments")]);
    }
    for name in bindings.keys() {
        if !main.dims.iter().any(|d| &d.name == name) {
            return Err(vec![Diagnostic::error(main.span, format!("'main' has no dimension variable '{name}'"))]);
        }
    }
    let env = bind_dims(ENTRY, main.span, &main.dims, &main.captures, Bound::Named(bindings)).map_err(|d| vec![d])?;
    let mut ex = Expander { prog: p, done: BTreeSet::new(), queue: vec![], out: Program { kernels: vec![], classicals: vec![] } };
    ex.done.insert((Kind::Qpu, ENTRY.to_string()));
    let k = ex.kernel(main, ENTRY.to_string(), env).map_err(|d| vec![d])?;
    ex.out.kernels.push(k);
    while let Some((kind, name, mangled, vals, span)) = ex.queue.pop() {
        let r = match kind {
            Kind::Qpu => {
                let k = p.kernel(&name).unwrap();
                let env = bind_dims(&name, span, &k.dims, &k.captures, Bound::Positional(&vals, span));
                env.and_then(|env| ex.kernel(k, mangled, env)).map(|k| ex.out.kernels.push(k))
            }
            Kind::Classical => {
                let c = p.classical(&name).unwrap();
                let env = bind_dims(&name, span, &c.dims, &c.captures, Bound::Positional(&vals, span));
                env.and_then(|env| ex.classical(c, mangled, env)).map(|c| ex.out.classicals.push(c))
            }
        };
        r.map_err(|d| vec![d])?;
    }
    Ok(ex.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;
    use crate::frontend::printer::print_expr;

    fn ex(src: &str, binds: &[(&str, i64)]) -> Result<Program, Diagnostics> {
        let b: BTreeMap<String, i64> = binds.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        expand(&parse(src).unwrap(), &b)
    }

    #[test]
    fn repeat_unrolls() {
        let p = ex("qpu main() -> bit[2] { '00' | {'0','1'}[2] >> {'0','1'}[2] | std[2].measure }", &[]).unwrap();
        assert!(print_expr(&p.kernels[0].body).contains("{'0', '1'} + {'0', '1'} >> {'0', '1'} + {'0', '1'}"));
    }

    #[test]
    fn capture_inference() {
        let src = "classical f[N](x: bit[N]) -> bit captures(s: bit[N] = bit'1010') { (x & s).xor_reduce() }
                   qpu main[N]() -> bit[N] { 'p'[N] | f.sign | pm[N].measure }";
        let p = ex(src, &[("N", 4)]).unwrap();
        assert_eq!(p.classicals[0].name, "f__4");
        assert_eq!(p.classicals[0].params[0].ty, TypeExpr::Bit(DimExpr::Const(4)));
        let src2 = src.replace("f.sign", "f[[N]].sign");
        let e = ex(&src2, &[("N", 3)]).unwrap_err();
        assert!(e[0].message.contains("bound to 3"), "{}", e[0]);
    }

    #[test]
    fn entry_errors() {
        assert!(ex("", &[]).unwrap_err()[0].message.contains("missing entry kernel"));
        assert!(ex("qpu main[N]() -> bit[N] { 'p'[N] | std[N].measure }", &[]).is_err());
        let e = ex("qpu f(q: qubit) -> qubit { q | f } qpu main() -> bit { '0' | f | std.measure }", &[]).unwrap_err();
        assert!(e[0].message.contains("recursive"));
    }

    #[test]
    fn loops_and_instances() {
        let src = "qpu g[K](q: qubit[K]) -> qubit[K] rev { q | pm[K] >> std[K] }
                   qpu main[N = 2]() -> bit[N] { 'p'[N] | (g[[N]] for i in range(3)) | std[N].measure }";
        let p = ex(src, &[]).unwrap();
        assert_eq!(p.kernels.len(), 2);
        assert_eq!(p.kernels[1].name, "g__2");
        assert!(print_expr(&p.kernels[0].body).contains("g__2 | g__2 | g__2"));
    }
}
