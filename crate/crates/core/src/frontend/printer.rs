//! Source printer. `parse(print(p)) == p` for every parsed program.

use std::fmt::Write;

use super::ast::*;
use crate::basis::Prim;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for c in &p.classicals {
        out.push_str(&print_classical(c));
        out.push('\n');
    }
    for k in &p.kernels {
        out.push_str(&print_kernel(k));
        out.push('\n');
    }
    out
}

fn dims_decl(dims: &[DimVar]) -> String {
    if dims.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = dims
        .iter()
        .map(|d| match &d.default {
            Some(e) => format!("{} = {}", d.name, print_dim(e)),
            None => d.name.clone(),
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn print_type(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Qubit(d) => format!("qubit[{}]", print_dim(d)),
        TypeExpr::Bit(d) => format!("bit[{}]", print_dim(d)),
        TypeExpr::Angle => "angle".into(),
    }
}

fn bits(b: &[bool]) -> String {
    format!("bit'{}'", b.iter().map(|&x| if x { '1' } else { '0' }).collect::<String>())
}

fn captures(cs: &[Capture]) -> String {
    if cs.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = cs
        .iter()
        .map(|c| {
            let v = match &c.value {
                CaptureValue::Bits(b) => bits(b),
                CaptureValue::Angle(a) => print_angle(a, 0),
            };
            format!("{}: {} = {}", c.name, print_type(&c.ty), v)
        })
        .collect();
    format!(" captures({})", parts.join(", "))
}

fn params(ps: &[Param]) -> String {
    ps.iter().map(|p| format!("{}: {}", p.name, print_type(&p.ty))).collect::<Vec<_>>().join(", ")
}

pub fn print_kernel(k: &QpuFn) -> String {
    let mut out = format!(
        "qpu {}{}({}) -> {}{}{} {{\n",
        k.name,
        dims_decl(&k.dims),
        params(k.param.as_slice()),
        print_type(&k.ret),
        if k.rev { " rev" } else { "" },
        captures(&k.captures)
    );
    for l in &k.lets {
        let names: Vec<&str> = l.names.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(out, "    let {} = {};", names.join(", "), print_expr(&l.value)).unwrap();
    }
    writeln!(out, "    {}", print_expr(&k.body)).unwrap();
    out.push_str("}\n");
    out
}

pub fn print_classical(c: &ClassicalFn) -> String {
    format!(
        "classical {}{}({}) -> {}{} {{\n    {}\n}}\n",
        c.name,
        dims_decl(&c.dims),
        params(&c.params),
        print_type(&c.ret),
        captures(&c.captures),
        print_cexpr(&c.body, 0)
    )
}

pub fn print_dim(d: &DimExpr) -> String {
    dim_at(d, 0)
}

fn dim_at(d: &DimExpr, level: u8) -> String {
    let (s, l) = match d {
        DimExpr::Const(n) => (n.to_string(), 2),
        DimExpr::Var(v, _) => (v.clone(), 2),
        DimExpr::Add(a, b) => (format!("{} + {}", dim_at(a, 0), dim_at(b, 1)), 0),
        DimExpr::Sub(a, b) => (format!("{} - {}", dim_at(a, 0), dim_at(b, 1)), 0),
        DimExpr::Mul(a, b) => (format!("{} * {}", dim_at(a, 1), dim_at(b, 2)), 1),
    };
    if l < level {
        format!("({s})")
    } else {
        s
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Levels: 0 sum, 1 product, 2 atom.
pub fn print_angle(a: &AngleExpr, level: u8) -> String {
    let (s, l) = match a {
        AngleExpr::Num(x) if *x < 0.0 => (format!("-{}", num(-x)), 2),
        AngleExpr::Num(x) => (num(*x), 2),
        AngleExpr::Pi => ("pi".into(), 2),
        AngleExpr::Var(v, _) => (v.clone(), 2),
        AngleExpr::Neg(x) => (format!("-{}", print_angle(x, 2)), 2),
        AngleExpr::Add(x, y) => (format!("{} + {}", print_angle(x, 0), print_angle(y, 1)), 0),
        AngleExpr::Sub(x, y) => (format!("{} - {}", print_angle(x, 0), print_angle(y, 1)), 0),
        AngleExpr::Mul(x, y) => (format!("{} * {}", print_angle(x, 1), print_angle(y, 2)), 1),
        AngleExpr::Div(x, y) => (format!("{} / {}", print_angle(x, 1), print_angle(y, 2)), 1),
    };
    if l < level {
        format!("({s})")
    } else {
        s
    }
}

fn dims_use(ds: &[DimExpr]) -> String {
    if ds.is_empty() {
        String::new()
    } else {
        format!("[[{}]]", ds.iter().map(print_dim).collect::<Vec<_>>().join(", "))
    }
}

fn sized(name: &str, d: &DimExpr) -> String {
    if *d == DimExpr::Const(1) {
        name.to_string()
    } else {
        format!("{name}[{}]", print_dim(d))
    }
}

pub fn print_expr(e: &Expr) -> String {
    expr_at(e, 0)
}

/// Levels: 0 conditional, 1 pipe, 2 predication, 3 translation, 4 tensor,
/// 5 adjoint, 6 phase, 7 postfix, 8 atom.
fn expr_at(e: &Expr, level: u8) -> String {
    let (s, l) = match &e.kind {
        ExprKind::Str(s) => (format!("'{s}'"), 8),
        ExprKind::BasisLit(vs) => (format!("{{{}}}", vs.iter().map(|v| expr_at(v, 4)).collect::<Vec<_>>().join(", ")), 8),
        ExprKind::Builtin(Prim::Fourier, d) => (format!("fourier[{}]", print_dim(d)), 8),
        ExprKind::Builtin(p, d) => (sized(p.name(), d), if *d == DimExpr::Const(1) { 8 } else { 7 }),
        ExprKind::Id(d) => (sized("id", d), 7),
        ExprKind::Discard(d) => (sized("discard", d), 7),
        ExprKind::DiscardZ(d) => (sized("discardz", d), 7),
        ExprKind::Var(v) => (v.clone(), 8),
        ExprKind::FnRef(n, ds) => (format!("{n}{}", dims_use(ds)), 8),
        ExprKind::Tensor(a, b) => (format!("{} + {}", expr_at(a, 4), expr_at(b, 5)), 4),
        ExprKind::Repeat(a, d) => (format!("{}[{}]", expr_at(a, 7), print_dim(d)), 7),
        ExprKind::Translate(a, b) => (format!("{} >> {}", expr_at(a, 4), expr_at(b, 4)), 3),
        ExprKind::Pipe(a, b) => (format!("{} | {}", expr_at(a, 1), expr_at(b, 2)), 1),
        ExprKind::Adjoint(a) => (format!("~{}", expr_at(a, 5)), 5),
        ExprKind::Pred(a, b) => (format!("{} & {}", expr_at(a, 3), expr_at(b, 2)), 2),
        ExprKind::Measure(a) => (format!("{}.measure", expr_at(a, 7)), 7),
        ExprKind::Flip(a) => (format!("{}.flip", expr_at(a, 7)), 7),
        ExprKind::Embed(n, ds, m) => (format!("{n}{}.{}", dims_use(ds), m.name()), 7),
        ExprKind::Cond { then, cond, otherwise } => {
            (format!("{} if {} else {}", expr_at(then, 1), expr_at(cond, 1), expr_at(otherwise, 0)), 0)
        }
        ExprKind::Phase(a, t) => (format!("{}@{}", expr_at(a, 7), print_angle(t, 2)), 6),
        ExprKind::Loop { body, var, count } => {
            (format!("({} for {var} in range({}))", expr_at(body, 0), print_dim(count)), 8)
        }
    };
    if l < level {
        format!("({s})")
    } else {
        s
    }
}

/// Levels: 0 or, 1 xor, 2 and, 3 concat, 4 not, 5 postfix.
pub fn print_cexpr(e: &CExpr, level: u8) -> String {
    let (s, l) = match &e.kind {
        CExprKind::Var(v) => (v.clone(), 5),
        CExprKind::Bits(b) => (bits(b), 5),
        CExprKind::Not(a) => (format!("~{}", print_cexpr(a, 4)), 4),
        CExprKind::Bin(op, a, b) => {
            let (sym, lv) = match op {
                BitOp::Or => ("|", 0),
                BitOp::Xor => ("^", 1),
                BitOp::And => ("&", 2),
            };
            (format!("{} {sym} {}", print_cexpr(a, lv), print_cexpr(b, lv + 1)), lv)
        }
        CExprKind::Concat(a, b) => (format!("{} + {}", print_cexpr(a, 3), print_cexpr(b, 4)), 3),
        CExprKind::Index(a, d) => (format!("{}[{}]", print_cexpr(a, 5), print_dim(d)), 5),
        CExprKind::Slice(a, lo, hi) => (format!("{}[{}:{}]", print_cexpr(a, 5), print_dim(lo), print_dim(hi)), 5),
        CExprKind::Reduce(r, a) => (format!("{}.{}()", print_cexpr(a, 5), r.method()), 5),
        CExprKind::Repeat(a, d) => (format!("{}.repeat({})", print_cexpr(a, 5), print_dim(d)), 5),
    };
    if l < level {
        format!("({s})")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::{parse, parse_expr};

    #[test]
    fn expr_roundtrip() {
        for src in [
            "'p0' | {'1'} & std >> {'1', '0'} | pm.measure",
            "(std.flip if m else id) | ~(f + g)[2]",
            "{'p'[N]@pi} >> {'p'[N]}",
            "'1'@(pi / 2 + pi / 2) + fourier[3]",
            "(g[[N]] for i in range(K - 1))",
            "~~(std >> pm) | f.sign | discard[2]",
            "x | (a | b) | c & (d & e)",
        ] {
            let e = parse_expr(src).unwrap();
            let printed = print_expr(&e);
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn program_roundtrip() {
        let src = "classical f[N](x: bit[N], y: bit) -> bit[N] captures(s: bit[N] = bit'1010') {
                ~(x ^ s & y.repeat(N))[0:N - 1] + (x | s).and_reduce()
            }
            qpu main[N = 4]() -> bit[N] captures(t: angle = -pi / 4) {
                let a, b = 'p'[N] + '0' | f[[N]].xor;
                a + b | std[N + 1].measure
            }";
        let p = parse(src).unwrap();
        let printed = print_program(&p);
        assert_eq!(parse(&printed).unwrap(), p, "{printed}");
    }
}
