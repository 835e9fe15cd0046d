//! AST canonicalization of type-checked programs.

use std::f64::consts::PI;

use super::ast::*;
use super::typecheck::{eval_angle, eval_basis};

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn fold_angle(a: &AngleExpr) -> AngleExpr {
    match eval_angle(a) {
        Ok(v) if v == PI => AngleExpr::Pi,
        Ok(v) => AngleExpr::Num(v),
        Err(_) => a.clone(),
    }
}

/// One rewrite at the root, if any applies.
fn rewrite(e: &Expr) -> Option<Expr> {
    let span = e.span;
    let mk = |k| Some(Expr::new(k, span));
    match &e.kind {
        ExprKind::Adjoint(inner) => match &inner.kind {
            ExprKind::Adjoint(f) => Some((**f).clone()),
            ExprKind::Translate(b1, b2) => mk(ExprKind::Translate(b2.clone(), b1.clone())),
            ExprKind::Id(_) => Some((**inner).clone()),
            _ => None,
        },
        ExprKind::Pred(b, f) => {
            let basis = eval_basis(b).ok()?;
            if basis.fully_spans() {
                let id = Expr::new(ExprKind::Id(DimExpr::Const(basis.dim() as i64)), b.span);
                return mk(ExprKind::Tensor(bx(id), f.clone()));
            }
            match &f.kind {
                ExprKind::Translate(b1, b2) => mk(ExprKind::Translate(
                    bx(Expr::new(ExprKind::Tensor(b.clone(), b1.clone()), span)),
                    bx(Expr::new(ExprKind::Tensor(b.clone(), b2.clone()), span)),
                )),
                _ => None,
            }
        }
        ExprKind::Phase(x, a) => {
            let folded = fold_angle(a);
            (folded != *a).then(|| Expr::new(ExprKind::Phase(x.clone(), folded), span))
        }
        _ => None,
    }
}

fn map_children(e: &Expr, f: &impl Fn(&Expr) -> Expr) -> Expr {
    let b = |x: &Expr| bx(f(x));
    let kind = match &e.kind {
        ExprKind::BasisLit(vs) => ExprKind::BasisLit(vs.iter().map(f).collect()),
        ExprKind::Tensor(x, y) => ExprKind::Tensor(b(x), b(y)),
        ExprKind::Repeat(x, d) => ExprKind::Repeat(b(x), d.clone()),
        ExprKind::Translate(x, y) => ExprKind::Translate(b(x), b(y)),
        ExprKind::Pipe(x, y) => ExprKind::Pipe(b(x), b(y)),
        ExprKind::Adjoint(x) => ExprKind::Adjoint(b(x)),
        ExprKind::Pred(x, y) => ExprKind::Pred(b(x), b(y)),
        ExprKind::Measure(x) => ExprKind::Measure(b(x)),
        ExprKind::Flip(x) => ExprKind::Flip(b(x)),
        ExprKind::Cond { then, cond, otherwise } => ExprKind::Cond { then: b(then), cond: b(cond), otherwise: b(otherwise) },
        ExprKind::Phase(x, a) => ExprKind::Phase(b(x), a.clone()),
        ExprKind::Loop { body, var, count } => ExprKind::Loop { body: b(body), var: var.clone(), count: count.clone() },
        k => k.clone(),
    };
    Expr::new(kind, e.span)
}

/// Rewrites to a fixpoint, children first.
pub fn canonicalize_expr(e: &Expr) -> Expr {
    let mut cur = map_children(e, &canonicalize_expr);
    while let Some(next) = rewrite(&cur) {
        cur = map_children(&next, &canonicalize_expr);
    }
    cur
}

pub fn canonicalize_ast(p: &Program) -> Program {
    let kernels = p
        .kernels
        .iter()
        .map(|k| QpuFn {
            lets: k.lets.iter().map(|l| Let { names: l.names.clone(), value: canonicalize_expr(&l.value) }).collect(),
            body: canonicalize_expr(&k.body),
            ..k.clone()
        })
        .collect();
    Program { kernels, classicals: p.classicals.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_expr;
    use crate::frontend::printer::print_expr;

    fn canon(s: &str) -> String {
        print_expr(&canonicalize_expr(&parse_expr(s).unwrap()))
    }

    #[test]
    fn rewrites() {
        assert_eq!(canon("~~(std >> pm)"), "std >> pm");
        assert_eq!(canon("{'1'} & (std >> {'1', '0'})"), "{'1'} + std >> {'1'} + {'1', '0'}");
        assert_eq!(canon("'1'@(pi / 2 + pi / 2)"), "'1'@pi");
        assert_eq!(canon("~(std >> pm)"), "pm >> std");
        assert_eq!(canon("std[2] & f"), "id[2] + f");
        assert_eq!(canon("~~~(f + g)"), "~(f + g)");
        assert_eq!(canon("{'1'} & ~~({'0'} & ~(std >> pm))"), "{'1'} + ({'0'} + pm) >> {'1'} + ({'0'} + std)");
    }
}
