//! Recursive descent parser.
//!
//! Quantum expressions, loosest to tightest: `e if c else e`, `|`, `&`
//! (right associative), `>>` (non-associative), `+`, prefix `~`, `@`, then
//! postfix `[N]`, `.measure`, `.flip`, `.xor`, `.sign`. Classical bodies use
//! `|`, `^`, `&`, `+` (concatenation), prefix `~`, and postfix indexing,
//! slicing and method calls.

use super::ast::*;
use super::diag::Diagnostic;
use super::lexer::{lex, Tok, Token};
use crate::basis::Prim;

const KEYWORDS: [&str; 20] = [
    "qpu", "classical", "rev", "captures", "let", "if", "else", "for", "in", "range", "pi", "std", "pm", "ij",
    "fourier", "id", "discard", "discardz", "qubit", "angle",
];

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

pub fn parse(src: &str) -> PResult<Program> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    p.program()
}

/// Parses a single quantum expression, for tests and tools.
pub fn parse_expr(src: &str) -> PResult<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

fn is_basis_syntax(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::BasisLit(_) | ExprKind::Builtin(..) => true,
        ExprKind::Tensor(a, b) => is_basis_syntax(a) && is_basis_syntax(b),
        ExprKind::Repeat(a, _) => is_basis_syntax(a),
        _ => false,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(n) => format!("'{n}'"),
            Tok::Float(x) => format!("'{x}'"),
            Tok::Str(s) => format!("literal '{s}'"),
            Tok::Bits(_) => "bit literal".into(),
            Tok::Punct(p) => format!("'{p}'"),
            Tok::Eof => "end of file".into(),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(self.span(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", Self::describe(self.peek())))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("'{p}'"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("'{k}'"))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let sp = self.span();
                self.next();
                Ok((s, sp))
            }
            Tok::Ident(s) => self.err(format!("'{s}' is a keyword and cannot be used as a name")),
            _ => self.unexpected("a name"),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program { kernels: vec![], classicals: vec![] };
        loop {
            if *self.peek() == Tok::Eof {
                return Ok(prog);
            } else if self.is_kw("qpu") {
                prog.kernels.push(self.qpu_fn()?);
            } else if self.is_kw("classical") {
                prog.classicals.push(self.classical_fn()?);
            } else {
                return self.unexpected("'qpu' or 'classical'");
            }
        }
    }

    fn dim_vars(&mut self) -> PResult<Vec<DimVar>> {
        let mut out = Vec::new();
        if self.eat_punct("[") {
            loop {
                let (name, span) = self.ident()?;
                let default = if self.eat_punct("=") { Some(self.dim()?) } else { None };
                out.push(DimVar { name, default, span });
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct("]")?;
        }
        Ok(out)
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect_punct("(")?;
        let mut out = Vec::new();
        if !self.is_punct(")") {
            loop {
                let (name, span) = self.ident()?;
                self.expect_punct(":")?;
                let ty = self.type_expr()?;
                out.push(Param { name, ty, span });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(out)
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let width = |p: &mut Parser| -> PResult<DimExpr> {
            if p.eat_punct("[") {
                let d = p.dim()?;
                p.expect_punct("]")?;
                Ok(d)
            } else {
                Ok(DimExpr::Const(1))
            }
        };
        if self.eat_kw("qubit") {
            Ok(TypeExpr::Qubit(width(self)?))
        } else if self.eat_kw("bit") {
            Ok(TypeExpr::Bit(width(self)?))
        } else if self.eat_kw("angle") {
            Ok(TypeExpr::Angle)
        } else {
            self.unexpected("a type ('qubit', 'bit' or 'angle')")
        }
    }

    fn captures(&mut self) -> PResult<Vec<Capture>> {
        let mut out = Vec::new();
        if self.eat_kw("captures") {
            self.expect_punct("(")?;
            loop {
                let (name, span) = self.ident()?;
                self.expect_punct(":")?;
                let ty = self.type_expr()?;
                self.expect_punct("=")?;
                let value = match self.peek().clone() {
                    Tok::Bits(b) => {
                        self.next();
                        CaptureValue::Bits(b)
                    }
                    _ => CaptureValue::Angle(self.angle_expr()?),
                };
                out.push(Capture { name, ty, value, span });
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
        }
        Ok(out)
    }

    fn qpu_fn(&mut self) -> PResult<QpuFn> {
        let span = self.span();
        self.expect_kw("qpu")?;
        let (name, _) = self.ident()?;
        let dims = self.dim_vars()?;
        let mut params = self.params()?;
        if params.len() > 1 {
            return Err(Diagnostic::error(params[1].span, "a qpu kernel takes at most one qubit parameter"));
        }
        self.expect_punct("->")?;
        let ret = self.type_expr()?;
        let rev = self.eat_kw("rev");
        let captures = self.captures()?;
        self.expect_punct("{")?;
        let mut lets = Vec::new();
        while self.eat_kw("let") {
            let mut names = vec![self.ident()?];
            while self.eat_punct(",") {
                names.push(self.ident()?);
            }
            self.expect_punct("=")?;
            let value = self.expr()?;
            self.expect_punct(";")?;
            lets.push(Let { names, value });
        }
        let body = self.expr()?;
        self.expect_punct("}")?;
        Ok(QpuFn { name, dims, param: params.pop(), ret, rev, captures, lets, body, span })
    }

    fn classical_fn(&mut self) -> PResult<ClassicalFn> {
        let span = self.span();
        self.expect_kw("classical")?;
        let (name, _) = self.ident()?;
        let dims = self.dim_vars()?;
        let params = self.params()?;
        self.expect_punct("->")?;
        let ret = self.type_expr()?;
        let captures = self.captures()?;
        self.expect_punct("{")?;
        let body = self.cexpr()?;
        self.expect_punct("}")?;
        Ok(ClassicalFn { name, dims, params, ret, captures, body, span })
    }

    // dimension expressions

    fn dim(&mut self) -> PResult<DimExpr> {
        let mut l = self.dim_term()?;
        loop {
            if self.eat_punct("+") {
                l = DimExpr::Add(Box::new(l), Box::new(self.dim_term()?));
            } else if self.eat_punct("-") {
                l = DimExpr::Sub(Box::new(l), Box::new(self.dim_term()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn dim_term(&mut self) -> PResult<DimExpr> {
        let mut l = self.dim_atom()?;
        while self.eat_punct("*") {
            l = DimExpr::Mul(Box::new(l), Box::new(self.dim_atom()?));
        }
        Ok(l)
    }

    fn dim_atom(&mut self) -> PResult<DimExpr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(DimExpr::Const(n))
            }
            Tok::Punct("(") => {
                self.next();
                let d = self.dim()?;
                self.expect_punct(")")?;
                Ok(d)
            }
            Tok::Ident(_) => {
                let (n, sp) = self.ident()?;
                Ok(DimExpr::Var(n, sp))
            }
            _ => self.unexpected("a dimension"),
        }
    }

    fn dim_list(&mut self) -> PResult<Vec<DimExpr>> {
        let mut out = vec![self.dim()?];
        while self.eat_punct(",") {
            out.push(self.dim()?);
        }
        Ok(out)
    }

    // angle expressions

    fn angle_expr(&mut self) -> PResult<AngleExpr> {
        let mut l = self.angle_term()?;
        loop {
            if self.eat_punct("+") {
                l = AngleExpr::Add(Box::new(l), Box::new(self.angle_term()?));
            } else if self.eat_punct("-") {
                l = AngleExpr::Sub(Box::new(l), Box::new(self.angle_term()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn angle_term(&mut self) -> PResult<AngleExpr> {
        let mut l = self.angle_atom()?;
        loop {
            if self.eat_punct("*") {
                l = AngleExpr::Mul(Box::new(l), Box::new(self.angle_atom()?));
            } else if self.eat_punct("/") {
                l = AngleExpr::Div(Box::new(l), Box::new(self.angle_atom()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn angle_atom(&mut self) -> PResult<AngleExpr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(AngleExpr::Num(n as f64))
            }
            Tok::Float(x) => {
                self.next();
                Ok(AngleExpr::Num(x))
            }
            Tok::Punct("-") => {
                self.next();
                Ok(AngleExpr::Neg(Box::new(self.angle_atom()?)))
            }
            Tok::Punct("(") => {
                self.next();
                let a = self.angle_expr()?;
                self.expect_punct(")")?;
                Ok(a)
            }
            Tok::Ident(s) if s == "pi" => {
                self.next();
                Ok(AngleExpr::Pi)
            }
            Tok::Ident(_) => {
                let (n, sp) = self.ident()?;
                Ok(AngleExpr::Var(n, sp))
            }
            _ => self.unexpected("an angle"),
        }
    }

    // quantum expressions

    fn expr(&mut self) -> PResult<Expr> {
        let then = self.pipe()?;
        if self.eat_kw("if") {
            let cond = self.pipe()?;
            self.expect_kw("else")?;
            let otherwise = self.expr()?;
            let span = then.span;
            return Ok(Expr::new(
                ExprKind::Cond { then: Box::new(then), cond: Box::new(cond), otherwise: Box::new(otherwise) },
                span,
            ));
        }
        Ok(then)
    }

    fn pipe(&mut self) -> PResult<Expr> {
        let mut l = self.pred()?;
        while self.is_punct("|") {
            let span = self.span();
            self.next();
            let r = self.pred()?;
            l = Expr::new(ExprKind::Pipe(Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn pred(&mut self) -> PResult<Expr> {
        let l = self.trans()?;
        if self.is_punct("&") {
            let span = self.span();
            self.next();
            let r = self.pred()?;
            return Ok(Expr::new(ExprKind::Pred(Box::new(l), Box::new(r)), span));
        }
        Ok(l)
    }

    fn trans(&mut self) -> PResult<Expr> {
        let l = self.tensor()?;
        if self.is_punct(">>") {
            let span = self.span();
            self.next();
            let r = self.tensor()?;
            for side in [&l, &r] {
                if !is_basis_syntax(side) {
                    return Err(Diagnostic::error(side.span, "translation operands must be bases"));
                }
            }
            if self.is_punct(">>") {
                return self.err("'>>' is not associative; add parentheses");
            }
            return Ok(Expr::new(ExprKind::Translate(Box::new(l), Box::new(r)), span));
        }
        Ok(l)
    }

    fn tensor(&mut self) -> PResult<Expr> {
        let mut l = self.unary()?;
        while self.is_punct("+") {
            let span = self.span();
            self.next();
            let r = self.unary()?;
            l = Expr::new(ExprKind::Tensor(Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_punct("~") {
            let span = self.span();
            self.next();
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Adjoint(Box::new(e)), span));
        }
        let e = self.postfix()?;
        if self.is_punct("@") {
            let span = self.span();
            self.next();
            let a = self.angle_atom()?;
            return Ok(Expr::new(ExprKind::Phase(Box::new(e), a), span));
        }
        Ok(e)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.is_punct("[") {
                let span = self.span();
                self.next();
                let d = self.dim()?;
                self.expect_punct("]")?;
                e = Expr::new(ExprKind::Repeat(Box::new(e), d), span);
            } else if self.is_punct(".") {
                let span = self.span();
                self.next();
                let (m, msp) = match self.peek().clone() {
                    Tok::Ident(s) => {
                        let sp = self.span();
                        self.next();
                        (s, sp)
                    }
                    _ => return self.unexpected("a member name"),
                };
                e = match m.as_str() {
                    "measure" => Expr::new(ExprKind::Measure(Box::new(e)), span),
                    "flip" => Expr::new(ExprKind::Flip(Box::new(e)), span),
                    "xor" | "sign" => {
                        let mode = if m == "xor" { EmbedMode::Xor } else { EmbedMode::Sign };
                        match e.kind {
                            ExprKind::FnRef(name, dims) => Expr::new(ExprKind::Embed(name, dims, mode), e.span),
                            ExprKind::Var(name) => Expr::new(ExprKind::Embed(name, vec![], mode), e.span),
                            _ => return Err(Diagnostic::error(msp, format!("'.{m}' applies to a classical function name"))),
                        }
                    }
                    _ => return Err(Diagnostic::error(msp, format!("unknown member '.{m}'"))),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                ExprKind::Str(s)
            }
            Tok::Punct("{") => {
                self.next();
                let mut vs = vec![self.tensor()?];
                while self.eat_punct(",") {
                    vs.push(self.tensor()?);
                }
                self.expect_punct("}")?;
                ExprKind::BasisLit(vs)
            }
            Tok::Punct("(") => {
                self.next();
                let e = self.expr()?;
                if self.eat_kw("for") {
                    let (var, _) = self.ident()?;
                    self.expect_kw("in")?;
                    self.expect_kw("range")?;
                    self.expect_punct("(")?;
                    let count = self.dim()?;
                    self.expect_punct(")")?;
                    self.expect_punct(")")?;
                    ExprKind::Loop { body: Box::new(e), var, count }
                } else {
                    self.expect_punct(")")?;
                    return Ok(e);
                }
            }
            Tok::Ident(s) => match s.as_str() {
                "std" | "pm" | "ij" => {
                    self.next();
                    ExprKind::Builtin(Prim::from_name(&s).unwrap(), DimExpr::Const(1))
                }
                "fourier" => {
                    self.next();
                    self.expect_punct("[")?;
                    let d = self.dim()?;
                    self.expect_punct("]")?;
                    ExprKind::Builtin(Prim::Fourier, d)
                }
                "id" | "discard" | "discardz" => {
                    self.next();
                    let d = DimExpr::Const(1);
                    match s.as_str() {
                        "id" => ExprKind::Id(d),
                        "discard" => ExprKind::Discard(d),
                        _ => ExprKind::DiscardZ(d),
                    }
                }
                _ => {
                    let (name, _) = self.ident()?;
                    if self.is_punct("[") && matches!(self.peek_at(1), Tok::Punct("[")) {
                        self.next();
                        self.next();
                        let dims = self.dim_list()?;
                        self.expect_punct("]")?;
                        self.expect_punct("]")?;
                        ExprKind::FnRef(name, dims)
                    } else {
                        ExprKind::Var(name)
                    }
                }
            },
            _ => return self.unexpected("an expression"),
        };
        Ok(Expr::new(kind, span))
    }

    // classical expressions

    fn cexpr(&mut self) -> PResult<CExpr> {
        let mut l = self.cxor()?;
        while self.is_punct("|") {
            let span = self.span();
            self.next();
            let r = self.cxor()?;
            l = CExpr::new(CExprKind::Bin(BitOp::Or, Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn cxor(&mut self) -> PResult<CExpr> {
        let mut l = self.cand()?;
        while self.is_punct("^") {
            let span = self.span();
            self.next();
            let r = self.cand()?;
            l = CExpr::new(CExprKind::Bin(BitOp::Xor, Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn cand(&mut self) -> PResult<CExpr> {
        let mut l = self.cconcat()?;
        while self.is_punct("&") {
            let span = self.span();
            self.next();
            let r = self.cconcat()?;
            l = CExpr::new(CExprKind::Bin(BitOp::And, Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn cconcat(&mut self) -> PResult<CExpr> {
        let mut l = self.cunary()?;
        while self.is_punct("+") {
            let span = self.span();
            self.next();
            let r = self.cunary()?;
            l = CExpr::new(CExprKind::Concat(Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn cunary(&mut self) -> PResult<CExpr> {
        if self.is_punct("~") {
            let span = self.span();
            self.next();
            let e = self.cunary()?;
            return Ok(CExpr::new(CExprKind::Not(Box::new(e)), span));
        }
        self.cpostfix()
    }

    fn cpostfix(&mut self) -> PResult<CExpr> {
        let mut e = self.cprimary()?;
        loop {
            let span = self.span();
            if self.eat_punct("[") {
                let lo = self.dim()?;
                if self.eat_punct(":") {
                    let hi = self.dim()?;
                    self.expect_punct("]")?;
                    e = CExpr::new(CExprKind::Slice(Box::new(e), lo, hi), span);
                } else {
                    self.expect_punct("]")?;
                    e = CExpr::new(CExprKind::Index(Box::new(e), lo), span);
                }
            } else if self.eat_punct(".") {
                let (m, msp) = match self.peek().clone() {
                    Tok::Ident(s) => {
                        let sp = self.span();
                        self.next();
                        (s, sp)
                    }
                    _ => return self.unexpected("a method name"),
                };
                self.expect_punct("(")?;
                let kind = match m.as_str() {
                    "xor_reduce" => CExprKind::Reduce(Reduce::Xor, Box::new(e)),
                    "and_reduce" => CExprKind::Reduce(Reduce::And, Box::new(e)),
                    "or_reduce" => CExprKind::Reduce(Reduce::Or, Box::new(e)),
                    "repeat" => {
                        let d = self.dim()?;
                        CExprKind::Repeat(Box::new(e), d)
                    }
                    _ => return Err(Diagnostic::error(msp, format!("unknown method '.{m}()'"))),
                };
                self.expect_punct(")")?;
                e = CExpr::new(kind, span);
            } else {
                return Ok(e);
            }
        }
    }

    fn cprimary(&mut self) -> PResult<CExpr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Bits(b) => {
                self.next();
                Ok(CExpr::new(CExprKind::Bits(b), span))
            }
            Tok::Punct("(") => {
                self.next();
                let e = self.cexpr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(_) => {
                let (n, _) = self.ident()?;
                Ok(CExpr::new(CExprKind::Var(n), span))
            }
            _ => self.unexpected("a classical expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("'p0' | {'1'} & std >> {'1','0'} | pm.measure").unwrap();
        let ExprKind::Pipe(l, r) = e.kind else { panic!() };
        assert!(matches!(r.kind, ExprKind::Measure(_)));
        let ExprKind::Pipe(_, m) = l.kind else { panic!() };
        let ExprKind::Pred(b, t) = m.kind else { panic!() };
        assert!(matches!(b.kind, ExprKind::BasisLit(_)));
        assert!(matches!(t.kind, ExprKind::Translate(..)));
    }

    #[test]
    fn errors() {
        let e = parse_expr("'01' >> '10'").unwrap_err();
        assert!(e.message.contains("must be bases"), "{e}");
        assert!(parse_expr("std >> pm >> ij").is_err());
        assert!(parse("qpu main() -> bit { std.frob }").is_err());
        assert!(parse("").unwrap().kernels.is_empty());
    }

    #[test]
    fn declarations() {
        let p = parse(
            "classical f[N](x: bit[N]) -> bit captures(s: bit[N] = bit'101') { (x & s).xor_reduce() }
             qpu main[N = 3]() -> bit[N] { 'p'[N] | f[[N]].sign | pm[N] >> std[N] | std[N].measure }",
        )
        .unwrap();
        assert_eq!(p.classicals[0].captures[0].value, CaptureValue::Bits(vec![true, false, true]));
        assert_eq!(p.kernels[0].dims[0].default, Some(DimExpr::Const(3)));
    }
}
