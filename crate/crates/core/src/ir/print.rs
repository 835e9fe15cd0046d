//! Textual form of the basis-level IR.
//!
//! ```text
//! module @main
//!
//! func @main() {
//!   %0 = qbprep<pm '0'> () : qbundle[1]
//!   %1 = qbmeas<pm> (%0) : bitbundle[1]
//!   return %1
//! }
//! ```
//!
//! Attributes that contain basis syntax are written between `<` and `>`.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::*;
use crate::basis::parse_basis;
use crate::synth::classical::{LogicNetwork, LogicNode};

fn list(vs: &[Value]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn typed(vs: &[Value], values: &Values) -> String {
    vs.iter().map(|&v| format!("{v}: {}", values.ty(v))).collect::<Vec<_>>().join(", ")
}

fn bits(b: &[bool]) -> String {
    b.iter().map(|&x| if x { '1' } else { '0' }).collect()
}

fn attrs(k: &OpKind) -> String {
    match k {
        OpKind::QbPrep { prim, eigenbits } => format!("<{} '{}'>", prim.name(), bits(eigenbits)),
        OpKind::QbTrans { b_in, b_out } => format!("<{b_in}><{b_out}>"),
        OpKind::QbMeas { basis } | OpKind::FuncPred { basis } => format!("<{basis}>"),
        OpKind::Angle(t) => format!("<{t:?}>"),
        OpKind::FuncConst { sym } => format!(" @{sym}"),
        OpKind::Call { sym, adj, pred } => {
            let mut s = String::new();
            if *adj {
                s.push_str(" adj");
            }
            if let Some(p) = pred {
                write!(s, " pred<{p}>").unwrap();
            }
            write!(s, " @{sym}").unwrap();
            s
        }
        OpKind::Embed { sym, mode, pred } => {
            let mut s = format!(" {}", mode.name());
            if let Some(p) = pred {
                write!(s, " pred<{p}>").unwrap();
            }
            write!(s, " @{sym}").unwrap();
            s
        }
        _ => String::new(),
    }
}

fn write_block(out: &mut String, b: &Block, values: &Values, depth: usize) {
    let pad = "  ".repeat(depth);
    writeln!(out, "{pad}^({}):", typed(&b.args, values)).unwrap();
    write_ops(out, &b.ops, values, depth + 1);
    writeln!(out, "{pad}  yield {}", list(&b.ret)).unwrap();
}

fn write_ops(out: &mut String, ops: &[Op], values: &Values, depth: usize) {
    let pad = "  ".repeat(depth);
    for op in ops {
        out.push_str(&pad);
        if !op.results.is_empty() {
            write!(out, "{} = ", list(&op.results)).unwrap();
        }
        write!(out, "{}{} ({})", op.kind.name(), attrs(&op.kind), list(&op.operands)).unwrap();
        let rs = regions(op);
        if !rs.is_empty() {
            out.push_str(" {\n");
            for (i, r) in rs.iter().enumerate() {
                if i > 0 {
                    writeln!(out, "{pad}}} {{").unwrap();
                }
                write_block(out, r, values, depth + 1);
            }
            write!(out, "{pad}}}").unwrap();
        }
        if !op.results.is_empty() {
            let tys: Vec<String> = op.results.iter().map(|&r| values.ty(r).to_string()).collect();
            write!(out, " : {}", tys.join(", ")).unwrap();
        }
        out.push('\n');
    }
}

fn node_name(i: usize) -> String {
    format!("n{i}")
}

pub fn print_network(name: &str, net: &LogicNetwork) -> String {
    let mut out = format!("classical @{name}({}) {{\n", net.num_inputs);
    for (i, n) in net.nodes.iter().enumerate() {
        let rhs = match n {
            LogicNode::Input(k) => format!("input {k}"),
            LogicNode::Const(b) => format!("const {}", *b as u8),
            LogicNode::Not(a) => format!("not {}", node_name(*a)),
            LogicNode::And(a, b) => format!("and {}, {}", node_name(*a), node_name(*b)),
            LogicNode::Or(a, b) => format!("or {}, {}", node_name(*a), node_name(*b)),
            LogicNode::Xor(a, b) => format!("xor {}, {}", node_name(*a), node_name(*b)),
        };
        writeln!(out, "  {} = {rhs}", node_name(i)).unwrap();
    }
    let outs: Vec<String> = net.outputs.iter().map(|&o| node_name(o)).collect();
    writeln!(out, "  return {}\n}}", outs.join(", ")).unwrap();
    out
}

pub fn print_func(f: &Func) -> String {
    let mut out = format!("func @{}({}){} {{\n", f.name, typed(&f.body.args, &f.values), if f.rev { " rev" } else { "" });
    write_ops(&mut out, &f.body.ops, &f.values, 1);
    writeln!(out, "  return {}\n}}", list(&f.body.ret)).unwrap();
    out
}

pub fn print_module(m: &Module) -> String {
    let mut parts = vec![format!("module @{}\n", m.entry)];
    parts.extend(m.classicals.iter().map(|(n, net)| print_network(n, net)));
    parts.extend(m.funcs.iter().map(print_func));
    parts.join("\n")
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&print_module(self))
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Val(u32),
    Sym(String),
    Ident(String),
    Num(String),
    /// Text between `<` and `>`.
    Attr(String),
    Arrow,
    Punct(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line_no = ln + 1;
        let cs: Vec<char> = line.chars().collect();
        let err = |m: String| ParseError { line: line_no, message: m };
        let mut i = 0;
        while i < cs.len() {
            let c = cs[i];
            let word_end = |mut j: usize| {
                while j < cs.len() && (cs[j].is_ascii_alphanumeric() || cs[j] == '_') {
                    j += 1;
                }
                j
            };
            if c.is_whitespace() {
                i += 1;
            } else if c == '/' && cs.get(i + 1) == Some(&'/') {
                break;
            } else if c == '<' {
                let end = (i + 1..cs.len()).find(|&j| cs[j] == '>').ok_or_else(|| err("unterminated '<'".into()))?;
                toks.push((Tok::Attr(cs[i + 1..end].iter().collect()), line_no));
                i = end + 1;
            } else if c == '-' && cs.get(i + 1) == Some(&'>') {
                toks.push((Tok::Arrow, line_no));
                i += 2;
            } else if c == '%' || c == '@' {
                let end = word_end(i + 1);
                let word: String = cs[i + 1..end].iter().collect();
                let tok = if c == '%' {
                    Tok::Val(word.parse().map_err(|_| err(format!("bad value name '%{word}'")))?)
                } else {
                    Tok::Sym(word)
                };
                toks.push((tok, line_no));
                i = end;
            } else if c.is_ascii_digit() {
                let end = word_end(i);
                toks.push((Tok::Num(cs[i..end].iter().collect()), line_no));
                i = end;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let end = word_end(i);
                toks.push((Tok::Ident(cs[i..end].iter().collect()), line_no));
                i = end;
            } else if "()[]{},=:^".contains(c) {
                toks.push((Tok::Punct(c), line_no));
                i += 1;
            } else {
                return Err(err(format!("unexpected character '{c}'")));
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let line = self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.1);
        Err(ParseError { line, message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.peek().cloned();
        self.pos += 1;
        t
    }

    fn is(&self, t: &Tok) -> bool {
        self.peek() == Some(t)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        let hit = self.is(t);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            got => self.err(format!("expected {t:?}, found {got:?}")),
        }
    }

    fn punct(&mut self, c: char) -> PResult<()> {
        self.expect(Tok::Punct(c))
    }

    fn keyword(&mut self, k: &str) -> PResult<()> {
        self.expect(Tok::Ident(k.into()))
    }

    fn ident(&mut self) -> PResult<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            t => self.err(format!("expected a name, found {t:?}")),
        }
    }

    fn sym(&mut self) -> PResult<String> {
        match self.next() {
            Some(Tok::Sym(s)) => Ok(s),
            t => self.err(format!("expected @symbol, found {t:?}")),
        }
    }

    fn num(&mut self) -> PResult<usize> {
        match self.next() {
            Some(Tok::Num(s)) => s.parse().or_else(|_| self.err(format!("bad number '{s}'"))),
            t => self.err(format!("expected a number, found {t:?}")),
        }
    }

    fn attr(&mut self) -> PResult<String> {
        match self.next() {
            Some(Tok::Attr(s)) => Ok(s),
            t => self.err(format!("expected <attribute>, found {t:?}")),
        }
    }

    fn basis(&mut self) -> PResult<Basis> {
        let s = self.attr()?;
        parse_basis(&s).or_else(|e| self.err(e.to_string()))
    }

    fn value(&mut self) -> PResult<Value> {
        match self.next() {
            Some(Tok::Val(v)) => Ok(Value(v)),
            t => self.err(format!("expected a value, found {t:?}")),
        }
    }

    /// Comma-separated items up to (not including) a token that stops them.
    fn values(&mut self) -> PResult<Vec<Value>> {
        let mut out = Vec::new();
        while let Some(Tok::Val(_)) = self.peek() {
            out.push(self.value()?);
            if !self.eat(&Tok::Punct(',')) {
                break;
            }
        }
        Ok(out)
    }

    fn ty(&mut self) -> PResult<Type> {
        let name = self.ident()?;
        let width = |p: &mut Self| -> PResult<usize> {
            p.punct('[')?;
            let n = p.num()?;
            p.punct(']')?;
            Ok(n)
        };
        Ok(match name.as_str() {
            "qubit" => Type::Qubit,
            "bit" => Type::Bit,
            "angle" => Type::Angle,
            "qbundle" => Type::QBundle(width(self)?),
            "bitbundle" => Type::BitBundle(width(self)?),
            "func" => {
                self.punct('[')?;
                let input = self.num()?;
                self.expect(Tok::Arrow)?;
                let output = self.ty()?;
                let rev = self.eat(&Tok::Ident("rev".into()));
                self.punct(']')?;
                Type::func(input, output, rev)
            }
            other => return self.err(format!("unknown type '{other}'")),
        })
    }

    fn typed_args(&mut self, values: &mut Values) -> PResult<Vec<Value>> {
        self.punct('(')?;
        let mut args = Vec::new();
        while !self.is(&Tok::Punct(')')) {
            let v = self.value()?;
            self.punct(':')?;
            let t = self.ty()?;
            values.set(v, t);
            args.push(v);
            if !self.eat(&Tok::Punct(',')) {
                break;
            }
        }
        self.punct(')')?;
        Ok(args)
    }

    fn block(&mut self, values: &mut Values) -> PResult<Block> {
        self.punct('^')?;
        let args = self.typed_args(values)?;
        self.punct(':')?;
        let ops = self.ops(values)?;
        self.keyword("yield")?;
        let ret = self.values()?;
        Ok(Block { args, ops, ret })
    }

    fn ops(&mut self, values: &mut Values) -> PResult<Vec<Op>> {
        let mut ops = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Ident(k)) if k == "yield" || k == "return" => return Ok(ops),
                Some(Tok::Punct('}')) | None => return self.err("missing terminator"),
                _ => ops.push(self.op(values)?),
            }
        }
    }

    fn op(&mut self, values: &mut Values) -> PResult<Op> {
        let results = self.values()?;
        if !results.is_empty() {
            self.punct('=')?;
        }
        let name = self.ident()?;
        let mut kind = match name.as_str() {
            "qbprep" => {
                let a = self.attr()?;
                let (prim, b) = a.split_once(' ').unwrap_or((&a, ""));
                let prim = Prim::from_name(prim).map_or_else(|| self.err(format!("unknown basis '{prim}'")), Ok)?;
                let eigenbits = b.trim().trim_matches('\'').chars().map(|c| c == '1').collect();
                OpKind::QbPrep { prim, eigenbits }
            }
            "qbtrans" => OpKind::QbTrans { b_in: self.basis()?, b_out: self.basis()? },
            "qbmeas" => OpKind::QbMeas { basis: self.basis()? },
            "qbdiscard" => OpKind::QbDiscard,
            "qbdiscardz" => OpKind::QbDiscardZ,
            "qbpack" => OpKind::QbPack,
            "qbunpack" => OpKind::QbUnpack,
            "bitpack" => OpKind::BitPack,
            "bitunpack" => OpKind::BitUnpack,
            "angle" => {
                let a = self.attr()?;
                OpKind::Angle(a.trim().parse().or_else(|_| self.err(format!("bad angle '{a}'")))?)
            }
            "func_const" => OpKind::FuncConst { sym: self.sym()? },
            "func_adj" => OpKind::FuncAdj,
            "func_pred" => OpKind::FuncPred { basis: self.basis()? },
            "call" => {
                let adj = self.eat(&Tok::Ident("adj".into()));
                let pred = if self.eat(&Tok::Ident("pred".into())) { Some(self.basis()?) } else { None };
                OpKind::Call { sym: self.sym()?, adj, pred }
            }
            "call_indirect" => OpKind::CallIndirect,
            "embed" => {
                let mode = match self.ident()?.as_str() {
                    "xor" => EmbedMode::Xor,
                    "sign" => EmbedMode::Sign,
                    m => return self.err(format!("unknown embedding '{m}'")),
                };
                let pred = if self.eat(&Tok::Ident("pred".into())) { Some(self.basis()?) } else { None };
                OpKind::Embed { sym: self.sym()?, mode, pred }
            }
            "lambda" | "cond" => OpKind::Lambda { body: Block::default() },
            other => return self.err(format!("unknown op '{other}'")),
        };
        self.punct('(')?;
        let operands = self.values()?;
        self.punct(')')?;
        if name == "lambda" || name == "cond" {
            self.punct('{')?;
            let first = self.block(values)?;
            self.punct('}')?;
            kind = if name == "lambda" {
                OpKind::Lambda { body: first }
            } else {
                self.punct('{')?;
                let second = self.block(values)?;
                self.punct('}')?;
                OpKind::Cond { then_block: first, else_block: second }
            };
        }
        if !results.is_empty() {
            self.punct(':')?;
            for (i, &r) in results.iter().enumerate() {
                if i > 0 {
                    self.punct(',')?;
                }
                let t = self.ty()?;
                values.set(r, t);
            }
        }
        Ok(Op { kind, operands, results })
    }

    fn node_ref(&mut self) -> PResult<NodeRef> {
        let s = self.ident()?;
        s.strip_prefix('n').and_then(|d| d.parse().ok()).map_or_else(|| self.err(format!("bad node '{s}'")), Ok)
    }

    fn network(&mut self) -> PResult<(String, LogicNetwork)> {
        let name = self.sym()?;
        self.punct('(')?;
        let mut net = LogicNetwork::new(self.num()?);
        self.punct(')')?;
        self.punct('{')?;
        loop {
            if self.eat(&Tok::Ident("return".into())) {
                break;
            }
            let i = self.node_ref()?;
            if i != net.nodes.len() {
                return self.err(format!("node n{i} out of order"));
            }
            self.punct('=')?;
            let op = self.ident()?;
            let node = match op.as_str() {
                "input" => LogicNode::Input(self.num()?),
                "const" => LogicNode::Const(self.num()? != 0),
                "not" => LogicNode::Not(self.node_ref()?),
                "and" | "or" | "xor" => {
                    let a = self.node_ref()?;
                    self.punct(',')?;
                    let b = self.node_ref()?;
                    match op.as_str() {
                        "and" => LogicNode::And(a, b),
                        "or" => LogicNode::Or(a, b),
                        _ => LogicNode::Xor(a, b),
                    }
                }
                other => return self.err(format!("unknown node kind '{other}'")),
            };
            net.nodes.push(node);
        }
        loop {
            net.outputs.push(self.node_ref()?);
            if !self.eat(&Tok::Punct(',')) {
                break;
            }
        }
        self.punct('}')?;
        Ok((name, net))
    }

    fn func(&mut self) -> PResult<Func> {
        let name = self.sym()?;
        let mut values = Values::default();
        let args = self.typed_args(&mut values)?;
        let rev = self.eat(&Tok::Ident("rev".into()));
        self.punct('{')?;
        let ops = self.ops(&mut values)?;
        self.keyword("return")?;
        let ret = self.values()?;
        self.punct('}')?;
        Ok(Func { name, rev, body: Block { args, ops, ret }, values })
    }
}

type NodeRef = usize;

pub fn parse_module(src: &str) -> Result<Module, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    p.keyword("module")?;
    let entry = p.sym()?;
    let mut funcs = Vec::new();
    let mut classicals = BTreeMap::new();
    while let Some(t) = p.next() {
        match t {
            Tok::Ident(k) if k == "func" => funcs.push(p.func()?),
            Tok::Ident(k) if k == "classical" => {
                let (n, net) = p.network()?;
                classicals.insert(n, net);
            }
            t => return p.err(format!("expected 'func' or 'classical', found {t:?}")),
        }
    }
    Ok(Module { funcs, classicals, entry })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{canon::canonicalize_ast, expand::expand, lower::lower_program, parser::parse, typecheck::typecheck};
    use crate::ir::inline::inline;

    fn lower_src(src: &str) -> Module {
        let p = expand(&parse(src).unwrap(), &Default::default()).unwrap();
        let sigs = typecheck(&p).unwrap();
        lower_program(&canonicalize_ast(&p), &sigs, "main").unwrap()
    }

    const SRC: &str = "classical f[N](x: bit[N]) -> bit captures(s: bit[N] = bit'1010') { (x & s).xor_reduce() }
        qpu kernel[N](q: qubit[N]) -> qubit[N] rev captures(s: bit[N] = bit'1010') { q | f[[N]].sign }
        qpu main() -> bit[5] {
            let m = 'p' | std.measure;
            m + ('pppp'@(pi/4) | ~kernel[[4]] | ({'11'} & (std >> pm)) + id | pm[4].measure)
        }";

    #[test]
    fn round_trips() {
        let mut m = lower_src(SRC);
        for _ in 0..2 {
            let text = print_module(&m);
            let back = parse_module(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
            assert_eq!(print_module(&back), text);
            verify::verify_module(&back).unwrap();
            inline(&mut m, true).unwrap();
        }
    }

    #[test]
    fn reports_line() {
        let e = parse_module("module @main\nfunc @main() {\n  %0 = bogus ()\n  return\n}").unwrap_err();
        assert_eq!(e.line, 3);
    }
}
