//! Basis-level SSA IR. Qubits flow through ops as values; every qubit-typed
//! value is used exactly once.
//!
//! Lambda bodies are isolated from above and see only their block
//! arguments. Conditional branches may read classical values from enclosing
//! regions but take qubits only through their block arguments. Value ids are
//! unique within a function, across all of its regions.

pub mod adjoint;
pub mod canon;
pub mod inline;
pub mod lower;
pub mod predicate;
pub mod print;
pub mod specialize;
pub mod verify;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::basis::{Basis, BasisElement, BasisLiteral, BasisVector, Prim};
use crate::synth::classical::LogicNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value(pub u32);

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "%{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Type {
    Qubit,
    Bit,
    QBundle(usize),
    BitBundle(usize),
    Angle,
    Func(FuncType),
}

/// A callable value: `qbundle[input]` to `output` (a qbundle or bitbundle).
#[derive(Clone, Debug, PartialEq)]
pub struct FuncType {
    pub input: usize,
    pub output: Box<Type>,
    pub rev: bool,
}

impl Type {
    pub fn func(input: usize, output: Type, rev: bool) -> Type {
        Type::Func(FuncType { input, output: Box::new(output), rev })
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, Type::Qubit | Type::QBundle(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Type::Qubit => f.write_str("qubit"),
            Type::Bit => f.write_str("bit"),
            Type::QBundle(n) => write!(f, "qbundle[{n}]"),
            Type::BitBundle(n) => write!(f, "bitbundle[{n}]"),
            Type::Angle => f.write_str("angle"),
            Type::Func(ft) => write!(f, "func[{} -> {}{}]", ft.input, ft.output, if ft.rev { " rev" } else { "" }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmbedMode {
    Xor,
    Sign,
}

impl EmbedMode {
    pub fn name(self) -> &'static str {
        match self {
            EmbedMode::Xor => "xor",
            EmbedMode::Sign => "sign",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OpKind {
    /// Prepares `|eigenbits>` in a std, pm or ij basis.
    QbPrep { prim: Prim, eigenbits: Vec<bool> },
    /// Operands: the bundle, then one angle per phased vector of `b_in`
    /// followed by one per phased vector of `b_out`. The phase values stored
    /// in the bases are placeholders.
    QbTrans { b_in: Basis, b_out: Basis },
    QbMeas { basis: Basis },
    QbDiscard,
    /// Discards qubits known to be |0>.
    QbDiscardZ,
    QbPack,
    QbUnpack,
    BitPack,
    BitUnpack,
    Angle(f64),
    /// Operands are captured values, passed ahead of the argument.
    FuncConst { sym: String },
    FuncAdj,
    FuncPred { basis: Basis },
    /// `pred(P, adj^a(sym))` applied to `operands`: captures, then the
    /// argument bundle with the predicate qubits first.
    Call { sym: String, adj: bool, pred: Option<Basis> },
    /// Operands: the function value, then the argument.
    CallIndirect,
    /// Operands are captures; the body takes the captures then the argument.
    Lambda { body: Block },
    /// Operands: the condition bit, then values passed to both branches as
    /// block arguments. Results are the branch yields.
    Cond { then_block: Block, else_block: Block },
    /// Bennett (`xor`) or phase (`sign`) embedding of a classical function.
    Embed { sym: String, mode: EmbedMode, pred: Option<Basis> },
}

impl OpKind {
    pub fn name(&self) -> &'static str {
        match self {
            OpKind::QbPrep { .. } => "qbprep",
            OpKind::QbTrans { .. } => "qbtrans",
            OpKind::QbMeas { .. } => "qbmeas",
            OpKind::QbDiscard => "qbdiscard",
            OpKind::QbDiscardZ => "qbdiscardz",
            OpKind::QbPack => "qbpack",
            OpKind::QbUnpack => "qbunpack",
            OpKind::BitPack => "bitpack",
            OpKind::BitUnpack => "bitunpack",
            OpKind::Angle(_) => "angle",
            OpKind::FuncConst { .. } => "func_const",
            OpKind::FuncAdj => "func_adj",
            OpKind::FuncPred { .. } => "func_pred",
            OpKind::Call { .. } => "call",
            OpKind::CallIndirect => "call_indirect",
            OpKind::Lambda { .. } => "lambda",
            OpKind::Cond { .. } => "cond",
            OpKind::Embed { .. } => "embed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Op {
    pub kind: OpKind,
    pub operands: Vec<Value>,
    pub results: Vec<Value>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Block {
    pub args: Vec<Value>,
    pub ops: Vec<Op>,
    pub ret: Vec<Value>,
}

/// Types of every value of a function.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Values {
    types: Vec<Type>,
}

impl Values {
    pub fn fresh(&mut self, ty: Type) -> Value {
        self.types.push(ty);
        Value(self.types.len() as u32 - 1)
    }

    pub fn ty(&self, v: Value) -> &Type {
        &self.types[v.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn is_quantum(&self, v: Value) -> bool {
        self.ty(v).is_quantum()
    }

    pub fn set(&mut self, v: Value, ty: Type) {
        let i = v.0 as usize;
        if self.types.len() <= i {
            self.types.resize(i + 1, Type::Angle);
        }
        self.types[i] = ty;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Func {
    pub name: String,
    pub rev: bool,
    pub body: Block,
    pub values: Values,
}

impl Func {
    pub fn arg_types(&self) -> Vec<Type> {
        self.body.args.iter().map(|&a| self.values.ty(a).clone()).collect()
    }

    pub fn ret_types(&self) -> Vec<Type> {
        self.body.ret.iter().map(|&a| self.values.ty(a).clone()).collect()
    }

    /// Number of leading capture parameters (all but the final qbundle).
    pub fn num_captures(&self) -> usize {
        match self.body.args.last() {
            Some(&a) if matches!(self.values.ty(a), Type::QBundle(_)) => self.body.args.len() - 1,
            _ => self.body.args.len(),
        }
    }

    /// Width of the argument bundle, if the function takes one.
    pub fn input_width(&self) -> Option<usize> {
        match self.body.args.last().map(|&a| self.values.ty(a)) {
            Some(Type::QBundle(n)) => Some(*n),
            _ => None,
        }
    }

    /// The type of a callable value referring to this function.
    pub fn value_type(&self) -> Option<Type> {
        let input = self.input_width()?;
        match self.ret_types().as_slice() {
            [out] => Some(Type::func(input, out.clone(), self.rev)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Module {
    pub funcs: Vec<Func>,
    pub classicals: BTreeMap<String, LogicNetwork>,
    pub entry: String,
}

impl Module {
    pub fn func(&self, name: &str) -> Option<&Func> {
        self.funcs.iter().find(|f| f.name == name)
    }

    pub fn func_mut(&mut self, name: &str) -> Option<&mut Func> {
        self.funcs.iter_mut().find(|f| f.name == name)
    }

    /// A function name not yet used in the module.
    pub fn fresh_name(&self, base: &str) -> String {
        if self.func(base).is_none() {
            return base.to_string();
        }
        (1..).map(|i| format!("{base}_{i}")).find(|n| self.func(n).is_none()).unwrap()
    }
}

/// Appends ops to a block under construction.
pub struct Builder<'v> {
    pub values: &'v mut Values,
    pub ops: Vec<Op>,
}

impl<'v> Builder<'v> {
    pub fn new(values: &'v mut Values) -> Self {
        Builder { values, ops: vec![] }
    }

    pub fn op(&mut self, kind: OpKind, operands: Vec<Value>, result_types: Vec<Type>) -> Vec<Value> {
        let results: Vec<Value> = result_types.into_iter().map(|t| self.values.fresh(t)).collect();
        self.ops.push(Op { kind, operands, results: results.clone() });
        results
    }

    pub fn op1(&mut self, kind: OpKind, operands: Vec<Value>, ty: Type) -> Value {
        self.op(kind, operands, vec![ty])[0]
    }

    pub fn ty(&self, v: Value) -> Type {
        self.values.ty(v).clone()
    }

    pub fn unpack(&mut self, v: Value) -> Vec<Value> {
        match self.ty(v) {
            Type::QBundle(n) => self.op(OpKind::QbUnpack, vec![v], vec![Type::Qubit; n]),
            Type::BitBundle(n) => self.op(OpKind::BitUnpack, vec![v], vec![Type::Bit; n]),
            t => panic!("cannot unpack {t}"),
        }
    }

    pub fn qpack(&mut self, qs: Vec<Value>) -> Value {
        let n = qs.len();
        self.op1(OpKind::QbPack, qs, Type::QBundle(n))
    }

    pub fn bpack(&mut self, bs: Vec<Value>) -> Value {
        let n = bs.len();
        self.op1(OpKind::BitPack, bs, Type::BitBundle(n))
    }

    pub fn angle(&mut self, theta: f64) -> Value {
        self.op1(OpKind::Angle(theta), vec![], Type::Angle)
    }

    pub fn finish(self, args: Vec<Value>, ret: Vec<Value>) -> Block {
        Block { args, ops: self.ops, ret }
    }
}

/// Number of vectors carrying a phase.
pub fn phase_slots(b: &Basis) -> usize {
    b.elements
        .iter()
        .map(|e| match e {
            BasisElement::Literal(l) => l.vectors.iter().filter(|v| v.phase.is_some()).count(),
            _ => 0,
        })
        .sum()
}

/// Replaces phase placeholders, in order, with `thetas`.
pub fn bind_phases(b: &Basis, thetas: &mut impl Iterator<Item = f64>) -> Basis {
    Basis::new(
        b.elements
            .iter()
            .map(|e| match e {
                BasisElement::Literal(l) => BasisElement::Literal(BasisLiteral::new(
                    l.vectors
                        .iter()
                        .map(|v| match v.phase {
                            Some(_) => BasisVector { phase: Some(thetas.next().expect("enough phases")), ..v.clone() },
                            None => v.clone(),
                        })
                        .collect(),
                )),
                other => other.clone(),
            })
            .collect(),
    )
}

/// Replaces concrete phases with placeholders, returning the angles in order.
pub fn unbind_phases(b: &Basis) -> (Basis, Vec<f64>) {
    let mut thetas = Vec::new();
    let elements = b
        .elements
        .iter()
        .map(|e| match e {
            BasisElement::Literal(l) => BasisElement::Literal(BasisLiteral::new(
                l.vectors
                    .iter()
                    .map(|v| {
                        if let Some(t) = v.phase {
                            thetas.push(t);
                        }
                        BasisVector { phase: v.phase.map(|_| 0.0), ..v.clone() }
                    })
                    .collect(),
            )),
            other => other.clone(),
        })
        .collect();
    (Basis::new(elements), thetas)
}

/// An op is stationary if it neither consumes nor produces qubits.
pub fn is_stationary(op: &Op, values: &Values) -> bool {
    !op.operands.iter().chain(&op.results).any(|&v| values.is_quantum(v))
}

/// Visits every op, including those nested in regions, outermost first.
pub fn walk_ops<'a>(block: &'a Block, f: &mut impl FnMut(&'a Op)) {
    for op in &block.ops {
        f(op);
        for b in regions(op) {
            walk_ops(b, f);
        }
    }
}

pub fn regions(op: &Op) -> Vec<&Block> {
    match &op.kind {
        OpKind::Lambda { body } => vec![body],
        OpKind::Cond { then_block, else_block } => vec![then_block, else_block],
        _ => vec![],
    }
}

pub fn regions_mut(op: &mut Op) -> Vec<&mut Block> {
    match &mut op.kind {
        OpKind::Lambda { body } => vec![body],
        OpKind::Cond { then_block, else_block } => vec![then_block, else_block],
        _ => vec![],
    }
}

/// Copies `block` from a function with value table `src` into one with
/// table `dst`, renaming every value it defines. `map` must already hold
/// the block's arguments if they are to be substituted; unmapped arguments
/// get fresh values.
pub fn clone_block(block: &Block, src: &Values, dst: &mut Values, map: &mut HashMap<Value, Value>) -> Block {
    let args = block
        .args
        .iter()
        .map(|&a| *map.entry(a).or_insert_with(|| dst.fresh(src.ty(a).clone())))
        .collect();
    let ops = block.ops.iter().map(|op| clone_op(op, src, dst, map)).collect();
    let ret = block.ret.iter().map(|v| map[v]).collect();
    Block { args, ops, ret }
}

pub fn clone_op(op: &Op, src: &Values, dst: &mut Values, map: &mut HashMap<Value, Value>) -> Op {
    let operands = op.operands.iter().map(|v| map[v]).collect();
    let kind = match &op.kind {
        OpKind::Lambda { body } => OpKind::Lambda { body: clone_block(body, src, dst, map) },
        OpKind::Cond { then_block, else_block } => OpKind::Cond {
            then_block: clone_block(then_block, src, dst, map),
            else_block: clone_block(else_block, src, dst, map),
        },
        k => k.clone(),
    };
    let results = op
        .results
        .iter()
        .map(|&r| {
            let n = dst.fresh(src.ty(r).clone());
            map.insert(r, n);
            n
        })
        .collect();
    Op { kind, operands, results }
}

/// Counts of call-like ops, the metric reported by `stats`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CallCounts {
    pub calls: usize,
    pub indirect_calls: usize,
    pub func_consts: usize,
    pub lambdas: usize,
}

pub fn call_counts(m: &Module) -> CallCounts {
    let mut c = CallCounts::default();
    for f in &m.funcs {
        walk_ops(&f.body, &mut |op| match op.kind {
            OpKind::Call { .. } => c.calls += 1,
            OpKind::CallIndirect => c.indirect_calls += 1,
            OpKind::FuncConst { .. } => c.func_consts += 1,
            OpKind::Lambda { .. } => c.lambdas += 1,
            _ => {}
        });
    }
    c
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum IrError {
    #[error("{0}")]
    Verify(String),
    #[error("op {op} cannot be {what}")]
    NotInvertible { op: &'static str, what: &'static str },
    #[error("{0}")]
    Unsupported(String),
    #[error("unknown function @{0}")]
    UnknownFunc(String),
}
