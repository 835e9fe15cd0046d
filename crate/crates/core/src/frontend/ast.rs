//! Syntax tree for `.qw` source files.

use std::fmt;

use crate::basis::Prim;

/// A source position. Positions never affect tree equality.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub kernels: Vec<QpuFn>,
    pub classicals: Vec<ClassicalFn>,
}

impl Program {
    pub fn kernel(&self, name: &str) -> Option<&QpuFn> {
        self.kernels.iter().find(|k| k.name == name)
    }

    pub fn classical(&self, name: &str) -> Option<&ClassicalFn> {
        self.classicals.iter().find(|k| k.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DimExpr {
    Const(i64),
    Var(String, Span),
    Add(Box<DimExpr>, Box<DimExpr>),
    Sub(Box<DimExpr>, Box<DimExpr>),
    Mul(Box<DimExpr>, Box<DimExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimVar {
    pub name: String,
    pub default: Option<DimExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeExpr {
    Qubit(DimExpr),
    Bit(DimExpr),
    Angle,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AngleExpr {
    Num(f64),
    Pi,
    Var(String, Span),
    Neg(Box<AngleExpr>),
    Add(Box<AngleExpr>, Box<AngleExpr>),
    Sub(Box<AngleExpr>, Box<AngleExpr>),
    Mul(Box<AngleExpr>, Box<AngleExpr>),
    Div(Box<AngleExpr>, Box<AngleExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CaptureValue {
    Bits(Vec<bool>),
    Angle(AngleExpr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Capture {
    pub name: String,
    pub ty: TypeExpr,
    pub value: CaptureValue,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpuFn {
    pub name: String,
    pub dims: Vec<DimVar>,
    pub param: Option<Param>,
    pub ret: TypeExpr,
    pub rev: bool,
    pub captures: Vec<Capture>,
    pub lets: Vec<Let>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Let {
    pub names: Vec<(String, Span)>,
    pub value: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    /// `'0p1'`: a qubit literal, or a basis vector inside `{...}`.
    Str(String),
    /// `{v1, v2}`
    BasisLit(Vec<Expr>),
    /// `std`, `pm`, `ij` (dimension 1) and `fourier[N]`.
    Builtin(Prim, DimExpr),
    Id(DimExpr),
    Discard(DimExpr),
    DiscardZ(DimExpr),
    Var(String),
    /// `f` or `f[[N, M]]`.
    FnRef(String, Vec<DimExpr>),
    Tensor(Box<Expr>, Box<Expr>),
    /// `e[N]`
    Repeat(Box<Expr>, DimExpr),
    Translate(Box<Expr>, Box<Expr>),
    Pipe(Box<Expr>, Box<Expr>),
    Adjoint(Box<Expr>),
    Pred(Box<Expr>, Box<Expr>),
    Measure(Box<Expr>),
    Flip(Box<Expr>),
    /// `f.xor` / `f.sign` where `f` names a classical function.
    Embed(String, Vec<DimExpr>, EmbedMode),
    Cond { then: Box<Expr>, cond: Box<Expr>, otherwise: Box<Expr> },
    Phase(Box<Expr>, AngleExpr),
    /// `(body for var in range(count))`: `count` copies of `body` composed.
    Loop { body: Box<Expr>, var: String, count: DimExpr },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalFn {
    pub name: String,
    pub dims: Vec<DimVar>,
    pub params: Vec<Param>,
    pub ret: TypeExpr,
    pub captures: Vec<Capture>,
    pub body: CExpr,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduce {
    Xor,
    And,
    Or,
}

impl Reduce {
    pub fn method(self) -> &'static str {
        match self {
            Reduce::Xor => "xor_reduce",
            Reduce::And => "and_reduce",
            Reduce::Or => "or_reduce",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitOp {
    And,
    Or,
    Xor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CExpr {
    pub kind: CExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CExprKind {
    Var(String),
    Bits(Vec<bool>),
    Not(Box<CExpr>),
    Bin(BitOp, Box<CExpr>, Box<CExpr>),
    Concat(Box<CExpr>, Box<CExpr>),
    Index(Box<CExpr>, DimExpr),
    Slice(Box<CExpr>, DimExpr, DimExpr),
    Reduce(Reduce, Box<CExpr>),
    Repeat(Box<CExpr>, DimExpr),
}

impl CExpr {
    pub fn new(kind: CExprKind, span: Span) -> Self {
        CExpr { kind, span }
    }
}
