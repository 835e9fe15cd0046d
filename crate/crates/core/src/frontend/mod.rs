//! Source language: parsing, dimension expansion, type checking, AST
//! canonicalization and lowering to the basis-level IR.

pub mod ast;
pub mod canon;
pub mod classical;
pub mod diag;
pub mod lexer;
pub mod lower;
pub mod parser;
pub mod printer;
pub mod typecheck;
pub mod expand;
