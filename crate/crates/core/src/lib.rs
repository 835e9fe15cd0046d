//! A compiler for a basis-oriented quantum programming language, with an
//! embedded statevector simulator used as the verification oracle.

pub mod backend;
pub mod basis;
pub mod circuit;
pub mod driver;
pub mod frontend;
pub mod ir;
pub mod linalg;
pub mod sim;
pub mod synth;
pub mod testgen;
