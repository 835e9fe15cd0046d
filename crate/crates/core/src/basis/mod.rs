//! The basis algebra: primitive bases, basis vectors, literals and canon-form
//! bases, plus normalization and validation.

use std::fmt;

mod parse;
pub mod oracle;
pub mod span;

pub use parse::{parse_angle, parse_basis, ParseBasisError};
pub use span::{
    check_span_equivalence, factor_element, factor_full_span, factor_literal, SpanError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Std,
    Pm,
    Ij,
    Fourier,
}

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::Std => "std",
            Prim::Pm => "pm",
            Prim::Ij => "ij",
            Prim::Fourier => "fourier",
        }
    }

    /// Whether an N-qubit instance factors into N single-qubit instances.
    /// Only meaningful for N > 1; `fourier[1]` coincides with `pm`.
    pub fn separable(self) -> bool {
        self != Prim::Fourier
    }

    /// The characters naming the plus and minus eigenstates.
    pub fn symbols(self) -> Option<(char, char)> {
        match self {
            Prim::Std => Some(('0', '1')),
            Prim::Pm => Some(('p', 'm')),
            Prim::Ij => Some(('i', 'j')),
            Prim::Fourier => None,
        }
    }

    /// Inverse of [`Prim::symbols`]: the primitive basis and eigenbit for a
    /// qubit-literal character.
    pub fn from_symbol(c: char) -> Option<(Prim, bool)> {
        match c {
            '0' => Some((Prim::Std, false)),
            '1' => Some((Prim::Std, true)),
            'p' => Some((Prim::Pm, false)),
            'm' => Some((Prim::Pm, true)),
            'i' => Some((Prim::Ij, false)),
            'j' => Some((Prim::Ij, true)),
            _ => None,
        }
    }

    pub fn from_name(s: &str) -> Option<Prim> {
        match s {
            "std" => Some(Prim::Std),
            "pm" => Some(Prim::Pm),
            "ij" => Some(Prim::Ij),
            "fourier" => Some(Prim::Fourier),
            _ => None,
        }
    }
}

impl fmt::Display for Prim {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single basis vector such as `'10'`; every position shares one primitive
/// basis. Bit i of `eigenbits` is position i of the written
/// literal, i.e. qubit i, the (i+1)-th most significant bit of a state index.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisVector {
    pub prim: Prim,
    pub eigenbits: Vec<bool>,
    pub phase: Option<f64>,
}

impl BasisVector {
    pub fn new(prim: Prim, eigenbits: Vec<bool>) -> Self {
        assert!(prim != Prim::Fourier, "basis vectors are never fourier");
        BasisVector { prim, eigenbits, phase: None }
    }

    /// Builds a vector from a string of eigenstate characters, e.g. `"pm"`.
    pub fn from_symbols(s: &str) -> Option<Self> {
        let mut prim = None;
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            let (p, b) = Prim::from_symbol(c)?;
            if prim.is_some_and(|q| q != p) {
                return None;
            }
            prim = Some(p);
            bits.push(b);
        }
        Some(BasisVector::new(prim?, bits))
    }

    pub fn with_phase(mut self, theta: f64) -> Self {
        self.phase = Some(theta);
        self
    }

    pub fn dim(&self) -> usize {
        self.eigenbits.len()
    }

    pub fn symbols(&self) -> String {
        let (z, o) = self.prim.symbols().expect("vector prim has symbols");
        self.eigenbits.iter().map(|&b| if b { o } else { z }).collect()
    }

    /// The eigenbits read as a big-endian index.
    pub fn index(&self) -> usize {
        bits_to_index(&self.eigenbits)
    }
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "'{}'", self.symbols())?;
        if let Some(theta) = self.phase {
            write!(f, "@{}", fmt_angle(theta))?;
        }
        Ok(())
    }
}

/// Formats an angle so that it parses back to the identical `f64`.
pub fn fmt_angle(theta: f64) -> String {
    let s = format!("{theta}");
    if s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

pub fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

pub fn index_to_bits(idx: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| (idx >> (n - 1 - i)) & 1 == 1).collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// `{bv1, ..., bvm}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisLiteral {
    pub vectors: Vec<BasisVector>,
}

impl BasisLiteral {
    pub fn new(vectors: Vec<BasisVector>) -> Self {
        BasisLiteral { vectors }
    }

    /// Builds a literal from symbol strings; panics on malformed input, so it
    /// is meant for fixtures and internal construction.
    pub fn from_symbols(vs: &[&str]) -> Self {
        BasisLiteral {
            vectors: vs
                .iter()
                .map(|s| BasisVector::from_symbols(s).expect("valid vector symbols"))
                .collect(),
        }
    }

    pub fn std_bits(prim: Prim, bits: Vec<Vec<bool>>) -> Self {
        BasisLiteral { vectors: bits.into_iter().map(|b| BasisVector::new(prim, b)).collect() }
    }

    pub fn prim(&self) -> Prim {
        self.vectors[0].prim
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn fully_spans(&self) -> bool {
        let d = self.dim();
        d < usize::BITS as usize && self.vectors.len() == 1usize << d
    }

    pub fn has_phases(&self) -> bool {
        self.vectors.iter().any(|v| v.phase.is_some())
    }
}

impl fmt::Display for BasisLiteral {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.vectors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisElement {
    Builtin { prim: Prim, dim: usize },
    Literal(BasisLiteral),
    /// Placeholder used only while planning standardizations.
    Padding(usize),
}

impl BasisElement {
    pub fn builtin(prim: Prim, dim: usize) -> Self {
        BasisElement::Builtin { prim, dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            BasisElement::Builtin { dim, .. } => *dim,
            BasisElement::Literal(l) => l.dim(),
            BasisElement::Padding(d) => *d,
        }
    }

    pub fn prim(&self) -> Option<Prim> {
        match self {
            BasisElement::Builtin { prim, .. } => Some(*prim),
            BasisElement::Literal(l) => Some(l.prim()),
            BasisElement::Padding(_) => None,
        }
    }

    pub fn is_padding(&self) -> bool {
        matches!(self, BasisElement::Padding(_))
    }

    pub fn fully_spans(&self) -> bool {
        match self {
            BasisElement::Builtin { .. } => true,
            BasisElement::Literal(l) => l.fully_spans(),
            BasisElement::Padding(_) => false,
        }
    }

    /// Number of basis vectors this element contributes.
    pub fn num_vectors(&self) -> u128 {
        match self {
            BasisElement::Builtin { dim, .. } => 1u128.checked_shl(*dim as u32).unwrap_or(u128::MAX),
            BasisElement::Literal(l) => l.len() as u128,
            BasisElement::Padding(_) => 0,
        }
    }

    pub fn has_phases(&self) -> bool {
        matches!(self, BasisElement::Literal(l) if l.has_phases())
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            BasisElement::Builtin { prim: Prim::Fourier, dim } => write!(f, "fourier[{dim}]"),
            BasisElement::Builtin { prim, dim: 1 } => write!(f, "{prim}"),
            BasisElement::Builtin { prim, dim } => write!(f, "{prim}[{dim}]"),
            BasisElement::Literal(l) => write!(f, "{l}"),
            BasisElement::Padding(d) => write!(f, "padding[{d}]"),
        }
    }
}

/// A basis in canon form: a flat tensor product of elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub elements: Vec<BasisElement>,
}

impl Basis {
    pub fn new(elements: Vec<BasisElement>) -> Self {
        Basis { elements }
    }

    pub fn builtin(prim: Prim, dim: usize) -> Self {
        Basis { elements: vec![BasisElement::builtin(prim, dim)] }
    }

    pub fn literal(l: BasisLiteral) -> Self {
        Basis { elements: vec![BasisElement::Literal(l)] }
    }

    pub fn dim(&self) -> usize {
        self.elements.iter().map(|e| e.dim()).sum()
    }

    pub fn fully_spans(&self) -> bool {
        self.elements.iter().all(|e| e.fully_spans())
    }

    pub fn has_phases(&self) -> bool {
        self.elements.iter().any(|e| e.has_phases())
    }

    /// Tensor product: `self + other`.
    pub fn tensor(&self, other: &Basis) -> Basis {
        let mut elements = self.elements.clone();
        elements.extend(other.elements.iter().cloned());
        Basis { elements }
    }

    pub fn strip_phases(&self) -> Basis {
        Basis { elements: self.elements.iter().map(strip_element_phases).collect() }
    }

    /// Number of vectors, saturating at `u128::MAX`.
    pub fn num_vectors(&self) -> u128 {
        self.elements.iter().fold(1u128, |acc, e| acc.saturating_mul(e.num_vectors()))
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Basis {
    type Err = ParseBasisError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_basis(s)
    }
}

fn strip_element_phases(e: &BasisElement) -> BasisElement {
    match e {
        BasisElement::Literal(l) => BasisElement::Literal(BasisLiteral {
            vectors: l.vectors.iter().map(|v| BasisVector { phase: None, ..v.clone() }).collect(),
        }),
        other => other.clone(),
    }
}

/// Strips phases and sorts literal vectors by eigenbits (big-endian order).
/// Built-ins are returned unchanged.
pub fn normalize_element(e: &BasisElement) -> BasisElement {
    match strip_element_phases(e) {
        BasisElement::Literal(mut l) => {
            l.vectors.sort_by(|a, b| a.eigenbits.cmp(&b.eigenbits));
            BasisElement::Literal(l)
        }
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LiteralError {
    #[error("empty basis literal")]
    Empty,
    #[error("dimension mismatch in basis literal: {first} has {first_dim} qubits but {other} has {other_dim}")]
    DimMismatch { first: String, first_dim: usize, other: String, other_dim: usize },
    #[error("primitive basis mismatch in basis literal: {first} is {first_prim} but {other} is {other_prim}")]
    PrimMismatch { first: String, first_prim: Prim, other: String, other_prim: Prim },
    #[error("duplicate eigenbits in basis literal: {vector} appears more than once")]
    Duplicate { vector: String },
    #[error("basis literal has {count} vectors but only {max} fit in {dim} qubits")]
    TooMany { count: usize, max: u128, dim: usize },
}

/// Checks that all vectors share a dimension and primitive basis and have
/// pairwise distinct eigenbits.
pub fn validate_literal(bl: &BasisLiteral) -> Result<(), LiteralError> {
    let first = bl.vectors.first().ok_or(LiteralError::Empty)?;
    for v in &bl.vectors[1..] {
        if v.dim() != first.dim() {
            return Err(LiteralError::DimMismatch {
                first: first.to_string(),
                first_dim: first.dim(),
                other: v.to_string(),
                other_dim: v.dim(),
            });
        }
        if v.prim != first.prim {
            return Err(LiteralError::PrimMismatch {
                first: first.to_string(),
                first_prim: first.prim,
                other: v.to_string(),
                other_prim: v.prim,
            });
        }
    }
    let mut sorted: Vec<&BasisVector> = bl.vectors.iter().collect();
    sorted.sort_by(|a, b| a.eigenbits.cmp(&b.eigenbits));
    for w in sorted.windows(2) {
        if w[0].eigenbits == w[1].eigenbits {
            return Err(LiteralError::Duplicate { vector: format!("'{}'", w[1].symbols()) });
        }
    }
    let max = 1u128.checked_shl(first.dim() as u32).unwrap_or(u128::MAX);
    if bl.vectors.len() as u128 > max {
        return Err(LiteralError::TooMany { count: bl.vectors.len(), max, dim: first.dim() });
    }
    Ok(())
}

/// Validates every literal element of a basis.
pub fn validate_basis(b: &Basis) -> Result<(), LiteralError> {
    for e in &b.elements {
        if let BasisElement::Literal(l) = e {
            validate_literal(l)?;
        }
    }
    Ok(())
}

pub fn fully_spans(e: &BasisElement) -> bool {
    e.fully_spans()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(vs: &[&str]) -> BasisElement {
        BasisElement::Literal(BasisLiteral::from_symbols(vs))
    }

    #[test]
    fn normalize_sorts_and_strips() {
        assert_eq!(normalize_element(&lit(&["10", "01"])), lit(&["01", "10"]));
        let phased = BasisElement::Literal(BasisLiteral::new(vec![
            BasisVector::from_symbols("1").unwrap().with_phase(std::f64::consts::PI),
        ]));
        assert_eq!(normalize_element(&phased), lit(&["1"]));
        let b = BasisElement::builtin(Prim::Pm, 3);
        assert_eq!(normalize_element(&b), b);
    }

    #[test]
    fn literal_validation() {
        assert!(validate_literal(&BasisLiteral::from_symbols(&["01", "10"])).is_ok());
        assert!(matches!(
            validate_literal(&BasisLiteral::from_symbols(&["0", "0"])),
            Err(LiteralError::Duplicate { .. })
        ));
        assert!(matches!(
            validate_literal(&BasisLiteral::from_symbols(&["0", "11"])),
            Err(LiteralError::DimMismatch { .. })
        ));
        assert!(matches!(
            validate_literal(&BasisLiteral::from_symbols(&["0", "p"])),
            Err(LiteralError::PrimMismatch { .. })
        ));
        let msg = validate_literal(&BasisLiteral::from_symbols(&["0", "0"])).unwrap_err().to_string();
        assert!(msg.contains("duplicate") && msg.contains("'0'"), "{msg}");
    }

    #[test]
    fn spanning() {
        assert!(BasisElement::builtin(Prim::Std, 5).fully_spans());
        assert!(lit(&["00", "01", "10", "11"]).fully_spans());
        assert!(!lit(&["0"]).fully_spans());
    }

    #[test]
    fn display_roundtrips() {
        for s in ["std", "pm[3]", "fourier[1]", "{'01','10'}", "std + {'1'@3.141592653589793} + ij[2]"] {
            let b: Basis = s.parse().unwrap();
            assert_eq!(b.to_string(), s);
        }
    }

    #[test]
    fn vector_index_is_big_endian() {
        let v = BasisVector::from_symbols("100").unwrap();
        assert_eq!(v.index(), 4);
        assert_eq!(index_to_bits(4, 3), v.eigenbits);
    }
}
