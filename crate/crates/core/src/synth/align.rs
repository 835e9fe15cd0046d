//! Alignment of a standardized translation into pairs of equal-dimension
//! elements.
//!
//! Vector order matters here: vector i of the input side maps to vector i of
//! the output side, and a basis enumerates its vectors as a product with the
//! first element varying slowest. Factoring therefore only succeeds when the
//! big literal is an ordered product `big[i*R + j] = p[i] ++ r[j]`.

use std::collections::{BTreeSet, VecDeque};

use super::SynthError;
use crate::basis::{index_to_bits, Basis, BasisElement, BasisLiteral, Prim};

/// Largest element dimension alignment will expand into an explicit literal.
pub const MAX_MERGE_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    /// Identical sides that do not fully span: acts as a control.
    Predicate,
    /// Fully spanning sides: a permutation of all std vectors.
    Permutation,
    /// Sides with the same proper subset of std vectors in different orders.
    PartialPermutation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignedPair {
    pub input: BasisElement,
    pub output: BasisElement,
    pub kind: PairKind,
}

impl AlignedPair {
    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    pub fn is_identity(&self) -> bool {
        self.input == self.output
    }

    pub fn fully_spans(&self) -> bool {
        self.kind == PairKind::Permutation
    }
}

/// The std-frame version of an element, phases dropped.
pub fn standardize_element(e: &BasisElement) -> BasisElement {
    match e {
        BasisElement::Builtin { dim, .. } => BasisElement::builtin(Prim::Std, *dim),
        BasisElement::Literal(l) => BasisElement::Literal(BasisLiteral::std_bits(
            Prim::Std,
            l.vectors.iter().map(|v| v.eigenbits.clone()).collect(),
        )),
        BasisElement::Padding(d) => BasisElement::Padding(*d),
    }
}

/// Ordered std-frame vectors of an element.
pub fn element_bits(e: &BasisElement) -> Result<Vec<Vec<bool>>, SynthError> {
    match e {
        BasisElement::Builtin { dim, .. } => {
            if *dim > MAX_MERGE_DIM {
                return Err(SynthError::TooLarge { what: "expanded basis element", dim: *dim, limit: MAX_MERGE_DIM });
            }
            Ok((0..1usize << dim).map(|k| index_to_bits(k, *dim)).collect())
        }
        BasisElement::Literal(l) => Ok(l.vectors.iter().map(|v| v.eigenbits.clone()).collect()),
        BasisElement::Padding(_) => Err(SynthError::Internal("padding in alignment".into())),
    }
}

fn literal(bits: Vec<Vec<bool>>) -> BasisElement {
    BasisElement::Literal(BasisLiteral::std_bits(Prim::Std, bits))
}

fn as_literal(e: &BasisElement) -> Result<BasisElement, SynthError> {
    Ok(match e {
        BasisElement::Literal(_) => e.clone(),
        _ => literal(element_bits(e)?),
    })
}

fn is_std_builtin(e: &BasisElement) -> bool {
    matches!(e, BasisElement::Builtin { .. })
}

/// Splits an ordered literal into an ordered product of a `d`-qubit prefix
/// literal and a remainder.
pub fn ordered_factor(bits: &[Vec<bool>], d: usize) -> Option<(Vec<Vec<bool>>, Vec<Vec<bool>>)> {
    let first = &bits[0][..d];
    let r = bits.iter().take_while(|b| &b[..d] == first).count();
    if !bits.len().is_multiple_of(r) {
        return None;
    }
    let rem: Vec<Vec<bool>> = bits[..r].iter().map(|b| b[d..].to_vec()).collect();
    let mut prefixes = Vec::new();
    for chunk in bits.chunks(r) {
        let p = &chunk[0][..d];
        for (j, b) in chunk.iter().enumerate() {
            if &b[..d] != p || b[d..] != rem[j][..] {
                return None;
            }
        }
        prefixes.push(p.to_vec());
    }
    Some((prefixes, rem))
}

fn product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    a.iter().flat_map(|x| b.iter().map(move |y| [x.clone(), y.clone()].concat())).collect()
}

fn merge(a: &BasisElement, b: &BasisElement) -> Result<BasisElement, SynthError> {
    let dim = a.dim() + b.dim();
    if dim > MAX_MERGE_DIM {
        return Err(SynthError::TooLarge { what: "merged basis element", dim, limit: MAX_MERGE_DIM });
    }
    Ok(literal(product(&element_bits(a)?, &element_bits(b)?)))
}

fn pop(deque: &mut VecDeque<BasisElement>) -> Result<BasisElement, SynthError> {
    deque.pop_front().ok_or_else(|| SynthError::Internal("alignment ran out of elements".into()))
}

fn classify(input: BasisElement, output: BasisElement) -> Result<AlignedPair, SynthError> {
    let kind = match (&input, &output) {
        (BasisElement::Builtin { .. }, BasisElement::Builtin { .. }) => PairKind::Permutation,
        _ => {
            let a = element_bits(&input)?;
            let b = element_bits(&output)?;
            let sa: BTreeSet<&Vec<bool>> = a.iter().collect();
            let sb: BTreeSet<&Vec<bool>> = b.iter().collect();
            if sa != sb {
                return Err(SynthError::Internal(format!("aligned pair {input} >> {output} has different vector sets")));
            }
            if input.fully_spans() {
                PairKind::Permutation
            } else if a == b {
                PairKind::Predicate
            } else {
                PairKind::PartialPermutation
            }
        }
    };
    Ok(AlignedPair { input, output, kind })
}

/// Aligns a translation after standardizing both sides.
pub fn align(b_in: &Basis, b_out: &Basis) -> Result<Vec<AlignedPair>, SynthError> {
    let mut ldeque: VecDeque<BasisElement> = b_in.elements.iter().map(standardize_element).collect();
    let mut rdeque: VecDeque<BasisElement> = b_out.elements.iter().map(standardize_element).collect();
    let mut pairs = Vec::new();
    while let (Some(mut l), Some(mut r)) = (ldeque.pop_front(), rdeque.pop_front()) {
        if l.dim() == r.dim() {
            if is_std_builtin(&l) != is_std_builtin(&r) {
                l = as_literal(&l)?;
                r = as_literal(&r)?;
            }
            pairs.push(classify(l, r)?);
            continue;
        }
        let left_big = l.dim() > r.dim();
        let (big, small) = if left_big { (l, r) } else { (r, l) };
        let (bigq, smallq) = if left_big { (&mut ldeque, &mut rdeque) } else { (&mut rdeque, &mut ldeque) };
        let d = small.dim();
        let delta = big.dim() - d;
        let factored = if is_std_builtin(&big) {
            let factor = BasisElement::builtin(Prim::Std, d);
            bigq.push_front(BasisElement::builtin(Prim::Std, delta));
            if is_std_builtin(&small) {
                Some((factor, small.clone()))
            } else {
                Some((as_literal(&factor)?, small.clone()))
            }
        } else {
            let bits = element_bits(&big)?;
            match ordered_factor(&bits, d) {
                Some((prefixes, rem)) => {
                    let fits = match &small {
                        BasisElement::Builtin { .. } => prefixes.len() == 1 << d,
                        other => {
                            let want: BTreeSet<Vec<bool>> = element_bits(other)?.into_iter().collect();
                            want == prefixes.iter().cloned().collect()
                        }
                    };
                    if fits {
                        bigq.push_front(literal(rem));
                        Some((literal(prefixes), as_literal(&small)?))
                    } else {
                        None
                    }
                }
                None => None,
            }
        };
        let (big_part, small_part) = match factored {
            Some(p) => p,
            None => {
                let (mut big_acc, mut small_acc) = (big, small);
                while big_acc.dim() != small_acc.dim() {
                    if big_acc.dim() > small_acc.dim() {
                        small_acc = merge(&small_acc, &pop(smallq)?)?;
                    } else {
                        big_acc = merge(&big_acc, &pop(bigq)?)?;
                    }
                }
                (as_literal(&big_acc)?, as_literal(&small_acc)?)
            }
        };
        let (li, ro) = if left_big { (big_part, small_part) } else { (small_part, big_part) };
        pairs.push(classify(li, ro)?);
    }
    if !ldeque.is_empty() || !rdeque.is_empty() {
        return Err(SynthError::Internal("alignment left unmatched elements".into()));
    }
    Ok(pairs)
}

/// Renders a pair list as a translation, for diagnostics and tests.
pub fn pairs_to_string(pairs: &[AlignedPair]) -> String {
    let l: Vec<String> = pairs.iter().map(|p| p.input.to_string()).collect();
    let r: Vec<String> = pairs.iter().map(|p| p.output.to_string()).collect();
    format!("{} >> {}", l.join(" + "), r.join(" + "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(a: &str, b: &str) -> Vec<AlignedPair> {
        align(&a.parse().unwrap(), &b.parse().unwrap()).unwrap()
    }

    #[test]
    fn factoring_case() {
        let p = al("{'1'} + std", "{'11','10'}");
        assert_eq!(pairs_to_string(&p), "{'1'} + {'0','1'} >> {'1'} + {'1','0'}");
        assert_eq!(p[0].kind, PairKind::Predicate);
        assert_eq!(p[1].kind, PairKind::Permutation);
    }

    #[test]
    fn merging_case() {
        let p = al("{'0','1'} + {'0','1'}", "{'00','10','01','11'}");
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].dim(), 2);
        assert_eq!(p[0].kind, PairKind::Permutation);
    }

    #[test]
    fn identity_and_standardized() {
        let p = al("std[2]", "std[2]");
        assert_eq!(p.len(), 1);
        assert!(p[0].is_identity() && p[0].kind == PairKind::Permutation);
        let p = al("{'p','m'} + ij", "{'p','m'} + pm");
        assert_eq!(pairs_to_string(&p), "{'0','1'} + std >> {'0','1'} + std");
        let p = al("std + fourier[3]", "fourier[3] + std");
        assert_eq!(pairs_to_string(&p), "std + std[2] + std >> std + std[2] + std");
    }

    #[test]
    fn partial_permutation() {
        let p = al("{'01','10'}", "{'10','01'}");
        assert_eq!(p[0].kind, PairKind::PartialPermutation);
    }
}
