//! Polynomial-time span-equivalence checking by factoring basis elements.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{normalize_element, Basis, BasisElement, BasisLiteral, BasisVector};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SpanError {
    #[error("spans differ: cannot match {left} against {right}")]
    Mismatch { left: String, right: String },
    #[error("spans differ: dimension mismatch, {side} side has leftover {leftover}")]
    Dimension { side: &'static str, leftover: String },
}

fn split_vectors(bl: &BasisLiteral, n: usize) -> Vec<(&[bool], &[bool])> {
    bl.vectors.iter().map(|v| v.eigenbits.split_at(n)).collect()
}

fn suffix_literal(bl: &BasisLiteral, suffixes: Vec<&[bool]>) -> BasisLiteral {
    let prim = bl.prim();
    let rem = BasisLiteral::new(suffixes.into_iter().map(|s| BasisVector::new(prim, s.to_vec())).collect());
    debug_assert!(rem.vectors.windows(2).all(|w| w[0].eigenbits < w[1].eigenbits));
    rem
}

/// Suffixes that accompany the first prefix, in order. For a product set
/// these are all distinct suffixes, already sorted.
fn first_group_suffixes<'a>(parts: &[(&'a [bool], &'a [bool])]) -> Vec<&'a [bool]> {
    let first = parts[0].0;
    parts.iter().take_while(|(p, _)| *p == first).map(|(_, s)| *s).collect()
}

/// Factors `std[n]` (or `pm[n]`, `ij[n]`) out of the front of a normalized
/// literal, returning the remainder literal.
pub fn factor_full_span(bl: &BasisLiteral, n: usize) -> Option<BasisLiteral> {
    assert!(bl.dim() > n && n > 0);
    let m = bl.len();
    let two_n = 1usize.checked_shl(n as u32).filter(|&t| t <= m)?;
    if !m.is_multiple_of(two_n) {
        return None;
    }
    let parts = split_vectors(bl, n);
    let prefixes: HashSet<&[bool]> = parts.iter().map(|(p, _)| *p).collect();
    if prefixes.len() < two_n {
        return None;
    }
    let mut suffix_counts: HashMap<&[bool], usize> = HashMap::new();
    for (_, s) in &parts {
        *suffix_counts.entry(s).or_default() += 1;
    }
    if suffix_counts.values().any(|&c| c < two_n) {
        return None;
    }
    assert_eq!(prefixes.len(), two_n, "exact-count property: distinct prefixes");
    assert!(suffix_counts.values().all(|&c| c == two_n), "exact-count property: suffix occurrences");
    let rem = first_group_suffixes(&parts);
    assert_eq!(rem.len(), suffix_counts.len());
    Some(suffix_literal(bl, rem))
}

/// Factors the literal `small` out of the front of the literal `bl`, both
/// normalized, returning the remainder literal.
pub fn factor_literal(bl: &BasisLiteral, small: &BasisLiteral) -> Option<BasisLiteral> {
    let n = small.dim();
    assert!(bl.dim() > n);
    if bl.prim() != small.prim() {
        return None;
    }
    let (m, m2) = (bl.len(), small.len());
    if m % m2 != 0 {
        return None;
    }
    let parts = split_vectors(bl, n);
    let prefixes: HashSet<&[bool]> = parts.iter().map(|(p, _)| *p).collect();
    let wanted: HashSet<&[bool]> = small.vectors.iter().map(|v| v.eigenbits.as_slice()).collect();
    if prefixes.len() != m2 || prefixes != wanted {
        return None;
    }
    let mut suffix_counts: HashMap<&[bool], usize> = HashMap::new();
    for (_, s) in &parts {
        *suffix_counts.entry(s).or_default() += 1;
    }
    if suffix_counts.values().any(|&c| c < m2) {
        return None;
    }
    assert!(suffix_counts.values().all(|&c| c == m2), "exact-count property: suffix occurrences");
    let rem = first_group_suffixes(&parts);
    assert_eq!(rem.len(), suffix_counts.len());
    Some(suffix_literal(bl, rem))
}

/// Factors `small` out of `big` (with `dim(big) > dim(small)`), pushing the
/// remainder onto the front of `bigdeque`. Returns false on failure.
pub fn factor_element(big: &BasisElement, small: &BasisElement, bigdeque: &mut VecDeque<BasisElement>) -> bool {
    let delta = big.dim() - small.dim();
    assert!(delta > 0);
    if big.fully_spans() && small.fully_spans() {
        let prim = big.prim().expect("padding never reaches span checking");
        bigdeque.push_front(BasisElement::builtin(prim, delta));
        return true;
    }
    let rem = match (big, small) {
        (BasisElement::Literal(bl), s) if s.fully_spans() => factor_full_span(bl, s.dim()),
        (BasisElement::Literal(bl), BasisElement::Literal(sl)) => factor_literal(bl, sl),
        _ => None,
    };
    match rem {
        Some(r) => {
            bigdeque.push_front(BasisElement::Literal(r));
            true
        }
        None => false,
    }
}

fn elements_equal(a: &BasisElement, b: &BasisElement) -> bool {
    match (a, b) {
        (BasisElement::Literal(x), BasisElement::Literal(y)) => {
            x.prim() == y.prim()
                && x.len() == y.len()
                && x.vectors.iter().zip(&y.vectors).all(|(u, v)| u.eigenbits == v.eigenbits)
        }
        _ => a == b,
    }
}

/// Decides whether two valid bases span the same subspace.
pub fn check_span_equivalence(b_in: &Basis, b_out: &Basis) -> Result<(), SpanError> {
    let mut left: VecDeque<BasisElement> = b_in.elements.iter().map(normalize_element).collect();
    let mut right: VecDeque<BasisElement> = b_out.elements.iter().map(normalize_element).collect();
    while !left.is_empty() && !right.is_empty() {
        let l = left.pop_front().unwrap();
        let r = right.pop_front().unwrap();
        let ok = if l.dim() == r.dim() {
            elements_equal(&l, &r) || (l.fully_spans() && r.fully_spans())
        } else if l.dim() > r.dim() {
            factor_element(&l, &r, &mut left)
        } else {
            factor_element(&r, &l, &mut right)
        };
        if !ok {
            return Err(SpanError::Mismatch { left: l.to_string(), right: r.to_string() });
        }
    }
    let leftover = |d: &VecDeque<BasisElement>| d.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" + ");
    if !left.is_empty() {
        return Err(SpanError::Dimension { side: "left", leftover: leftover(&left) });
    }
    if !right.is_empty() {
        return Err(SpanError::Dimension { side: "right", leftover: leftover(&right) });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{parse_basis, Prim};

    fn lit(vs: &[&str]) -> BasisLiteral {
        BasisLiteral::from_symbols(vs)
    }

    fn b(s: &str) -> Basis {
        parse_basis(s).unwrap()
    }

    #[test]
    fn full_span_factoring() {
        assert_eq!(factor_full_span(&lit(&["00", "01", "10", "11"]), 1), Some(lit(&["0", "1"])));
        assert_eq!(factor_full_span(&lit(&["00", "01", "10"]), 1), None);
        assert_eq!(factor_full_span(&lit(&["00", "11"]), 1), None);
        assert_eq!(factor_full_span(&lit(&["010", "011", "110", "111"]), 1), Some(lit(&["10", "11"])));
    }

    #[test]
    fn literal_factoring() {
        assert_eq!(factor_literal(&lit(&["10", "11"]), &lit(&["1"])), Some(lit(&["0", "1"])));
        assert_eq!(factor_literal(&lit(&["00", "01", "10", "11"]), &lit(&["0", "1"])), Some(lit(&["0", "1"])));
        assert_eq!(factor_literal(&lit(&["pp", "pm"]), &lit(&["0"])), None);
        assert_eq!(factor_literal(&lit(&["00", "11"]), &lit(&["0"])), None);
    }

    #[test]
    fn element_factoring() {
        let mut dq = VecDeque::new();
        assert!(factor_element(&BasisElement::builtin(Prim::Fourier, 3), &BasisElement::builtin(Prim::Fourier, 1), &mut dq));
        assert_eq!(dq.pop_front(), Some(BasisElement::builtin(Prim::Fourier, 2)));
        assert!(!factor_element(
            &BasisElement::Literal(lit(&["10", "11"])),
            &BasisElement::builtin(Prim::Std, 1),
            &mut dq
        ));
        assert!(factor_element(
            &BasisElement::Literal(lit(&["00", "01", "10", "11"])),
            &BasisElement::builtin(Prim::Std, 1),
            &mut dq
        ));
        assert_eq!(dq.pop_front(), Some(BasisElement::builtin(Prim::Std, 1)));
        assert!(!factor_element(&BasisElement::Literal(lit(&["00", "11"])), &BasisElement::Literal(lit(&["0"])), &mut dq));
        assert!(!factor_element(
            &BasisElement::builtin(Prim::Fourier, 2),
            &BasisElement::Literal(lit(&["p"])),
            &mut dq
        ));
    }

    #[test]
    fn span_checks() {
        assert!(check_span_equivalence(&b("{'01','10'}"), &b("{'10','01'}")).is_ok());
        assert!(check_span_equivalence(&b("std + {'0'}"), &b("{'0'} + std")).is_err());
        assert!(check_span_equivalence(&b("{'1'} + std"), &b("{'11','10'}")).is_ok());
        assert!(check_span_equivalence(&b("std + fourier[3]"), &b("fourier[3] + std")).is_ok());
        assert!(check_span_equivalence(&b("std[2]"), &b("std")).is_err());
        assert!(check_span_equivalence(&b("{'p'}"), &b("{'0'}")).is_err());
        assert!(check_span_equivalence(&b("{'0','1'}[64]"), &b("{'1','0'}[64]")).is_ok());
    }

    #[test]
    fn mismatch_message_names_elements() {
        let e = check_span_equivalence(&b("std + {'0'}"), &b("{'0'} + std")).unwrap_err();
        assert!(e.to_string().contains("{'0'}"), "{e}");
        let e = check_span_equivalence(&b("std[3]"), &b("std[2]")).unwrap_err();
        assert!(matches!(e, SpanError::Dimension { side: "left", .. }), "{e}");
    }
}
