//! Brute-force materialization of bases as complex vectors. Exponential in the
//! dimension; used only as a test oracle.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{Basis, BasisElement, BasisVector, Prim};
use crate::linalg::{kron_vec, orthonormalize, projector, Matrix, C64, ONE, ZERO};

pub const MAX_ORACLE_DIM: usize = 10;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("basis of dimension {0} is too large for the oracle (limit {MAX_ORACLE_DIM})")]
    TooLarge(usize),
    #[error("padding has no vectors")]
    Padding,
}

/// The single-qubit state for one eigenbit of a primitive basis.
pub fn qubit_state(prim: Prim, minus: bool) -> [C64; 2] {
    let h = FRAC_1_SQRT_2;
    let s = if minus { -1.0 } else { 1.0 };
    match prim {
        Prim::Std => {
            if minus {
                [ZERO, ONE]
            } else {
                [ONE, ZERO]
            }
        }
        Prim::Pm | Prim::Fourier => [C64::new(h, 0.0), C64::new(s * h, 0.0)],
        Prim::Ij => [C64::new(h, 0.0), C64::new(0.0, s * h)],
    }
}

pub fn vector_state(v: &BasisVector) -> Vec<C64> {
    let mut out = vec![ONE];
    for &b in &v.eigenbits {
        out = kron_vec(&out, &qubit_state(v.prim, b));
    }
    if let Some(theta) = v.phase {
        let ph = C64::from_polar(1.0, theta);
        out.iter_mut().for_each(|x| *x *= ph);
    }
    out
}

/// Column k of the N-qubit discrete Fourier transform:
/// (1/sqrt(2^N)) * sum_j exp(2 pi i j k / 2^N) |j>.
pub fn fourier_state(n: usize, k: usize) -> Vec<C64> {
    let dim = 1usize << n;
    let norm = 1.0 / (dim as f64).sqrt();
    (0..dim)
        .map(|j| C64::from_polar(norm, 2.0 * PI * ((j * k) % dim) as f64 / dim as f64))
        .collect()
}

/// All vectors of an element in basis order, phases included.
pub fn element_vectors(e: &BasisElement) -> Result<Vec<Vec<C64>>, OracleError> {
    if e.dim() > MAX_ORACLE_DIM {
        return Err(OracleError::TooLarge(e.dim()));
    }
    Ok(match e {
        BasisElement::Builtin { prim: Prim::Fourier, dim } => (0..1usize << dim).map(|k| fourier_state(*dim, k)).collect(),
        BasisElement::Builtin { prim, dim } => (0..1usize << dim)
            .map(|k| vector_state(&BasisVector::new(*prim, super::index_to_bits(k, *dim))))
            .collect(),
        BasisElement::Literal(l) => l.vectors.iter().map(vector_state).collect(),
        BasisElement::Padding(_) => return Err(OracleError::Padding),
    })
}

/// All vectors of a basis: tensor products over elements, first element
/// varying slowest.
pub fn basis_vectors(b: &Basis) -> Result<Vec<Vec<C64>>, OracleError> {
    if b.dim() > MAX_ORACLE_DIM {
        return Err(OracleError::TooLarge(b.dim()));
    }
    let mut acc: Vec<Vec<C64>> = vec![vec![ONE]];
    for e in &b.elements {
        let vs = element_vectors(e)?;
        acc = acc.iter().flat_map(|a| vs.iter().map(move |v| kron_vec(a, v))).collect();
    }
    Ok(acc)
}

/// An orthonormal set of columns spanning span(b).
pub fn span_oracle(b: &Basis) -> Result<Matrix, OracleError> {
    let vs = basis_vectors(b)?;
    let on = orthonormalize(&vs, 1e-9);
    Ok(Matrix::from_columns(1 << b.dim(), &on))
}

pub fn span_projector(b: &Basis) -> Result<Matrix, OracleError> {
    let on = orthonormalize(&basis_vectors(b)?, 1e-9);
    Ok(projector(1 << b.dim(), &on))
}

/// Span equality by projector comparison.
pub fn spans_equal(a: &Basis, b: &Basis) -> Result<bool, OracleError> {
    if a.dim() != b.dim() {
        return Ok(false);
    }
    Ok(span_projector(a)?.max_abs_diff(&span_projector(b)?) <= 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::parse_basis;

    fn proj(s: &str) -> Matrix {
        span_projector(&parse_basis(s).unwrap()).unwrap()
    }

    #[test]
    fn projectors() {
        assert!(proj("{'0','1'}").max_abs_diff(&Matrix::identity(2)) < 1e-12);
        let plus = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)];
        let expect = projector(2, &[plus.to_vec()]);
        assert!(proj("{'p'}").max_abs_diff(&expect) < 1e-12);
        assert!(proj("fourier[2]").max_abs_diff(&Matrix::identity(4)) < 1e-12);
    }

    #[test]
    fn fourier_one_is_pm() {
        let f = element_vectors(&BasisElement::builtin(Prim::Fourier, 1)).unwrap();
        let p = element_vectors(&BasisElement::builtin(Prim::Pm, 1)).unwrap();
        for (a, b) in f.iter().zip(&p) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_spans() {
        let ok = |a: &str, b: &str| spans_equal(&parse_basis(a).unwrap(), &parse_basis(b).unwrap()).unwrap();
        assert!(!ok("std + {'0'}", "{'0'} + std"));
        assert!(ok("{'1'} + std", "{'11','10'}"));
        assert!(ok("std + fourier[3]", "fourier[3] + std"));
        assert!(ok("{'i','j'}", "pm"));
        assert!(!ok("{'00','11'}", "std + {'0'}"));
    }

    #[test]
    fn vectors_orthonormal() {
        let b = parse_basis("{'pm','mp'@1.0} + fourier[2] + ij").unwrap();
        let vs = basis_vectors(&b).unwrap();
        for (i, u) in vs.iter().enumerate() {
            for (j, v) in vs.iter().enumerate() {
                let ip = crate::linalg::inner(u, v);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}
