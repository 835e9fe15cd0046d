//! Width checking of classical functions and their translation to logic
//! networks.

use std::collections::HashMap;

use super::ast::*;
use super::diag::Diagnostic;
use crate::synth::classical::{LogicNetwork, NodeId};

type CResult<T> = Result<T, Diagnostic>;

fn dim_const(d: &DimExpr, span: Span) -> CResult<usize> {
    match d {
        DimExpr::Const(n) if *n >= 0 => Ok(*n as usize),
        _ => Err(Diagnostic::error(span, "dimension is not a non-negative constant")),
    }
}

/// Width of a declared bit type.
pub fn bit_width(t: &TypeExpr, span: Span) -> CResult<usize> {
    match t {
        TypeExpr::Bit(d) => dim_const(d, span),
        TypeExpr::Qubit(_) => Err(Diagnostic::error(span, "classical functions operate on bits, not qubits")),
        TypeExpr::Angle => Err(Diagnostic::error(span, "classical functions cannot use angles")),
    }
}

struct Lowerer<'a> {
    net: LogicNetwork,
    env: HashMap<&'a str, Vec<NodeId>>,
}

impl<'a> Lowerer<'a> {
    fn expr(&mut self, e: &'a CExpr) -> CResult<Vec<NodeId>> {
        let span = e.span;
        Ok(match &e.kind {
            CExprKind::Var(v) => {
                self.env.get(v.as_str()).cloned().ok_or_else(|| Diagnostic::error(span, format!("unknown name '{v}'")))?
            }
            CExprKind::Bits(b) => b.iter().map(|&x| self.net.constant(x)).collect(),
            CExprKind::Not(a) => {
                let a = self.expr(a)?;
                a.into_iter().map(|x| self.net.not(x)).collect()
            }
            CExprKind::Bin(op, a, b) => {
                let (a, b) = (self.expr(a)?, self.expr(b)?);
                if a.len() != b.len() {
                    return Err(Diagnostic::error(span, format!("operands have {} and {} bits", a.len(), b.len())));
                }
                let f = match op {
                    BitOp::And => LogicNetwork::and,
                    BitOp::Or => LogicNetwork::or,
                    BitOp::Xor => LogicNetwork::xor,
                };
                a.into_iter().zip(b).map(|(x, y)| f(&mut self.net, x, y)).collect()
            }
            CExprKind::Concat(a, b) => {
                let mut a = self.expr(a)?;
                a.extend(self.expr(b)?);
                a
            }
            CExprKind::Index(a, i) => {
                let a = self.expr(a)?;
                let i = dim_const(i, span)?;
                let x = *a.get(i).ok_or_else(|| Diagnostic::error(span, format!("index {i} is out of range for {} bits", a.len())))?;
                vec![x]
            }
            CExprKind::Slice(a, lo, hi) => {
                let a = self.expr(a)?;
                let (lo, hi) = (dim_const(lo, span)?, dim_const(hi, span)?);
                if lo >= hi || hi > a.len() {
                    return Err(Diagnostic::error(span, format!("slice [{lo}:{hi}] is invalid for {} bits", a.len())));
                }
                a[lo..hi].to_vec()
            }
            CExprKind::Reduce(r, a) => {
                let a = self.expr(a)?;
                let x = match r {
                    Reduce::Xor => self.net.reduce(&a, false, LogicNetwork::xor),
                    Reduce::And => self.net.reduce(&a, true, LogicNetwork::and),
                    Reduce::Or => self.net.reduce(&a, false, LogicNetwork::or),
                };
                vec![x]
            }
            CExprKind::Repeat(a, n) => {
                let a = self.expr(a)?;
                let n = dim_const(n, span)?;
                if n == 0 {
                    return Err(Diagnostic::error(span, "repeat count must be positive"));
                }
                a.repeat(n)
            }
        })
    }
}

/// Checks widths and builds the network of an expanded classical function.
/// Inputs are the parameters concatenated in order; captures are constants.
pub fn build_network(c: &ClassicalFn) -> CResult<LogicNetwork> {
    let widths: Vec<usize> = c.params.iter().map(|p| bit_width(&p.ty, p.span)).collect::<CResult<_>>()?;
    let mut lw = Lowerer { net: LogicNetwork::new(widths.iter().sum()), env: HashMap::new() };
    let mut next = 0;
    for (p, w) in c.params.iter().zip(&widths) {
        let ids = (next..next + w).map(|i| lw.net.input(i)).collect();
        next += w;
        if lw.env.insert(&p.name, ids).is_some() {
            return Err(Diagnostic::error(p.span, format!("duplicate parameter '{}'", p.name)));
        }
    }
    for cap in &c.captures {
        let bits = match &cap.value {
            CaptureValue::Bits(b) => b,
            CaptureValue::Angle(_) => return Err(Diagnostic::error(cap.span, "classical functions cannot capture angles")),
        };
        let ids = bits.iter().map(|&b| lw.net.constant(b)).collect();
        if lw.env.insert(&cap.name, ids).is_some() {
            return Err(Diagnostic::error(cap.span, format!("capture '{}' shadows a parameter", cap.name)));
        }
    }
    let outs = lw.expr(&c.body)?;
    let ret = bit_width(&c.ret, c.span)?;
    if outs.len() != ret {
        return Err(Diagnostic::error(
            c.body.span,
            format!("'{}' is declared to return bit[{ret}] but its body has {} bits", c.name, outs.len()),
        ));
    }
    if ret == 0 {
        return Err(Diagnostic::error(c.span, "classical functions must return at least one bit"));
    }
    lw.net.outputs = outs;
    Ok(lw.net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::expand::expand;
    use crate::frontend::parser::parse;
    use std::collections::BTreeMap;

    fn network(src: &str, name: &str) -> Result<LogicNetwork, Diagnostic> {
        let p = expand(&parse(src).unwrap(), &BTreeMap::new()).unwrap();
        build_network(p.classical(name).unwrap())
    }

    #[test]
    fn inner_product() {
        let src = "classical f[N](x: bit[N]) -> bit captures(s: bit[N] = bit'101') { (x & s).xor_reduce() }
                   qpu main() -> bit[3] { 'p'[3] | f.sign | pm[3].measure }";
        let net = network(src, "f__3").unwrap();
        for x in 0..8usize {
            let bits: Vec<bool> = (0..3).map(|i| x >> (2 - i) & 1 == 1).collect();
            assert_eq!(net.eval(&bits), vec![bits[0] ^ bits[2]]);
        }
    }

    #[test]
    fn width_errors() {
        let src = "classical f(x: bit[3], y: bit[2]) -> bit[2] { x ^ y }
                   qpu main() -> bit[5] { '0'[5] | f.xor | std[5].measure }";
        let e = network(src, "f").unwrap_err();
        assert!(e.message.contains("3 and 2 bits"), "{}", e.message);
        let src = "classical f(x: bit[3]) -> bit[2] { x[1:3] + x[0] }
                   qpu main() -> bit[5] { '0'[5] | f.xor | std[5].measure }";
        assert!(network(src, "f").unwrap_err().message.contains("body has 3 bits"));
    }
}
