//! Gate synthesis for a single basis translation.
//!
//! Layout, outermost first: unconditional (de)standardization, conditional
//! (de)standardization, input phases removed, permutations, output phases
//! added. Every layer inside the unconditional one acts only on std vectors
//! whose components lie in the span of each non-fully-spanning aligned pair;
//! outside that span the translation is the identity.

use super::align::{align, element_bits, AlignedPair, PairKind};
use super::perm::synth_permutation;
use super::standardize::{emit_standardization, plan_standardization, regions, Conditionality, Direction};
use super::SynthError;
use crate::basis::{Basis, BasisElement};
use crate::circuit::peephole::phase_gate;
use crate::circuit::{Gate, GateOp};

/// Largest number of control patterns one translation may expand into.
pub const MAX_PATTERNS: usize = 4096;

/// A partial assignment of std values to qubits, used as a control.
pub type Pattern = Vec<(usize, bool)>;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTuple {
    pub eigenbits: Vec<bool>,
    pub theta: f64,
    pub offset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseSign {
    /// Removes input phases: P(-theta).
    Input,
    /// Adds output phases: P(+theta).
    Output,
}

pub fn collect_vector_phases(b: &Basis) -> Vec<PhaseTuple> {
    let mut out = Vec::new();
    let mut offset = 0;
    for e in &b.elements {
        if let BasisElement::Literal(l) = e {
            for v in &l.vectors {
                if let Some(theta) = v.phase {
                    out.push(PhaseTuple { eigenbits: v.eigenbits.clone(), theta, offset });
                }
            }
        }
        offset += e.dim();
    }
    out
}

/// Combines two partial assignments, or `None` if they disagree.
pub fn merge_patterns(a: &Pattern, b: &Pattern) -> Option<Pattern> {
    let mut out = a.clone();
    for &(q, v) in b {
        match out.iter().find(|(p, _)| *p == q) {
            Some(&(_, w)) if w != v => return None,
            Some(_) => {}
            None => out.push((q, v)),
        }
    }
    out.sort_unstable();
    Some(out)
}

/// `gates` controlled on `pat`, with zero values realized by X conjugation.
pub fn controlled_on(gates: &[GateOp], pat: &Pattern) -> Vec<GateOp> {
    if pat.is_empty() || gates.is_empty() {
        return gates.to_vec();
    }
    let flips: Vec<GateOp> = pat.iter().filter(|(_, v)| !v).map(|&(q, _)| GateOp::single(Gate::X, q)).collect();
    let ctrls: Vec<usize> = pat.iter().map(|&(q, _)| q).collect();
    let mut out = flips.clone();
    out.extend(gates.iter().cloned().map(|g| g.with_controls(&ctrls)));
    out.extend(flips);
    out
}

/// One X-conjugated multi-controlled P per tuple and condition pattern.
/// `conds` lists alternative conditions; `[[]]` means unconditional.
pub fn emit_vector_phases(tuples: &[PhaseTuple], sign: PhaseSign, conds: &[Pattern]) -> Vec<GateOp> {
    let mut out = Vec::new();
    for t in tuples {
        let theta = match sign {
            PhaseSign::Input => -t.theta,
            PhaseSign::Output => t.theta,
        };
        let Some(gate) = phase_gate(theta) else { continue };
        let own: Pattern = t.eigenbits.iter().enumerate().map(|(k, &b)| (t.offset + k, b)).collect();
        let mut seen: Vec<Pattern> = Vec::new();
        for c in conds {
            let Some(full) = merge_patterns(&own, c) else { continue };
            if seen.contains(&full) {
                continue;
            }
            seen.push(full.clone());
            let target = *full.iter().map(|(q, _)| q).max().unwrap();
            let target_val = full.iter().find(|(q, _)| *q == target).unwrap().1;
            let rest: Pattern = full.iter().copied().filter(|(q, _)| *q != target).collect();
            let mut core = Vec::new();
            if !target_val {
                core.push(GateOp::single(Gate::X, target));
            }
            core.push(GateOp::single(gate, target));
            if !target_val {
                core.push(GateOp::single(Gate::X, target));
            }
            out.extend(controlled_on(&core, &rest));
        }
    }
    out
}

fn cartesian(sets: &[Vec<Pattern>]) -> Result<Vec<Pattern>, SynthError> {
    let mut acc: Vec<Pattern> = vec![vec![]];
    for set in sets {
        if acc.len() * set.len() > MAX_PATTERNS {
            return Err(SynthError::TooLarge { what: "predicate pattern count", dim: acc.len() * set.len(), limit: MAX_PATTERNS });
        }
        acc = acc.iter().flat_map(|a| set.iter().map(move |p| [a.clone(), p.clone()].concat())).collect();
    }
    for p in &mut acc {
        p.sort_unstable();
    }
    Ok(acc)
}

struct PairInfo {
    pair: AlignedPair,
    start: usize,
}

impl PairInfo {
    fn qubits(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.pair.dim()
    }

    /// One pattern per vector of a non-fully-spanning pair.
    fn membership(&self) -> Result<Vec<Pattern>, SynthError> {
        Ok(element_bits(&self.pair.input)?
            .into_iter()
            .map(|bits| bits.into_iter().enumerate().map(|(k, b)| (self.start + k, b)).collect())
            .collect())
    }
}

fn bits_index(bits: &[bool]) -> usize {
    crate::basis::bits_to_index(bits)
}

fn pair_permutation(p: &PairInfo) -> Result<Vec<GateOp>, SynthError> {
    let n = p.pair.dim();
    let ins = element_bits(&p.pair.input)?;
    let outs = element_bits(&p.pair.output)?;
    let swap_in = [vec![false, true], vec![true, false]];
    if n == 2 && ins.len() == 2 && ins == swap_in && outs == [swap_in[1].clone(), swap_in[0].clone()] {
        return Ok(vec![GateOp::new(Gate::Swap, vec![], vec![p.start, p.start + 1])]);
    }
    if n > super::perm::DEFAULT_MAX_BITS {
        return Err(SynthError::TooLarge { what: "permutation", dim: n, limit: super::perm::DEFAULT_MAX_BITS });
    }
    let mut table: Vec<usize> = (0..1usize << n).collect();
    for (a, b) in ins.iter().zip(&outs) {
        table[bits_index(a)] = bits_index(b);
    }
    Ok(synth_permutation(&table, n)?.into_iter().map(|g| g.remap(|q| q + p.start)).collect())
}

/// A synthesized translation split into the unconditional conjugation and the
/// core it conjugates. Controlling the core alone controls the translation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TranslationGates {
    pub prologue: Vec<GateOp>,
    pub core: Vec<GateOp>,
    pub epilogue: Vec<GateOp>,
}

impl TranslationGates {
    pub fn all(&self) -> Vec<GateOp> {
        [self.prologue.clone(), self.core.clone(), self.epilogue.clone()].concat()
    }

    /// All gates with `ctrls` added to the core.
    pub fn controlled(&self, ctrls: &[usize]) -> Vec<GateOp> {
        let mut out = self.prologue.clone();
        out.extend(self.core.iter().cloned().map(|g| g.with_controls(ctrls)));
        out.extend(self.epilogue.iter().cloned());
        out
    }
}

/// Synthesizes `b_in >> b_out` over qubits `0..dim`.
pub fn synthesize_translation(b_in: &Basis, b_out: &Basis) -> Result<TranslationGates, SynthError> {
    if b_in.dim() != b_out.dim() {
        return Err(SynthError::Internal(format!("translation sides differ in dimension: {b_in} >> {b_out}")));
    }
    let (lstd, rstd) = plan_standardization(b_in, b_out);
    let mut pairs = Vec::new();
    let mut start = 0;
    for pair in align(b_in, b_out)? {
        let d = pair.dim();
        pairs.push(PairInfo { pair, start });
        start += d;
    }
    let partial: Vec<&PairInfo> = pairs.iter().filter(|p| !p.pair.fully_spans()).collect();
    let left_u = regions(&lstd, Conditionality::Unconditional);
    let right_u = regions(&rstd, Conditionality::Unconditional);
    for p in &partial {
        if p.qubits().any(|q| !left_u.contains(&q) || !right_u.contains(&q)) {
            return Err(SynthError::Internal(format!(
                "predicate qubits of {b_in} >> {b_out} are not unconditionally standardized"
            )));
        }
    }
    let memberships: Vec<Vec<Pattern>> = partial.iter().map(|p| p.membership()).collect::<Result<_, _>>()?;
    let conds = cartesian(&memberships)?;

    let mut core = Vec::new();
    let c_in = emit_standardization(&lstd, Conditionality::Conditional, Direction::StdWard, 0);
    for c in &conds {
        core.extend(controlled_on(&c_in, c));
    }
    core.extend(emit_vector_phases(&collect_vector_phases(b_in), PhaseSign::Input, &conds));
    for (idx, p) in pairs.iter().enumerate() {
        let needs_perm = match p.pair.kind {
            PairKind::Predicate => false,
            PairKind::Permutation | PairKind::PartialPermutation => !p.pair.is_identity(),
        };
        if !needs_perm {
            continue;
        }
        let gates = pair_permutation(p)?;
        let others: Vec<Vec<Pattern>> = partial
            .iter()
            .zip(&memberships)
            .filter(|(q, _)| !std::ptr::eq(**q, &pairs[idx]))
            .map(|(_, m)| m.clone())
            .collect();
        for c in cartesian(&others)? {
            core.extend(controlled_on(&gates, &c));
        }
    }
    core.extend(emit_vector_phases(&collect_vector_phases(b_out), PhaseSign::Output, &conds));
    let c_out = emit_standardization(&rstd, Conditionality::Conditional, Direction::PrimWard, 0);
    for c in &conds {
        core.extend(controlled_on(&c_out, c));
    }
    Ok(TranslationGates {
        prologue: emit_standardization(&lstd, Conditionality::Unconditional, Direction::StdWard, 0),
        core,
        epilogue: emit_standardization(&rstd, Conditionality::Unconditional, Direction::PrimWard, 0),
    })
}

/// Gate list for `b_in >> b_out` over qubits `0..dim`.
pub fn lower_translation(b_in: &Basis, b_out: &Basis) -> Result<Vec<GateOp>, SynthError> {
    Ok(synthesize_translation(b_in, b_out)?.all())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{translation_unitary, unitary_of};

    fn check(a: &str, b: &str) -> Vec<GateOp> {
        let (bi, bo): (Basis, Basis) = (a.parse().unwrap(), b.parse().unwrap());
        let gates = lower_translation(&bi, &bo).unwrap();
        let got = unitary_of(&gates, bi.dim());
        let want = translation_unitary(&bi, &bo).unwrap();
        let d = got.max_abs_diff(&want);
        assert!(d <= 1e-9, "{a} >> {b}: diff {d}\n{gates:?}");
        gates
    }

    #[test]
    fn named_cases() {
        let g = check("{'01','10'}", "{'10','01'}");
        assert_eq!(g, vec![GateOp::new(Gate::Swap, vec![], vec![0, 1])]);
        check("{'p','m'} + ij", "{'p','m'} + pm");
        check("std + fourier[3]", "fourier[3] + std");
        check("{'1'} + std", "{'11','10'}");
        check("{'0','1'} + {'0','1'}", "{'00','10','01','11'}");
        check("{'1'@pi}", "{'1'}");
        check("{'mmm'@pi}", "{'mmm'}");
        check("std", "pm");
        check("ij[2]", "fourier[2]");
        check("{'p'@(pi/2)} + {'0','1'}", "{'p'} + {'1'@(pi/4),'0'}");
    }

    #[test]
    fn collects_phases() {
        let b: Basis = "std + {'1'@(pi/2)}".parse().unwrap();
        let t = collect_vector_phases(&b);
        assert_eq!(t, vec![PhaseTuple { eigenbits: vec![true], theta: std::f64::consts::PI / 2.0, offset: 1 }]);
        assert!(collect_vector_phases(&"std[3]".parse().unwrap()).is_empty());
    }

    #[test]
    fn toffoli_from_predicates() {
        let g = check("{'1'} + std", "{'1'} + {'1','0'}");
        assert_eq!(g, vec![GateOp::new(Gate::X, vec![0], vec![1])]);
    }

    #[test]
    fn random_translations_match_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let (a, b) = crate::testgen::random_translation(&mut rng, 4, 2);
            let gates = lower_translation(&a, &b).unwrap_or_else(|e| panic!("{a} >> {b}: {e}"));
            let d = unitary_of(&gates, a.dim()).max_abs_diff(&translation_unitary(&a, &b).unwrap());
            assert!(d <= 1e-9, "{a} >> {b}: diff {d}");
        }
    }
}
