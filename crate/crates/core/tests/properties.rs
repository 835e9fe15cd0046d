use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbc::basis::check_span_equivalence;
use qbc::basis::oracle::spans_equal;
use qbc::circuit::peephole::peephole_wires;
use qbc::circuit::WOp;
use qbc::linalg::Matrix;
use qbc::sim::{circuit_unitary, exact_distribution, translation_unitary, unitary_of};
use qbc::synth::translation::lower_translation;
use qbc::testgen::{random_circuit, random_span_pair, random_translation};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn span_check_is_symmetric(seed in any::<u64>()) {
        let (a, b) = random_span_pair(&mut rng(seed), 3);
        prop_assert_eq!(check_span_equivalence(&a, &b).is_ok(), check_span_equivalence(&b, &a).is_ok());
    }

    #[test]
    fn span_check_is_reflexive(seed in any::<u64>()) {
        let (a, _) = random_span_pair(&mut rng(seed), 3);
        if spans_equal(&a, &a).unwrap_or(false) {
            prop_assert!(check_span_equivalence(&a, &a).is_ok(), "{}", a);
        }
    }

    #[test]
    fn translations_are_unitary(seed in any::<u64>()) {
        let (a, b) = random_translation(&mut rng(seed), 4, 2);
        let u = translation_unitary(&a, &b).unwrap();
        let id = Matrix::identity(u.rows);
        prop_assert!((&u.adjoint() * &u).max_abs_diff(&id) < 1e-9);
    }

    #[test]
    fn reversed_translation_is_the_inverse(seed in any::<u64>()) {
        let (a, b) = random_translation(&mut rng(seed), 4, 2);
        let fwd = unitary_of(&lower_translation(&a, &b).unwrap(), a.dim());
        let back = unitary_of(&lower_translation(&b, &a).unwrap(), a.dim());
        prop_assert!((&back * &fwd).max_abs_diff(&Matrix::identity(fwd.rows)) < 1e-9, "{} >> {}", a, b);
    }

    #[test]
    fn peephole_is_idempotent_in_effect(seed in any::<u64>(), n in 1usize..5, len in 0usize..40) {
        let w = random_circuit(&mut rng(seed), n, len);
        let once = peephole_wires(&w);
        let twice = peephole_wires(&once);
        prop_assert!(twice.gate_count() <= once.gate_count());
        prop_assert!(circuit_unitary(&twice).unwrap().max_abs_diff(&circuit_unitary(&w).unwrap()) < 1e-9);
    }

    #[test]
    fn distributions_sum_to_one(seed in any::<u64>(), n in 1usize..5, len in 0usize..30) {
        let mut w = random_circuit(&mut rng(seed), n, len);
        for q in std::mem::take(&mut w.ret_qubits) {
            w.ops.push(WOp::Measure { q, bit: w.num_bits });
            w.ret_bits.push(w.num_bits);
            w.num_bits += 1;
        }
        let total: f64 = exact_distribution(&w).unwrap().values().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
