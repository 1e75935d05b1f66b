use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use qgen_core::adiabatic::{projector_pair_gap, GateSequence};
use qgen_core::linalg::{random_sparse_hermitian, random_state, spectral_gap};
use qgen_core::markov::{format_edge_list, parse_edge_list, MarkovChain};
use qgen_core::seeding::rng_from_seed;
use qgen_core::sparse::{
    decompose, format_coordinate_list, parse_coordinate_list, RowTable, SparseHamiltonian,
};
use qgen_core::szk::{fidelity, variation, OutputDistribution};
use qgen_core::DenseHermitian;

fn distribution() -> impl Strategy<Value = OutputDistribution> {
    prop::collection::btree_map(0u64..16, 1u64..100, 1..16)
        .prop_map(|counts: BTreeMap<u64, u64>| OutputDistribution::from_counts(4, counts).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_sums_back(seed in any::<u64>(), n in 2u32..6, d in 1usize..5) {
        let h = random_sparse_hermitian(n, d, 1.0, seed).unwrap();
        let sh = SparseHamiltonian::new(Arc::new(RowTable::from_dense(&h)), d, 1.0).unwrap();
        let dim = h.dim();
        let mut total = DenseHermitian::zeros(dim);
        for piece in decompose(&sh).unwrap() {
            prop_assert!(piece.is_block_disjoint(dim));
            total = total.add(&piece.to_dense(dim)).unwrap();
        }
        prop_assert_eq!(total.matrix(), h.matrix());
    }

    #[test]
    fn pair_gap_matches_spectrum(seed in any::<u64>(), dim in 2usize..6, eta in 0.0f64..1.0) {
        let mut rng = rng_from_seed(seed);
        let a = random_state(dim, &mut rng);
        let b = random_state(dim, &mut rng);
        let h = DenseHermitian::projector_complement(&a)
            .lerp(&DenseHermitian::projector_complement(&b), eta)
            .unwrap();
        let overlap = a.overlap(&b).unwrap().norm();
        prop_assert!((spectral_gap(&h).unwrap() - projector_pair_gap(overlap, eta)).abs() < 1e-9);
    }

    #[test]
    fn fidelity_variation_sandwich(p in distribution(), q in distribution()) {
        let f = fidelity(&p, &q).unwrap();
        let v = variation(&p, &q).unwrap();
        prop_assert!(1.0 - f <= v + 1e-12);
        prop_assert!(v <= (1.0 - f * f).max(0.0).sqrt() + 1e-12);
    }

    #[test]
    fn edge_lists_round_trip(edges in prop::collection::vec((0usize..8, 0usize..8), 0..12)) {
        prop_assert_eq!(parse_edge_list(&format_edge_list(&edges)).unwrap(), edges);
    }

    #[test]
    fn coordinate_lists_round_trip(seed in any::<u64>(), n in 1u32..4) {
        let h = random_sparse_hermitian(n, 2, 1.0, seed).unwrap();
        let back = parse_coordinate_list(&format_coordinate_list(&h)).unwrap();
        prop_assert!((back.matrix() - h.matrix()).norm() < 1e-12);
    }

    #[test]
    fn chains_round_trip(rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 3)) {
        let m = nalgebra::DMatrix::from_fn(3, 3, |i, j| rows[i][j] / rows[i].iter().sum::<f64>());
        let chain = MarkovChain::new(m).unwrap();
        let back = MarkovChain::parse(&chain.format()).unwrap();
        prop_assert!((back.transition() - chain.transition()).norm() < 1e-12);
    }

    #[test]
    fn doubled_circuits_agree(gates in prop::collection::vec(0u8..4, 1..6), x in 0usize..4) {
        let text: String = std::iter::once("qubits 3\n".to_string())
            .chain(gates.iter().map(|g| match g {
                0 => "H 0\n".to_string(),
                1 => "X 1\n".to_string(),
                2 => "CCX 0 1 2\n".to_string(),
                _ => "H 2\n".to_string(),
            }))
            .collect();
        let seq = GateSequence::parse(&text).unwrap();
        let psi = qgen_core::StateVector::basis(8, x);
        let plain = seq.apply(&psi).unwrap();
        let doubled = seq.doubled().unwrap().apply(&psi).unwrap();
        prop_assert!(plain.max_abs_diff(&doubled) < 1e-12);
        let reparsed = GateSequence::parse(&seq.format()).unwrap();
        prop_assert_eq!(reparsed.gates(), seq.gates());
    }
}
