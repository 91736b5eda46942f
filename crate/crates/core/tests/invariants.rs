use proptest::prelude::*;

use crt_subaging::cli_harness::derive_stream;
use crt_subaging::crt_limit::{
    evolve_marks, init_marks, partition_from_marks, sample_block_sizes, sample_reduced_tree, MarkSet,
};
use crt_subaging::dynamic_forest::naive_ranked_masses;
use crt_subaging::frag_coag_chain::{MarkChainState, RootedForestState};
use crt_subaging::random_trees::{prufer_decode, prufer_encode, sample_uniform_tree};
use crt_subaging::urn_model::UrnState;

fn prufer_input() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (2usize..40).prop_flat_map(|n| (Just(n), prop::collection::vec(1..=n, n - 2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prufer_encode_inverts_decode((n, seq) in prufer_input()) {
        let tree = prufer_decode(&seq, n).unwrap();
        prop_assert_eq!(prufer_encode(&tree).unwrap(), seq);
    }

    #[test]
    fn chain_components_track_marks(n in 2usize..60, seed in any::<u64>(), steps in 0u64..400) {
        let mut rng = derive_stream(seed, 0);
        let tree = sample_uniform_tree(n, &mut rng).unwrap();
        let mut chain = MarkChainState::new(tree.clone());
        chain.run_until(steps, &mut rng).unwrap();
        prop_assert_eq!(chain.marked().len(), chain.mark_count());
        prop_assert_eq!(chain.marked().len() + chain.unmarked().len(), n - 1);
        let forest = chain.forest();
        prop_assert_eq!(forest.component_count(), chain.mark_count() + 1);
        let masses = forest.ranked_masses();
        prop_assert!((masses.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert_eq!(masses, naive_ranked_masses(&tree, chain.marked()).unwrap());
    }

    #[test]
    fn urn_conserves_balls(n in 1usize..50, seed in any::<u64>(), steps in 0u64..300) {
        let mut rng = derive_stream(seed, 0);
        let mut urn = UrnState::new(n).unwrap();
        urn.run_until(steps, &mut rng).unwrap();
        prop_assert_eq!(urn.step_count(), steps);
        prop_assert_eq!(urn.balls_in_b().len(), urn.count_b());
        prop_assert!(urn.count_b() <= n);
    }

    #[test]
    fn spr_forest_stays_valid(n in 1usize..40, seed in any::<u64>(), steps in 0usize..300) {
        let mut rng = derive_stream(seed, 0);
        let mut state = RootedForestState::singletons(n).unwrap();
        for _ in 0..steps {
            state.step(&mut rng);
        }
        prop_assert!(state.check_invariants().is_ok());
        prop_assert_eq!(state.tree_count() + state.edge_count(), n);
        prop_assert_eq!(state.component_sizes().iter().sum::<usize>(), n);
    }

    #[test]
    fn evolve_keeps_survivor_ids(i in 2usize..12, r in 0.1f64..4.0, delta in 0.0f64..3.0, seed in any::<u64>()) {
        let mut rng = derive_stream(seed, 0);
        let tree = sample_reduced_tree(i, &mut rng).unwrap();
        let before = init_marks(&tree, r, &mut rng).unwrap();
        let after = evolve_marks(&tree, &before, r, delta, &mut rng).unwrap();
        for a in after.atoms() {
            match before.atoms().iter().find(|b| b.id == a.id) {
                Some(b) => prop_assert_eq!(b, a),
                None => prop_assert!(a.id >= before.next_id()),
            }
        }
        prop_assert!(after.next_id() >= before.next_id());
        prop_assert_eq!(after.counts_per_edge().iter().sum::<usize>(), after.len());
    }

    #[test]
    fn more_marks_refine_partition(i in 2usize..12, r in 0.1f64..4.0, seed in any::<u64>()) {
        let mut rng = derive_stream(seed, 0);
        let tree = sample_reduced_tree(i, &mut rng).unwrap();
        let all = init_marks(&tree, r, &mut rng).unwrap();
        let half: Vec<(usize, f64)> = all.atoms().iter().step_by(2).map(|a| (a.edge, a.position)).collect();
        let fewer = MarkSet::from_positions(&tree, &half).unwrap();
        let fine = partition_from_marks(&tree, &all).unwrap();
        let coarse = partition_from_marks(&tree, &fewer).unwrap();
        prop_assert!(fine.refines(&coarse));
        prop_assert_eq!(fine.block_sizes().iter().sum::<usize>(), i);
        prop_assert!(fine.blocks().len() <= all.len() + 1);
    }

    #[test]
    fn line_breaking_sizes_partition_leaves(leaves in 2usize..300, r in 0.1f64..5.0, seed in any::<u64>()) {
        let sizes = sample_block_sizes(leaves, r, &mut derive_stream(seed, 0)).unwrap();
        prop_assert!(sizes.iter().all(|&s| s > 0));
        prop_assert_eq!(sizes.iter().sum::<usize>(), leaves);
    }
}
