mod common;

use common::props::*;
use proptest::prelude::*;
use std::sync::OnceLock;

fn pool() -> &'static TracePool {
    static POOL: OnceLock<TracePool> = OnceLock::new();
    POOL.get_or_init(TracePool::new)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn d_squared_vanishes((s, b) in closed_braid(), f in field()) {
        check_d_squared(s, &b, f)?;
    }

    #[test]
    fn movie_maps_are_chain_maps((s, b) in closed_braid(), level in 0usize..20, at in 0usize..6, f in field()) {
        check_movie_maps(s, &b, level, at, f)?;
    }

    #[test]
    fn canonicalize_is_idempotent((loops, cobs) in raw_cobs(), f in field()) {
        check_canonicalize_idempotent(loops, &cobs, f)?;
    }

    #[test]
    fn elimination_order_is_irrelevant((s, b) in closed_braid(), seed in any::<u64>(), f in field()) {
        check_order_invariance(s, &b, seed, f)?;
    }

    #[test]
    fn reidemeister_moves_preserve_homology((s, b) in closed_braid(), mv in moves(), f in field()) {
        check_reidemeister(s, &b, &mv, f)?;
    }

    #[test]
    fn traces_of_commutators_agree((a, b, h, q, cf, cg) in trace_inputs(pool().complexes.len())) {
        check_trace_commutator(pool(), a, b, h, q, &cf, &cg)?;
    }

    #[test]
    fn far_one_handles_change_nothing((s, b, m, cancel) in handle_inputs()) {
        check_handle_independence(s, &b, m, cancel)?;
    }
}

#[test]
fn odd_degree_commutator_trace_sign() {
    check_trace_commutator(pool(), 4, 2, -1, 4, &[1, 0, 0, 0], &[1, 0, 0, 0]).unwrap();
}
