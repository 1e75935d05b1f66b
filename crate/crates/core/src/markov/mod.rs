//! Reversible Markov chains, their Hamiltonians, slowly varying sequences
//! and the perfect-matchings Qsampling pipeline.

mod chain;
mod matchings;
mod sequence;

pub use chain::{
    chain_hamiltonian, metropolis_chain, padded_hamiltonian, pi_state, random_reversible_chain, second_gap, stationary,
    MarkovChain, NeighborGraph, StationaryDistribution, REVERSIBILITY_TOL, STOCHASTIC_TOL,
};
pub use matchings::{
    anneal_weights_sequence, complete_edges, format_edge_list, matchings_seed_qsample,
    matchings_space, parse_edge_list, project_perfect, Matching, MatchingSpace,
    PerfectProjection, MAX_MATCHING_SIDE,
};
pub use sequence::{
    check_slowly_varying, qsample_sequence, ChainSequence, QsampleMode, QsampleReport,
    SlowVariationReport,
};
