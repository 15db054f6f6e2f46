//! Permutation groups: stabilizer chains, tuple actions, blocks and classification.

mod action;
mod chain;
mod permutation;
mod report;

pub use action::{
    all_minimal_candidates, block_systems, check_tuple_feasible, falling_factorial,
    is_primitive_higman, is_s_transitive, orbit_graphs, orbit_sizes, orbits_on_tuples,
    OrbitGraph, TUPLE_STATE_LIMIT,
};
pub use chain::{factorial, point_orbits, wreath_s2_order, PermutationGroup, StabilizerChain};
pub use permutation::{parse_permutation_list, Permutation};
pub use report::{classify, transitivity_degree, Classification, GroupReport};
