// SPDX-License-Identifier: Apache-2.0
//! Output distributions and the quantities measured on them.

mod collision;
mod distribution;
mod entropy;
mod hamming;
mod measurement;

pub use collision::{
    collision_probability, collision_stat, forest_event_probability, has_collision,
    prob_at_least_two, symbol_collision_probs, tv_lower_bound_via_collision, CollisionSource,
    IndependentEnsemble,
};
pub use distribution::{
    output_distribution, output_distribution_in, pairwise_sum, sampled_distribution,
    tv_distance, Distribution,
};
pub use entropy::{conditional_entropy, entropy, entropy_of_pmf, BetaEntropy, ConditionalEntropy};
pub use hamming::{
    distance_map, hamming_dist_to_set, hamming_distance, neighborhood, pack, unpack, OutcomeSet,
    SetKind,
};
pub use measurement::Measurement;
