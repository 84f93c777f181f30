// SPDX-License-Identifier: Apache-2.0
//! Verifiers for finite instances of the inequalities used in the lower bound.
//!
//! Each verifier returns an [`ExperimentReport`] whose status says whether
//! the measured value satisfies the bound within [`crate::TOLERANCE`].

pub mod claims;
pub mod corpus;
pub mod coupling;
pub mod entropy_checks;
pub mod lipschitz;
pub mod reduction;
pub mod report;

pub use claims::{
    collision_ensemble_report, verify_at_least_two, verify_harper, verify_light_mass,
    verify_power_bound, verify_ratio_bound,
};
pub use corpus::{run_corpus, run_instance, standard_corpora, CorpusConfig, CorpusSpec, Family};
pub use coupling::{
    acceptance, couple_report, couple_sample, coupling_stats, optimal_coupling, CouplingSample,
    CouplingStats,
};
pub use entropy_checks::{
    containment_set, query_count_laws, verify_avg_to_tail, verify_chain_bound,
    verify_entropy_deviation, verify_mixture_bound, verify_second_moment_tail,
};
pub use lipschitz::{
    enforce_avg_lipschitz, enforcement_depth_budget, trace_is_sound, verify_enforcement,
    verify_lipschitz_after_conditioning, AssignmentSampler, RestrictionStep, RestrictionTrace,
};
pub use reduction::{bucketed_dichotomy_experiment, depth_reduction_step, DepthReduction, DepthReductionStats};
pub use report::{ExperimentReport, Relation, Status};
