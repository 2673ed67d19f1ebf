//! Compiling TILING instances into two-agent models, and the lifts that add
//! a state-observing agent.

mod compile;
mod dfa;
mod lift;
mod product;

pub use compile::{
    compile_tiling_to_decpomdp, observed_position, tiling_to_local_policy, ReductionArtifact, ReductionMetadata,
    StateFlags, NOOP, OBSERVATIONS,
};
pub use dfa::{build_component_dfas, dfa_run, grid_bits, ComponentDfa, DfaKind};
pub use lift::{lift_pomdp_to_two_agent_decmdp, lift_to_three_agent_decmdp, lift_with_observer};
pub use product::{build_product_machine, ComponentFlags, ProductMachine};
