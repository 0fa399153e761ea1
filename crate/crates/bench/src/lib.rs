//! Shared inputs for the engine benchmarks.

use pilp_core::harness::{synth_generate, vehicle_on_bridge, SceneConfig, TaskBundle, Tier};
use pilp_core::HypothesisProgram;

/// A synthetic task with `n` examples per class.
pub fn scene_task(tier: Tier, n: usize, seed: u64) -> TaskBundle {
    synth_generate(&SceneConfig::tier(tier, seed), n, n).expect("synthetic task")
}

pub fn target() -> HypothesisProgram {
    vehicle_on_bridge()
}

/// The target plus a second clause, so disjunction and normalization run.
pub fn two_clause_program() -> HypothesisProgram {
    pilp_core::parser::parse_program(
        "f(A) :- has_object(A,B), vehicle(B), is_on(B,C), bridge(C).\n\
         f(A) :- has_object(A,B), vehicle(B), is_close(B,C), road(C).",
    )
    .expect("valid program")
}
