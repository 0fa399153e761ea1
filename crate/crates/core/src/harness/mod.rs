//! Task files, synthetic data, learning and evaluation runs, and sweeps.

pub mod bundle;
pub mod run;
pub mod sweep;
pub mod synth;

pub use bundle::TaskBundle;
pub use run::{
    eval_program, learn_bundle, read_metrics, result_file_text, run_eval, run_learn, EvalReport, LearnMetrics, LearnOutcome,
    EXIT_INPUT, EXIT_NO_SOLUTION, EXIT_OK,
};
pub use sweep::{run_sweep, SweepCell, SweepConfig, SweepRecord, SweepReport};
pub use synth::{synth_generate, vehicle_on_bridge, DetectorNoise, SceneConfig, Tier};
