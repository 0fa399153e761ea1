//! Inductive logic programming over probabilistic background knowledge.
//!
//! Hypotheses are sets of definite clauses sharing one head predicate. They
//! are scored against examples whose facts carry detection probabilities,
//! and searched with a generate, test, constrain and combine loop.

pub mod error;
pub mod harness;
pub mod infer;
pub mod kb;
pub mod logic;
pub mod parser;
pub mod rewrite;
pub mod score;
pub mod search;

pub use error::{Error, Result};
pub use infer::{
    enumerate_proofs, evaluate, evaluate_binary, prob_and, prob_not, prob_or, ExampleIndex, InferenceConfig, Proof,
    Provenance,
};
pub use kb::{ExampleRecord, Label, ProbFact};
pub use logic::{
    alpha_equivalent, canonicalize, program_size, program_specializes, theta_subsumes, Atom, Bias, Clause,
    HypothesisProgram, PredSig, Term, ALWAYS_TRUE,
};
pub use rewrite::{normalize, normalize_with_order, NormalizedProgram};
pub use score::{bce, confusion, f1, mdl, select_threshold, Confusion, TestResult};
pub use search::{
    combine, constrain_combo, constrain_maxsynth, constrain_noisycombo, generate_next, learn, prune, ConstraintKind,
    ConstraintRecord, ConstraintStore, Constrainer, CostKind, Generator, LearnResult, SearchSettings, StopReason,
    Task, Tester, TesterKind,
};
pub use harness::{synth_generate, SceneConfig, TaskBundle, Tier};
