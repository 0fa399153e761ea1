//! Learning and evaluation on task bundles, and the result file format: the
//! learned program in clause syntax followed by one `% metrics {json}` line.

use std::fs;
use std::path::Path;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::bundle::TaskBundle;
use crate::infer::Provenance;
use crate::kb::ExampleRecord;
use crate::logic::HypothesisProgram;
use crate::parser::{parse_program, print_program};
use crate::score::{bce, f1, Confusion, TestResult};
use crate::search::{learn, Constrainer, CostKind, LearnResult, SearchSettings, StopReason, TesterKind, Tester};

pub const METRICS_PREFIX: &str = "% metrics ";
pub const NO_SOLUTION: &str = "% no solution";
/// Threshold used by evaluation when neither the caller nor the program file
/// gives one.
pub const DEFAULT_EVAL_THRESHOLD: f64 = 0.5;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_SOLUTION: i32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnMetrics {
    pub settings: String,
    pub tester: TesterKind,
    pub constrainer: Constrainer,
    pub cost: CostKind,
    pub noise_level: f64,
    pub bk_threshold: f64,
    pub top_k: Option<usize>,
    pub provenance: Provenance,
    pub seed: u64,
    pub solved: bool,
    pub best_cost: Option<f64>,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub f1: f64,
    pub iterations: usize,
    pub tested: usize,
    pub pruned: usize,
    pub constraints: usize,
    pub stop: StopReason,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_seconds: Option<f64>,
}

impl LearnMetrics {
    pub fn new(r: &LearnResult, settings: &SearchSettings, seed: u64) -> Self {
        let c = r.confusion;
        LearnMetrics {
            settings: settings.label(),
            tester: settings.tester,
            constrainer: settings.constrainer,
            cost: settings.cost,
            noise_level: settings.noise_level,
            bk_threshold: settings.bk_threshold,
            top_k: settings.infer.k,
            provenance: settings.infer.provenance,
            seed,
            solved: r.best_program.is_some(),
            best_cost: r.best_program.as_ref().map(|_| r.best_cost),
            threshold: r.threshold,
            tp: c.tp,
            fp: c.fp,
            tn: c.tn,
            fn_: c.fn_,
            f1: f1(&c),
            iterations: r.iterations,
            tested: r.tested,
            pruned: r.pruned,
            constraints: r.constraints,
            stop: r.stop,
            wall_seconds: None,
        }
    }
}

pub fn result_file_text(r: &LearnResult, metrics: &LearnMetrics) -> Result<String> {
    let mut out = match &r.best_program {
        Some(h) => print_program(h),
        None => format!("{NO_SOLUTION}\n"),
    };
    out.push_str(METRICS_PREFIX);
    out.push_str(&serde_json::to_string(metrics)?);
    out.push('\n');
    Ok(out)
}

/// The metrics record of a result file, if present.
pub fn read_metrics(text: &str) -> Result<Option<LearnMetrics>> {
    text.lines()
        .find_map(|l| l.strip_prefix(METRICS_PREFIX))
        .map(|json| serde_json::from_str(json).map_err(Error::from))
        .transpose()
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub result: LearnResult,
    pub metrics: LearnMetrics,
    pub text: String,
}

impl LearnOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.result.best_program.is_some() {
            EXIT_OK
        } else {
            EXIT_NO_SOLUTION
        }
    }
}

/// Learns from the bundle in `task_dir` and writes the result file to `out`
/// when given. Wall time goes into the file only with `timing`, so that
/// repeated runs produce identical files.
pub fn run_learn(
    task_dir: &Path,
    settings: &SearchSettings,
    out: Option<&Path>,
    seed: u64,
    timing: bool,
) -> Result<LearnOutcome> {
    learn_bundle(&TaskBundle::read(task_dir)?, settings, out, seed, timing)
}

/// [`run_learn`] on a bundle already in memory.
pub fn learn_bundle(
    bundle: &TaskBundle,
    settings: &SearchSettings,
    out: Option<&Path>,
    seed: u64,
    timing: bool,
) -> Result<LearnOutcome> {
    let start = Instant::now();
    let result = learn(&bundle.task(), settings)?;
    let wall = start.elapsed().as_secs_f64();
    info!("learned in {wall:.3}s");
    let mut metrics = LearnMetrics::new(&result, settings, seed);
    if timing {
        metrics.wall_seconds = Some(wall);
    }
    let text = result_file_text(&result, &metrics)?;
    if let Some(path) = out {
        fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    }
    Ok(LearnOutcome { result, metrics, text })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub examples: usize,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub f1: f64,
    pub bce: f64,
}

impl EvalReport {
    pub fn confusion(&self) -> Confusion {
        Confusion {
            tp: self.tp,
            fp: self.fp,
            tn: self.tn,
            fn_: self.fn_,
        }
    }
}

pub fn eval_program(
    h: &HypothesisProgram,
    examples: &[ExampleRecord],
    settings: &SearchSettings,
    threshold: f64,
) -> Result<EvalReport> {
    if examples.is_empty() {
        return Err(Error::Empty("evaluation needs at least one example"));
    }
    let tester = Tester::new(examples, settings);
    let tr = TestResult::at_threshold(tester.predict(h), threshold);
    let c = tr.confusion;
    Ok(EvalReport {
        examples: examples.len(),
        threshold,
        tp: c.tp,
        fp: c.fp,
        tn: c.tn,
        fn_: c.fn_,
        f1: f1(&c),
        bce: bce(&tr.pairs())?,
    })
}

/// Evaluates a program file on a bundle. The threshold is `threshold`, else
/// the one recorded in the file's metrics line, else 0.5.
pub fn run_eval(
    program_file: &Path,
    task_dir: &Path,
    settings: &SearchSettings,
    threshold: Option<f64>,
) -> Result<EvalReport> {
    let text = fs::read_to_string(program_file).map_err(|e| Error::io(program_file, e))?;
    let h = parse_program(&text).map_err(|e| Error::in_file(program_file, e))?;
    let recorded = read_metrics(&text)
        .map_err(|e| Error::in_file(program_file, Error::Config(e.to_string())))?
        .map(|m| m.threshold);
    let t = threshold.or(recorded).unwrap_or(DEFAULT_EVAL_THRESHOLD);
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Config(format!("threshold {t} is outside [0, 1]")));
    }
    let bundle = TaskBundle::read(task_dir)?;
    eval_program(&h, &bundle.examples, settings, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{synth_generate, SceneConfig, Tier};
    use crate::kb::{Label, ProbFact};
    use crate::logic::{Bias, PredSig};
    use crate::parser::parse_facts;

    fn noiseless(dir: &Path) -> TaskBundle {
        let mut b = synth_generate(&SceneConfig::tier(Tier::None, 4), 8, 8).unwrap();
        b.bias = Bias::new(
            PredSig::new("f", 1),
            ["has_object/2", "vehicle/1", "is_on/2", "bridge/1"]
                .iter()
                .map(|s| {
                    let (n, a) = s.split_once('/').unwrap();
                    PredSig::new(n, a.parse().unwrap())
                })
                .collect(),
        )
        .unwrap();
        b.write(dir).unwrap();
        b
    }

    #[test]
    fn learn_writes_parseable_result() {
        let dir = tempfile::tempdir().unwrap();
        noiseless(dir.path());
        let out = dir.path().join("result.pl");
        let o = run_learn(dir.path(), &SearchSettings::binary(), Some(&out), 1, false).unwrap();
        assert_eq!(o.exit_code(), EXIT_OK);
        let text = fs::read_to_string(&out).unwrap();
        assert_eq!(text, o.text);
        let h = parse_program(&text).unwrap();
        assert_eq!(Some(h), o.result.best_program.map(|p| p.canonical()));
        let m = read_metrics(&text).unwrap().unwrap();
        assert_eq!(m, o.metrics);
        assert!(m.wall_seconds.is_none());

        let report = run_eval(&out, dir.path(), &SearchSettings::binary(), None).unwrap();
        assert_eq!(report.threshold, m.threshold);
        assert_eq!(report.confusion(), o.result.confusion);
    }

    #[test]
    fn timing_only_on_request() {
        let dir = tempfile::tempdir().unwrap();
        noiseless(dir.path());
        let o = run_learn(dir.path(), &SearchSettings::binary(), None, 1, true).unwrap();
        assert!(o.text.contains("wall_seconds"));
    }

    #[test]
    fn zero_iterations_is_no_solution() {
        let dir = tempfile::tempdir().unwrap();
        noiseless(dir.path());
        let s = SearchSettings {
            max_iterations: Some(0),
            ..SearchSettings::binary()
        };
        let o = run_learn(dir.path(), &s, None, 1, false).unwrap();
        assert_eq!(o.exit_code(), EXIT_NO_SOLUTION);
        assert!(o.text.starts_with(NO_SOLUTION));
    }

    #[test]
    fn eval_of_generating_program() {
        // Person-near-car scenes built directly from a two-object program.
        let h = parse_program("f(A) :- car(B), has_object(A,C), is_on(C,B), person(C).").unwrap();
        let mut examples = Vec::new();
        for i in 0..4 {
            let id = format!("img{i}");
            let mut text = format!("has_object({id},p{i}).\n0.9 :: person(p{i}).\n0.8 :: car(c{i}).\n");
            if i % 2 == 0 {
                text.push_str(&format!("is_on(p{i},c{i}).\n"));
            }
            let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
            examples.push(ExampleRecord::new(id, label, parse_facts(&text).unwrap()));
        }
        let r = eval_program(&h, &examples, &SearchSettings::neurosymbolic(), 0.5).unwrap();
        assert_eq!(r.f1, 1.0);
        assert!(eval_program(&h, &[], &SearchSettings::neurosymbolic(), 0.5).is_err());
    }

    #[test]
    fn undeclared_predicate_is_closed_world() {
        let h = parse_program("f(A) :- has_object(A,B), spaceship(B).").unwrap();
        let ex = ExampleRecord::new(
            "img1",
            Label::Positive,
            vec![ProbFact::certain(crate::logic::test_util::atom("has_object(img1,o1)"))],
        );
        let r = eval_program(&h, &[ex], &SearchSettings::neurosymbolic(), 0.5).unwrap();
        assert_eq!((r.tp, r.fn_), (0, 1));
    }
}
