use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use pilp_core::harness::{
    learn_bundle, run_eval, run_sweep, synth_generate, SceneConfig, SweepConfig, TaskBundle, Tier, EXIT_INPUT,
};
use pilp_core::infer::Provenance;
use pilp_core::search::{Constrainer, CostKind, SearchSettings, TesterKind};
use pilp_core::Error;

#[derive(Parser)]
#[command(name = "pilp", version, about = "Inductive logic programming over probabilistic background knowledge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a program from a task directory.
    Learn {
        task: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        limits: LimitArgs,
        /// Recorded in the result file.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Result file; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock time in the result file.
        #[arg(long)]
        timing: bool,
    },
    /// Evaluate a program file on a task directory.
    Eval {
        program: PathBuf,
        task: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Decision threshold; defaults to the one stored with the program, else 0.5.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Write a synthetic noisy-scene task directory.
    Synth {
        out: PathBuf,
        #[arg(long, default_value = "easy")]
        tier: Tier,
        #[arg(long, default_value_t = 8)]
        n_pos: usize,
        #[arg(long, default_value_t = 8)]
        n_neg: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Run a grid of tiers, training sizes and models on synthetic tasks.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "easy,intermediate,hard")]
        tiers: Vec<Tier>,
        /// Training examples per class.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        train_sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Held-out examples per class.
        #[arg(long, default_value_t = 20)]
        test_size: usize,
        /// Models as tester-constrainer-cost.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "neurosymbolic-noisycombo-bce,binary-combo-mdl",
            value_parser = parse_model
        )]
        models: Vec<SearchSettings>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        limits: LimitArgs,
        /// JSON report with one record per run.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value = "neurosymbolic")]
    tester: TesterKind,
    #[arg(long, default_value = "noisycombo")]
    constrainer: Constrainer,
    #[arg(long, default_value = "bce")]
    cost: CostKind,
    #[arg(long, default_value_t = 0.15)]
    noise_level: f64,
    /// Facts below this probability are dropped (binary tester).
    #[arg(long, default_value_t = 0.5)]
    bk_threshold: f64,
    /// Proofs kept per example: a number or `inf`.
    #[arg(long, default_value = "3", value_parser = parse_top_k)]
    top_k: TopK,
    #[arg(long, default_value = "basic")]
    provenance: Provenance,
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long)]
    max_vars: Option<usize>,
    #[arg(long)]
    max_body: Option<usize>,
    #[arg(long)]
    max_clauses: Option<usize>,
}

#[derive(Clone, Copy)]
struct TopK(Option<usize>);

fn parse_top_k(s: &str) -> std::result::Result<TopK, String> {
    if s == "inf" {
        return Ok(TopK(None));
    }
    match s.parse::<usize>() {
        Ok(0) => Err("top-k must be at least 1".into()),
        Ok(k) => Ok(TopK(Some(k))),
        Err(_) => Err(format!("expected a number or inf, got {s}")),
    }
}

fn parse_model(s: &str) -> std::result::Result<SearchSettings, String> {
    let parts: Vec<&str> = s.split('-').collect();
    let [tester, constrainer, cost] = parts[..] else {
        return Err(format!("expected tester-constrainer-cost, got {s}"));
    };
    let base = match tester.parse::<TesterKind>()? {
        TesterKind::Binary => SearchSettings::binary(),
        TesterKind::Neurosymbolic => SearchSettings::neurosymbolic(),
    };
    Ok(SearchSettings {
        constrainer: constrainer.parse()?,
        cost: cost.parse()?,
        ..base
    })
}

impl SearchArgs {
    fn settings(&self) -> Result<SearchSettings> {
        let mut s = SearchSettings {
            tester: self.tester,
            constrainer: self.constrainer,
            cost: self.cost,
            noise_level: self.noise_level,
            bk_threshold: self.bk_threshold,
            budget_seconds: self.budget_seconds,
            max_iterations: self.max_iterations,
            ..SearchSettings::default()
        };
        s.infer.k = self.top_k.0;
        s.infer.provenance = self.provenance;
        s.validate()?;
        Ok(s)
    }
}

impl LimitArgs {
    fn apply(&self, bundle: &mut TaskBundle) -> Result<()> {
        let b = &bundle.bias;
        let limits = (
            self.max_vars.unwrap_or(b.max_vars),
            self.max_body.unwrap_or(b.max_body),
            self.max_clauses.unwrap_or(b.max_clauses),
        );
        bundle.bias = b.clone().with_limits(limits.0, limits.1, limits.2)?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Learn {
            task,
            search,
            limits,
            seed,
            out,
            timing,
        } => {
            let settings = search.settings()?;
            let mut bundle = TaskBundle::read(&task)?;
            limits.apply(&mut bundle)?;
            let outcome = learn_bundle(&bundle, &settings, out.as_deref(), seed, timing)?;
            if out.is_none() {
                print!("{}", outcome.text);
            }
            info!("stopped: {:?}", outcome.result.stop);
            Ok(outcome.exit_code() as u8)
        }
        Command::Eval {
            program,
            task,
            search,
            threshold,
        } => {
            let report = run_eval(&program, &task, &search.settings()?, threshold)?;
            println!("{}", serde_json::to_string(&report)?);
            Ok(0)
        }
        Command::Synth {
            out,
            tier,
            n_pos,
            n_neg,
            seed,
            limits,
        } => {
            let mut bundle = synth_generate(&SceneConfig::tier(tier, seed), n_pos, n_neg)?;
            limits.apply(&mut bundle)?;
            bundle.write(&out)?;
            info!("wrote {} examples to {}", bundle.examples.len(), out.display());
            Ok(0)
        }
        Command::Sweep {
            tiers,
            train_sizes,
            reps,
            test_size,
            models,
            seed,
            limits,
            out,
        } => {
            let defaults = SweepConfig::default();
            let cfg = SweepConfig {
                tiers,
                train_sizes,
                models,
                repetitions: reps,
                test_per_class: test_size,
                seed,
                max_vars: limits.max_vars.unwrap_or(defaults.max_vars),
                max_body: limits.max_body.unwrap_or(defaults.max_body),
                max_clauses: limits.max_clauses.unwrap_or(defaults.max_clauses),
            };
            let report = run_sweep(&cfg)?;
            print!("{}", report.table());
            if let Some(path) = out {
                fs::write(&path, serde_json::to_string_pretty(&report)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            // Core errors already embed their sources; print each cause once.
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            let input = e.downcast_ref::<Error>().is_some_and(Error::is_input_error);
            if input {
                ExitCode::from(EXIT_INPUT as u8)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
