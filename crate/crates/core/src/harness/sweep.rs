//! Experiment sweeps: noise tiers x training sizes x model settings, each
//! cell repeated with different random training splits.

use std::collections::BTreeMap;

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::bundle::TaskBundle;
use crate::harness::run::eval_program;
use crate::harness::synth::{synth_generate, SceneConfig, Tier};
use crate::kb::Label;
use crate::parser::print_program;
use crate::score::Confusion;
use crate::search::{learn, SearchSettings, Task};

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub tiers: Vec<Tier>,
    /// Training examples per class.
    pub train_sizes: Vec<usize>,
    pub models: Vec<SearchSettings>,
    pub repetitions: usize,
    /// Held-out examples per class.
    pub test_per_class: usize,
    pub seed: u64,
    pub max_vars: usize,
    pub max_body: usize,
    pub max_clauses: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            tiers: vec![Tier::Easy, Tier::Intermediate, Tier::Hard],
            train_sizes: vec![1, 2, 4, 8],
            models: vec![SearchSettings::neurosymbolic(), SearchSettings::binary()],
            repetitions: 5,
            test_per_class: 20,
            seed: 0,
            max_vars: 3,
            max_body: 4,
            max_clauses: 2,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() || self.train_sizes.is_empty() || self.models.is_empty() || self.repetitions == 0 {
            return Err(Error::Config("the sweep grid is empty".into()));
        }
        if self.train_sizes.contains(&0) || self.test_per_class == 0 {
            return Err(Error::Config("training and test sizes must be positive".into()));
        }
        self.models.iter().try_for_each(SearchSettings::validate)
    }

    /// Scene seed for one tier and repetition.
    pub fn pool_seed(&self, tier: Tier, rep: usize) -> u64 {
        self.seed
            .wrapping_mul(1_000_003)
            .wrapping_add(tier as u64 * 10_007)
            .wrapping_add(rep as u64 * 101)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub tier: Tier,
    pub train_size: usize,
    pub repetition: usize,
    pub seed: u64,
    pub model: String,
    pub train_ids: Vec<String>,
    pub program: Option<String>,
    pub threshold: f64,
    pub train: Confusion,
    pub test: Confusion,
    pub test_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub tier: Tier,
    pub train_size: usize,
    pub model: String,
    pub runs: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    pub cells: Vec<SweepCell>,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct Pool {
    tier: Tier,
    rep: usize,
    seed: u64,
    bundle: TaskBundle,
    positives: Vec<String>,
    negatives: Vec<String>,
}

impl Pool {
    fn train_ids(&self, n: usize) -> Vec<String> {
        self.positives[..n].iter().chain(&self.negatives[..n]).cloned().collect()
    }

    fn test_ids(&self, test: usize) -> Vec<String> {
        let p = self.positives.len();
        let q = self.negatives.len();
        self.positives[p - test..].iter().chain(&self.negatives[q - test..]).cloned().collect()
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let max_train = *cfg.train_sizes.iter().max().expect("non-empty");
    let per_class = max_train + cfg.test_per_class;
    let mut pools = Vec::new();
    for &tier in &cfg.tiers {
        for rep in 0..cfg.repetitions {
            let seed = cfg.pool_seed(tier, rep);
            let mut bundle = synth_generate(&SceneConfig::tier(tier, seed), per_class, per_class)?;
            bundle.bias = bundle.bias.with_limits(cfg.max_vars, cfg.max_body, cfg.max_clauses)?;
            // Split on observed labels so every training set has both classes.
            let mut positives: Vec<String> = Vec::new();
            let mut negatives: Vec<String> = Vec::new();
            for e in &bundle.examples {
                match e.label {
                    Label::Positive => positives.push(e.id.clone()),
                    Label::Negative => negatives.push(e.id.clone()),
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            positives.shuffle(&mut rng);
            negatives.shuffle(&mut rng);
            if positives.len() < per_class.min(max_train + 1) || negatives.len() < per_class.min(max_train + 1) {
                return Err(Error::Config(format!("tier {tier}, repetition {rep}: too few examples of one class")));
            }
            let held_out = cfg.test_per_class.min(positives.len() - max_train).min(negatives.len() - max_train);
            let pool = Pool {
                tier,
                rep,
                seed,
                bundle,
                positives,
                negatives,
            };
            for &n in &cfg.train_sizes {
                info!("tier {tier} repetition {rep} size {n}: train split {:?}", pool.train_ids(n));
            }
            pools.push((pool, held_out));
        }
    }

    let jobs: Vec<(usize, usize, usize)> = (0..pools.len())
        .flat_map(|p| {
            cfg.train_sizes
                .iter()
                .flat_map(move |&n| (0..cfg.models.len()).map(move |m| (p, n, m)))
        })
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(p, n, m)| {
            let (pool, held_out) = &pools[p];
            let settings = &cfg.models[m];
            let train_ids = pool.train_ids(n);
            let train = pool.bundle.subset(&train_ids);
            let test = pool.bundle.subset(&pool.test_ids(*held_out));
            let result = learn(
                &Task {
                    bias: train.bias.clone(),
                    examples: train.examples,
                },
                settings,
            )?;
            let (program, report) = match &result.best_program {
                Some(h) => (Some(print_program(h)), Some(eval_program(h, &test.examples, settings, result.threshold)?)),
                None => (None, None),
            };
            let test_conf = report.as_ref().map(|r| r.confusion()).unwrap_or(Confusion {
                tp: 0,
                fp: 0,
                tn: test.examples.iter().filter(|e| !e.label.is_positive()).count(),
                fn_: test.examples.iter().filter(|e| e.label.is_positive()).count(),
            });
            Ok(SweepRecord {
                tier: pool.tier,
                train_size: n,
                repetition: pool.rep,
                seed: pool.seed,
                model: settings.label(),
                train_ids,
                program,
                threshold: result.threshold,
                train: result.confusion,
                test: test_conf,
                test_f1: report.map_or(0.0, |r| r.f1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        cells: aggregate(&records),
        records,
    })
}

/// Per-cell statistics, independent of record order.
pub fn aggregate(records: &[SweepRecord]) -> Vec<SweepCell> {
    let mut groups: BTreeMap<(Tier, usize, String), Vec<(usize, f64)>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.tier, r.train_size, r.model.clone()))
            .or_default()
            .push((r.repetition, r.test_f1));
    }
    groups
        .into_iter()
        .map(|((tier, train_size, model), mut v)| {
            v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let f1s: Vec<f64> = v.iter().map(|x| x.1).collect();
            let (mean_f1, std_f1) = mean_std(&f1s);
            SweepCell {
                tier,
                train_size,
                model,
                runs: f1s.len(),
                mean_f1,
                std_f1,
            }
        })
        .collect()
}

impl SweepReport {
    pub fn cell(&self, tier: Tier, train_size: usize, model: &str) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.tier == tier && c.train_size == train_size && c.model == model)
    }

    /// One row per tier and training size, one column per model, cells as
    /// mean ± std of test F1.
    pub fn table(&self) -> String {
        let mut models: Vec<&str> = self.cells.iter().map(|c| c.model.as_str()).collect();
        models.sort();
        models.dedup();
        let mut rows: Vec<(Tier, usize)> = self.cells.iter().map(|c| (c.tier, c.train_size)).collect();
        rows.sort();
        rows.dedup();
        let width = models.iter().map(|m| m.len()).max().unwrap_or(0).max(13);
        let mut out = format!("{:<14}{:>6}", "tier", "train");
        for m in &models {
            out.push_str(&format!("  {m:>width$}"));
        }
        out.push('\n');
        for (tier, n) in rows {
            out.push_str(&format!("{:<14}{:>6}", tier.to_string(), n));
            for m in &models {
                let cell = self
                    .cell(tier, n, m)
                    .map_or("-".to_string(), |c| format!("{:.3} ± {:.3}", c.mean_f1, c.std_f1));
                out.push_str(&format!("  {cell:>width$}"));
            }
            out.push('\n');
        }
        out
    }
}
