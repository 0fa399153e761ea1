//! The learning loop: generate a candidate, test it, turn the failure into
//! pruning constraints, and periodically combine promising programs.
//!
//! Candidates are single canonical clauses enumerated level by level by body
//! length, so program size never decreases. Multi-clause programs are built
//! only by the combiner, which greedily unions promising single clauses.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::{ExampleIndex, InferenceConfig};
use crate::kb::{ExampleRecord, Label};
use crate::logic::{canonicalize, program_specializes, Atom, Bias, Clause, HypothesisProgram, Term};
use crate::parser::print_program;
use crate::score::{mdl_sized, Confusion, TestResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    PruneGeneralizations,
    PruneSpecializations,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConstraintRecord {
    pub kind: ConstraintKind,
    pub anchor: HypothesisProgram,
}

impl ConstraintRecord {
    pub fn generalizations(anchor: &HypothesisProgram) -> Self {
        ConstraintRecord {
            kind: ConstraintKind::PruneGeneralizations,
            anchor: anchor.clone(),
        }
    }

    pub fn specializations(anchor: &HypothesisProgram) -> Self {
        ConstraintRecord {
            kind: ConstraintKind::PruneSpecializations,
            anchor: anchor.clone(),
        }
    }
}

/// Bit set of body predicates, used to skip subsumption checks that cannot
/// succeed. Distinct predicates may share a bit; that only weakens the filter.
fn pred_mask(c: &Clause) -> u64 {
    c.body.iter().fold(0, |m, a| {
        let mut h = DefaultHasher::new();
        a.pred.hash(&mut h);
        m | 1u64 << (h.finish() % 64)
    })
}

struct Anchor {
    program: HypothesisProgram,
    masks: Vec<u64>,
}

impl Anchor {
    fn new(program: HypothesisProgram) -> Self {
        let masks = program.clauses().iter().map(pred_mask).collect();
        Anchor { program, masks }
    }
}

#[derive(Default)]
pub struct ConstraintStore {
    specializations: Vec<Anchor>,
    generalizations: Vec<Anchor>,
    seen: HashSet<ConstraintRecord>,
}

impl ConstraintStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, rec: ConstraintRecord) {
        if !self.seen.insert(rec.clone()) {
            return;
        }
        let anchor = Anchor::new(rec.anchor);
        match rec.kind {
            ConstraintKind::PruneSpecializations => self.specializations.push(anchor),
            ConstraintKind::PruneGeneralizations => self.generalizations.push(anchor),
        }
    }

    pub fn len(&self) -> usize {
        self.specializations.len() + self.generalizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether a stored constraint removes `candidate`.
    pub fn prunes(&self, candidate: &HypothesisProgram) -> bool {
        let masks: Vec<u64> = candidate.clauses().iter().map(pred_mask).collect();
        self.is_pruned_specialization(candidate, &masks) || self.is_pruned_generalization(candidate, &masks)
    }

    fn is_pruned_specialization(&self, cand: &HypothesisProgram, masks: &[u64]) -> bool {
        self.specializations.iter().any(|a| {
            // Every candidate clause needs an anchor clause with fewer predicates.
            masks.iter().all(|&m| a.masks.iter().any(|&am| am & !m == 0)) && program_specializes(cand, &a.program)
        })
    }

    fn is_pruned_generalization(&self, cand: &HypothesisProgram, masks: &[u64]) -> bool {
        self.generalizations.iter().any(|a| {
            a.masks.iter().all(|&am| masks.iter().any(|&m| m & !am == 0)) && program_specializes(&a.program, cand)
        })
    }
}

pub fn prune(candidate: &HypothesisProgram, store: &ConstraintStore) -> bool {
    store.prunes(candidate)
}

pub fn constrain_combo(tr: &TestResult, h: &HypothesisProgram) -> Vec<ConstraintRecord> {
    let c = &tr.confusion;
    let mut out = Vec::new();
    if c.fp > 0 {
        out.push(ConstraintRecord::generalizations(h));
    }
    if c.fn_ > 0 || c.fp == 0 {
        out.push(ConstraintRecord::specializations(h));
    }
    out
}

pub fn constrain_noisycombo(
    tr: &TestResult,
    h: &HypothesisProgram,
    noise_level: f64,
    n_neg: usize,
) -> Vec<ConstraintRecord> {
    let c = &tr.confusion;
    let mut out = Vec::new();
    if c.fp as f64 > noise_level * n_neg as f64 {
        out.push(ConstraintRecord::generalizations(h));
    }
    if c.fp == 0 {
        out.push(ConstraintRecord::specializations(h));
    }
    out
}

/// Bound-based pruning against the best description length so far: a
/// specialization is at least one literal longer and misses at least as many
/// positives; a generalization reached later is no shorter.
pub fn constrain_maxsynth(tr: &TestResult, h: &HypothesisProgram, best_cost: f64) -> Vec<ConstraintRecord> {
    let size = h.size() as f64;
    let mut out = Vec::new();
    if size >= best_cost {
        out.push(ConstraintRecord::generalizations(h));
    }
    if size + 1.0 + tr.confusion.fn_ as f64 >= best_cost {
        out.push(ConstraintRecord::specializations(h));
    }
    out
}

/// One step of the generator.
#[derive(Clone, Debug, PartialEq)]
pub enum GenStep {
    Candidate(HypothesisProgram),
    /// Every candidate of body length `n` has been produced.
    LevelDone(usize),
    Exhausted,
}

/// Enumerates canonical, head-connected single-clause programs by body
/// length. Level `n + 1` is built by adding one literal to each clause of
/// level `n`; every connected clause has a literal whose removal keeps it
/// connected, so nothing is missed.
pub struct Generator {
    bias: Bias,
    level: usize,
    pending: VecDeque<Clause>,
    parents: Vec<Clause>,
    announced: bool,
    skipped: usize,
}

impl Generator {
    pub fn new(bias: &Bias) -> Result<Self> {
        bias.validate()?;
        Ok(Generator {
            bias: bias.clone(),
            level: 0,
            pending: VecDeque::new(),
            parents: Vec::new(),
            announced: true,
            skipped: 0,
        })
    }

    /// Body length of the level currently being produced.
    pub fn level(&self) -> usize {
        self.level
    }

    /// Candidates removed by constraints so far.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn step(&mut self, store: &ConstraintStore) -> GenStep {
        loop {
            while let Some(c) = self.pending.pop_front() {
                let h = HypothesisProgram::from_clause(c);
                if store.prunes(&h) {
                    self.skipped += 1;
                    continue;
                }
                return GenStep::Candidate(h);
            }
            if !self.announced {
                self.announced = true;
                return GenStep::LevelDone(self.level);
            }
            if self.level >= self.bias.max_body {
                return GenStep::Exhausted;
            }
            self.expand(store);
        }
    }

    /// Next unpruned candidate, ignoring level boundaries.
    pub fn generate_next(&mut self, store: &ConstraintStore) -> Option<HypothesisProgram> {
        loop {
            match self.step(store) {
                GenStep::Candidate(h) => return Some(h),
                GenStep::LevelDone(_) => continue,
                GenStep::Exhausted => return None,
            }
        }
    }

    fn head(&self) -> Atom {
        Atom::new(self.bias.head_pred.name.clone(), vec![Term::var("V0")])
    }

    fn expand(&mut self, store: &ConstraintStore) {
        let head = self.head();
        let parents: Vec<(Vec<Atom>, usize)> = if self.level == 0 {
            vec![(Vec::new(), 1)]
        } else {
            // Children of a pruned specialization are pruned too.
            self.parents
                .iter()
                .filter(|c| {
                    let h = HypothesisProgram::from_clause((*c).clone());
                    let masks = [pred_mask(c)];
                    !store.is_pruned_specialization(&h, &masks)
                })
                .map(|c| (c.body.clone(), c.vars().len()))
                .collect()
        };
        let mut seen: HashSet<Clause> = HashSet::new();
        for (body, nvars) in &parents {
            for lit in self.refinements(body, *nvars) {
                let mut b = body.clone();
                b.push(lit);
                let child = canonicalize(&Clause {
                    head: head.clone(),
                    body: b,
                });
                seen.insert(child);
            }
        }
        let mut level: Vec<Clause> = seen.into_iter().collect();
        level.sort();
        self.level += 1;
        self.announced = false;
        debug!("level {}: {} clauses from {} parents", self.level, level.len(), parents.len());
        self.pending = level.iter().cloned().collect();
        self.parents = level;
    }

    /// Literals over the existing variables `V0..V{nvars-1}` and fresh ones,
    /// sharing at least one existing variable and absent from `body`.
    fn refinements(&self, body: &[Atom], nvars: usize) -> Vec<Atom> {
        let mut out = Vec::new();
        for p in &self.bias.body_preds {
            let mut args = Vec::with_capacity(p.arity);
            self.fill(p.arity, nvars, &mut args, &mut |args: &[usize]| {
                if args.iter().all(|&a| a >= nvars) {
                    return;
                }
                let atom = Atom::new(p.name.clone(), args.iter().map(|&i| Term::var(format!("V{i}"))).collect());
                if !body.contains(&atom) {
                    out.push(atom);
                }
            });
        }
        out
    }

    fn fill(&self, arity: usize, next: usize, args: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
        if args.len() == arity {
            emit(args);
            return;
        }
        for v in 0..=next.min(self.bias.max_vars) {
            if v == self.bias.max_vars {
                break;
            }
            args.push(v);
            let next2 = if v == next { next + 1 } else { next };
            self.fill(arity, next2, args, emit);
            args.pop();
        }
    }
}

pub fn generate_next(gen: &mut Generator, store: &ConstraintStore) -> Option<HypothesisProgram> {
    gen.generate_next(store)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constrainer {
    Combo,
    NoisyCombo,
    MaxSynth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Mdl,
    Bce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TesterKind {
    Neurosymbolic,
    Binary,
}

macro_rules! text_enum {
    ($t:ty { $($v:ident => $s:literal),+ $(,)? }) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(<$t>::$v => $s),+ })
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($s => Ok(<$t>::$v),)+
                    _ => Err(format!("unknown value {s} (expected one of: {})", [$($s),+].join(", "))),
                }
            }
        }
    };
}

text_enum!(Constrainer { Combo => "combo", NoisyCombo => "noisycombo", MaxSynth => "maxsynth" });
text_enum!(CostKind { Mdl => "mdl", Bce => "bce" });
text_enum!(TesterKind { Neurosymbolic => "neurosymbolic", Binary => "binary" });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub constrainer: Constrainer,
    pub cost: CostKind,
    pub tester: TesterKind,
    /// Tolerated fraction of covered negatives (noisycombo only).
    pub noise_level: f64,
    /// Facts below this probability are dropped (binary tester only).
    pub bk_threshold: f64,
    pub infer: InferenceConfig,
    /// Cap on generated candidates tested.
    pub max_iterations: Option<usize>,
    pub budget_seconds: Option<f64>,
    /// Levels without improvement before stopping (noisycombo, maxsynth).
    pub patience: usize,
    pub max_promising: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            constrainer: Constrainer::NoisyCombo,
            cost: CostKind::Bce,
            tester: TesterKind::Neurosymbolic,
            noise_level: 0.15,
            bk_threshold: 0.5,
            infer: InferenceConfig::default(),
            max_iterations: None,
            budget_seconds: None,
            patience: 2,
            max_promising: 64,
        }
    }
}

impl SearchSettings {
    /// Probabilistic tester, tolerant constrainer, cross-entropy cost.
    pub fn neurosymbolic() -> Self {
        Self::default()
    }

    /// Facts thresholded at `bk_threshold`, exact constrainer, MDL cost.
    pub fn binary() -> Self {
        SearchSettings {
            constrainer: Constrainer::Combo,
            cost: CostKind::Mdl,
            tester: TesterKind::Binary,
            ..Self::default()
        }
    }

    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.tester, self.constrainer, self.cost)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.noise_level) {
            return Err(Error::Config(format!("noise level {} is outside [0, 1)", self.noise_level)));
        }
        if !(0.0..=1.0).contains(&self.bk_threshold) {
            return Err(Error::Config(format!("fact threshold {} is outside [0, 1]", self.bk_threshold)));
        }
        if self.infer.k == Some(0) {
            return Err(Error::Config("top-k needs k >= 1".into()));
        }
        if self.budget_seconds.is_some_and(|s| !(s >= 0.0)) {
            return Err(Error::Config("time budget must be non-negative".into()));
        }
        if self.max_promising == 0 {
            return Err(Error::Config("the combiner needs room for at least one program".into()));
        }
        Ok(())
    }
}

/// Evaluates hypotheses on a fixed example set.
pub struct Tester {
    ids: Vec<String>,
    labels: Vec<Label>,
    indexes: Vec<ExampleIndex>,
    kind: TesterKind,
    infer: InferenceConfig,
}

impl Tester {
    pub fn new(examples: &[ExampleRecord], settings: &SearchSettings) -> Self {
        let indexes = examples
            .par_iter()
            .map(|ex| match settings.tester {
                TesterKind::Neurosymbolic => ExampleIndex::new(ex),
                TesterKind::Binary => ExampleIndex::thresholded(ex, settings.bk_threshold),
            })
            .collect();
        Tester {
            ids: examples.iter().map(|e| e.id.clone()).collect(),
            labels: examples.iter().map(|e| e.label).collect(),
            indexes,
            kind: settings.tester,
            infer: settings.infer,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    /// Per-example predicted probability, in example order.
    pub fn predict(&self, h: &HypothesisProgram) -> Vec<(String, Label, f64)> {
        let probs: Vec<f64> = self
            .indexes
            .par_iter()
            .map(|idx| match self.kind {
                TesterKind::Neurosymbolic => idx.evaluate(h, &self.infer),
                TesterKind::Binary => f64::from(u8::from(idx.entails(h))),
            })
            .collect();
        self.ids
            .iter()
            .zip(&self.labels)
            .zip(probs)
            .map(|((id, y), p)| (id.clone(), *y, p))
            .collect()
    }

    /// Predictions binarized at the selected threshold.
    pub fn test(&self, h: &HypothesisProgram) -> TestResult {
        TestResult::selected(self.predict(h))
    }
}

/// A tested program with its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Scored {
    pub program: HypothesisProgram,
    pub result: TestResult,
    pub cost: f64,
    pub size: usize,
    pub text: String,
}

impl Scored {
    pub fn new(program: HypothesisProgram, result: TestResult, cost_kind: CostKind) -> Self {
        let program = program.canonical();
        let size = program.size();
        let cost = match cost_kind {
            CostKind::Mdl => mdl_sized(size, &result.confusion),
            CostKind::Bce => result.bce(),
        };
        Scored {
            text: print_program(&program),
            program,
            result,
            cost,
            size,
        }
    }

    /// Cost, then size, then text.
    pub fn better_than(&self, other: &Scored) -> bool {
        self.rank_cmp(other).is_lt()
    }

    fn rank_cmp(&self, other: &Scored) -> std::cmp::Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.size.cmp(&other.size))
            .then_with(|| self.text.cmp(&other.text))
    }
}

/// Greedy union of promising programs. Starts from the best single program,
/// then each round adds the program whose union with the current selection,
/// re-tested, has the lowest cost; stops when no addition lowers the cost.
/// `None` only when `promising` is empty.
pub fn combine(
    promising: &[(HypothesisProgram, TestResult)],
    tester: &Tester,
    settings: &SearchSettings,
    max_clauses: usize,
) -> Option<Scored> {
    combine_counted(promising, tester, settings, max_clauses).0
}

/// [`combine`] plus the number of unions it tested.
fn combine_counted(
    promising: &[(HypothesisProgram, TestResult)],
    tester: &Tester,
    settings: &SearchSettings,
    max_clauses: usize,
) -> (Option<Scored>, usize) {
    let mut tests = 0;
    let mut cache: HashMap<HypothesisProgram, Scored> = HashMap::new();
    for (h, tr) in promising {
        let s = Scored::new(h.clone(), tr.clone(), settings.cost);
        cache.insert(s.program.clone(), s);
    }
    let mut current: Option<Scored> = None;
    let mut current_cost = f64::INFINITY;
    loop {
        let mut best: Option<Scored> = None;
        for (h, _) in promising {
            let union = match &current {
                None => h.canonical(),
                Some(cur) => match cur.program.union(h) {
                    Ok(u) => u,
                    Err(_) => continue,
                },
            };
            if union.clauses().len() > max_clauses || current.as_ref().is_some_and(|c| c.program == union) {
                continue;
            }
            let scored = cache
                .entry(union.clone())
                .or_insert_with(|| {
                    tests += 1;
                    Scored::new(union.clone(), tester.test(&union), settings.cost)
                })
                .clone();
            if best.as_ref().is_none_or(|b| scored.better_than(b)) {
                best = Some(scored);
            }
        }
        match best {
            Some(b) if b.cost < current_cost => {
                current_cost = b.cost;
                current = Some(b);
            }
            _ => return (current, tests),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Task {
    pub bias: Bias,
    pub examples: Vec<ExampleRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Exhausted,
    /// No unseen program can have a lower description length.
    Optimal,
    Perfect,
    Converged,
    IterationBudget,
    TimeBudget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnResult {
    pub best_program: Option<HypothesisProgram>,
    pub best_cost: f64,
    pub threshold: f64,
    pub confusion: Confusion,
    /// Generated candidates that were tested.
    pub iterations: usize,
    /// All test calls, including combined programs.
    pub tested: usize,
    /// Candidates skipped by constraints.
    pub pruned: usize,
    pub constraints: usize,
    pub stop: StopReason,
}

struct Loop<'a> {
    settings: &'a SearchSettings,
    tester: Tester,
    best: Option<Scored>,
    best_mdl: f64,
    promising: Vec<Scored>,
    promising_dirty: bool,
    tested: usize,
}

impl Loop<'_> {
    fn offer(&mut self, s: Scored) -> bool {
        let improved = self.best.as_ref().is_none_or(|b| s.better_than(b));
        if improved {
            debug!("new best (cost {:.4}): {}", s.cost, s.text.trim_end().replace('\n', " "));
            self.best = Some(s);
        }
        improved
    }

    fn eligible(&self, c: &Confusion) -> bool {
        let n_neg = self.tester.negatives() as f64;
        c.tp >= 1
            && match self.settings.constrainer {
                Constrainer::Combo => c.fp == 0,
                Constrainer::NoisyCombo => c.fp as f64 <= self.settings.noise_level * n_neg,
                Constrainer::MaxSynth => c.tp > c.fp,
            }
    }

    fn keep_promising(&mut self, s: Scored) {
        self.promising.push(s);
        self.promising.sort_by(|a, b| a.rank_cmp(b));
        self.promising.truncate(self.settings.max_promising);
        self.promising_dirty = true;
    }

    fn run_combiner(&mut self, max_clauses: usize) -> bool {
        if !self.promising_dirty || max_clauses < 2 {
            return false;
        }
        self.promising_dirty = false;
        let entries: Vec<(HypothesisProgram, TestResult)> = self
            .promising
            .iter()
            .map(|s| (s.program.clone(), s.result.clone()))
            .collect();
        let (combined, tests) = combine_counted(&entries, &self.tester, self.settings, max_clauses);
        self.tested += tests;
        match combined {
            Some(s) => self.offer(s),
            None => false,
        }
    }
}

pub fn learn(task: &Task, settings: &SearchSettings) -> Result<LearnResult> {
    settings.validate()?;
    task.bias.validate()?;
    if task.examples.is_empty() {
        return Err(Error::Empty("learning needs at least one example"));
    }
    let start = Instant::now();
    let bias = &task.bias;
    if settings.constrainer == Constrainer::MaxSynth && task.examples.len() < 3 {
        warn!(
            "maxsynth with {} training examples: its bounds are degenerate below three examples",
            task.examples.len()
        );
    }
    let mut state = Loop {
        settings,
        tester: Tester::new(&task.examples, settings),
        best: None,
        best_mdl: f64::INFINITY,
        promising: Vec::new(),
        promising_dirty: false,
        tested: 0,
    };
    let n_neg = state.tester.negatives();
    let mut gen = Generator::new(bias)?;
    let mut store = ConstraintStore::new();
    let mut iterations = 0usize;
    let mut stale = 0usize;
    let mut level_improved = false;

    let stop = loop {
        if settings.max_iterations.is_some_and(|m| iterations >= m) {
            break StopReason::IterationBudget;
        }
        if settings
            .budget_seconds
            .is_some_and(|s| start.elapsed().as_secs_f64() >= s)
        {
            break StopReason::TimeBudget;
        }
        match gen.step(&store) {
            GenStep::Candidate(h) => {
                iterations += 1;
                state.tested += 1;
                let tr = state.tester.test(&h);
                let scored = Scored::new(h.clone(), tr.clone(), settings.cost);
                state.best_mdl = state.best_mdl.min(mdl_sized(scored.size, &tr.confusion));
                let records = match settings.constrainer {
                    Constrainer::Combo => constrain_combo(&tr, &h),
                    Constrainer::NoisyCombo => constrain_noisycombo(&tr, &h, settings.noise_level, n_neg),
                    Constrainer::MaxSynth => constrain_maxsynth(&tr, &h, state.best_mdl),
                };
                for r in records {
                    store.add(r);
                }
                if state.eligible(&tr.confusion) {
                    state.keep_promising(scored.clone());
                }
                level_improved |= state.offer(scored);
            }
            GenStep::LevelDone(level) => {
                level_improved |= state.run_combiner(bias.max_clauses);
                let best = state.best.as_ref();
                info!(
                    "level {level} done: tested {iterations}, pruned {}, constraints {}, best cost {}",
                    gen.skipped(),
                    store.len(),
                    best.map_or(f64::NAN, |b| b.cost)
                );
                if let Some(b) = best {
                    let perfect = b.result.confusion.fp == 0 && b.result.confusion.fn_ == 0;
                    // Every later candidate, alone or combined, has at least
                    // level + 2 literals.
                    if settings.cost == CostKind::Mdl && b.cost <= (level + 2) as f64 {
                        break StopReason::Optimal;
                    }
                    if settings.constrainer == Constrainer::Combo && settings.cost == CostKind::Bce && perfect {
                        break StopReason::Perfect;
                    }
                }
                if settings.constrainer != Constrainer::Combo {
                    stale = if level_improved { 0 } else { stale + 1 };
                    if stale >= settings.patience.max(1) {
                        break StopReason::Converged;
                    }
                }
                level_improved = false;
            }
            GenStep::Exhausted => break StopReason::Exhausted,
        }
    };
    if stop != StopReason::Exhausted && stop != StopReason::Optimal {
        // Combine whatever was found before the stop.
        state.run_combiner(bias.max_clauses);
    }
    info!("search stopped ({stop:?}) after {:.2}s", start.elapsed().as_secs_f64());
    let best = state.best.as_ref();
    Ok(LearnResult {
        best_program: best.map(|b| b.program.clone()),
        best_cost: best.map_or(f64::INFINITY, |b| b.cost),
        threshold: best.map_or(0.5, |b| b.result.threshold),
        confusion: best.map(|b| b.result.confusion).unwrap_or_default(),
        iterations,
        tested: state.tested,
        pruned: gen.skipped(),
        constraints: store.len(),
        stop,
    })
}
