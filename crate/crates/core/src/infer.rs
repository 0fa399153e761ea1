//! Probabilistic tester.
//!
//! A hypothesis is grounded against one example's facts (closed world: the
//! domain is the set of constants in that example's facts, absent facts have
//! probability 0). Every satisfying substitution yields a proof, the set of
//! distinct facts it uses. Proofs with the same fact set are merged. The
//! proofs are ranked by probability, truncated to the top k, and combined:
//!
//! * AND is multiplication,
//! * OR is `min(1, x + y)` (basic) or `1 - (1-x)(1-y)` (noisy-or),
//! * NOT is `1 - x`.
//!
//! `always_true` atoms introduced by normalization hold for every constant of
//! the example with probability 1 and are not recorded in proofs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kb::ExampleRecord;
use crate::logic::{Clause, HypothesisProgram, Term, ALWAYS_TRUE};
use crate::rewrite::normalize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Basic,
    NoisyOr,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Basic => "basic",
            Provenance::NoisyOr => "noisy-or",
        })
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Provenance::Basic),
            "noisy-or" | "noisy_or" => Ok(Provenance::NoisyOr),
            _ => Err(format!("unknown provenance {s} (expected basic or noisy-or)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    /// Number of proofs kept before the disjunction; `None` keeps all.
    pub k: Option<usize>,
    pub provenance: Provenance,
    /// Evaluate the normalized (shared-argument) form of the program.
    pub normalize: bool,
}

impl InferenceConfig {
    pub const DEFAULT_K: usize = 3;

    pub fn unlimited() -> Self {
        InferenceConfig {
            k: None,
            ..Default::default()
        }
    }

    pub fn with_k(k: usize) -> Self {
        assert!(k >= 1, "top-k needs k >= 1");
        InferenceConfig {
            k: Some(k),
            ..Default::default()
        }
    }
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            k: Some(Self::DEFAULT_K),
            provenance: Provenance::Basic,
            normalize: true,
        }
    }
}

pub fn prob_and(xs: &[f64]) -> f64 {
    xs.iter().product()
}

pub fn prob_or(xs: &[f64], provenance: Provenance) -> f64 {
    match provenance {
        Provenance::Basic => xs.iter().sum::<f64>().min(1.0),
        Provenance::NoisyOr => 1.0 - xs.iter().map(|x| 1.0 - x).product::<f64>(),
    }
}

pub fn prob_not(x: f64) -> f64 {
    1.0 - x
}

/// Facts (indices into the example's deduplicated fact list) jointly
/// satisfying one grounding of a clause body.
#[derive(Clone, Debug, PartialEq)]
pub struct Proof {
    pub facts: Vec<u32>,
    pub prob: f64,
}

#[derive(Clone, Debug)]
struct Tuple {
    args: Box<[u32]>,
    fact: u32,
}

/// An example's facts indexed for grounding. Build once per example and
/// reuse across hypotheses.
#[derive(Clone, Debug)]
pub struct ExampleIndex {
    id: String,
    consts: HashMap<String, u32>,
    domain_size: usize,
    relations: HashMap<String, Vec<Tuple>>,
    probs: Vec<f64>,
    atoms: Vec<String>,
}

impl ExampleIndex {
    pub fn new(ex: &ExampleRecord) -> Self {
        Self::build(ex, |_| true)
    }

    /// Keeps only facts with probability at least `bk_threshold`, all of them
    /// certain.
    pub fn thresholded(ex: &ExampleRecord, bk_threshold: f64) -> Self {
        let mut idx = Self::build(ex, |p| p >= bk_threshold);
        idx.probs.iter_mut().for_each(|p| *p = 1.0);
        idx
    }

    fn build(ex: &ExampleRecord, keep: impl Fn(f64) -> bool) -> Self {
        let mut consts: HashMap<String, u32> = HashMap::new();
        let mut by_atom: HashMap<(String, Vec<u32>), u32> = HashMap::new();
        let mut probs: Vec<f64> = Vec::new();
        let mut atoms: Vec<String> = Vec::new();
        let mut relations: HashMap<String, Vec<Tuple>> = HashMap::new();
        for f in ex.facts.iter().filter(|f| keep(f.prob)) {
            let args: Vec<u32> = f
                .atom
                .args
                .iter()
                .map(|t| {
                    let next = consts.len() as u32;
                    *consts.entry(t.name().to_string()).or_insert(next)
                })
                .collect();
            let key = (f.atom.pred.clone(), args);
            // A repeated atom keeps its highest probability.
            if let Some(&id) = by_atom.get(&key) {
                probs[id as usize] = probs[id as usize].max(f.prob);
                continue;
            }
            let id = probs.len() as u32;
            probs.push(f.prob);
            atoms.push(f.atom.to_string());
            relations.entry(key.0.clone()).or_default().push(Tuple {
                args: key.1.clone().into_boxed_slice(),
                fact: id,
            });
            by_atom.insert(key, id);
        }
        for tuples in relations.values_mut() {
            tuples.retain(|t| probs[t.fact as usize] > 0.0);
        }
        ExampleIndex {
            id: ex.id.clone(),
            domain_size: consts.len(),
            consts,
            relations,
            probs,
            atoms,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Text of the fact behind a proof index.
    pub fn fact_text(&self, fact: u32) -> &str {
        &self.atoms[fact as usize]
    }

    pub fn fact_prob(&self, fact: u32) -> f64 {
        self.probs[fact as usize]
    }

    /// All proofs of `clause` with its head bound to `binding`, merged by
    /// fact set, in no particular order.
    pub fn enumerate(&self, clause: &Clause, binding: &str) -> Vec<Proof> {
        let mut acc = HashMap::new();
        self.collect(clause, binding, &mut acc, false);
        acc.into_iter().map(|(facts, prob)| Proof { facts, prob }).collect()
    }

    /// Probability that `h` holds for this example's own id.
    pub fn evaluate(&self, h: &HypothesisProgram, cfg: &InferenceConfig) -> f64 {
        let mut acc = HashMap::new();
        if cfg.normalize && h.clauses().len() > 1 {
            for c in &normalize(h).clauses {
                self.collect(c, &self.id, &mut acc, false);
            }
        } else {
            for c in h.clauses() {
                self.collect(c, &self.id, &mut acc, false);
            }
        }
        combine(acc.into_iter().map(|(facts, prob)| Proof { facts, prob }).collect(), cfg)
    }

    /// Classical entailment: some clause has at least one proof.
    pub fn entails(&self, h: &HypothesisProgram) -> bool {
        let mut acc = HashMap::new();
        h.clauses()
            .iter()
            .any(|c| self.collect(c, &self.id, &mut acc, true))
    }

    /// Adds proofs to `acc`; with `first_only` stops at the first proof.
    /// Returns whether any proof was found.
    fn collect(&self, clause: &Clause, binding: &str, acc: &mut HashMap<Vec<u32>, f64>, first_only: bool) -> bool {
        let Some(plan) = Plan::compile(self, clause, binding) else {
            return false;
        };
        let mut vals = plan.initial.clone();
        let mut used = Vec::with_capacity(plan.steps.len());
        let mut found = false;
        self.search(&plan, 0, &mut vals, &mut used, acc, first_only, &mut found);
        found
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        plan: &Plan,
        step: usize,
        vals: &mut Vec<Option<u32>>,
        used: &mut Vec<u32>,
        acc: &mut HashMap<Vec<u32>, f64>,
        first_only: bool,
        found: &mut bool,
    ) {
        if first_only && *found {
            return;
        }
        let Some(lit) = plan.steps.get(step) else {
            let mut facts = used.clone();
            facts.sort_unstable();
            facts.dedup();
            let prob = facts.iter().map(|&f| self.probs[f as usize]).product();
            acc.insert(facts, prob);
            *found = true;
            return;
        };
        match lit {
            Step::AlwaysTrue(v) => {
                if vals[*v].is_some() {
                    self.search(plan, step + 1, vals, used, acc, first_only, found);
                } else if self.domain_size > 0 {
                    // Every constant yields the same fact set; one suffices.
                    vals[*v] = Some(0);
                    self.search(plan, step + 1, vals, used, acc, first_only, found);
                    vals[*v] = None;
                }
            }
            Step::Match { tuples, args } => {
                let mut bound_here: Vec<usize> = Vec::with_capacity(args.len());
                'tuples: for t in tuples.iter() {
                    for &v in &bound_here {
                        vals[v] = None;
                    }
                    bound_here.clear();
                    for (slot, &c) in args.iter().zip(t.args.iter()) {
                        match *slot {
                            Slot::Const(k) => {
                                if k != c {
                                    continue 'tuples;
                                }
                            }
                            Slot::Var(v) => match vals[v] {
                                Some(x) if x != c => continue 'tuples,
                                Some(_) => {}
                                None => {
                                    vals[v] = Some(c);
                                    bound_here.push(v);
                                }
                            },
                        }
                    }
                    used.push(t.fact);
                    self.search(plan, step + 1, vals, used, acc, first_only, found);
                    used.pop();
                    if first_only && *found {
                        break;
                    }
                }
                for &v in &bound_here {
                    vals[v] = None;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Var(usize),
    Const(u32),
}

enum Step<'a> {
    Match { tuples: &'a [Tuple], args: Vec<Slot> },
    AlwaysTrue(usize),
}

struct Plan<'a> {
    initial: Vec<Option<u32>>,
    steps: Vec<Step<'a>>,
}

impl<'a> Plan<'a> {
    /// Resolves predicates and constants against the index and orders the
    /// body greedily by bound arguments. `None` when the clause cannot have
    /// a proof (unknown predicate or constant, or head mismatch).
    fn compile(idx: &'a ExampleIndex, clause: &Clause, binding: &str) -> Option<Plan<'a>> {
        let mut var_ids: HashMap<&str, usize> = HashMap::new();
        for v in clause.vars() {
            let n = var_ids.len();
            var_ids.insert(v, n);
        }
        // The query constant may not occur in any fact.
        let query = idx.consts.get(binding).copied().unwrap_or(u32::MAX);
        let mut initial = vec![None; var_ids.len()];
        for t in &clause.head.args {
            match t {
                Term::Var(v) => {
                    let slot = &mut initial[var_ids[v.as_str()]];
                    if slot.is_some_and(|x| x != query) {
                        return None;
                    }
                    *slot = Some(query);
                }
                Term::Const(c) if c == binding => {}
                Term::Const(_) => return None,
            }
        }

        struct Lit<'b> {
            tuples: &'b [Tuple],
            args: Vec<Slot>,
            vars: Vec<usize>,
        }
        let mut lits: Vec<Lit> = Vec::new();
        let mut dummies: Vec<usize> = Vec::new();
        for atom in &clause.body {
            if atom.pred == ALWAYS_TRUE {
                match &atom.args[..] {
                    [Term::Var(v)] => dummies.push(var_ids[v.as_str()]),
                    [Term::Const(c)] => {
                        idx.consts.get(c)?;
                    }
                    _ => return None,
                }
                continue;
            }
            let tuples = idx.relations.get(&atom.pred)?;
            let mut args = Vec::with_capacity(atom.args.len());
            let mut vars = Vec::new();
            for t in &atom.args {
                match t {
                    Term::Var(v) => {
                        let id = var_ids[v.as_str()];
                        args.push(Slot::Var(id));
                        vars.push(id);
                    }
                    Term::Const(c) => args.push(Slot::Const(*idx.consts.get(c)?)),
                }
            }
            if tuples.first().is_some_and(|t| t.args.len() != args.len()) {
                return None;
            }
            lits.push(Lit {
                tuples: tuples.as_slice(),
                args,
                vars,
            });
        }

        let mut bound: Vec<bool> = initial.iter().map(Option::is_some).collect();
        let mut steps = Vec::with_capacity(lits.len() + dummies.len());
        while !lits.is_empty() {
            let pick = (0..lits.len())
                .max_by_key(|&i| {
                    let l = &lits[i];
                    let nbound = l.vars.iter().filter(|&&v| bound[v]).count();
                    let free = l.vars.len() - nbound;
                    (free == 0, nbound, std::cmp::Reverse(l.tuples.len()), std::cmp::Reverse(i))
                })
                .expect("non-empty");
            let lit = lits.remove(pick);
            for &v in &lit.vars {
                bound[v] = true;
            }
            steps.push(Step::Match {
                tuples: lit.tuples,
                args: lit.args,
            });
        }
        steps.extend(dummies.into_iter().map(Step::AlwaysTrue));
        Some(Plan { initial, steps })
    }
}

/// Sorts proofs by descending probability (ties by fact set), keeps the top
/// k and combines them with the configured disjunction.
pub fn combine(mut proofs: Vec<Proof>, cfg: &InferenceConfig) -> f64 {
    proofs.sort_by(|a, b| b.prob.total_cmp(&a.prob).then_with(|| a.facts.cmp(&b.facts)));
    if let Some(k) = cfg.k {
        proofs.truncate(k);
    }
    let probs: Vec<f64> = proofs.iter().map(|p| p.prob).collect();
    prob_or(&probs, cfg.provenance).clamp(0.0, 1.0)
}

/// Proofs of one clause for the query constant `query_binding`.
pub fn enumerate_proofs(c: &Clause, ex: &ExampleRecord, query_binding: &str) -> Vec<Proof> {
    let mut proofs = ExampleIndex::new(ex).enumerate(c, query_binding);
    proofs.sort_by(|a, b| b.prob.total_cmp(&a.prob).then_with(|| a.facts.cmp(&b.facts)));
    proofs
}

pub fn evaluate(h: &HypothesisProgram, ex: &ExampleRecord, cfg: &InferenceConfig) -> f64 {
    ExampleIndex::new(ex).evaluate(h, cfg)
}

/// Entailment after discarding facts below `bk_threshold`.
pub fn evaluate_binary(h: &HypothesisProgram, ex: &ExampleRecord, bk_threshold: f64) -> bool {
    ExampleIndex::thresholded(ex, bk_threshold).entails(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Label, ProbFact};
    use crate::logic::test_util::clause;
    use crate::parser::{parse_clauses, parse_facts};

    fn example(facts: &str) -> ExampleRecord {
        ExampleRecord::new("img1", Label::Positive, parse_facts(facts).unwrap())
    }

    fn program(text: &str) -> HypothesisProgram {
        HypothesisProgram::new(parse_clauses(text).unwrap()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn and_or_not() {
        assert!(close(prob_and(&[0.7, 0.8]), 0.56));
        assert_eq!(prob_and(&[]), 1.0);
        assert_eq!(prob_and(&[0.5, 0.0]), 0.0);
        assert_eq!(prob_or(&[0.7, 0.8], Provenance::Basic), 1.0);
        assert!(close(prob_or(&[0.5, 0.4], Provenance::Basic), 0.9));
        assert!(close(prob_or(&[0.5, 0.4], Provenance::NoisyOr), 0.7));
        assert_eq!(prob_or(&[], Provenance::Basic), 0.0);
        assert_eq!(prob_or(&[], Provenance::NoisyOr), 0.0);
        assert_eq!(prob_not(0.0), 1.0);
        assert_eq!(prob_not(1.0), 0.0);
        assert!(close(prob_not(0.3), 0.7));
    }

    #[test]
    fn single_proof() {
        let ex = example("has_object(img1,o1).\n0.7 :: vehicle(o1).");
        let c = clause("f(A)", &["has_object(A,B)", "vehicle(B)"]);
        let proofs = enumerate_proofs(&c, &ex, "img1");
        assert_eq!(proofs.len(), 1);
        assert!(close(proofs[0].prob, 0.7));
        assert_eq!(proofs[0].facts.len(), 2);
    }

    #[test]
    fn two_substitutions_two_proofs() {
        let ex = example(
            "has_object(img1,o1).\n0.7 :: vehicle(o1).\n0.5 :: vehicle(o2).\nhas_object(img1,o2).",
        );
        let c = clause("f(A)", &["has_object(A,B)", "vehicle(B)"]);
        let probs: Vec<f64> = enumerate_proofs(&c, &ex, "img1").iter().map(|p| p.prob).collect();
        assert_eq!(probs.len(), 2);
        assert!(close(probs[0], 0.7) && close(probs[1], 0.5));
    }

    #[test]
    fn no_matching_facts() {
        let ex = example("0.7 :: bridge(o1).");
        let c = clause("f(A)", &["has_object(A,B)", "vehicle(B)"]);
        assert!(enumerate_proofs(&c, &ex, "img1").is_empty());
        assert_eq!(evaluate(&HypothesisProgram::from_clause(c), &ex, &InferenceConfig::default()), 0.0);
    }

    #[test]
    fn zero_probability_facts_give_no_proof() {
        let ex = example("has_object(img1,o1).\n0 :: vehicle(o1).");
        let c = clause("f(A)", &["has_object(A,B)", "vehicle(B)"]);
        assert!(enumerate_proofs(&c, &ex, "img1").is_empty());
    }

    #[test]
    fn repeated_fact_counts_once() {
        let ex = example("0.5 :: has_object(img1,o1).");
        let c = clause("f(A)", &["has_object(A,B)", "has_object(A,C)"]);
        let proofs = enumerate_proofs(&c, &ex, "img1");
        assert_eq!(proofs.len(), 1);
        assert!(close(proofs[0].prob, 0.5));
    }

    #[test]
    fn top_k_truncation() {
        // Three disjoint proofs with probabilities 0.5, 0.4, 0.3.
        let ex = example(
            "has_object(img1,o1).\nhas_object(img1,o2).\nhas_object(img1,o3).\n\
             0.5 :: vehicle(o1).\n0.4 :: vehicle(o2).\n0.3 :: vehicle(o3).",
        );
        let h = program("f(A) :- has_object(A,B), vehicle(B).");
        assert!(close(evaluate(&h, &ex, &InferenceConfig::with_k(2)), 0.9));
        assert_eq!(evaluate(&h, &ex, &InferenceConfig::unlimited()), 1.0);
        let noisy = InferenceConfig {
            provenance: Provenance::NoisyOr,
            ..InferenceConfig::unlimited()
        };
        assert!(close(evaluate(&h, &ex, &noisy), 1.0 - 0.5 * 0.6 * 0.7));
    }

    #[test]
    fn identical_fact_sets_merge_across_clauses() {
        let ex = example("has_object(img1,o1).\n0.4 :: vehicle(o1).");
        let h = program("f(A) :- has_object(A,B), vehicle(B).\nf(A) :- vehicle(B), has_object(A,B), has_object(A,C).");
        // The second clause is not alpha-equivalent but grounds to the same facts.
        assert!(close(evaluate(&h, &ex, &InferenceConfig::unlimited()), 0.4));
    }

    #[test]
    fn normalization_does_not_change_value() {
        let ex = example(
            "has_object(img1,o1).\nhas_object(img1,o2).\n0.6 :: vehicle(o1).\n0.3 :: bridge(o2).\n\
             0.9 :: is_on(o1,o2).\n0.2 :: vehicle(o2).",
        );
        let h = program(
            "f(A) :- has_object(A, B), vehicle(B).\nf(A) :- has_object(A, B), bridge(C), is_on(B, C).",
        );
        for k in [None, Some(1), Some(2), Some(3)] {
            let on = InferenceConfig {
                k,
                ..Default::default()
            };
            let off = InferenceConfig { normalize: false, ..on };
            assert!((evaluate(&h, &ex, &on) - evaluate(&h, &ex, &off)).abs() <= 1e-12);
        }
    }

    #[test]
    fn binary_threshold() {
        let ex = example("has_object(img1,o1).\n0.7 :: vehicle(o1).");
        let h = program("f(A) :- has_object(A,B), vehicle(B).");
        assert!(evaluate_binary(&h, &ex, 0.5));
        let ex = example("has_object(img1,o1).\n0.49 :: vehicle(o1).");
        assert!(!evaluate_binary(&h, &ex, 0.5));
        assert!(evaluate_binary(&h, &ex, 0.0));
    }

    #[test]
    fn boundary_probability_kept_at_threshold() {
        let ex = ExampleRecord::new(
            "img1",
            Label::Negative,
            vec![ProbFact::new(0.5, crate::logic::test_util::atom("vehicle(img1)"))],
        );
        let h = program("f(A) :- vehicle(A).");
        assert!(evaluate_binary(&h, &ex, 0.5));
    }

    #[test]
    fn unknown_predicate_is_closed_world_false() {
        let ex = example("has_object(img1,o1).");
        let h = program("f(A) :- has_object(A,B), spaceship(B).");
        assert_eq!(evaluate(&h, &ex, &InferenceConfig::default()), 0.0);
        assert!(!evaluate_binary(&h, &ex, 0.5));
    }

    #[test]
    fn duplicate_atoms_keep_highest_probability() {
        let ex = example("0.2 :: vehicle(img1).\n0.6 :: vehicle(img1).");
        let h = program("f(A) :- vehicle(A).");
        assert!(close(evaluate(&h, &ex, &InferenceConfig::default()), 0.6));
    }
}
