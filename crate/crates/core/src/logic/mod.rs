//! First-order syntax for hypotheses and background knowledge.
//!
//! Terms are flat (no function symbols). A [`Clause`] is a definite clause
//! with a non-empty body of positive literals; a [`HypothesisProgram`] is a
//! non-empty set of clauses sharing one head predicate.

mod canonical;
mod subsume;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use canonical::{alpha_equivalent, canonicalize};
pub use subsume::{program_specializes, theta_subsumes};

/// Reserved unary predicate inserted by program normalization. It holds for
/// every constant of an example with probability 1.
pub const ALWAYS_TRUE: &str = "always_true";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A definite clause `head :- body`. The body is never empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Atom>) -> Result<Self> {
        if body.is_empty() {
            return Err(Error::Clause(format!("{head} has an empty body")));
        }
        if head.args.is_empty() || body.iter().any(|a| a.args.is_empty()) {
            return Err(Error::Clause(format!("{head}: atoms need arity >= 1")));
        }
        Ok(Clause { head, body })
    }

    /// Distinct variables in order of first occurrence, head first.
    pub fn vars(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        std::iter::once(&self.head)
            .chain(&self.body)
            .flat_map(Atom::vars)
            .filter(|v| seen.insert(*v))
            .collect()
    }

    /// Every body atom reaches a head variable through a chain of shared
    /// variables.
    pub fn is_head_connected(&self) -> bool {
        let mut reached: HashSet<&str> = self.head.vars().collect();
        let mut pending: Vec<&Atom> = self.body.iter().collect();
        loop {
            let before = pending.len();
            pending.retain(|atom| {
                if atom.vars().any(|v| reached.contains(v)) {
                    reached.extend(atom.vars());
                    false
                } else {
                    true
                }
            });
            if pending.is_empty() {
                return true;
            }
            if pending.len() == before {
                return false;
            }
        }
    }

    pub fn has_constants(&self) -> bool {
        std::iter::once(&self.head)
            .chain(&self.body)
            .any(|a| a.args.iter().any(|t| !t.is_var()))
    }

    /// Literal count: head plus body atoms.
    pub fn size(&self) -> usize {
        1 + self.body.len()
    }

    /// Appends `atom` to the body.
    pub fn with_literal(&self, atom: Atom) -> Clause {
        let mut body = self.body.clone();
        body.push(atom);
        Clause {
            head: self.head.clone(),
            body,
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :- ", self.head)?;
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(".")
    }
}

/// A non-empty set of clauses with a common head predicate, read as their
/// disjunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypothesisProgram {
    clauses: Vec<Clause>,
}

impl HypothesisProgram {
    /// Builds a program, dropping clauses alpha-equivalent to an earlier one.
    /// Clause order and variable names are kept as given.
    pub fn new(clauses: Vec<Clause>) -> Result<Self> {
        let first = clauses
            .first()
            .ok_or_else(|| Error::Program("a program needs at least one clause".into()))?;
        let sig = (first.head.pred.clone(), first.head.arity());
        let mut seen = HashSet::new();
        let mut kept = Vec::with_capacity(clauses.len());
        for c in clauses {
            if (c.head.pred.as_str(), c.head.arity()) != (sig.0.as_str(), sig.1) {
                return Err(Error::Program(format!(
                    "clause head {} differs from {}/{}",
                    c.head, sig.0, sig.1
                )));
            }
            if seen.insert(canonicalize(&c)) {
                kept.push(c);
            }
        }
        Ok(HypothesisProgram { clauses: kept })
    }

    pub fn from_clause(clause: Clause) -> Self {
        HypothesisProgram {
            clauses: vec![clause],
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn head_pred(&self) -> &str {
        &self.clauses[0].head.pred
    }

    pub fn head_arity(&self) -> usize {
        self.clauses[0].head.arity()
    }

    /// Total literal count (heads plus body atoms).
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Clause::size).sum()
    }

    /// Canonical clauses, deduplicated and sorted.
    pub fn canonical(&self) -> HypothesisProgram {
        let set: BTreeSet<Clause> = self.clauses.iter().map(canonicalize).collect();
        HypothesisProgram {
            clauses: set.into_iter().collect(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Clause-set union, in canonical form.
    pub fn union(&self, other: &HypothesisProgram) -> Result<HypothesisProgram> {
        let mut clauses = self.clauses.clone();
        clauses.extend(other.clauses.iter().cloned());
        Ok(HypothesisProgram::new(clauses)?.canonical())
    }

    pub fn alpha_equivalent(&self, other: &HypothesisProgram) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for HypothesisProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn program_size(h: &HypothesisProgram) -> usize {
    h.size()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredSig {
    pub name: String,
    pub arity: usize,
}

impl PredSig {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        PredSig {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for PredSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// Language bias bounding the hypothesis space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bias {
    pub head_pred: PredSig,
    pub body_preds: Vec<PredSig>,
    pub max_vars: usize,
    pub max_body: usize,
    pub max_clauses: usize,
}

impl Bias {
    pub const DEFAULT_MAX_VARS: usize = 4;
    pub const DEFAULT_MAX_BODY: usize = 4;
    pub const DEFAULT_MAX_CLAUSES: usize = 2;

    pub fn new(head_pred: PredSig, body_preds: Vec<PredSig>) -> Result<Self> {
        let bias = Bias {
            head_pred,
            body_preds,
            max_vars: Self::DEFAULT_MAX_VARS,
            max_body: Self::DEFAULT_MAX_BODY,
            max_clauses: Self::DEFAULT_MAX_CLAUSES,
        };
        bias.validate()?;
        Ok(bias)
    }

    pub fn with_limits(mut self, max_vars: usize, max_body: usize, max_clauses: usize) -> Result<Self> {
        self.max_vars = max_vars;
        self.max_body = max_body;
        self.max_clauses = max_clauses;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.head_pred.arity != 1 {
            return Err(Error::Bias(format!(
                "head predicate {} must be unary (examples are single identifiers)",
                self.head_pred
            )));
        }
        if self.body_preds.is_empty() {
            return Err(Error::Bias("no body predicate declared".into()));
        }
        if self.max_vars == 0 || self.max_body == 0 || self.max_clauses == 0 {
            return Err(Error::Bias("max_vars, max_body and max_clauses must be >= 1".into()));
        }
        let mut names = HashSet::new();
        for p in &self.body_preds {
            if p.name == self.head_pred.name {
                return Err(Error::Bias(format!("head predicate {} used in body", p.name)));
            }
            if p.name == ALWAYS_TRUE {
                return Err(Error::Bias(format!("{ALWAYS_TRUE} is reserved")));
            }
            if p.arity == 0 {
                return Err(Error::Bias(format!("{p} has arity 0")));
            }
            if !names.insert(p.name.as_str()) {
                return Err(Error::Bias(format!("body predicate {} declared twice", p.name)));
            }
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    #[test]
    fn program_sizes() {
        let h = HypothesisProgram::from_clause(clause("f(A)", &["has_object(A,B)", "vehicle(B)"]));
        assert_eq!(program_size(&h), 3);
        let eq1 = HypothesisProgram::new(vec![
            clause("f(A)", &["has_object(A,B)", "vehicle(B)"]),
            clause("f(A)", &["has_object(A,B)", "bridge(C)", "is_on(B,C)"]),
        ])
        .unwrap();
        assert_eq!(program_size(&eq1), 7);
        let minimal = HypothesisProgram::from_clause(clause("f(A)", &["vehicle(A)"]));
        assert_eq!(minimal.size(), 2);
    }

    #[test]
    fn empty_body_rejected() {
        assert!(Clause::new(atom("f(A)"), vec![]).is_err());
    }

    #[test]
    fn program_rejects_mixed_heads_and_dedups_alpha_variants() {
        let err = HypothesisProgram::new(vec![
            clause("f(A)", &["vehicle(A)"]),
            clause("g(A)", &["vehicle(A)"]),
        ]);
        assert!(err.is_err());
        let h = HypothesisProgram::new(vec![
            clause("f(A)", &["has_object(A,B)"]),
            clause("f(X)", &["has_object(X,Y)"]),
        ])
        .unwrap();
        assert_eq!(h.clauses().len(), 1);
        assert!(HypothesisProgram::new(vec![]).is_err());
    }

    #[test]
    fn head_connectivity() {
        assert!(clause("f(A)", &["has_object(A,B)", "is_on(B,C)", "bridge(C)"]).is_head_connected());
        assert!(!clause("f(A)", &["vehicle(B)"]).is_head_connected());
        assert!(!clause("f(A)", &["has_object(A,B)", "is_on(C,D)"]).is_head_connected());
    }

    #[test]
    fn clause_vars_first_occurrence() {
        let c = clause("f(A)", &["has_object(A,B)", "bridge(C)", "is_on(B,C)"]);
        assert_eq!(c.vars(), vec!["A", "B", "C"]);
    }

    #[test]
    fn bias_validation() {
        let head = PredSig::new("f", 1);
        assert!(Bias::new(head.clone(), vec![]).is_err());
        assert!(Bias::new(head.clone(), vec![PredSig::new("f", 1)]).is_err());
        assert!(Bias::new(head.clone(), vec![PredSig::new(ALWAYS_TRUE, 1)]).is_err());
        let b = Bias::new(head, vec![PredSig::new("vehicle", 1)]).unwrap();
        assert_eq!((b.max_vars, b.max_body, b.max_clauses), (4, 4, 2));
        assert!(b.with_limits(0, 1, 1).is_err());
    }
}
