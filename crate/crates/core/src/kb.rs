//! Probabilistic background knowledge and labeled examples.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::Atom;

/// A ground atom annotated with a probability, written `0.7 :: vehicle(o1).`
#[derive(Clone, Debug, PartialEq)]
pub struct ProbFact {
    pub prob: f64,
    pub atom: Atom,
}

impl ProbFact {
    pub fn new(prob: f64, atom: Atom) -> Self {
        debug_assert!((0.0..=1.0).contains(&prob));
        debug_assert!(atom.is_ground());
        ProbFact { prob, atom }
    }

    pub fn certain(atom: Atom) -> Self {
        ProbFact::new(1.0, atom)
    }
}

impl fmt::Display for ProbFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prob == 1.0 {
            write!(f, "{}.", self.atom)
        } else {
            write!(f, "{} :: {}.", self.prob, self.atom)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => 0.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    pub fn wrapper(self) -> &'static str {
        match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        }
    }
}

/// One labeled example together with its own fact set.
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleRecord {
    pub id: String,
    pub label: Label,
    pub facts: Vec<ProbFact>,
}

impl ExampleRecord {
    pub fn new(id: impl Into<String>, label: Label, facts: Vec<ProbFact>) -> Self {
        ExampleRecord {
            id: id.into(),
            label,
            facts,
        }
    }
}
