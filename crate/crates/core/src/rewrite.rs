//! Normalization of multi-clause programs onto one shared argument set.
//!
//! Clauses of a program may use different variables. Normalization extracts
//! the clause bodies, collects each clause's variable set, and pads every
//! body with `always_true(X)` for the variables of the shared set it does
//! not mention, so every clause is a function of the same arguments:
//!
//! ```text
//! f(A) :- has_object(A,B), vehicle(B).
//! f(A) :- has_object(A,B), bridge(C), is_on(B,C).
//! ```
//!
//! becomes, over `(C, A, B)`,
//!
//! ```text
//! g0(C, A, B) = has_object(A, B), vehicle(B), always_true(C)
//! g1(C, A, B) = has_object(A, B), bridge(C), is_on(B, C)
//! g(C, A, B) = g0(C, A, B) or g1(C, A, B)
//! ```
//!
//! `always_true` holds with probability 1 for every constant of an example,
//! so normalization never changes an evaluated probability.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::logic::{Atom, Clause, HypothesisProgram, Term, ALWAYS_TRUE};

/// A program whose clauses all mention exactly `unified_vars`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedProgram {
    pub unified_vars: Vec<String>,
    /// Source heads with extended bodies, in source clause order.
    pub clauses: Vec<Clause>,
    pub source: HypothesisProgram,
}

/// Clause bodies, in clause order.
pub fn bodies(h: &HypothesisProgram) -> Vec<Vec<Atom>> {
    h.clauses().iter().map(|c| c.body.clone()).collect()
}

/// Per-clause variable sets (head and body), each in first-occurrence order.
pub fn var_sets(h: &HypothesisProgram) -> Vec<Vec<String>> {
    h.clauses()
        .iter()
        .map(|c| c.vars().into_iter().map(String::from).collect())
        .collect()
}

/// Appends `always_true(X)` for every `X` in `target_vars` the body does not
/// mention, in `target_vars` order.
pub fn extend(body: &[Atom], target_vars: &[String]) -> Result<Vec<Atom>> {
    let used: HashSet<&str> = body.iter().flat_map(Atom::vars).collect();
    if let Some(stray) = used.iter().find(|v| !target_vars.iter().any(|t| t == *v)) {
        return Err(Error::Clause(format!(
            "body variable {stray} is outside the target variable set"
        )));
    }
    let mut out = body.to_vec();
    for v in target_vars {
        if !used.contains(v.as_str()) {
            out.push(Atom::new(ALWAYS_TRUE, vec![Term::Var(v.clone())]));
        }
    }
    Ok(out)
}

/// Normalizes over the union of clause variables, ordered by first
/// appearance scanning clause by clause.
pub fn normalize(h: &HypothesisProgram) -> NormalizedProgram {
    let mut order: Vec<String> = Vec::new();
    for set in var_sets(h) {
        for v in set {
            if !order.contains(&v) {
                order.push(v);
            }
        }
    }
    normalize_with_order(h, &order).expect("union order covers every variable")
}

/// Normalizes over an explicit ordering of the union of clause variables.
/// Any ordering is evaluation-equivalent; only the rendered argument order
/// changes.
pub fn normalize_with_order(h: &HypothesisProgram, order: &[String]) -> Result<NormalizedProgram> {
    let union: HashSet<String> = var_sets(h).into_iter().flatten().collect();
    let given: HashSet<String> = order.iter().cloned().collect();
    if union != given || given.len() != order.len() {
        return Err(Error::Program(format!(
            "variable order {order:?} is not a permutation of the program's variables"
        )));
    }
    let clauses = h
        .clauses()
        .iter()
        .map(|c| {
            // Head variables count as used: they are bound by the query.
            let body_and_head: Vec<Atom> = c.body.iter().chain([&c.head]).cloned().collect();
            let padded = extend(&body_and_head, order)?;
            let mut body = c.body.clone();
            body.extend(padded.into_iter().skip(body_and_head.len()));
            Ok(Clause {
                head: c.head.clone(),
                body,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizedProgram {
        unified_vars: order.to_vec(),
        clauses,
        source: h.clone(),
    })
}

impl NormalizedProgram {
    /// Renders the disjunctive form with one helper relation per clause:
    /// `g0(..) = body` lines followed by `g(..) = g0(..) or g1(..)`.
    pub fn render(&self, name: &str) -> String {
        let args = self.unified_vars.join(", ");
        let atom = |a: &Atom| {
            let xs: Vec<String> = a.args.iter().map(|t| t.name().to_string()).collect();
            format!("{}({})", a.pred, xs.join(", "))
        };
        let mut out = String::new();
        for (i, c) in self.clauses.iter().enumerate() {
            let body: Vec<String> = c.body.iter().map(atom).collect();
            out.push_str(&format!("{name}{i}({args}) = {}\n", body.join(", ")));
        }
        let parts: Vec<String> = (0..self.clauses.len())
            .map(|i| format!("{name}{i}({args})"))
            .collect();
        out.push_str(&format!("{name}({args}) = {}\n", parts.join(" or ")));
        out
    }

    pub fn dummy_count(&self) -> usize {
        self.clauses
            .iter()
            .flat_map(|c| &c.body)
            .filter(|a| a.pred == ALWAYS_TRUE)
            .count()
    }
}
