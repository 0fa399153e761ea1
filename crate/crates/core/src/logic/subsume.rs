//! θ-subsumption between clauses and its pointwise lift to programs.
//!
//! `general` subsumes `specific` when some substitution θ maps general's head
//! onto specific's head and every body atom of general·θ occurs in specific's
//! body. Bodies are compared as sets, so several general atoms may land on
//! the same specific atom. Variables of `specific` are treated as rigid.

use std::collections::HashMap;

use super::{Atom, Clause, HypothesisProgram, Term};

type Subst<'a> = HashMap<&'a str, &'a Term>;

pub fn theta_subsumes(general: &Clause, specific: &Clause) -> bool {
    if general.head.pred != specific.head.pred || general.head.arity() != specific.head.arity() {
        return false;
    }
    let mut theta = Subst::new();
    if !match_atom(&general.head, &specific.head, &mut theta) {
        return false;
    }
    // Atoms with fewer candidate targets first.
    let mut todo: Vec<(&Atom, Vec<&Atom>)> = general
        .body
        .iter()
        .map(|g| {
            let targets = specific
                .body
                .iter()
                .filter(|s| s.pred == g.pred && s.arity() == g.arity())
                .collect::<Vec<_>>();
            (g, targets)
        })
        .collect();
    if todo.iter().any(|(_, t)| t.is_empty()) {
        return false;
    }
    todo.sort_by_key(|(_, t)| t.len());
    extend(&todo, &mut theta)
}

fn extend<'a>(todo: &[(&'a Atom, Vec<&'a Atom>)], theta: &mut Subst<'a>) -> bool {
    let Some(((g, targets), rest)) = todo.split_first() else {
        return true;
    };
    for s in targets {
        let mut trial = theta.clone();
        if match_atom(g, s, &mut trial) && extend(rest, &mut trial) {
            *theta = trial;
            return true;
        }
    }
    false
}

fn match_atom<'a>(g: &'a Atom, s: &'a Atom, theta: &mut Subst<'a>) -> bool {
    for (gt, st) in g.args.iter().zip(&s.args) {
        match gt {
            Term::Var(v) => match theta.get(v.as_str()) {
                Some(bound) if *bound != st => return false,
                Some(_) => {}
                None => {
                    theta.insert(v.as_str(), st);
                }
            },
            Term::Const(_) => {
                if gt != st {
                    return false;
                }
            }
        }
    }
    true
}

/// `h2` is a specialization of `h1`: every clause of `h2` is θ-subsumed by
/// some clause of `h1`.
pub fn program_specializes(h2: &HypothesisProgram, h1: &HypothesisProgram) -> bool {
    h2.clauses()
        .iter()
        .all(|c2| h1.clauses().iter().any(|c1| theta_subsumes(c1, c2)))
}
