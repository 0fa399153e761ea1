//! Canonical forms for clauses under variable renaming.
//!
//! Body atoms are grouped by predicate name (groups in name order). Within
//! each group every ordering is tried; for each ordering the variables are
//! renumbered by first occurrence (head first) and the lexicographically
//! smallest result wins. Two clauses are alpha-equivalent exactly when their
//! canonical forms are equal. Cost is exponential in the size of the largest
//! same-predicate group, which the bias keeps small.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::{Atom, Clause, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Slot<'a> {
    Var(usize),
    Const(&'a str),
}

type Key<'a> = Vec<Vec<Slot<'a>>>;

pub fn canonicalize(c: &Clause) -> Clause {
    let mut body: Vec<&Atom> = Vec::with_capacity(c.body.len());
    for a in &c.body {
        if !body.contains(&a) {
            body.push(a);
        }
    }
    body.sort_by(|a, b| a.pred.cmp(&b.pred).then(a.arity().cmp(&b.arity())));

    // Spans of atoms sharing a predicate.
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=body.len() {
        if i == body.len() || body[i].pred != body[start].pred || body[i].arity() != body[start].arity() {
            groups.push((start, i));
            start = i;
        }
    }

    let mut order: Vec<usize> = (0..body.len()).collect();
    let mut best: Option<(Key, Vec<usize>)> = None;
    search(&c.head, &body, &groups, 0, &mut order, &mut best);
    let (_, best_order) = best.expect("at least one ordering");

    let mut names: HashMap<String, String> = HashMap::new();
    let mut rename = |t: &Term| -> Term {
        match t {
            Term::Var(v) => {
                let next = names.len();
                Term::Var(names.entry(v.clone()).or_insert_with(|| format!("V{next}")).clone())
            }
            Term::Const(_) => t.clone(),
        }
    };
    let head = Atom::new(c.head.pred.clone(), c.head.args.iter().map(&mut rename).collect());
    let body = best_order
        .iter()
        .map(|&i| Atom::new(body[i].pred.clone(), body[i].args.iter().map(&mut rename).collect()))
        .collect();
    Clause { head, body }
}

fn search<'a>(
    head: &'a Atom,
    body: &[&'a Atom],
    groups: &[(usize, usize)],
    g: usize,
    order: &mut Vec<usize>,
    best: &mut Option<(Key<'a>, Vec<usize>)>,
) {
    if g == groups.len() {
        let key = key_for(head, body, order);
        let better = match best {
            None => true,
            Some((k, _)) => key.cmp(k) == Ordering::Less,
        };
        if better {
            *best = Some((key, order.clone()));
        }
        return;
    }
    let (lo, hi) = groups[g];
    permute(head, body, groups, g, lo, hi, order, best);
}

#[allow(clippy::too_many_arguments)]
fn permute<'a>(
    head: &'a Atom,
    body: &[&'a Atom],
    groups: &[(usize, usize)],
    g: usize,
    k: usize,
    hi: usize,
    order: &mut Vec<usize>,
    best: &mut Option<(Key<'a>, Vec<usize>)>,
) {
    if k + 1 >= hi {
        search(head, body, groups, g + 1, order, best);
        return;
    }
    for i in k..hi {
        order.swap(k, i);
        permute(head, body, groups, g, k + 1, hi, order, best);
        order.swap(k, i);
    }
}

fn key_for<'a>(head: &'a Atom, body: &[&'a Atom], order: &[usize]) -> Key<'a> {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut slot = |t: &'a Term| match t {
        Term::Var(v) => {
            let next = ids.len();
            Slot::Var(*ids.entry(v.as_str()).or_insert(next))
        }
        Term::Const(c) => Slot::Const(c.as_str()),
    };
    let mut key = Vec::with_capacity(order.len() + 1);
    key.push(head.args.iter().map(&mut slot).collect());
    for &i in order {
        key.push(body[i].args.iter().map(&mut slot).collect());
    }
    key
}

pub fn alpha_equivalent(a: &Clause, b: &Clause) -> bool {
    a.head.pred == b.head.pred && canonicalize(a) == canonicalize(b)
}
