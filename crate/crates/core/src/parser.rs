//! Text formats: hypothesis programs, probabilistic fact files, example
//! label files and bias declarations.
//!
//! All formats share one statement grammar. Statements end with `.`, `%`
//! starts a line comment, and whitespace is insignificant.
//!
//! ```text
//! f(A) :- has_object(A,B), vehicle(B).     % clause
//! 0.7 :: vehicle(o1).                       % probabilistic fact
//! has_object(img1,o1).                      % fact with probability 1
//! pos(f(img1)).                             % example label
//! body_pred(vehicle,1).                     % bias declaration
//! ```

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::kb::{Label, ProbFact};
use crate::logic::{Atom, Bias, Clause, HypothesisProgram, PredSig, Term, ALWAYS_TRUE};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Num(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    DoubleColon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Num(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::DoubleColon => "`::`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| Error::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' | ')' | ',' | '.' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    _ => Tok::Dot,
                };
                out.push(Spanned { tok, line: l0, col: c0 });
                advance(1, &mut i);
            }
            ':' => {
                let tok = match chars.get(i + 1) {
                    Some('-') => Tok::Neck,
                    Some(':') => Tok::DoubleColon,
                    _ => return Err(err(l0, c0, "expected `:-` or `::`".into())),
                };
                out.push(Spanned { tok, line: l0, col: c0 });
                advance(2, &mut i);
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                // Identifiers like `1st` are not numbers.
                if j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    return Err(err(l0, c0, "malformed number".into()));
                }
                let s: String = chars[start..j].iter().collect();
                out.push(Spanned {
                    tok: Tok::Num(s),
                    line: l0,
                    col: c0,
                });
                advance(j - start, &mut i);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[start..j].iter().collect();
                let tok = if c.is_uppercase() || c == '_' {
                    Tok::Var(s)
                } else {
                    Tok::Ident(s)
                };
                out.push(Spanned { tok, line: l0, col: c0 });
                advance(j - start, &mut i);
            }
            other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Expr {
    Var(String),
    Const(String),
    Compound(String, Vec<Expr>),
}

#[derive(Debug)]
struct Statement {
    line: usize,
    prob: Option<(f64, usize, usize)>,
    head: (String, Vec<Expr>),
    body: Option<Vec<(String, Vec<Expr>, usize)>>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        let toks = lex(text)?;
        let lines = text.split('\n').count();
        let last_col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Ok(Parser {
            toks,
            pos: 0,
            end: (lines, last_col),
        })
    }

    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |s| (s.line, s.col))
    }

    fn error<T>(&self, expected: &str) -> Result<T> {
        let (line, col) = self.here();
        let found = self.peek().map_or("end of input".to_string(), |s| s.tok.describe());
        Err(Error::Syntax {
            line,
            col,
            msg: format!("expected {expected}, found {found}"),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().is_some_and(|s| &s.tok == tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(what)
        }
    }

    fn statements(mut self) -> Result<Vec<Statement>> {
        let mut out = Vec::new();
        while self.peek().is_some() {
            out.push(self.statement()?);
        }
        Ok(out)
    }

    fn statement(&mut self) -> Result<Statement> {
        let (line, _) = self.here();
        let mut prob = None;
        if let Some(Spanned {
            tok: Tok::Num(n),
            line: l,
            col: c,
        }) = self.peek().cloned()
        {
            self.pos += 1;
            let value: f64 = n.parse().map_err(|_| Error::Syntax {
                line: l,
                col: c,
                msg: format!("malformed probability `{n}`"),
            })?;
            prob = Some((value, l, c));
            self.expect(Tok::DoubleColon, "`::` after probability")?;
        }
        let head = self.compound()?;
        let body = if self.eat(&Tok::Neck) {
            let mut lits = Vec::new();
            loop {
                let (l, _) = self.here();
                let (name, args) = self.compound()?;
                lits.push((name, args, l));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            Some(lits)
        } else {
            None
        };
        self.expect(Tok::Dot, "`.` ending the statement")?;
        Ok(Statement { line, prob, head, body })
    }

    fn compound(&mut self) -> Result<(String, Vec<Expr>)> {
        let name = match self.peek() {
            Some(Spanned {
                tok: Tok::Ident(name), ..
            }) => name.clone(),
            _ => return self.error("a predicate name"),
        };
        self.pos += 1;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        loop {
            args.push(self.expr()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        Ok((name, args))
    }

    fn expr(&mut self) -> Result<Expr> {
        match self.peek().map(|s| s.tok.clone()) {
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(Expr::Var(v))
            }
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Const(n))
            }
            Some(Tok::Ident(name)) => {
                if matches!(self.toks.get(self.pos + 1).map(|s| &s.tok), Some(Tok::LParen)) {
                    let (name, args) = self.compound()?;
                    Ok(Expr::Compound(name, args))
                } else {
                    self.pos += 1;
                    Ok(Expr::Const(name))
                }
            }
            _ => self.error("a term"),
        }
    }
}

fn flat_atom(name: String, args: Vec<Expr>, line: usize) -> Result<Atom> {
    let args = args
        .into_iter()
        .map(|e| match e {
            Expr::Var(v) => Ok(Term::Var(v)),
            Expr::Const(c) => Ok(Term::Const(c)),
            Expr::Compound(f, _) => Err(Error::Syntax {
                line,
                col: 1,
                msg: format!("nested term {f}(..) not allowed here"),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Atom::new(name, args))
}

#[derive(Default)]
struct ArityTable(HashMap<String, usize>);

impl ArityTable {
    fn check(&mut self, atom: &Atom, line: usize) -> Result<()> {
        match self.0.get(&atom.pred) {
            Some(&expected) if expected != atom.arity() => Err(Error::ArityMismatch {
                line,
                pred: atom.pred.clone(),
                expected,
                found: atom.arity(),
            }),
            Some(_) => Ok(()),
            None => {
                self.0.insert(atom.pred.clone(), atom.arity());
                Ok(())
            }
        }
    }
}

/// Parses clauses keeping variable names and literal order as written.
pub fn parse_clauses(text: &str) -> Result<Vec<Clause>> {
    let mut arities = ArityTable::default();
    let mut clauses = Vec::new();
    for st in Parser::new(text)?.statements()? {
        if let Some((_, line, col)) = st.prob {
            return Err(Error::Syntax {
                line,
                col,
                msg: "probabilities are not allowed on hypothesis clauses".into(),
            });
        }
        let head = flat_atom(st.head.0, st.head.1, st.line)?;
        let Some(body) = st.body else {
            return Err(Error::Syntax {
                line: st.line,
                col: 1,
                msg: format!("clause {head} has no body"),
            });
        };
        arities.check(&head, st.line)?;
        let mut atoms = Vec::with_capacity(body.len());
        for (name, args, line) in body {
            if name == ALWAYS_TRUE {
                return Err(Error::ReservedPredicate { line, pred: name });
            }
            let atom = flat_atom(name, args, line)?;
            arities.check(&atom, line)?;
            atoms.push(atom);
        }
        clauses.push(Clause::new(head, atoms)?);
    }
    Ok(clauses)
}

/// Parses a hypothesis program and returns it in canonical form.
pub fn parse_program(text: &str) -> Result<HypothesisProgram> {
    Ok(HypothesisProgram::new(parse_clauses(text)?)?.canonical())
}

pub fn parse_facts(text: &str) -> Result<Vec<ProbFact>> {
    let mut arities = ArityTable::default();
    let mut facts = Vec::new();
    for st in Parser::new(text)?.statements()? {
        if st.body.is_some() {
            return Err(Error::Syntax {
                line: st.line,
                col: 1,
                msg: "rules are not allowed in a facts file".into(),
            });
        }
        let atom = flat_atom(st.head.0, st.head.1, st.line)?;
        if atom.pred == ALWAYS_TRUE {
            return Err(Error::ReservedPredicate {
                line: st.line,
                pred: atom.pred,
            });
        }
        if !atom.is_ground() {
            return Err(Error::NonGroundFact {
                line: st.line,
                atom: atom.to_string(),
            });
        }
        arities.check(&atom, st.line)?;
        let prob = match st.prob {
            None => 1.0,
            Some((p, line, _)) if !(0.0..=1.0).contains(&p) => {
                return Err(Error::ProbabilityOutOfRange { line, value: p })
            }
            Some((p, _, _)) => p,
        };
        facts.push(ProbFact::new(prob, atom));
    }
    Ok(facts)
}

/// Parses `pos(f(ID)).` / `neg(f(ID)).` lines into labeled example ids.
pub fn parse_examples(text: &str) -> Result<Vec<(String, Label)>> {
    let mut seen = HashSet::new();
    let mut head: Option<String> = None;
    let mut out = Vec::new();
    for st in Parser::new(text)?.statements()? {
        let bad = |msg: &str| Error::Syntax {
            line: st.line,
            col: 1,
            msg: msg.to_string(),
        };
        if st.prob.is_some() || st.body.is_some() {
            return Err(bad("example lines are plain `pos(..)` or `neg(..)` atoms"));
        }
        let (wrapper, args) = st.head;
        let label = match wrapper.as_str() {
            "pos" => Label::Positive,
            "neg" => Label::Negative,
            _ => {
                return Err(Error::UnknownWrapper {
                    line: st.line,
                    wrapper,
                })
            }
        };
        let [Expr::Compound(pred, inner)] = args.as_slice() else {
            return Err(bad("expected pos(f(ID)) or neg(f(ID))"));
        };
        let [Expr::Const(id)] = inner.as_slice() else {
            return Err(bad("example atoms take exactly one constant argument"));
        };
        match &head {
            Some(h) if h != pred => {
                return Err(bad(&format!("example predicate {pred} differs from {h}")));
            }
            None => head = Some(pred.clone()),
            _ => {}
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateExample {
                line: st.line,
                id: id.clone(),
            });
        }
        out.push((id.clone(), label));
    }
    Ok(out)
}

pub fn parse_bias(text: &str) -> Result<Bias> {
    let mut head: Option<PredSig> = None;
    let mut body = Vec::new();
    let (mut max_vars, mut max_body, mut max_clauses) =
        (Bias::DEFAULT_MAX_VARS, Bias::DEFAULT_MAX_BODY, Bias::DEFAULT_MAX_CLAUSES);
    for st in Parser::new(text)?.statements()? {
        let line = st.line;
        let bad = |msg: String| Error::Syntax { line, col: 1, msg };
        if st.prob.is_some() || st.body.is_some() {
            return Err(bad("bias declarations are plain atoms".into()));
        }
        let (name, args) = st.head;
        let count = |e: &Expr| -> Result<usize> {
            match e {
                Expr::Const(n) => n.parse().map_err(|_| bad(format!("expected a count, found {n}"))),
                _ => Err(bad("expected a count".into())),
            }
        };
        let sig = |args: &[Expr]| -> Result<PredSig> {
            match args {
                [Expr::Const(p), n] => Ok(PredSig::new(p.clone(), count(n)?)),
                _ => Err(bad(format!("{name} expects (predicate, arity)"))),
            }
        };
        match (name.as_str(), args.as_slice()) {
            ("head_pred", a) => {
                if head.is_some() {
                    return Err(Error::Bias(format!("line {line}: second head_pred declaration")));
                }
                head = Some(sig(a)?);
            }
            ("body_pred", a) => body.push(sig(a)?),
            ("max_vars", [n]) => max_vars = count(n)?,
            ("max_body", [n]) => max_body = count(n)?,
            ("max_clauses", [n]) => max_clauses = count(n)?,
            _ => log::warn!("bias line {line}: ignoring unsupported declaration {name}"),
        }
    }
    let head = head.ok_or_else(|| Error::Bias("missing head_pred declaration".into()))?;
    Bias::new(head, body)?.with_limits(max_vars, max_body, max_clauses)
}

/// Variable name for the `i`-th distinct variable of a clause: A..Z, then
/// A1..Z1 and so on.
pub fn var_letter(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    match i / 26 {
        0 => letter.to_string(),
        n => format!("{letter}{n}"),
    }
}

/// Renames a clause's variables to A, B, C, … by first occurrence.
pub fn letter_clause(c: &Clause) -> Clause {
    let names: HashMap<&str, String> = c
        .vars()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, var_letter(i)))
        .collect();
    let rename = |a: &Atom| {
        Atom::new(
            a.pred.clone(),
            a.args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => Term::Var(names[v.as_str()].clone()),
                    Term::Const(_) => t.clone(),
                })
                .collect(),
        )
    };
    Clause {
        head: rename(&c.head),
        body: c.body.iter().map(rename).collect(),
    }
}

/// One clause per line, variables lettered by first occurrence.
pub fn print_program(h: &HypothesisProgram) -> String {
    let mut out = String::new();
    for c in h.clauses() {
        out.push_str(&letter_clause(c).to_string());
        out.push('\n');
    }
    out
}

pub fn print_facts(facts: &[ProbFact]) -> String {
    let mut out = String::new();
    for f in facts {
        out.push_str(&f.to_string());
        out.push('\n');
    }
    out
}

pub fn print_examples(head_pred: &str, examples: &[(String, Label)]) -> String {
    let mut out = String::new();
    for (id, label) in examples {
        out.push_str(&format!("{}({head_pred}({id})).\n", label.wrapper()));
    }
    out
}

pub fn print_bias(bias: &Bias) -> String {
    let mut out = format!("head_pred({},{}).\n", bias.head_pred.name, bias.head_pred.arity);
    for p in &bias.body_preds {
        out.push_str(&format!("body_pred({},{}).\n", p.name, p.arity));
    }
    out.push_str(&format!(
        "max_vars({}).\nmax_body({}).\nmax_clauses({}).\n",
        bias.max_vars, bias.max_body, bias.max_clauses
    ));
    out
}
