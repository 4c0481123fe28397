//! Object-language terms, inequalities, and first-order conditions on the
//! subordination relation, with parser, printer, and finite-model
//! evaluators.
//!
//! ASCII surface syntax: `->` (slanted implication), `>-` (slanted
//! co-implication), `neg`, `sim`, `/\`, `\/`, `bot`, `top`; inequalities
//! `phi <= psi`; conditions built from atoms `s <= t` / `s prec t` with
//! `&`, `==>`, `forall x.`, `exists x.` and the restricted quantifier
//! forms described in [`Restrictor`].

mod eval;
mod parse;
mod print;

pub use eval::{eval_condition, eval_condition_witness, eval_inequality, eval_inequality_witness,
    eval_term, EvalError, EvalLimits};
pub use parse::{parse_condition, parse_inequality, parse_term, ParseError};

use serde::Serialize;
use std::collections::BTreeSet;

/// A term of the object language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Term {
    Var(String),
    Bot,
    Top,
    And(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    /// Slanted Heyting implication `a -> b`.
    Imp(Box<Term>, Box<Term>),
    /// Slanted co-Heyting implication `a >- b`.
    CoImp(Box<Term>, Box<Term>),
    /// `neg a`, definitionally `a -> bot`.
    Neg(Box<Term>),
    /// `sim a`, definitionally `a >- top`.
    Sim(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Term, b: Term) -> Term {
        Term::Imp(Box::new(a), Box::new(b))
    }

    pub fn coimp(a: Term, b: Term) -> Term {
        Term::CoImp(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn sim(a: Term) -> Term {
        Term::Sim(Box::new(a))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Bot | Term::Top => {}
            Term::And(a, b) | Term::Or(a, b) | Term::Imp(a, b) | Term::CoImp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Neg(a) | Term::Sim(a) => a.collect_vars(out),
        }
    }

    /// Free variables in first-occurrence (left-to-right) order.
    pub fn vars_in_order(&self) -> Vec<String> {
        fn walk(t: &Term, out: &mut Vec<String>) {
            match t {
                Term::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Term::Bot | Term::Top => {}
                Term::And(a, b) | Term::Or(a, b) | Term::Imp(a, b) | Term::CoImp(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Term::Neg(a) | Term::Sim(a) => walk(a, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// True when the term uses only lattice connectives.
    pub fn is_lattice_pure(&self) -> bool {
        match self {
            Term::Var(_) | Term::Bot | Term::Top => true,
            Term::And(a, b) | Term::Or(a, b) => a.is_lattice_pure() && b.is_lattice_pure(),
            Term::Imp(..) | Term::CoImp(..) | Term::Neg(_) | Term::Sim(_) => false,
        }
    }

    /// Expands `neg a` to `a -> bot` and `sim a` to `a >- top` throughout.
    pub fn expand_negations(&self) -> Term {
        match self {
            Term::Var(_) | Term::Bot | Term::Top => self.clone(),
            Term::And(a, b) => Term::and(a.expand_negations(), b.expand_negations()),
            Term::Or(a, b) => Term::or(a.expand_negations(), b.expand_negations()),
            Term::Imp(a, b) => Term::imp(a.expand_negations(), b.expand_negations()),
            Term::CoImp(a, b) => Term::coimp(a.expand_negations(), b.expand_negations()),
            Term::Neg(a) => Term::imp(a.expand_negations(), Term::Bot),
            Term::Sim(a) => Term::coimp(a.expand_negations(), Term::Top),
        }
    }

    /// Canonical form of the lattice fragment: `/\` and `\/` are flattened,
    /// sorted, and deduplicated, and bound units are absorbed. Slanted
    /// subterms are normalized recursively but act as atoms for sorting.
    pub fn ac_normal(&self) -> Term {
        match self {
            Term::Var(_) | Term::Bot | Term::Top => self.clone(),
            Term::Neg(a) => Term::neg(a.ac_normal()),
            Term::Sim(a) => Term::sim(a.ac_normal()),
            Term::Imp(a, b) => Term::imp(a.ac_normal(), b.ac_normal()),
            Term::CoImp(a, b) => Term::coimp(a.ac_normal(), b.ac_normal()),
            Term::And(..) => {
                let mut parts = Vec::new();
                flatten(self, true, &mut parts);
                let mut parts: Vec<Term> = parts.iter().map(|t| t.ac_normal()).collect();
                parts.sort();
                parts.dedup();
                parts.retain(|t| *t != Term::Top);
                if parts.iter().any(|t| *t == Term::Bot) {
                    return Term::Bot;
                }
                fold_assoc(parts, Term::Top, Term::and)
            }
            Term::Or(..) => {
                let mut parts = Vec::new();
                flatten(self, false, &mut parts);
                let mut parts: Vec<Term> = parts.iter().map(|t| t.ac_normal()).collect();
                parts.sort();
                parts.dedup();
                parts.retain(|t| *t != Term::Bot);
                if parts.iter().any(|t| *t == Term::Top) {
                    return Term::Top;
                }
                fold_assoc(parts, Term::Bot, Term::or)
            }
        }
    }
}

fn flatten(t: &Term, conj: bool, out: &mut Vec<Term>) {
    match (t, conj) {
        (Term::And(a, b), true) | (Term::Or(a, b), false) => {
            flatten(a, conj, out);
            flatten(b, conj, out);
        }
        _ => out.push(t.clone()),
    }
}

fn fold_assoc(parts: Vec<Term>, unit: Term, op: fn(Term, Term) -> Term) -> Term {
    let mut it = parts.into_iter();
    match it.next() {
        None => unit,
        Some(first) => it.fold(first, op),
    }
}

/// A term inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Inequality {
    pub lhs: Term,
    pub rhs: Term,
}

impl Inequality {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Inequality { lhs, rhs }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = self.lhs.free_vars();
        out.extend(self.rhs.free_vars());
        out
    }

    pub fn vars_in_order(&self) -> Vec<String> {
        let mut out = self.lhs.vars_in_order();
        for v in self.rhs.vars_in_order() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

/// A lattice term: the fragment allowed inside condition atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LTerm {
    Var(String),
    Bot,
    Top,
    And(Box<LTerm>, Box<LTerm>),
    Or(Box<LTerm>, Box<LTerm>),
}

impl LTerm {
    pub fn var(name: &str) -> LTerm {
        LTerm::Var(name.to_string())
    }

    pub fn and(a: LTerm, b: LTerm) -> LTerm {
        LTerm::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LTerm, b: LTerm) -> LTerm {
        LTerm::Or(Box::new(a), Box::new(b))
    }

    pub fn to_term(&self) -> Term {
        match self {
            LTerm::Var(v) => Term::Var(v.clone()),
            LTerm::Bot => Term::Bot,
            LTerm::Top => Term::Top,
            LTerm::And(a, b) => Term::and(a.to_term(), b.to_term()),
            LTerm::Or(a, b) => Term::or(a.to_term(), b.to_term()),
        }
    }

    /// Converts a lattice-pure [`Term`]; returns `None` on slanted content.
    pub fn from_term(t: &Term) -> Option<LTerm> {
        match t {
            Term::Var(v) => Some(LTerm::Var(v.clone())),
            Term::Bot => Some(LTerm::Bot),
            Term::Top => Some(LTerm::Top),
            Term::And(a, b) => Some(LTerm::and(LTerm::from_term(a)?, LTerm::from_term(b)?)),
            Term::Or(a, b) => Some(LTerm::or(LTerm::from_term(a)?, LTerm::from_term(b)?)),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.to_term().free_vars()
    }

    pub fn ac_normal(&self) -> LTerm {
        LTerm::from_term(&self.to_term().ac_normal()).expect("normalization preserves purity")
    }
}

/// A relational atom of a condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum CAtom {
    /// `s <= t`
    Leq(LTerm, LTerm),
    /// `s prec t`
    Prec(LTerm, LTerm),
}

impl CAtom {
    pub fn sides(&self) -> (&LTerm, &LTerm) {
        match self {
            CAtom::Leq(s, t) | CAtom::Prec(s, t) => (s, t),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let (s, t) = self.sides();
        let mut out = s.free_vars();
        out.extend(t.free_vars());
        out
    }

    pub fn ac_normal(&self) -> CAtom {
        match self {
            CAtom::Leq(s, t) => CAtom::Leq(s.ac_normal(), t.ac_normal()),
            CAtom::Prec(s, t) => CAtom::Prec(s.ac_normal(), t.ac_normal()),
        }
    }
}

/// Quantifier kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum QuantKind {
    Forall,
    Exists,
}

/// Restricted-quantifier forms. `x` is the restricting variable; the bound
/// variables are those of the owning [`Quant`] (two for the paired forms).
///
/// * `prec x`:         `Q y (y prec x ...)`
/// * `succ x`:         `Q y (x prec y ...)`
/// * `<=or(y2, x)`:    `Q y y2 (x <= y \/ y2 ...)`
/// * `<=and(y2, x)`:   `Q y y2 (y /\ y2 <= x ...)`
/// * `<=coimp(y2, x)`: `Q y y2 (y2 prec y \/ x ...)`  (i.e. `y >- y2 <= x`)
/// * `>=imp(y2, x)`:   `Q y y2 (x /\ y prec y2 ...)`  (i.e. `x <= y -> y2`)
///
/// A universal restriction guards with implication, an existential one with
/// conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Restrictor {
    Prec(String),
    Succ(String),
    LeqOr(String),
    LeqAnd(String),
    LeqCoimp(String),
    GeqImp(String),
}

impl Restrictor {
    pub fn restricting_var(&self) -> &str {
        match self {
            Restrictor::Prec(x)
            | Restrictor::Succ(x)
            | Restrictor::LeqOr(x)
            | Restrictor::LeqAnd(x)
            | Restrictor::LeqCoimp(x)
            | Restrictor::GeqImp(x) => x,
        }
    }

    pub fn is_paired(&self) -> bool {
        matches!(
            self,
            Restrictor::LeqOr(_) | Restrictor::LeqAnd(_) | Restrictor::LeqCoimp(_) | Restrictor::GeqImp(_)
        )
    }

    /// The guard atom of this restrictor for bound variables `vars`.
    pub fn guard(&self, vars: &[String]) -> CAtom {
        let v = |s: &String| LTerm::Var(s.clone());
        match self {
            Restrictor::Prec(x) => CAtom::Prec(v(&vars[0]), LTerm::var(x)),
            Restrictor::Succ(x) => CAtom::Prec(LTerm::var(x), v(&vars[0])),
            Restrictor::LeqOr(x) => {
                CAtom::Leq(LTerm::var(x), LTerm::or(v(&vars[0]), v(&vars[1])))
            }
            Restrictor::LeqAnd(x) => {
                CAtom::Leq(LTerm::and(v(&vars[0]), v(&vars[1])), LTerm::var(x))
            }
            Restrictor::LeqCoimp(x) => {
                CAtom::Prec(v(&vars[1]), LTerm::or(v(&vars[0]), LTerm::var(x)))
            }
            Restrictor::GeqImp(x) => {
                CAtom::Prec(LTerm::and(LTerm::var(x), v(&vars[0])), v(&vars[1]))
            }
        }
    }
}

/// One quantifier of a prefix; paired restrictors bind two variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Quant {
    pub kind: QuantKind,
    pub vars: Vec<String>,
    pub restr: Option<Restrictor>,
}

impl Quant {
    pub fn forall(v: &str) -> Quant {
        Quant { kind: QuantKind::Forall, vars: vec![v.to_string()], restr: None }
    }

    pub fn exists(v: &str) -> Quant {
        Quant { kind: QuantKind::Exists, vars: vec![v.to_string()], restr: None }
    }
}

/// Body of a condition: a conjunction of atoms, optionally followed by
/// `==>` and a quantified conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Clause {
    pub ante: Vec<CAtom>,
    pub cons: Option<(Vec<Quant>, Vec<CAtom>)>,
}

/// A first-order condition on the subordination relation. Variables left
/// free are quantified universally on evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Condition {
    pub prefix: Vec<Quant>,
    pub clause: Clause,
}

impl Condition {
    pub fn bound_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for q in &self.prefix {
            out.extend(q.vars.iter().cloned());
        }
        if let Some((qs, _)) = &self.clause.cons {
            for q in qs {
                out.extend(q.vars.iter().cloned());
            }
        }
        out
    }

    /// Variables that occur free (implicitly universal), in first-use order.
    pub fn free_vars(&self) -> Vec<String> {
        let bound: BTreeSet<String> = self.bound_vars().into_iter().collect();
        let mut seen: Vec<String> = Vec::new();
        fn push_var(v: String, bound: &BTreeSet<String>, seen: &mut Vec<String>) {
            if !bound.contains(&v) && !seen.contains(&v) {
                seen.push(v);
            }
        }
        fn push_term(t: &LTerm, bound: &BTreeSet<String>, seen: &mut Vec<String>) {
            for v in t.free_vars() {
                push_var(v, bound, seen);
            }
        }
        for q in &self.prefix {
            if let Some(r) = &q.restr {
                push_var(r.restricting_var().to_string(), &bound, &mut seen);
            }
        }
        for a in &self.clause.ante {
            let (s, t) = a.sides();
            push_term(s, &bound, &mut seen);
            push_term(t, &bound, &mut seen);
        }
        if let Some((qs, atoms)) = &self.clause.cons {
            for q in qs {
                if let Some(r) = &q.restr {
                    push_var(r.restricting_var().to_string(), &bound, &mut seen);
                }
            }
            for a in atoms {
                let (s, t) = a.sides();
                push_term(s, &bound, &mut seen);
                push_term(t, &bound, &mut seen);
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ac_normal_sorts_flattens_absorbs() {
        let t = Term::and(Term::var("d"), Term::and(Term::var("a"), Term::var("b")));
        let u = Term::and(Term::and(Term::var("a"), Term::var("b")), Term::var("d"));
        assert_eq!(t.ac_normal(), u.ac_normal());
        assert_eq!(Term::and(Term::var("a"), Term::Top).ac_normal(), Term::var("a"));
        assert_eq!(Term::and(Term::var("a"), Term::Bot).ac_normal(), Term::Bot);
        assert_eq!(Term::or(Term::var("a"), Term::var("a")).ac_normal(), Term::var("a"));
        assert_eq!(
            Term::and(Term::var("d"), Term::var("d")).ac_normal(),
            Term::var("d")
        );
    }

    #[test]
    fn expansion_of_negations() {
        let t = Term::neg(Term::Top);
        assert_eq!(t.expand_negations(), Term::imp(Term::Top, Term::Bot));
        let s = Term::sim(Term::var("a"));
        assert_eq!(s.expand_negations(), Term::coimp(Term::var("a"), Term::Top));
    }

    #[test]
    fn purity() {
        assert!(Term::and(Term::var("a"), Term::Bot).is_lattice_pure());
        assert!(!Term::imp(Term::var("a"), Term::Bot).is_lattice_pure());
        assert!(!Term::neg(Term::var("a")).is_lattice_pure());
    }
}
