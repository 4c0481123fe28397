//! Subordination relations and the slanted operators they induce.
//!
//! A subordination relation on a lattice `A` is a binary relation `prec`
//! satisfying, for all `a, b, c, d`:
//!
//! * (bot-top)  `bot prec bot` and `top prec top`;
//! * (AND)      `a prec b` and `a prec c` imply `a prec b ^ c`;
//! * (OR)       `a prec c` and `b prec c` imply `a v b prec c`;
//! * (WO-SI)    `a <= b prec c <= d` implies `a prec d`.
//!
//! Equivalently, every `prec[a]` is a filter and every `prec^-1[a]` an
//! ideal. On a finite distributive lattice the induced slanted operators
//! land back in the lattice itself:
//!
//! * `a => b` is the join of all `c` with `a ^ c prec b`;
//! * `a >- b` is the meet of all `c` with `b prec a v c`.

use crate::lattice::{ElemId, Lattice};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubordError {
    #[error("lattice has {0} elements; subordination relations support at most 64")]
    LatticeTooLarge(usize),
    #[error("relation has {got} rows, lattice has {want} elements")]
    DimensionMismatch { got: usize, want: usize },
    #[error("relation violates the subordination axioms: {0}")]
    Invalid(ViolationList),
    #[error("operator tables violate the slanted algebra clauses: {0}")]
    InvalidSlanted(ViolationList),
    #[error("implication and co-implication tables induce different relations: witness ({0}, {1})")]
    TablesDisagree(String, String),
    #[error("slanted algebra has neither an implication nor a co-implication table")]
    NoTables,
}

/// One axiom/clause violation with a witness tuple of element names.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub law: String,
    pub witness: Vec<Vec<String>>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at (", self.law)?;
        for (i, w) in self.witness.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w:?}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationList(pub Vec<Violation>);

impl fmt::Display for ViolationList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A validated subordination relation, stored as one bitmask row per
/// element: bit `b` of `rows[a]` says `a prec b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubordinationRelation {
    lattice: Arc<Lattice>,
    rows: Vec<u64>,
}

fn check_size(lattice: &Arc<Lattice>) -> Result<usize, SubordError> {
    let n = lattice.len();
    if n > 64 {
        return Err(SubordError::LatticeTooLarge(n));
    }
    Ok(n)
}

/// Checks the four subordination axioms on a raw relation. Returns the
/// empty list exactly when `rows` is a subordination relation; each
/// violation names the axiom and a witness tuple.
pub fn validate_subordination(lattice: &Arc<Lattice>, rows: &[u64]) -> Result<Vec<Violation>, SubordError> {
    let n = check_size(lattice)?;
    if rows.len() != n {
        return Err(SubordError::DimensionMismatch { got: rows.len(), want: n });
    }
    let mut out = Vec::new();
    let names = |x: ElemId| lattice.element_names(x);
    let holds = |a: ElemId, b: ElemId| rows[a] & (1 << b) != 0;

    if !holds(lattice.bot(), lattice.bot()) || !holds(lattice.top(), lattice.top()) {
        out.push(Violation { law: "bot-top".into(), witness: vec![] });
    }
    'and: for a in 0..n {
        for b in 0..n {
            if !holds(a, b) {
                continue;
            }
            for c in 0..n {
                if holds(a, c) && !holds(a, lattice.meet(b, c)) {
                    out.push(Violation {
                        law: "AND".into(),
                        witness: vec![names(a), names(b), names(c)],
                    });
                    break 'and;
                }
            }
        }
    }
    'or: for c in 0..n {
        for a in 0..n {
            if !holds(a, c) {
                continue;
            }
            for b in 0..n {
                if holds(b, c) && !holds(lattice.join(a, b), c) {
                    out.push(Violation {
                        law: "OR".into(),
                        witness: vec![names(a), names(b), names(c)],
                    });
                    break 'or;
                }
            }
        }
    }
    'wosi: for b in 0..n {
        for c in 0..n {
            if !holds(b, c) {
                continue;
            }
            for a in 0..n {
                if !lattice.leq(a, b) {
                    continue;
                }
                for d in 0..n {
                    if lattice.leq(c, d) && !holds(a, d) {
                        out.push(Violation {
                            law: "WO-SI".into(),
                            witness: vec![names(a), names(b), names(c), names(d)],
                        });
                        break 'wosi;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Least subordination relation containing `seed`, computed by saturating
/// the four axioms to a fixpoint. It always contains `{bot} x A` and
/// `A x {top}`.
pub fn closure(lattice: &Arc<Lattice>, seed: &[(ElemId, ElemId)]) -> Result<SubordinationRelation, SubordError> {
    let n = check_size(lattice)?;
    let mut rows = vec![0u64; n];
    for &(a, b) in seed {
        lattice.check_index(a).map_err(|_| SubordError::DimensionMismatch { got: a, want: n })?;
        lattice.check_index(b).map_err(|_| SubordError::DimensionMismatch { got: b, want: n })?;
        rows[a] |= 1 << b;
    }
    rows[lattice.bot()] |= 1 << lattice.bot();
    rows[lattice.top()] |= 1 << lattice.top();

    loop {
        let before = rows.clone();

        // (WO-SI): up-close each row, then pull rows down to smaller elements.
        for a in 0..n {
            let mut m = rows[a];
            let mut closed = 0u64;
            while m != 0 {
                let c = m.trailing_zeros() as usize;
                closed |= lattice.up_mask(c);
                m &= m - 1;
            }
            rows[a] = closed;
        }
        let snapshot = rows.clone();
        for a in 0..n {
            let mut m = lattice.up_mask(a);
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                rows[a] |= snapshot[b];
                m &= m - 1;
            }
        }

        // (AND): close each row under binary meets.
        for row in rows.iter_mut() {
            loop {
                let mut grew = false;
                let mut m1 = *row;
                while m1 != 0 {
                    let b = m1.trailing_zeros() as usize;
                    let mut m2 = *row;
                    while m2 != 0 {
                        let c = m2.trailing_zeros() as usize;
                        let bit = 1 << lattice.meet(b, c);
                        if *row & bit == 0 {
                            *row |= bit;
                            grew = true;
                        }
                        m2 &= m2 - 1;
                    }
                    m1 &= m1 - 1;
                }
                if !grew {
                    break;
                }
            }
        }

        // (OR): close each column under binary joins.
        for c in 0..n {
            let bit = 1u64 << c;
            loop {
                let mut grew = false;
                let col: Vec<ElemId> =
                    (0..n).filter(|&a| rows[a] & bit != 0).collect();
                for &a in &col {
                    for &b in &col {
                        let j = lattice.join(a, b);
                        if rows[j] & bit == 0 {
                            rows[j] |= bit;
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
        }

        if rows == before {
            break;
        }
    }
    debug_assert!(validate_subordination(lattice, &rows).unwrap().is_empty());
    Ok(SubordinationRelation { lattice: Arc::clone(lattice), rows })
}

impl SubordinationRelation {
    /// Wraps a raw relation, validating the axioms.
    pub fn from_rows(lattice: Arc<Lattice>, rows: Vec<u64>) -> Result<Self, SubordError> {
        let violations = validate_subordination(&lattice, &rows)?;
        if !violations.is_empty() {
            return Err(SubordError::Invalid(ViolationList(violations)));
        }
        Ok(SubordinationRelation { lattice, rows })
    }

    pub fn from_pairs(lattice: Arc<Lattice>, pairs: &[(ElemId, ElemId)]) -> Result<Self, SubordError> {
        let n = check_size(&lattice)?;
        let mut rows = vec![0u64; n];
        for &(a, b) in pairs {
            rows[a] |= 1 << b;
        }
        Self::from_rows(lattice, rows)
    }

    /// The least subordination relation on `lattice`.
    pub fn minimal(lattice: &Arc<Lattice>) -> Self {
        closure(lattice, &[]).expect("empty seed always closes")
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn holds(&self, a: ElemId, b: ElemId) -> bool {
        self.rows[a] & (1 << b) != 0
    }

    /// All related pairs in element-id order.
    pub fn pairs(&self) -> Vec<(ElemId, ElemId)> {
        let mut out = Vec::new();
        for a in 0..self.rows.len() {
            let mut m = self.rows[a];
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                out.push((a, b));
                m &= m - 1;
            }
        }
        out
    }

    /// `a => b`: the join of `{c | a ^ c prec b}`. The set is closed under
    /// joins, so the result itself satisfies `a ^ (a => b) prec b`.
    pub fn imp(&self, a: ElemId, b: ElemId) -> ElemId {
        let l = &self.lattice;
        l.join_all((0..l.len()).filter(|&c| self.holds(l.meet(a, c), b)))
    }

    /// `a >- b`: the meet of `{c | b prec a v c}`.
    pub fn coimp(&self, a: ElemId, b: ElemId) -> ElemId {
        let l = &self.lattice;
        l.meet_all((0..l.len()).filter(|&c| self.holds(b, l.join(a, c))))
    }

    /// `neg a = a => bot`: the weakest element normatively inconsistent
    /// with `a`.
    pub fn neg(&self, a: ElemId) -> ElemId {
        self.imp(a, self.lattice.bot())
    }

    /// `sim a = a >- top`: the strongest co-obligation of `a`.
    pub fn sim(&self, a: ElemId) -> ElemId {
        self.coimp(a, self.lattice.top())
    }

    /// `u o v`: the left residual of `=>`, the meet of `{w | v <= u => w}`.
    pub fn circ(&self, u: ElemId, v: ElemId) -> ElemId {
        let l = &self.lattice;
        l.meet_all((0..l.len()).filter(|&w| l.leq(v, self.imp(u, w))))
    }

    /// Tabulates both slanted operators.
    pub fn to_slanted(&self) -> SlantedAlgebra {
        let n = self.lattice.len();
        let mut imp = vec![0u32; n * n];
        let mut coimp = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                imp[a * n + b] = self.imp(a, b) as u32;
                coimp[a * n + b] = self.coimp(a, b) as u32;
            }
        }
        SlantedAlgebra { lattice: Arc::clone(&self.lattice), imp: Some(imp), coimp: Some(coimp) }
    }
}

/// A slanted algebra given by materialized operator tables. At least one
/// of the two tables is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlantedAlgebra {
    lattice: Arc<Lattice>,
    imp: Option<Vec<u32>>,
    coimp: Option<Vec<u32>>,
}

impl SlantedAlgebra {
    pub fn new(
        lattice: Arc<Lattice>,
        imp: Option<Vec<u32>>,
        coimp: Option<Vec<u32>>,
    ) -> Result<Self, SubordError> {
        let n = check_size(&lattice)?;
        if imp.is_none() && coimp.is_none() {
            return Err(SubordError::NoTables);
        }
        for t in [&imp, &coimp].into_iter().flatten() {
            if t.len() != n * n {
                return Err(SubordError::DimensionMismatch { got: t.len(), want: n * n });
            }
        }
        Ok(SlantedAlgebra { lattice, imp, coimp })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn has_imp(&self) -> bool {
        self.imp.is_some()
    }

    pub fn has_coimp(&self) -> bool {
        self.coimp.is_some()
    }

    pub fn imp_at(&self, a: ElemId, b: ElemId) -> ElemId {
        let n = self.lattice.len();
        self.imp.as_ref().expect("implication table present")[a * n + b] as ElemId
    }

    pub fn coimp_at(&self, a: ElemId, b: ElemId) -> ElemId {
        let n = self.lattice.len();
        self.coimp.as_ref().expect("co-implication table present")[a * n + b] as ElemId
    }

    pub fn neg_at(&self, a: ElemId) -> ElemId {
        self.imp_at(a, self.lattice.bot())
    }

    pub fn sim_at(&self, a: ElemId) -> ElemId {
        self.coimp_at(a, self.lattice.top())
    }

    /// Exhaustive check of the slanted (co-)Heyting algebra clauses on the
    /// stored tables. Clause 1 (open/closed-valuedness) is automatic on a
    /// finite lattice, so clauses 2-4 are checked for each table present.
    pub fn validate(&self) -> Vec<Violation> {
        let l = &self.lattice;
        let n = l.len();
        let names = |x: ElemId| l.element_names(x);
        let mut out = Vec::new();

        if self.imp.is_some() {
            let imp = |a, b| self.imp_at(a, b);
            'c2: for a in 0..n {
                if imp(a, l.top()) != l.top() {
                    out.push(Violation { law: "imp-top-unit".into(), witness: vec![names(a)] });
                    break;
                }
                for b1 in 0..n {
                    for b2 in 0..n {
                        if imp(a, l.meet(b1, b2)) != l.meet(imp(a, b1), imp(a, b2)) {
                            out.push(Violation {
                                law: "imp-meet-distribution".into(),
                                witness: vec![names(a), names(b1), names(b2)],
                            });
                            break 'c2;
                        }
                    }
                }
            }
            'c3: for b in 0..n {
                if imp(l.bot(), b) != l.top() {
                    out.push(Violation { law: "imp-bot-unit".into(), witness: vec![names(b)] });
                    break;
                }
                for a1 in 0..n {
                    for a2 in 0..n {
                        if imp(l.join(a1, a2), b) != l.meet(imp(a1, b), imp(a2, b)) {
                            out.push(Violation {
                                law: "imp-join-reversal".into(),
                                witness: vec![names(a1), names(a2), names(b)],
                            });
                            break 'c3;
                        }
                    }
                }
            }
            'c4: for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let lhs = l.leq(c, imp(a, b));
                        let rhs = l.leq(l.meet(a, c), imp(l.top(), b));
                        if lhs != rhs {
                            out.push(Violation {
                                law: "imp-residuation".into(),
                                witness: vec![names(a), names(b), names(c)],
                            });
                            break 'c4;
                        }
                    }
                }
            }
        }

        if self.coimp.is_some() {
            let coimp = |a, b| self.coimp_at(a, b);
            'd2: for a in 0..n {
                if coimp(a, l.bot()) != l.bot() {
                    out.push(Violation { law: "coimp-bot-unit".into(), witness: vec![names(a)] });
                    break;
                }
                for b1 in 0..n {
                    for b2 in 0..n {
                        if coimp(a, l.join(b1, b2)) != l.join(coimp(a, b1), coimp(a, b2)) {
                            out.push(Violation {
                                law: "coimp-join-distribution".into(),
                                witness: vec![names(a), names(b1), names(b2)],
                            });
                            break 'd2;
                        }
                    }
                }
            }
            'd3: for b in 0..n {
                if coimp(l.top(), b) != l.bot() {
                    out.push(Violation { law: "coimp-top-unit".into(), witness: vec![names(b)] });
                    break;
                }
                for a1 in 0..n {
                    for a2 in 0..n {
                        if coimp(l.meet(a1, a2), b) != l.join(coimp(a1, b), coimp(a2, b)) {
                            out.push(Violation {
                                law: "coimp-meet-reversal".into(),
                                witness: vec![names(a1), names(a2), names(b)],
                            });
                            break 'd3;
                        }
                    }
                }
            }
            'd4: for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let lhs = l.leq(coimp(a, b), c);
                        let rhs = l.leq(coimp(l.bot(), b), l.join(a, c));
                        if lhs != rhs {
                            out.push(Violation {
                                law: "coimp-residuation".into(),
                                witness: vec![names(a), names(b), names(c)],
                            });
                            break 'd4;
                        }
                    }
                }
            }
        }
        out
    }

    /// Reads the subordination relation back off the tables:
    /// `a prec b` iff `a <= top => b` (via the implication table) iff
    /// `bot >- a <= b` (via the co-implication table). Fails with
    /// diagnostics when the tables violate the algebra clauses or induce
    /// different relations.
    pub fn to_subordination(&self) -> Result<SubordinationRelation, SubordError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(SubordError::InvalidSlanted(ViolationList(violations)));
        }
        let l = &self.lattice;
        let n = l.len();
        let via_imp = self.imp.as_ref().map(|_| {
            (0..n)
                .map(|a| {
                    let mut row = 0u64;
                    for b in 0..n {
                        if l.leq(a, self.imp_at(l.top(), b)) {
                            row |= 1 << b;
                        }
                    }
                    row
                })
                .collect::<Vec<u64>>()
        });
        let via_coimp = self.coimp.as_ref().map(|_| {
            (0..n)
                .map(|a| {
                    let mut row = 0u64;
                    for b in 0..n {
                        if l.leq(self.coimp_at(l.bot(), a), b) {
                            row |= 1 << b;
                        }
                    }
                    row
                })
                .collect::<Vec<u64>>()
        });
        let rows = match (via_imp, via_coimp) {
            (Some(ri), Some(rc)) => {
                if ri != rc {
                    for a in 0..n {
                        let diff = ri[a] ^ rc[a];
                        if diff != 0 {
                            let b = diff.trailing_zeros() as usize;
                            return Err(SubordError::TablesDisagree(
                                format!("{:?}", l.element_names(a)),
                                format!("{:?}", l.element_names(b)),
                            ));
                        }
                    }
                    unreachable!();
                }
                ri
            }
            (Some(r), None) | (None, Some(r)) => r,
            (None, None) => return Err(SubordError::NoTables),
        };
        SubordinationRelation::from_rows(Arc::clone(l), rows)
    }
}

/// A subordination relation packaged with its tabulated slanted algebra;
/// the evaluation-facing view of a finite model.
#[derive(Debug, Clone)]
pub struct Model {
    pub rel: SubordinationRelation,
    pub alg: SlantedAlgebra,
}

impl Model {
    pub fn new(rel: SubordinationRelation) -> Self {
        let alg = rel.to_slanted();
        Model { rel, alg }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        self.rel.lattice()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{downset_lattice, Poset};

    pub(crate) fn diamond() -> Arc<Lattice> {
        Arc::new(downset_lattice(&Poset::antichain(&["p", "q"])).unwrap())
    }

    fn two_chain() -> Arc<Lattice> {
        Arc::new(downset_lattice(&Poset::antichain(&["x"])).unwrap())
    }

    fn leq_relation(l: &Arc<Lattice>) -> Vec<u64> {
        (0..l.len())
            .map(|a| {
                let mut row = 0u64;
                for b in 0..l.len() {
                    if l.leq(a, b) {
                        row |= 1 << b;
                    }
                }
                row
            })
            .collect()
    }

    fn full_relation(l: &Arc<Lattice>) -> Vec<u64> {
        vec![(1u64 << l.len()) - 1; l.len()]
    }

    /// The closure of `{(p, q)}` on the diamond.
    pub(crate) fn prec1(l: &Arc<Lattice>) -> SubordinationRelation {
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        closure(l, &[(p, q)]).unwrap()
    }

    /// The closure of `{(p, q), (q, p)}` on the diamond.
    pub(crate) fn prec2(l: &Arc<Lattice>) -> SubordinationRelation {
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        closure(l, &[(p, q), (q, p)]).unwrap()
    }

    #[test]
    fn lattice_order_and_full_relation_validate() {
        for l in [diamond(), two_chain()] {
            assert!(validate_subordination(&l, &leq_relation(&l)).unwrap().is_empty());
            assert!(validate_subordination(&l, &full_relation(&l)).unwrap().is_empty());
        }
    }

    #[test]
    fn bare_bot_top_relation_fails_wosi() {
        let l = diamond();
        let mut rows = vec![0u64; l.len()];
        rows[l.bot()] |= 1 << l.bot();
        rows[l.top()] |= 1 << l.top();
        let violations = validate_subordination(&l, &rows).unwrap();
        assert!(violations.iter().any(|v| v.law == "WO-SI"), "{violations:?}");
    }

    #[test]
    fn closure_of_empty_seed_is_minimal() {
        let l = diamond();
        let min = SubordinationRelation::minimal(&l);
        for a in 0..l.len() {
            for b in 0..l.len() {
                let expect = a == l.bot() || b == l.top();
                assert_eq!(min.holds(a, b), expect, "({a}, {b})");
            }
        }
    }

    #[test]
    fn closure_of_single_pair() {
        let l = diamond();
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        let r = prec1(&l);
        let min = SubordinationRelation::minimal(&l);
        for a in 0..l.len() {
            for b in 0..l.len() {
                let expect = min.holds(a, b) || (a, b) == (p, q) || (a == l.bot()) || b == l.top();
                assert_eq!(r.holds(a, b), expect, "({a}, {b})");
            }
        }
        assert!(r.holds(p, q));
        assert!(!r.holds(q, p));
    }

    #[test]
    fn closure_does_not_impose_transitivity() {
        let l = diamond();
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        let r = prec2(&l);
        assert!(r.holds(p, q) && r.holds(q, p));
        assert!(!r.holds(p, p));
        assert!(!r.holds(q, q));
    }

    /// Naive reference computations straight from the defining joins/meets,
    /// kept separate from the member functions they check.
    mod oracle {
        use super::*;

        pub fn imp(r: &SubordinationRelation, a: ElemId, b: ElemId) -> ElemId {
            let l = r.lattice();
            let mut acc = l.bot();
            for c in 0..l.len() {
                if r.holds(l.meet(a, c), b) {
                    acc = l.join(acc, c);
                }
            }
            acc
        }

        pub fn coimp(r: &SubordinationRelation, a: ElemId, b: ElemId) -> ElemId {
            let l = r.lattice();
            let mut acc = l.top();
            for c in 0..l.len() {
                if r.holds(b, l.join(a, c)) {
                    acc = l.meet(acc, c);
                }
            }
            acc
        }
    }

    #[test]
    fn slanted_imp_examples() {
        let l = diamond();
        let r = prec1(&l);
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        assert_eq!(r.imp(p, q), l.top());
        assert_eq!(r.imp(q, p), p);
        for a in 0..l.len() {
            assert_eq!(r.imp(l.bot(), a), l.top());
            assert_eq!(r.imp(a, l.top()), l.top());
            for b in 0..l.len() {
                assert_eq!(r.imp(a, b), oracle::imp(&r, a, b));
            }
        }
    }

    #[test]
    fn slanted_coimp_examples() {
        let l = diamond();
        let r = prec1(&l);
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        assert_eq!(r.coimp(p, q), q);
        assert_eq!(r.coimp(q, p), l.bot());
        for a in 0..l.len() {
            assert_eq!(r.coimp(l.top(), a), l.bot());
            assert_eq!(r.coimp(a, l.bot()), l.bot());
            for b in 0..l.len() {
                assert_eq!(r.coimp(a, b), oracle::coimp(&r, a, b));
            }
        }
    }

    #[test]
    fn negation_examples() {
        let l = diamond();
        let r = prec1(&l);
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        assert_eq!(r.neg(p), q);
        assert_eq!(r.neg(q), p);
        assert_eq!(r.neg(l.bot()), l.top());
        assert_eq!(r.sim(p), q);
        assert_eq!(r.sim(l.bot()), l.top());
    }

    #[test]
    fn circ_examples() {
        let l = diamond();
        let r1 = prec1(&l);
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        assert_eq!(r1.circ(p, l.top()), q);
        for u in 0..l.len() {
            assert_eq!(r1.circ(u, l.bot()), l.bot());
        }
        let rmin = SubordinationRelation::minimal(&l);
        assert_eq!(rmin.circ(l.top(), l.top()), l.top());
    }

    #[test]
    fn circ_is_left_residual_of_imp() {
        let l = diamond();
        for r in [SubordinationRelation::minimal(&l), prec1(&l), prec2(&l)] {
            for u in 0..l.len() {
                for v in 0..l.len() {
                    for w in 0..l.len() {
                        assert_eq!(l.leq(v, r.imp(u, w)), l.leq(r.circ(u, v), w));
                    }
                }
            }
        }
    }

    #[test]
    fn residuation_laws() {
        let l = diamond();
        for r in [SubordinationRelation::minimal(&l), prec1(&l), prec2(&l)] {
            for w in 0..l.len() {
                for u in 0..l.len() {
                    for v in 0..l.len() {
                        // w <= u => v iff w ^ u <= top => v
                        assert_eq!(
                            l.leq(w, r.imp(u, v)),
                            l.leq(l.meet(w, u), r.imp(l.top(), v))
                        );
                        // c <= a => b iff a ^ c prec b
                        assert_eq!(l.leq(w, r.imp(u, v)), r.holds(l.meet(u, w), v));
                        // a >- b <= c iff b prec a v c
                        assert_eq!(l.leq(r.coimp(u, v), w), r.holds(v, l.join(u, w)));
                    }
                }
            }
        }
    }

    #[test]
    fn galois_laws_for_negations() {
        let l = diamond();
        for r in [SubordinationRelation::minimal(&l), prec1(&l), prec2(&l)] {
            for a in 0..l.len() {
                for b in 0..l.len() {
                    assert_eq!(l.leq(a, r.neg(b)), l.leq(b, r.neg(a)));
                    assert_eq!(l.leq(r.sim(a), b), l.leq(r.sim(b), a));
                    // c <= neg a iff a ^ c prec bot; sim a <= c iff top prec c v a
                    assert_eq!(l.leq(b, r.neg(a)), r.holds(l.meet(a, b), l.bot()));
                    assert_eq!(l.leq(r.sim(a), b), r.holds(l.top(), l.join(b, a)));
                }
            }
        }
    }

    #[test]
    fn monotonicity() {
        let l = diamond();
        let r = prec1(&l);
        for a1 in 0..l.len() {
            for a2 in 0..l.len() {
                if !l.leq(a1, a2) {
                    continue;
                }
                for b in 0..l.len() {
                    // => antitone in the first argument, monotone in the second.
                    assert!(l.leq(r.imp(a2, b), r.imp(a1, b)));
                    assert!(l.leq(r.imp(b, a1), r.imp(b, a2)));
                    // >- dually.
                    assert!(l.leq(r.coimp(a2, b), r.coimp(a1, b)));
                    assert!(l.leq(r.coimp(b, a1), r.coimp(b, a2)));
                }
            }
        }
    }

    #[test]
    fn closure_is_idempotent_and_extensive() {
        let l = diamond();
        for r in [SubordinationRelation::minimal(&l), prec1(&l), prec2(&l)] {
            let again = closure(&l, &r.pairs()).unwrap();
            assert_eq!(again.rows(), r.rows());
        }
    }

    #[test]
    fn two_chain_order_relation_has_classical_table() {
        let l = two_chain();
        let r = SubordinationRelation::from_rows(Arc::clone(&l), leq_relation(&l)).unwrap();
        let alg = r.to_slanted();
        assert_eq!(alg.imp_at(l.top(), l.bot()), l.bot());
        assert_eq!(alg.imp_at(l.bot(), l.bot()), l.top());
        assert_eq!(alg.imp_at(l.bot(), l.top()), l.top());
        assert_eq!(alg.imp_at(l.top(), l.top()), l.top());
    }

    #[test]
    fn round_trip_on_diamond_relations() {
        let l = diamond();
        for r in [SubordinationRelation::minimal(&l), prec1(&l), prec2(&l)] {
            let alg = r.to_slanted();
            assert!(alg.validate().is_empty());
            let back = alg.to_subordination().unwrap();
            assert_eq!(back.rows(), r.rows());
        }
    }

    #[test]
    fn mutated_table_reports_residuation_violation() {
        let l = diamond();
        let r = prec1(&l);
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        let n = l.len();
        let alg = r.to_slanted();
        let mut imp = (0..n * n)
            .map(|i| alg.imp_at(i / n, i % n) as u32)
            .collect::<Vec<_>>();
        // p => q is top in prec1; clamp it to bot while p ^ top prec q holds.
        imp[p * n + q] = l.bot() as u32;
        let bad = SlantedAlgebra::new(Arc::clone(&l), Some(imp), None).unwrap();
        let violations = bad.validate();
        assert!(!violations.is_empty());
        assert!(
            violations.iter().any(|v| v.law == "imp-residuation" || v.law == "imp-meet-distribution"),
            "{violations:?}"
        );
        assert!(bad.to_subordination().is_err());
    }

    #[test]
    fn clause_two_violation_is_detected() {
        let l = two_chain();
        let n = l.len();
        // imp constantly bot: violates a => top = top.
        let imp = vec![l.bot() as u32; n * n];
        let bad = SlantedAlgebra::new(Arc::clone(&l), Some(imp), None).unwrap();
        assert!(bad.validate().iter().any(|v| v.law.starts_with("imp-")));
    }
}
