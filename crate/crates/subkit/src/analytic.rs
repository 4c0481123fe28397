//! Signed generation trees, node classification, and the analyticity check
//! for inequalities.
//!
//! The positive (negative) generation tree of a term propagates signs from
//! a signed root: lattice connectives keep the sign of their parent, the
//! two arrows flip it on their first argument, and the two negations flip
//! it on their only argument. Non-leaf signed nodes are classified as
//! Delta-adjoints, syntactically left residuals (SLR), syntactically right
//! adjoints (SRA), or syntactically right residuals (SRR):
//!
//! | class        | positive    | negative    |
//! |--------------|-------------|-------------|
//! | Delta        | `\/`        | `/\`        |
//! | SLR          | `/\ >- neg` | `\/ -> sim` |
//! | SRA          | `/\ neg`    | `\/ sim`    |
//! | SRR          | `\/ ->`     | `/\ >-`     |
//!
//! Delta-adjoints and SLR nodes are Skeleton nodes, SRA and SRR nodes are
//! PIA nodes. A branch is good when some split point puts only PIA-capable
//! nodes below and only Skeleton-capable nodes above; an inequality
//! `phi <= psi` is analytic when every branch of `+phi` and `-psi` is good.
//!
//! Negative `neg` and positive `sim` have no class of their own; such
//! occurrences are expanded definitionally (`neg a ~> a -> bot`,
//! `sim a ~> a >- top`) before classification, and the verdict records
//! whether the unexpanded tree would have been classified differently.

use crate::syntax::{Inequality, Term};
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Pos => write!(f, "+"),
            Sign::Neg => write!(f, "-"),
        }
    }
}

pub const DELTA: u8 = 1;
pub const SLR: u8 = 2;
pub const SRA: u8 = 4;
pub const SRR: u8 = 8;

pub fn is_skeleton(classes: u8) -> bool {
    classes & (DELTA | SLR) != 0
}

pub fn is_pia(classes: u8) -> bool {
    classes & (SRA | SRR) != 0
}

pub fn class_names(classes: u8) -> Vec<&'static str> {
    let mut out = Vec::new();
    if classes & DELTA != 0 {
        out.push("delta-adjoint");
    }
    if classes & SLR != 0 {
        out.push("SLR");
    }
    if classes & SRA != 0 {
        out.push("SRA");
    }
    if classes & SRR != 0 {
        out.push("SRR");
    }
    out
}

fn classify(sign: Sign, connective: &str) -> u8 {
    match (sign, connective) {
        (Sign::Pos, "/\\") => SLR | SRA,
        (Sign::Pos, "\\/") => DELTA | SRR,
        (Sign::Neg, "/\\") => DELTA | SRR,
        (Sign::Neg, "\\/") => SLR | SRA,
        (Sign::Pos, "->") => SRR,
        (Sign::Neg, "->") => SLR,
        (Sign::Pos, ">-") => SLR,
        (Sign::Neg, ">-") => SRR,
        (Sign::Pos, "neg") => SLR | SRA,
        (Sign::Neg, "sim") => SLR | SRA,
        // Negative neg and positive sim are absent from the table.
        (Sign::Neg, "neg") | (Sign::Pos, "sim") => 0,
        _ => unreachable!("not a connective: {connective}"),
    }
}

/// A node of a signed generation tree.
#[derive(Debug, Clone, Serialize)]
pub struct SignedNode {
    pub sign: Sign,
    /// Connective name for inner nodes, variable/constant for leaves.
    pub label: String,
    pub is_leaf: bool,
    pub classes: u8,
    /// Set when this node came from a definitional expansion of an
    /// unclassifiable `neg`/`sim` occurrence.
    pub expanded: bool,
    pub children: Vec<SignedNode>,
}

impl SignedNode {
    fn leaf(sign: Sign, label: String) -> SignedNode {
        SignedNode { sign, label, is_leaf: true, classes: 0, expanded: false, children: Vec::new() }
    }

    fn inner(sign: Sign, label: &str, expanded: bool, children: Vec<SignedNode>) -> SignedNode {
        SignedNode {
            sign,
            label: label.to_string(),
            is_leaf: false,
            classes: classify(sign, label),
            expanded,
            children,
        }
    }

    pub fn describe(&self) -> String {
        format!("{}{}", self.sign, self.label)
    }
}

fn build(t: &Term, sign: Sign, expand: bool) -> SignedNode {
    match t {
        Term::Var(v) => SignedNode::leaf(sign, v.clone()),
        Term::Bot => SignedNode::leaf(sign, "bot".to_string()),
        Term::Top => SignedNode::leaf(sign, "top".to_string()),
        Term::And(a, b) => {
            SignedNode::inner(sign, "/\\", false, vec![build(a, sign, expand), build(b, sign, expand)])
        }
        Term::Or(a, b) => {
            SignedNode::inner(sign, "\\/", false, vec![build(a, sign, expand), build(b, sign, expand)])
        }
        Term::Imp(a, b) => SignedNode::inner(
            sign,
            "->",
            false,
            vec![build(a, sign.flip(), expand), build(b, sign, expand)],
        ),
        Term::CoImp(a, b) => SignedNode::inner(
            sign,
            ">-",
            false,
            vec![build(a, sign.flip(), expand), build(b, sign, expand)],
        ),
        Term::Neg(a) => {
            if expand && sign == Sign::Neg {
                // neg a ~> a -> bot; the first child flips back to positive.
                SignedNode::inner(
                    sign,
                    "->",
                    true,
                    vec![build(a, sign.flip(), expand), SignedNode::leaf(sign, "bot".to_string())],
                )
            } else {
                SignedNode::inner(sign, "neg", false, vec![build(a, sign.flip(), expand)])
            }
        }
        Term::Sim(a) => {
            if expand && sign == Sign::Pos {
                // sim a ~> a >- top.
                SignedNode::inner(
                    sign,
                    ">-",
                    true,
                    vec![build(a, sign.flip(), expand), SignedNode::leaf(sign, "top".to_string())],
                )
            } else {
                SignedNode::inner(sign, "sim", false, vec![build(a, sign.flip(), expand)])
            }
        }
    }
}

/// The signed generation tree of `t`, with unclassifiable `neg`/`sim`
/// occurrences expanded definitionally.
pub fn signed_tree(t: &Term, sign: Sign) -> SignedNode {
    build(t, sign, true)
}

/// Report on one leaf-to-root branch of a signed tree.
#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    /// Which side of the inequality the branch belongs to.
    pub side: Sign,
    pub leaf: String,
    /// Signed inner nodes from the leaf upward to the root.
    pub path: Vec<String>,
    /// Class options per path node.
    pub node_classes: Vec<Vec<&'static str>>,
    pub good: bool,
    /// For a good branch: nodes below the index are read as PIA, nodes at
    /// and above it as Skeleton.
    pub split: Option<usize>,
}

/// Analyticity verdict with per-branch certificates.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyticityVerdict {
    pub analytic: bool,
    pub branches: Vec<BranchReport>,
    /// Index of the first bad branch, when not analytic.
    pub offending: Option<usize>,
    /// Number of definitional `neg`/`sim` expansions applied.
    pub expansions: usize,
    /// Verdict of the unexpanded tree, when an expansion was applied.
    pub native_analytic: Option<bool>,
}

fn collect_branches(
    node: &SignedNode,
    side: Sign,
    stack: &mut Vec<(String, u8)>,
    out: &mut Vec<BranchReport>,
) {
    if node.is_leaf {
        let path: Vec<String> = stack.iter().rev().map(|(d, _)| d.clone()).collect();
        let classes: Vec<u8> = stack.iter().rev().map(|(_, c)| *c).collect();
        let len = classes.len();
        let mut pia_prefix = 0;
        while pia_prefix < len && is_pia(classes[pia_prefix]) {
            pia_prefix += 1;
        }
        let mut skel_suffix = 0;
        while skel_suffix < len && is_skeleton(classes[len - 1 - skel_suffix]) {
            skel_suffix += 1;
        }
        let good = pia_prefix + skel_suffix >= len;
        // Smallest valid split: everything at or above `len - skel_suffix`
        // can be read as Skeleton; it is within the PIA prefix when good.
        let split = good.then(|| len.saturating_sub(skel_suffix));
        out.push(BranchReport {
            side,
            leaf: node.label.clone(),
            node_classes: classes.iter().map(|&c| class_names(c)).collect(),
            path,
            good,
            split,
        });
        return;
    }
    stack.push((node.describe(), node.classes));
    for c in &node.children {
        collect_branches(c, side, stack, out);
    }
    stack.pop();
}

fn count_expansions(node: &SignedNode) -> usize {
    node.children.iter().map(count_expansions).sum::<usize>() + usize::from(node.expanded)
}

fn branches_of(ineq: &Inequality, expand: bool) -> (Vec<BranchReport>, usize) {
    let lhs = build(&ineq.lhs, Sign::Pos, expand);
    let rhs = build(&ineq.rhs, Sign::Neg, expand);
    let mut out = Vec::new();
    let mut stack = Vec::new();
    collect_branches(&lhs, Sign::Pos, &mut stack, &mut out);
    collect_branches(&rhs, Sign::Neg, &mut stack, &mut out);
    let expansions = count_expansions(&lhs) + count_expansions(&rhs);
    (out, expansions)
}

/// Checks whether every branch of `+lhs` and `-rhs` is good.
pub fn is_analytic(ineq: &Inequality) -> AnalyticityVerdict {
    let (branches, expansions) = branches_of(ineq, true);
    let offending = branches.iter().position(|b| !b.good);
    let native_analytic = if expansions > 0 {
        let (native, _) = branches_of(ineq, false);
        Some(native.iter().all(|b| b.good))
    } else {
        None
    };
    AnalyticityVerdict {
        analytic: offending.is_none(),
        branches,
        offending,
        expansions,
        native_analytic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_inequality, parse_term};

    #[test]
    fn single_variable_is_a_positive_leaf() {
        let t = signed_tree(&Term::var("a"), Sign::Pos);
        assert!(t.is_leaf);
        assert_eq!(t.sign, Sign::Pos);
        assert_eq!(t.label, "a");
    }

    #[test]
    fn conjunction_of_implications_classifies_per_table() {
        let t = signed_tree(&parse_term(r"(a -> b) /\ (b -> c)").unwrap(), Sign::Pos);
        assert_eq!(t.classes, SLR | SRA);
        for c in &t.children {
            assert_eq!(c.classes, SRR);
            assert_eq!(c.children[0].sign, Sign::Neg);
            assert_eq!(c.children[1].sign, Sign::Pos);
        }
    }

    #[test]
    fn negative_implication_is_slr() {
        let t = signed_tree(&parse_term("a -> c").unwrap(), Sign::Neg);
        assert_eq!(t.classes, SLR);
        assert_eq!(t.children[0].sign, Sign::Pos);
        assert_eq!(t.children[1].sign, Sign::Neg);
    }

    #[test]
    fn regression_inequalities_are_analytic() {
        for src in [
            r"top -> (top -> c) <= top -> c",
            r"(top -> b) /\ (b -> c) <= top -> c",
            r"(a -> b) /\ (b -> c) <= a -> c",
            r"(a -> b) /\ ((a /\ b) -> c) <= a -> c",
            r"a -> (b -> c) <= (a -> b) -> (a -> c)",
            r"top <= (a -> b) \/ (b -> a)",
            r"a -> (b \/ c) <= (a -> b) \/ (a -> c)",
            r"neg top <= bot",
            r"a /\ neg a <= bot",
            r"neg (a /\ b) <= neg a \/ neg b",
            r"a -> b <= neg b -> neg a",
            r"top <= neg a \/ neg (neg a)",
            r"sim a -> (b \/ c) <= (sim a -> b) \/ (sim a -> c)",
        ] {
            let verdict = is_analytic(&parse_inequality(src).unwrap());
            assert!(
                verdict.analytic,
                "{src}: {:?}",
                verdict.offending.map(|i| &verdict.branches[i])
            );
        }
    }

    #[test]
    fn skeleton_below_pia_is_rejected() {
        let verdict = is_analytic(&parse_inequality("a -> (b >- c) <= d").unwrap());
        assert!(!verdict.analytic);
        let bad = &verdict.branches[verdict.offending.unwrap()];
        // The offending branch runs through +>- (Skeleton-only) below +->
        // (PIA-only).
        assert!(bad.path.contains(&"+>-".to_string()), "{bad:?}");
        assert!(bad.path.contains(&"+->".to_string()));
        assert!(!bad.good);
    }

    #[test]
    fn lattice_terms_are_always_analytic() {
        for src in [
            r"a /\ (b \/ c) <= (a /\ b) \/ (a /\ c)",
            r"a \/ (b /\ (c \/ d)) <= top",
            r"bot <= a",
        ] {
            assert!(is_analytic(&parse_inequality(src).unwrap()).analytic, "{src}");
        }
    }

    #[test]
    fn analyticity_is_stable_under_renaming_and_commutation() {
        let a = parse_inequality(r"(a -> b) /\ (b -> c) <= a -> c").unwrap();
        let b = parse_inequality(r"(x -> y) /\ (y -> z) <= x -> z").unwrap();
        let c = parse_inequality(r"(b -> c) /\ (a -> b) <= a -> c").unwrap();
        assert_eq!(is_analytic(&a).analytic, is_analytic(&b).analytic);
        assert_eq!(is_analytic(&a).analytic, is_analytic(&c).analytic);
    }

    #[test]
    fn unclassifiable_negation_is_expanded() {
        // -neg is not in the table; the expanded tree reads it as -(a -> bot).
        let verdict = is_analytic(&parse_inequality("d <= neg a").unwrap());
        assert!(verdict.analytic);
        assert_eq!(verdict.expansions, 1);
        assert_eq!(verdict.native_analytic, Some(false));
        // +neg is in the table natively.
        let verdict = is_analytic(&parse_inequality("neg a <= d").unwrap());
        assert!(verdict.analytic);
        assert_eq!(verdict.expansions, 0);
        assert_eq!(verdict.native_analytic, None);
    }

    #[test]
    fn split_certificates_are_reported() {
        let verdict = is_analytic(&parse_inequality(r"(a -> b) /\ (b -> c) <= a -> c").unwrap());
        for b in &verdict.branches {
            assert!(b.good);
            let s = b.split.unwrap();
            assert!(s <= b.path.len());
            for i in 0..s {
                assert!(is_pia_names(&b.node_classes[i]));
            }
            for i in s..b.path.len() {
                assert!(is_skel_names(&b.node_classes[i]));
            }
        }
    }

    fn is_pia_names(names: &[&str]) -> bool {
        names.iter().any(|n| *n == "SRA" || *n == "SRR")
    }

    fn is_skel_names(names: &[&str]) -> bool {
        names.iter().any(|n| *n == "delta-adjoint" || *n == "SLR")
    }
}
