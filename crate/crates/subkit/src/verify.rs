//! Model-corpus generation and brute-force equivalence certification.
//!
//! The verifier is the ground truth for both translation directions: an
//! inequality and a condition are certified equivalent exactly when they
//! agree on every model of a corpus. The default corpus is exhaustive
//! over all lattices with at most four elements, closure-seeded over a
//! family of three- and four-irreducible posets, and sampled over random
//! five- and six-irreducible posets with a fixed RNG seed.

use crate::lattice::{downset_lattice, ElemId, Lattice, Poset, PosetSpec};
use crate::subord::{closure, validate_subordination, Model, SubordinationRelation};
use crate::syntax::{
    eval_condition_witness, eval_inequality_witness, parse_condition, parse_inequality, Condition,
    EvalError, EvalLimits, Inequality,
};
use rayon::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("exhaustive enumeration needs a lattice of at most {max} elements, got {got}")]
    CapExceeded { got: usize, max: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("malformed suite: {0}")]
    MalformedSuite(String),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Subord(#[from] crate::subord::SubordError),
}

/// How to enumerate subordination relations on a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    /// All subordination relations, by filtering every candidate relation;
    /// requires at most 4 lattice elements.
    Exhaustive,
    /// Closures of all seeds of at most two pairs, plus the lattice order
    /// and the full relation, deduplicated.
    ClosureSeeded,
    /// Closures of random seeds, deduplicated, reproducible from the seed.
    Sampled { count: usize, seed: u64 },
}

/// Enumerates subordination relations on `lattice` per `mode`.
pub fn enumerate_subordinations(
    lattice: &Arc<Lattice>,
    mode: GenMode,
) -> Result<Vec<SubordinationRelation>, VerifyError> {
    match mode {
        GenMode::Exhaustive => {
            let n = lattice.len();
            if n > 4 {
                return Err(VerifyError::CapExceeded { got: n, max: 4 });
            }
            let bits = n * n;
            let mut out = Vec::new();
            for cand in 0u64..(1 << bits) {
                let rows: Vec<u64> =
                    (0..n).map(|a| (cand >> (a * n)) & ((1 << n) - 1)).collect();
                // Cheap necessary condition before the full validation.
                if rows[lattice.bot()] & 1 << lattice.bot() == 0
                    || rows[lattice.top()] & 1 << lattice.top() == 0
                {
                    continue;
                }
                if validate_subordination(lattice, &rows)?.is_empty() {
                    out.push(SubordinationRelation::from_rows(Arc::clone(lattice), rows)?);
                }
            }
            Ok(out)
        }
        GenMode::ClosureSeeded => {
            let n = lattice.len();
            let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
            let mut out = Vec::new();
            let mut push = |r: SubordinationRelation, out: &mut Vec<SubordinationRelation>| {
                if seen.insert(r.rows().to_vec()) {
                    out.push(r);
                }
            };
            push(SubordinationRelation::minimal(lattice), &mut out);
            let leq_rows: Vec<u64> = (0..n)
                .map(|a| {
                    let mut row = 0u64;
                    for b in 0..n {
                        if lattice.leq(a, b) {
                            row |= 1 << b;
                        }
                    }
                    row
                })
                .collect();
            push(SubordinationRelation::from_rows(Arc::clone(lattice), leq_rows)?, &mut out);
            let full = vec![if n == 64 { u64::MAX } else { (1u64 << n) - 1 }; n];
            push(SubordinationRelation::from_rows(Arc::clone(lattice), full)?, &mut out);
            let mut pairs = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    pairs.push((a, b));
                }
            }
            for &p in &pairs {
                push(closure(lattice, &[p])?, &mut out);
            }
            for i in 0..pairs.len() {
                for j in i + 1..pairs.len() {
                    push(closure(lattice, &[pairs[i], pairs[j]])?, &mut out);
                }
            }
            Ok(out)
        }
        GenMode::Sampled { count, seed } => {
            let n = lattice.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
            let mut out = Vec::new();
            let mut attempts = 0usize;
            while out.len() < count && attempts < count.saturating_mul(100) + 100 {
                attempts += 1;
                let k = rng.gen_range(0..=3);
                let seed_pairs: Vec<(ElemId, ElemId)> =
                    (0..k).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
                let r = closure(lattice, &seed_pairs)?;
                if seen.insert(r.rows().to_vec()) {
                    out.push(r);
                }
            }
            Ok(out)
        }
    }
}

/// Corpus tier a model came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tier {
    Exhaustive,
    ClosureSeeded,
    Sampled,
}

pub struct CorpusModel {
    pub name: String,
    pub tier: Tier,
    pub model: Model,
}

pub struct ModelCorpus {
    pub models: Vec<CorpusModel>,
}

impl ModelCorpus {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn lattices(&self) -> Vec<Arc<Lattice>> {
        let mut out: Vec<Arc<Lattice>> = Vec::new();
        for m in &self.models {
            if !out.iter().any(|l| Arc::ptr_eq(l, m.model.lattice())) {
                out.push(Arc::clone(m.model.lattice()));
            }
        }
        out
    }
}

/// RNG seed for the sampled tier of the default corpus.
pub const DEFAULT_SAMPLE_SEED: u64 = 0xDE0417C;

/// Per-lattice ceiling on closure-seeded models kept in the default
/// corpus; the deduplicated enumeration is thinned by a deterministic
/// stride so the regression stays fast while staying diverse.
const CLOSURE_TIER_CAP: usize = 120;

fn exhaustive_posets() -> Vec<(&'static str, Poset)> {
    let e: [&str; 0] = [];
    vec![
        ("point", Poset::antichain(&e)),
        ("two-chain", Poset::antichain(&["x"])),
        ("three-chain", Poset::chain(&["x", "y"])),
        ("four-chain", Poset::chain(&["x", "y", "z"])),
        ("diamond", Poset::antichain(&["p", "q"])),
    ]
}

fn closure_family() -> Vec<(&'static str, Poset)> {
    vec![
        ("vee", Poset::new(&["x", "y", "z"], &[("x", "z"), ("y", "z")]).unwrap()),
        ("wedge", Poset::new(&["x", "y", "z"], &[("x", "y"), ("x", "z")]).unwrap()),
        ("cube", Poset::antichain(&["x", "y", "z"])),
        ("five-chain", Poset::chain(&["x", "y", "z", "w"])),
        (
            "zigzag",
            Poset::new(&["x", "y", "z", "w"], &[("x", "z"), ("y", "z"), ("y", "w")]).unwrap(),
        ),
        (
            "two-pillars",
            Poset::new(&["x", "y", "z", "w"], &[("x", "y"), ("z", "w")]).unwrap(),
        ),
        (
            "kite",
            Poset::new(
                &["x", "y", "z", "w"],
                &[("x", "y"), ("x", "z"), ("y", "w"), ("z", "w"), ("x", "w")],
            )
            .unwrap(),
        ),
    ]
}

fn random_poset(rng: &mut ChaCha8Rng, n: usize) -> Poset {
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    // Random edges on i < j, transitively closed.
    let mut reach = vec![0u64; n];
    for (i, r) in reach.iter_mut().enumerate() {
        *r = 1 << i;
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.35) {
                reach[i] |= 1 << j;
            }
        }
    }
    for k in (0..n).rev() {
        for i in 0..k {
            if reach[i] & (1 << k) != 0 {
                reach[i] |= reach[k];
            }
        }
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && reach[i] & (1 << j) != 0 {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    let pair_refs: Vec<(&str, &str)> =
        pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Poset::new(&name_refs, &pair_refs).expect("transitive closure of a DAG is a poset")
}

fn build_default_corpus() -> ModelCorpus {
    let mut models = Vec::new();

    for (name, poset) in exhaustive_posets() {
        let lattice = Arc::new(downset_lattice(&poset).expect("small posets"));
        let rels = enumerate_subordinations(&lattice, GenMode::Exhaustive)
            .expect("exhaustive tier lattices have at most 4 elements");
        for (i, r) in rels.into_iter().enumerate() {
            models.push(CorpusModel {
                name: format!("{name}/exhaustive-{i}"),
                tier: Tier::Exhaustive,
                model: Model::new(r),
            });
        }
    }

    for (name, poset) in closure_family() {
        let lattice = Arc::new(downset_lattice(&poset).expect("small posets"));
        let rels = enumerate_subordinations(&lattice, GenMode::ClosureSeeded)
            .expect("closure tier stays within 64 elements");
        let total = rels.len();
        let keep: Vec<SubordinationRelation> = if total <= CLOSURE_TIER_CAP {
            rels
        } else {
            // The first three entries are the minimal relation, the lattice
            // order, and the full relation; stride over the remainder.
            let mut keep: Vec<SubordinationRelation> = rels[..3].to_vec();
            let rest = &rels[3..];
            let want = CLOSURE_TIER_CAP - 3;
            for i in 0..want {
                keep.push(rest[i * rest.len() / want].clone());
            }
            keep
        };
        for (i, r) in keep.into_iter().enumerate() {
            models.push(CorpusModel {
                name: format!("{name}/closure-{i}"),
                tier: Tier::ClosureSeeded,
                model: Model::new(r),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SAMPLE_SEED);
    let mut seen: BTreeSet<(Vec<u64>, Vec<u64>)> = BTreeSet::new();
    let mut produced = 0usize;
    while produced < 200 {
        let n = if rng.gen_bool(0.5) { 5 } else { 6 };
        let poset = random_poset(&mut rng, n);
        let lattice = Arc::new(downset_lattice(&poset).expect("within cap"));
        let k = rng.gen_range(0..=2);
        let seed_pairs: Vec<(ElemId, ElemId)> = (0..k)
            .map(|_| (rng.gen_range(0..lattice.len()), rng.gen_range(0..lattice.len())))
            .collect();
        let rel = closure(&lattice, &seed_pairs).expect("lattice fits in 64 elements");
        let key = (
            (0..lattice.len()).map(|x| lattice.elem_mask(x)).collect::<Vec<u64>>(),
            rel.rows().to_vec(),
        );
        if !seen.insert(key) {
            continue;
        }
        models.push(CorpusModel {
            name: format!("sampled-{produced}"),
            tier: Tier::Sampled,
            model: Model::new(rel),
        });
        produced += 1;
    }

    ModelCorpus { models }
}

/// The default corpus, built once per process.
pub fn default_corpus() -> &'static ModelCorpus {
    static CORPUS: OnceLock<ModelCorpus> = OnceLock::new();
    CORPUS.get_or_init(build_default_corpus)
}

// ---------------------------------------------------------------------
// Equivalence checking.

/// A certified disagreement between an inequality and a condition.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub model: String,
    pub ineq_holds: bool,
    pub cond_holds: bool,
    /// Falsifying assignment of the side that fails, as element name
    /// lists.
    pub witness: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, Serialize)]
pub enum Verdict {
    Equivalent,
    Counterexample(Counterexample),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub models_checked: usize,
}

/// Evaluates `ineq` and `cond` on every corpus model; the first model on
/// which they disagree yields the counterexample.
pub fn check_equivalence(
    ineq: &Inequality,
    cond: &Condition,
    corpus: &ModelCorpus,
    limits: &EvalLimits,
) -> Result<EquivalenceReport, VerifyError> {
    let results: Vec<Result<Option<Counterexample>, EvalError>> = corpus
        .models
        .par_iter()
        .map(|cm| check_one(ineq, cond, cm, limits))
        .collect();
    let mut checked = 0usize;
    for r in results {
        match r? {
            None => checked += 1,
            Some(cex) => {
                return Ok(EquivalenceReport {
                    verdict: Verdict::Counterexample(cex),
                    models_checked: checked + 1,
                })
            }
        }
    }
    Ok(EquivalenceReport { verdict: Verdict::Equivalent, models_checked: checked })
}

fn check_one(
    ineq: &Inequality,
    cond: &Condition,
    cm: &CorpusModel,
    limits: &EvalLimits,
) -> Result<Option<Counterexample>, EvalError> {
    let iw = eval_inequality_witness(&cm.model, ineq);
    let cw = eval_condition_witness(&cm.model.rel, cond, limits)?;
    if iw.is_none() == cw.is_none() {
        return Ok(None);
    }
    let lattice = cm.model.lattice();
    let witness = iw
        .clone()
        .or(cw.clone())
        .unwrap_or_default()
        .into_iter()
        .map(|(v, e)| (v, lattice.element_names(e)))
        .collect();
    Ok(Some(Counterexample {
        model: cm.name.clone(),
        ineq_holds: iw.is_none(),
        cond_holds: cw.is_none(),
        witness,
    }))
}

/// Re-evaluates a counterexample: the recorded disagreement must
/// reproduce on the named model.
pub fn reverify_counterexample(
    cex: &Counterexample,
    ineq: &Inequality,
    cond: &Condition,
    corpus: &ModelCorpus,
    limits: &EvalLimits,
) -> Result<bool, VerifyError> {
    let Some(cm) = corpus.models.iter().find(|m| m.name == cex.model) else {
        return Ok(false);
    };
    let iw = eval_inequality_witness(&cm.model, ineq);
    let cw = eval_condition_witness(&cm.model.rel, cond, limits)?;
    Ok(iw.is_none() == cex.ineq_holds
        && cw.is_none() == cex.cond_holds
        && cex.ineq_holds != cex.cond_holds)
}

// ---------------------------------------------------------------------
// Regression suites.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuitePair {
    pub name: String,
    pub ineq: String,
    pub cond: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Suite(pub Vec<SuitePair>);

impl Suite {
    pub fn from_json(text: &str) -> Result<Suite, VerifyError> {
        serde_json::from_str(text).map_err(|e| VerifyError::MalformedSuite(e.to_string()))
    }

    /// The shipped regression suite of paper-derived pairs.
    pub fn shipped() -> Suite {
        Suite::from_json(include_str!("../data/regression.json"))
            .expect("shipped suite is well-formed")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairResult {
    pub name: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionSummary {
    pub results: Vec<PairResult>,
    pub models: usize,
}

impl RegressionSummary {
    pub fn all_equivalent(&self) -> bool {
        self.results.iter().all(|r| r.verdict.is_equivalent())
    }
}

impl fmt::Display for RegressionSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            match &r.verdict {
                Verdict::Equivalent => writeln!(f, "{}: equivalent", r.name)?,
                Verdict::Counterexample(c) => writeln!(
                    f,
                    "{}: counterexample on {} (inequality {}, condition {})",
                    r.name,
                    c.model,
                    if c.ineq_holds { "holds" } else { "fails" },
                    if c.cond_holds { "holds" } else { "fails" },
                )?,
            }
        }
        write!(f, "{} checked, {} equivalent", self.results.len(),
            self.results.iter().filter(|r| r.verdict.is_equivalent()).count())
    }
}

/// Runs every pair of a suite against the corpus.
pub fn run_regression(
    suite: &Suite,
    corpus: &ModelCorpus,
    limits: &EvalLimits,
) -> Result<RegressionSummary, VerifyError> {
    let mut results = Vec::new();
    for pair in &suite.0 {
        let ineq = parse_inequality(&pair.ineq)
            .map_err(|e| VerifyError::MalformedSuite(format!("{}: {e}", pair.name)))?;
        let cond = parse_condition(&pair.cond)
            .map_err(|e| VerifyError::MalformedSuite(format!("{}: {e}", pair.name)))?;
        let report = check_equivalence(&ineq, &cond, corpus, limits)?;
        results.push(PairResult { name: pair.name.clone(), verdict: report.verdict });
    }
    Ok(RegressionSummary { results, models: corpus.len() })
}

// ---------------------------------------------------------------------
// Model files.

/// An element given either as a bare irreducible name (its principal
/// downset) or as an explicit downset listed by irreducible names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemSpec {
    Principal(String),
    Downset(Vec<String>),
}

/// JSON model file: a poset, a subordination seed or relation, and a flag
/// saying whether the listed pairs are already closed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub poset: PosetSpec,
    #[serde(default)]
    pub subordination: Vec<(ElemSpec, ElemSpec)>,
    #[serde(default)]
    pub closed: bool,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        serde_json::from_str(text).map_err(|e| VerifyError::MalformedSuite(e.to_string()))
    }

    fn elem(&self, lattice: &Arc<Lattice>, spec: &ElemSpec) -> Result<ElemId, VerifyError> {
        Ok(match spec {
            ElemSpec::Principal(name) => lattice.principal(name)?,
            ElemSpec::Downset(names) => lattice.parse_element(names)?,
        })
    }

    /// Builds the lattice and relation. When `closed` is false the pairs
    /// are closed into the least subordination relation containing them;
    /// when true they are validated as given.
    pub fn build(&self, cap: usize) -> Result<(Arc<Lattice>, SubordinationRelation), VerifyError> {
        let poset = Poset::from_spec(&self.poset)?;
        let lattice = Arc::new(crate::lattice::downset_lattice_capped(&poset, cap)?);
        let mut pairs = Vec::new();
        for (a, b) in &self.subordination {
            pairs.push((self.elem(&lattice, a)?, self.elem(&lattice, b)?));
        }
        let rel = if self.closed {
            SubordinationRelation::from_pairs(Arc::clone(&lattice), &pairs)?
        } else {
            closure(&lattice, &pairs)?
        };
        Ok((lattice, rel))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mini_corpus() -> ModelCorpus {
        // The diamond with its full exhaustive relation set: small enough
        // for fast unit tests, rich enough to separate the paper pairs.
        let lattice = Arc::new(downset_lattice(&Poset::antichain(&["p", "q"])).unwrap());
        let rels = enumerate_subordinations(&lattice, GenMode::Exhaustive).unwrap();
        ModelCorpus {
            models: rels
                .into_iter()
                .enumerate()
                .map(|(i, r)| CorpusModel {
                    name: format!("diamond/exhaustive-{i}"),
                    tier: Tier::Exhaustive,
                    model: Model::new(r),
                })
                .collect(),
        }
    }

    #[test]
    fn two_chain_has_exactly_two_subordination_relations() {
        let lattice = Arc::new(downset_lattice(&Poset::antichain(&["x"])).unwrap());
        let rels = enumerate_subordinations(&lattice, GenMode::Exhaustive).unwrap();
        assert_eq!(rels.len(), 2);
        // One is {(bot,bot), (bot,top), (top,top)}, the other is full.
        let pair_sets: BTreeSet<Vec<(ElemId, ElemId)>> =
            rels.iter().map(|r| r.pairs()).collect();
        assert!(pair_sets.contains(&vec![(0, 0), (0, 1), (1, 1)]));
        assert!(pair_sets.contains(&vec![(0, 0), (0, 1), (1, 0), (1, 1)]));
    }

    #[test]
    fn diamond_closure_seeded_contains_named_relations() {
        let lattice = Arc::new(downset_lattice(&Poset::antichain(&["p", "q"])).unwrap());
        let p = lattice.parse_element(&["p"]).unwrap();
        let q = lattice.parse_element(&["q"]).unwrap();
        let rels = enumerate_subordinations(&lattice, GenMode::ClosureSeeded).unwrap();
        let rows: BTreeSet<Vec<u64>> = rels.iter().map(|r| r.rows().to_vec()).collect();
        let min = SubordinationRelation::minimal(&lattice);
        let prec1 = closure(&lattice, &[(p, q)]).unwrap();
        let prec2 = closure(&lattice, &[(p, q), (q, p)]).unwrap();
        assert!(rows.contains(min.rows()));
        assert!(rows.contains(prec1.rows()));
        assert!(rows.contains(prec2.rows()));
        // Lattice order and full relation are seeded explicitly.
        assert!(rels.len() >= 5);
    }

    #[test]
    fn sampling_is_reproducible() {
        let lattice = Arc::new(downset_lattice(&Poset::antichain(&["p", "q"])).unwrap());
        let a = enumerate_subordinations(&lattice, GenMode::Sampled { count: 10, seed: 7 }).unwrap();
        let b = enumerate_subordinations(&lattice, GenMode::Sampled { count: 10, seed: 7 }).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.rows(), y.rows());
        }
        let c = enumerate_subordinations(&lattice, GenMode::Sampled { count: 10, seed: 8 }).unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| x.rows() != y.rows()));
    }

    #[test]
    fn exhaustive_mode_enforces_cap() {
        let lattice = Arc::new(downset_lattice(&Poset::antichain(&["x", "y", "z"])).unwrap());
        assert!(matches!(
            enumerate_subordinations(&lattice, GenMode::Exhaustive),
            Err(VerifyError::CapExceeded { got: 8, max: 4 })
        ));
    }

    #[test]
    fn transitivity_pair_is_equivalent_on_mini_corpus() {
        let corpus = mini_corpus();
        let ineq = parse_inequality("top -> (top -> c) <= top -> c").unwrap();
        let cond =
            parse_condition("forall a. forall b. forall c. a prec b & b prec c ==> a prec c")
                .unwrap();
        let report =
            check_equivalence(&ineq, &cond, &corpus, &EvalLimits::default()).unwrap();
        assert!(report.verdict.is_equivalent());
        assert_eq!(report.models_checked, corpus.len());
    }

    #[test]
    fn weakened_condition_yields_reverifiable_counterexample() {
        let corpus = mini_corpus();
        let ineq = parse_inequality("top -> (top -> c) <= top -> c").unwrap();
        // Dropped the first conjunct of the antecedent.
        let cond = parse_condition("forall b. forall c. b prec c ==> b prec c").unwrap();
        let weak = parse_condition("forall a. forall b. forall c. b prec c ==> a prec c").unwrap();
        let _ = cond;
        let report = check_equivalence(&ineq, &weak, &corpus, &EvalLimits::default()).unwrap();
        let Verdict::Counterexample(cex) = &report.verdict else {
            panic!("expected counterexample");
        };
        assert!(reverify_counterexample(cex, &ineq, &weak, &corpus, &EvalLimits::default())
            .unwrap());
    }

    #[test]
    fn shipped_suite_parses_and_mutation_is_flagged() {
        let suite = Suite::shipped();
        assert!(suite.0.len() >= 13);
        // Run the cheap pairs on the mini corpus to smoke-test the runner
        // with a deliberately broken pair appended.
        let mut pairs: Vec<SuitePair> =
            suite.0.iter().filter(|p| p.name == "T" || p.name == "CT").cloned().collect();
        assert_eq!(pairs.len(), 2);
        pairs.push(SuitePair {
            name: "broken".to_string(),
            ineq: "top -> (top -> c) <= top -> c".to_string(),
            cond: "forall a. forall b. forall c. b prec c ==> a prec c".to_string(),
        });
        let summary =
            run_regression(&Suite(pairs), &mini_corpus(), &EvalLimits::default()).unwrap();
        assert!(!summary.all_equivalent());
        let flagged: Vec<&str> = summary
            .results
            .iter()
            .filter(|r| !r.verdict.is_equivalent())
            .map(|r| r.name.as_str())
            .collect();
        assert_eq!(flagged, vec!["broken"]);
    }

    #[test]
    fn empty_suite_reports_zero_checked() {
        let summary =
            run_regression(&Suite(Vec::new()), &mini_corpus(), &EvalLimits::default()).unwrap();
        assert_eq!(summary.results.len(), 0);
        assert!(summary.all_equivalent());
        assert!(summary.to_string().contains("0 checked"));
    }

    #[test]
    fn model_files_build_with_and_without_closure() {
        let text = r#"{
            "poset": {"elements": ["p", "q"], "leq": []},
            "subordination": [["p", "q"]],
            "closed": false
        }"#;
        let mf = ModelFile::from_json(text).unwrap();
        let (lattice, rel) = mf.build(6).unwrap();
        let p = lattice.parse_element(&["p"]).unwrap();
        let q = lattice.parse_element(&["q"]).unwrap();
        assert!(rel.holds(p, q));
        assert!(rel.holds(lattice.bot(), p));

        // Explicit downsets and closed relations validate instead.
        let text = r#"{
            "poset": {"elements": ["p", "q"], "leq": []},
            "subordination": [[["p"], ["p", "q"]]],
            "closed": true
        }"#;
        let mf = ModelFile::from_json(text).unwrap();
        assert!(mf.build(6).is_err(), "bare pair set is not a subordination relation");
    }

    #[test]
    fn neg_top_equivalence_on_mini_corpus() {
        // neg top <= bot holds iff every self-inconsistent element is
        // trivial; certified against its condition form model by model.
        let corpus = mini_corpus();
        let a = parse_inequality("neg top <= bot").unwrap();
        let b = parse_inequality(r"a /\ neg a <= bot").unwrap();
        for cm in &corpus.models {
            assert_eq!(
                crate::syntax::eval_inequality(&cm.model, &a),
                crate::syntax::eval_inequality(&cm.model, &b),
                "{}",
                cm.name
            );
        }
    }
}
