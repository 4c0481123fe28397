use std::time::Instant;
use subkit::verify::*;
use subkit::syntax::EvalLimits;

fn main() {
    let t0 = Instant::now();
    let corpus = default_corpus();
    println!("corpus: {} models in {:?}", corpus.len(), t0.elapsed());
    let mut by_tier = std::collections::BTreeMap::new();
    let mut max_n = 0;
    for m in &corpus.models {
        *by_tier.entry(format!("{:?}", m.tier)).or_insert(0) += 1;
        max_n = max_n.max(m.model.lattice().len());
    }
    println!("tiers: {:?}, max lattice {}", by_tier, max_n);
    let suite = Suite::shipped();
    let limits = EvalLimits::default();
    for pair in &suite.0 {
        let t = Instant::now();
        let ineq = subkit::syntax::parse_inequality(&pair.ineq).unwrap();
        let cond = subkit::syntax::parse_condition(&pair.cond).unwrap();
        let r = check_equivalence(&ineq, &cond, corpus, &limits).unwrap();
        println!("{:24} {:?} checked={} in {:?}", pair.name, r.verdict.is_equivalent(), r.models_checked, t.elapsed());
    }
    println!("total {:?}", t0.elapsed());
}
