//! Brute-force evaluation of terms, inequalities, and conditions over
//! finite models.
//!
//! Inequalities hold when `lhs <= rhs` under every assignment of their free
//! variables. Conditions are evaluated by quantification over all lattice
//! elements; the evaluator schedules each atom at the earliest point all of
//! its variables are bound, and uses atoms whose last unbound variable is
//! the one being introduced to filter that variable's domain, which keeps
//! the paper-sized conditions tractable on 64-element models. A slower
//! structural evaluator handles arbitrarily shaped quantifier prefixes.

use super::{CAtom, Condition, LTerm, QuantKind, Term};
use crate::lattice::{ElemId, Lattice};
use crate::subord::{Model, SlantedAlgebra, SubordinationRelation};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("variable `{0}` is bound more than once")]
    DuplicateVar(String),
    #[error("variable `{0}` is used outside the scope of its quantifier")]
    OutOfScope(String),
    #[error("quantifier depth {depth} exceeds the limit {limit} (blocks of like quantifiers)")]
    DepthLimit { depth: usize, limit: usize },
}

/// Evaluation limits. `quant_blocks` bounds the number of quantifier
/// blocks (a maximal run of like quantifiers counts once, including the
/// implicit universal closure of free variables).
#[derive(Debug, Clone, Copy)]
pub struct EvalLimits {
    pub quant_blocks: usize,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits { quant_blocks: 8 }
    }
}

/// Compositional term evaluation under an explicit assignment.
pub fn eval_term(
    alg: &SlantedAlgebra,
    env: &BTreeMap<String, ElemId>,
    t: &Term,
) -> Result<ElemId, EvalError> {
    let l = alg.lattice();
    Ok(match t {
        Term::Var(v) => *env.get(v).ok_or_else(|| EvalError::UnboundVar(v.clone()))?,
        Term::Bot => l.bot(),
        Term::Top => l.top(),
        Term::And(a, b) => l.meet(eval_term(alg, env, a)?, eval_term(alg, env, b)?),
        Term::Or(a, b) => l.join(eval_term(alg, env, a)?, eval_term(alg, env, b)?),
        Term::Imp(a, b) => alg.imp_at(eval_term(alg, env, a)?, eval_term(alg, env, b)?),
        Term::CoImp(a, b) => alg.coimp_at(eval_term(alg, env, a)?, eval_term(alg, env, b)?),
        Term::Neg(a) => alg.neg_at(eval_term(alg, env, a)?),
        Term::Sim(a) => alg.sim_at(eval_term(alg, env, a)?),
    })
}

// Slot-compiled terms for the assignment loops.
enum CT {
    Var(usize),
    Bot,
    Top,
    And(Box<CT>, Box<CT>),
    Or(Box<CT>, Box<CT>),
    Imp(Box<CT>, Box<CT>),
    CoImp(Box<CT>, Box<CT>),
    Neg(Box<CT>),
    Sim(Box<CT>),
}

fn compile_term(t: &Term, slots: &[String]) -> CT {
    match t {
        Term::Var(v) => CT::Var(slots.iter().position(|s| s == v).expect("slot exists")),
        Term::Bot => CT::Bot,
        Term::Top => CT::Top,
        Term::And(a, b) => CT::And(compile_term(a, slots).into(), compile_term(b, slots).into()),
        Term::Or(a, b) => CT::Or(compile_term(a, slots).into(), compile_term(b, slots).into()),
        Term::Imp(a, b) => CT::Imp(compile_term(a, slots).into(), compile_term(b, slots).into()),
        Term::CoImp(a, b) => {
            CT::CoImp(compile_term(a, slots).into(), compile_term(b, slots).into())
        }
        Term::Neg(a) => CT::Neg(compile_term(a, slots).into()),
        Term::Sim(a) => CT::Sim(compile_term(a, slots).into()),
    }
}

fn eval_ct(alg: &SlantedAlgebra, env: &[ElemId], t: &CT) -> ElemId {
    let l = alg.lattice();
    match t {
        CT::Var(s) => env[*s],
        CT::Bot => l.bot(),
        CT::Top => l.top(),
        CT::And(a, b) => l.meet(eval_ct(alg, env, a), eval_ct(alg, env, b)),
        CT::Or(a, b) => l.join(eval_ct(alg, env, a), eval_ct(alg, env, b)),
        CT::Imp(a, b) => alg.imp_at(eval_ct(alg, env, a), eval_ct(alg, env, b)),
        CT::CoImp(a, b) => alg.coimp_at(eval_ct(alg, env, a), eval_ct(alg, env, b)),
        CT::Neg(a) => alg.neg_at(eval_ct(alg, env, a)),
        CT::Sim(a) => alg.sim_at(eval_ct(alg, env, a)),
    }
}

/// An inequality holds when `lhs <= rhs` under every assignment of its
/// free variables.
pub fn eval_inequality(model: &Model, ineq: &super::Inequality) -> bool {
    eval_inequality_witness(model, ineq).is_none()
}

/// Returns a falsifying assignment, if any.
pub fn eval_inequality_witness(
    model: &Model,
    ineq: &super::Inequality,
) -> Option<Vec<(String, ElemId)>> {
    let vars = ineq.vars_in_order();
    let lhs = compile_term(&ineq.lhs, &vars);
    let rhs = compile_term(&ineq.rhs, &vars);
    let l = model.lattice();
    let n = l.len();
    let mut env = vec![0usize; vars.len()];
    loop {
        let x = eval_ct(&model.alg, &env, &lhs);
        let y = eval_ct(&model.alg, &env, &rhs);
        if !l.leq(x, y) {
            return Some(vars.iter().cloned().zip(env.iter().copied()).collect());
        }
        let mut i = 0;
        loop {
            if i == env.len() {
                return None;
            }
            env[i] += 1;
            if env[i] < n {
                break;
            }
            env[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------
// Conditions.

enum CL {
    Var(usize),
    Bot,
    Top,
    And(Box<CL>, Box<CL>),
    Or(Box<CL>, Box<CL>),
}

fn compile_lterm(t: &LTerm, slots: &[String]) -> CL {
    match t {
        LTerm::Var(v) => CL::Var(slots.iter().position(|s| s == v).expect("slot exists")),
        LTerm::Bot => CL::Bot,
        LTerm::Top => CL::Top,
        LTerm::And(a, b) => {
            CL::And(compile_lterm(a, slots).into(), compile_lterm(b, slots).into())
        }
        LTerm::Or(a, b) => CL::Or(compile_lterm(a, slots).into(), compile_lterm(b, slots).into()),
    }
}

fn eval_cl(l: &Lattice, env: &[ElemId], t: &CL) -> ElemId {
    match t {
        CL::Var(s) => env[*s],
        CL::Bot => l.bot(),
        CL::Top => l.top(),
        CL::And(a, b) => l.meet(eval_cl(l, env, a), eval_cl(l, env, b)),
        CL::Or(a, b) => l.join(eval_cl(l, env, a), eval_cl(l, env, b)),
    }
}

struct CompiledAtom {
    prec: bool,
    lhs: CL,
    rhs: CL,
    /// Slots occurring in the atom, ascending.
    vars: Vec<usize>,
}

fn compile_atom(a: &CAtom, slots: &[String]) -> CompiledAtom {
    let (s, t, prec) = match a {
        CAtom::Leq(s, t) => (s, t, false),
        CAtom::Prec(s, t) => (s, t, true),
    };
    let mut vars: Vec<usize> = a
        .free_vars()
        .iter()
        .map(|v| slots.iter().position(|s| s == v).expect("slot exists"))
        .collect();
    vars.sort_unstable();
    vars.dedup();
    CompiledAtom { prec, lhs: compile_lterm(s, slots), rhs: compile_lterm(t, slots), vars }
}

fn atom_true(rel: &SubordinationRelation, env: &[ElemId], a: &CompiledAtom) -> bool {
    let l = rel.lattice();
    let x = eval_cl(l, env, &a.lhs);
    let y = eval_cl(l, env, &a.rhs);
    if a.prec {
        rel.holds(x, y)
    } else {
        l.leq(x, y)
    }
}

struct Layout {
    slots: Vec<String>,
    /// Prefix quantifiers: (kind, slots bound together, guard atom).
    quants: Vec<(QuantKind, Vec<usize>, Option<CAtom>)>,
    ante: Vec<CAtom>,
    cons_quants: Vec<(QuantKind, Vec<usize>, Option<CAtom>)>,
    cons: Vec<CAtom>,
    has_implication: bool,
}

fn layout(cond: &Condition) -> Result<Layout, EvalError> {
    let free = cond.free_vars();
    let mut slots: Vec<String> = free.clone();
    for v in cond.bound_vars() {
        if slots.contains(&v) {
            return Err(EvalError::DuplicateVar(v));
        }
        slots.push(v);
    }
    let slot_of = |name: &str, slots: &[String]| slots.iter().position(|s| s == name).unwrap();
    let mut quants: Vec<(QuantKind, Vec<usize>, Option<CAtom>)> = (0..free.len())
        .map(|i| (QuantKind::Forall, vec![i], None))
        .collect();
    for q in &cond.prefix {
        let idxs: Vec<usize> = q.vars.iter().map(|v| slot_of(v, &slots)).collect();
        let guard = q.restr.as_ref().map(|r| r.guard(&q.vars));
        quants.push((q.kind, idxs, guard));
    }
    let (cons_quants, cons, ante, has_implication) = match &cond.clause.cons {
        None => (Vec::new(), cond.clause.ante.clone(), Vec::new(), false),
        Some((qs, atoms)) => {
            let mut cq: Vec<(QuantKind, Vec<usize>, Option<CAtom>)> = Vec::new();
            for q in qs {
                let idxs: Vec<usize> = q.vars.iter().map(|v| slot_of(v, &slots)).collect();
                let guard = q.restr.as_ref().map(|r| r.guard(&q.vars));
                cq.push((q.kind, idxs, guard));
            }
            (cq, atoms.clone(), cond.clause.ante.clone(), true)
        }
    };
    // The antecedent may not use variables bound in the consequent prefix.
    let cons_bound: Vec<&String> = cons_quants
        .iter()
        .flat_map(|(_, idxs, _)| idxs.iter().map(|&i| &slots[i]))
        .collect();
    for a in &ante {
        for v in a.free_vars() {
            if cons_bound.iter().any(|b| **b == v) {
                return Err(EvalError::OutOfScope(v));
            }
        }
    }
    Ok(Layout { slots, quants, ante, cons_quants, cons, has_implication })
}

fn quant_blocks(layout: &Layout) -> usize {
    let mut blocks = 0usize;
    let mut last: Option<QuantKind> = None;
    for (k, _, _) in layout.quants.iter().chain(layout.cons_quants.iter()) {
        if last != Some(*k) {
            blocks += 1;
            last = Some(*k);
        }
    }
    blocks
}

/// The standard prenex shape: a universal prefix with an antecedent
/// conjunction, then an existential block with a consequent conjunction.
struct StdShape {
    slots: Vec<String>,
    univs: Vec<usize>,
    ante: Vec<CompiledAtom>,
    exis: Vec<usize>,
    cons: Vec<CompiledAtom>,
}

fn to_std_shape(layout: &Layout) -> Option<StdShape> {
    let mut univs = Vec::new();
    let mut ante = layout.ante.clone();
    let mut exis = Vec::new();
    let mut cons = layout.cons.clone();
    let mut seen_exists = false;
    for (kind, idxs, guard) in &layout.quants {
        match kind {
            QuantKind::Forall => {
                if seen_exists {
                    return None;
                }
                univs.extend(idxs.iter().copied());
                if let Some(g) = guard {
                    ante.push(g.clone());
                }
            }
            QuantKind::Exists => {
                // An existential prefix scoping over `==>` is not prenex
                // `forall* (ante => exists* cons)`; leave it to the general
                // evaluator.
                if layout.has_implication {
                    return None;
                }
                seen_exists = true;
                exis.extend(idxs.iter().copied());
                if let Some(g) = guard {
                    cons.push(g.clone());
                }
            }
        }
    }
    for (kind, idxs, guard) in &layout.cons_quants {
        if *kind != QuantKind::Exists {
            return None;
        }
        exis.extend(idxs.iter().copied());
        if let Some(g) = guard {
            cons.push(g.clone());
        }
    }
    let ante: Vec<CompiledAtom> = ante.iter().map(|a| compile_atom(a, &layout.slots)).collect();
    let cons: Vec<CompiledAtom> = cons.iter().map(|a| compile_atom(a, &layout.slots)).collect();
    Some(StdShape { slots: layout.slots.clone(), univs, ante, exis, cons })
}

/// Evaluates a condition; free variables are universally quantified.
pub fn eval_condition(
    rel: &SubordinationRelation,
    cond: &Condition,
    limits: &EvalLimits,
) -> Result<bool, EvalError> {
    Ok(eval_condition_witness(rel, cond, limits)?.is_none())
}

/// As [`eval_condition`], but on failure returns the falsifying assignment
/// of the leading universal variables.
pub fn eval_condition_witness(
    rel: &SubordinationRelation,
    cond: &Condition,
    limits: &EvalLimits,
) -> Result<Option<Vec<(String, ElemId)>>, EvalError> {
    let lay = layout(cond)?;
    let blocks = quant_blocks(&lay);
    if blocks > limits.quant_blocks {
        return Err(EvalError::DepthLimit { depth: blocks, limit: limits.quant_blocks });
    }
    if let Some(shape) = to_std_shape(&lay) {
        return Ok(eval_std(rel, &shape));
    }
    Ok(eval_general(rel, &lay))
}

// Fast path: atom-scheduled depth-first enumeration. At each quantifier
// the atoms whose last unbound variable is the one being introduced filter
// its domain; once a variable stops mattering the loop over its remaining
// values is cut short. Consequent truth is memoized on the universal
// values it can see.
fn eval_std(rel: &SubordinationRelation, shape: &StdShape) -> Option<Vec<(String, ElemId)>> {
    let n = rel.lattice().len();
    let nslots = shape.slots.len();
    let mut env = vec![0usize; nslots];

    // Constant antecedent atoms settle the whole condition.
    for a in &shape.ante {
        if a.vars.is_empty() && !atom_true(rel, &env, a) {
            return None;
        }
    }

    let exis_set: Vec<bool> = {
        let mut v = vec![false; nslots];
        shape.exis.iter().for_each(|&s| v[s] = true);
        v
    };
    let mut cons_univ_slots: Vec<usize> = shape
        .cons
        .iter()
        .flat_map(|a| a.vars.iter().copied())
        .filter(|s| !exis_set[*s])
        .collect();
    cons_univ_slots.sort_unstable();
    cons_univ_slots.dedup();
    let memo_ok = cons_univ_slots.len() <= 10 && n <= 64;

    struct Ctx<'a> {
        rel: &'a SubordinationRelation,
        shape: &'a StdShape,
        n: usize,
        exis_set: Vec<bool>,
        cons_univ_slots: Vec<usize>,
        memo_ok: bool,
    }

    fn exists_check(ctx: &Ctx, env: &mut [ElemId], j: usize, pending: &[usize]) -> bool {
        if j == ctx.shape.exis.len() {
            debug_assert!(pending.is_empty());
            return true;
        }
        let slot = ctx.shape.exis[j];
        let later = &ctx.shape.exis[j + 1..];
        let mut absorbers = Vec::new();
        let mut rest = Vec::new();
        for &ai in pending {
            if ctx.shape.cons[ai].vars.iter().any(|v| later.contains(v)) {
                rest.push(ai);
            } else {
                absorbers.push(ai);
            }
        }
        let relevant = rest.iter().any(|&ai| ctx.shape.cons[ai].vars.contains(&slot));
        for v in 0..ctx.n {
            env[slot] = v;
            if !absorbers.iter().all(|&ai| atom_true(ctx.rel, env, &ctx.shape.cons[ai])) {
                continue;
            }
            if exists_check(ctx, env, j + 1, &rest) {
                return true;
            }
            if !relevant {
                // The remaining subproblem is identical for every other
                // in-domain value of this slot.
                return false;
            }
        }
        false
    }

    fn consequent(ctx: &Ctx, env: &mut [ElemId], memo: &mut HashMap<u64, bool>) -> bool {
        let mut pending = Vec::new();
        for (ai, a) in ctx.shape.cons.iter().enumerate() {
            if a.vars.iter().all(|v| !ctx.exis_set[*v]) {
                if !atom_true(ctx.rel, env, a) {
                    return false;
                }
            } else {
                pending.push(ai);
            }
        }
        if pending.is_empty() {
            return true;
        }
        let key = ctx.memo_ok.then(|| {
            let mut k = 0u64;
            for &s in &ctx.cons_univ_slots {
                k = (k << 6) | env[s] as u64;
            }
            k
        });
        if let Some(k) = key {
            if let Some(&v) = memo.get(&k) {
                return v;
            }
        }
        let v = exists_check(ctx, env, 0, &pending);
        if let Some(k) = key {
            if memo.len() < (1 << 21) {
                memo.insert(k, v);
            }
        }
        v
    }

    fn dfs(
        ctx: &Ctx,
        env: &mut [ElemId],
        i: usize,
        pending: &[usize],
        memo: &mut HashMap<u64, bool>,
    ) -> Option<Vec<ElemId>> {
        if i == ctx.shape.univs.len() {
            debug_assert!(pending.is_empty());
            return if consequent(ctx, env, memo) { None } else { Some(env.to_vec()) };
        }
        let slot = ctx.shape.univs[i];
        let later = &ctx.shape.univs[i + 1..];
        let mut absorbers = Vec::new();
        let mut rest = Vec::new();
        for &ai in pending {
            if ctx.shape.ante[ai].vars.iter().any(|v| later.contains(v)) {
                rest.push(ai);
            } else {
                absorbers.push(ai);
            }
        }
        let relevant = rest.iter().any(|&ai| ctx.shape.ante[ai].vars.contains(&slot))
            || ctx.cons_univ_slots.contains(&slot);
        for v in 0..ctx.n {
            env[slot] = v;
            if !absorbers.iter().all(|&ai| atom_true(ctx.rel, env, &ctx.shape.ante[ai])) {
                continue; // antecedent false: vacuously true branch
            }
            if let Some(w) = dfs(ctx, env, i + 1, &rest, memo) {
                return Some(w);
            }
            if !relevant {
                return None;
            }
        }
        None
    }

    let pending: Vec<usize> = shape
        .ante
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.vars.is_empty())
        .map(|(i, _)| i)
        .collect();
    let ctx = Ctx { rel, shape, n, exis_set, cons_univ_slots, memo_ok };
    let mut memo = HashMap::new();
    dfs(&ctx, &mut env, 0, &pending, &mut memo).map(|w| {
        shape
            .univs
            .iter()
            .map(|&s| (shape.slots[s].clone(), w[s]))
            .collect()
    })
}

// General path: direct structural recursion. Correct for every shape the
// grammar admits; exponential in the number of bound variables.
fn eval_general(rel: &SubordinationRelation, lay: &Layout) -> Option<Vec<(String, ElemId)>> {
    let n = rel.lattice().len();
    let slots = &lay.slots;
    let ante: Vec<CompiledAtom> = lay.ante.iter().map(|a| compile_atom(a, slots)).collect();
    let cons: Vec<CompiledAtom> = lay.cons.iter().map(|a| compile_atom(a, slots)).collect();
    let guards: Vec<Option<CompiledAtom>> = lay
        .quants
        .iter()
        .map(|(_, _, g)| g.as_ref().map(|g| compile_atom(g, slots)))
        .collect();
    let cons_guards: Vec<Option<CompiledAtom>> = lay
        .cons_quants
        .iter()
        .map(|(_, _, g)| g.as_ref().map(|g| compile_atom(g, slots)))
        .collect();

    // Iterates joint assignments for the slots of one quantifier.
    fn next_assign(assign: &mut [usize], n: usize) -> bool {
        let mut k = 0;
        loop {
            if k == assign.len() {
                return false;
            }
            assign[k] += 1;
            if assign[k] < n {
                return true;
            }
            assign[k] = 0;
            k += 1;
        }
    }

    fn body(
        rel: &SubordinationRelation,
        env: &mut [ElemId],
        n: usize,
        lay: &Layout,
        cons_guards: &[Option<CompiledAtom>],
        cons: &[CompiledAtom],
        qi: usize,
    ) -> bool {
        if qi == lay.cons_quants.len() {
            return cons.iter().all(|a| atom_true(rel, env, a));
        }
        let (kind, idxs, _) = &lay.cons_quants[qi];
        let guard = &cons_guards[qi];
        let mut assign = vec![0usize; idxs.len()];
        loop {
            for (k, &s) in idxs.iter().enumerate() {
                env[s] = assign[k];
            }
            let guard_ok = guard.as_ref().map_or(true, |g| atom_true(rel, env, g));
            if guard_ok {
                let inner = body(rel, env, n, lay, cons_guards, cons, qi + 1);
                match kind {
                    QuantKind::Forall if !inner => return false,
                    QuantKind::Exists if inner => return true,
                    _ => {}
                }
            }
            if !next_assign(&mut assign, n) {
                return matches!(kind, QuantKind::Forall);
            }
        }
    }

    fn prefix(
        rel: &SubordinationRelation,
        env: &mut [ElemId],
        n: usize,
        lay: &Layout,
        guards: &[Option<CompiledAtom>],
        cons_guards: &[Option<CompiledAtom>],
        ante: &[CompiledAtom],
        cons: &[CompiledAtom],
        qi: usize,
        witness: &mut Vec<(usize, ElemId)>,
    ) -> bool {
        if qi == lay.quants.len() {
            if lay.has_implication && !ante.iter().all(|a| atom_true(rel, env, a)) {
                return true;
            }
            return body(rel, env, n, lay, cons_guards, cons, 0);
        }
        let (kind, idxs, _) = &lay.quants[qi];
        let guard = &guards[qi];
        let mut assign = vec![0usize; idxs.len()];
        loop {
            for (k, &s) in idxs.iter().enumerate() {
                env[s] = assign[k];
            }
            let guard_ok = guard.as_ref().map_or(true, |g| atom_true(rel, env, g));
            if guard_ok {
                match kind {
                    QuantKind::Forall => {
                        let mark = witness.len();
                        for &s in idxs {
                            witness.push((s, env[s]));
                        }
                        if !prefix(
                            rel, env, n, lay, guards, cons_guards, ante, cons, qi + 1, witness,
                        ) {
                            return false;
                        }
                        witness.truncate(mark);
                    }
                    QuantKind::Exists => {
                        if prefix(
                            rel, env, n, lay, guards, cons_guards, ante, cons, qi + 1, witness,
                        ) {
                            return true;
                        }
                    }
                }
            }
            if !next_assign(&mut assign, n) {
                return matches!(kind, QuantKind::Forall);
            }
        }
    }

    let mut env = vec![0usize; slots.len()];
    let mut witness = Vec::new();
    if prefix(rel, &mut env, n, lay, &guards, &cons_guards, &ante, &cons, 0, &mut witness) {
        None
    } else {
        Some(witness.into_iter().map(|(s, v)| (slots[s].clone(), v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_condition, parse_inequality, parse_term};
    use super::*;
    use crate::lattice::{downset_lattice, Poset};
    use crate::subord::closure;
    use std::sync::Arc;

    fn diamond_prec1() -> Model {
        let l = Arc::new(downset_lattice(&Poset::antichain(&["p", "q"])).unwrap());
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        Model::new(closure(&l, &[(p, q)]).unwrap())
    }

    fn diamond_prec2() -> Model {
        let l = Arc::new(downset_lattice(&Poset::antichain(&["p", "q"])).unwrap());
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        Model::new(closure(&l, &[(p, q), (q, p)]).unwrap())
    }

    #[test]
    fn term_evaluation_examples() {
        let m = diamond_prec1();
        let l = m.lattice();
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();

        let mut env = BTreeMap::new();
        env.insert("a".to_string(), l.top());
        let t = parse_term("top -> a").unwrap();
        assert_eq!(eval_term(&m.alg, &env, &t).unwrap(), l.top());

        let mut env = BTreeMap::new();
        env.insert("q".to_string(), q);
        let t = parse_term("top -> q").unwrap();
        assert_eq!(eval_term(&m.alg, &env, &t).unwrap(), p);

        let mut env = BTreeMap::new();
        env.insert("p".to_string(), p);
        let t = parse_term("neg p").unwrap();
        assert_eq!(eval_term(&m.alg, &env, &t).unwrap(), q);

        assert!(matches!(
            eval_term(&m.alg, &BTreeMap::new(), &parse_term("x").unwrap()),
            Err(EvalError::UnboundVar(_))
        ));
    }

    #[test]
    fn transitivity_axiom_on_diamond() {
        let t_axiom = parse_inequality("top -> (top -> c) <= top -> c").unwrap();
        assert!(eval_inequality(&diamond_prec1(), &t_axiom));

        let m2 = diamond_prec2();
        let w = eval_inequality_witness(&m2, &t_axiom).unwrap();
        let p = m2.lattice().parse_element(&["p"]).unwrap();
        assert_eq!(w, vec![("c".to_string(), p)]);
    }

    #[test]
    fn transitivity_condition_on_diamond() {
        let cond =
            parse_condition("forall a. forall b. forall c. a prec b & b prec c ==> a prec c")
                .unwrap();
        let limits = EvalLimits::default();
        assert!(eval_condition(&diamond_prec1().rel, &cond, &limits).unwrap());
        let m2 = diamond_prec2();
        let w = eval_condition_witness(&m2.rel, &cond, &limits).unwrap().unwrap();
        let l = m2.lattice();
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        assert_eq!(
            w,
            vec![
                ("a".to_string(), p),
                ("b".to_string(), q),
                ("c".to_string(), p)
            ]
        );
    }

    #[test]
    fn restricted_quantifier_expansions_agree() {
        let limits = EvalLimits::default();
        for m in [diamond_prec1(), diamond_prec2()] {
            let pairs = [
                (
                    "forall x. exists y succ x. y prec top",
                    "forall x. exists y. x prec y & y prec top",
                ),
                (
                    "forall x. forall y prec x. y prec top",
                    "forall x. forall y. y prec x ==> y prec top",
                ),
                (
                    "forall x. x prec top ==> exists e <=or(f, x). e prec top & f prec top",
                    "forall x. x prec top ==> exists e. exists f. x <= e \\/ f & e prec top & f prec top",
                ),
                (
                    "forall x. exists e <=and(f, x). e prec top & f prec top",
                    "forall x. exists e. exists f. e /\\ f <= x & e prec top & f prec top",
                ),
                (
                    "forall x. exists e <=coimp(f, x). e prec top",
                    "forall x. exists e. exists f. f prec e \\/ x & e prec top",
                ),
                (
                    "forall x. exists e >=imp(f, x). e prec top",
                    "forall x. exists e. exists f. x /\\ e prec f & e prec top",
                ),
            ];
            for (a, b) in pairs {
                let ca = parse_condition(a).unwrap();
                let cb = parse_condition(b).unwrap();
                assert_eq!(
                    eval_condition(&m.rel, &ca, &limits).unwrap(),
                    eval_condition(&m.rel, &cb, &limits).unwrap(),
                    "{a}"
                );
            }
        }
    }

    #[test]
    fn inequality_matches_condition_for_pure_terms() {
        for m in [diamond_prec1(), diamond_prec2()] {
            for src in [
                "a /\\ b <= a",
                "a <= a \\/ b",
                "a /\\ (b \\/ c) <= (a /\\ b) \\/ (a /\\ c)",
                "top <= a \\/ b",
            ] {
                let i = parse_inequality(src).unwrap();
                let c = parse_condition(src).unwrap();
                assert_eq!(
                    eval_inequality(&m, &i),
                    eval_condition(&m.rel, &c, &EvalLimits::default()).unwrap(),
                    "{src}"
                );
            }
        }
    }

    #[test]
    fn depth_limit_counts_blocks() {
        let cond = parse_condition(
            "forall a. forall b. forall c. forall d. forall g. d /\\ g prec b \\/ c & top prec g \\/ a ==> exists e. exists f. exists h. exists i. d <= e \\/ f & e /\\ h prec b & top prec a \\/ h & f /\\ i prec c & top prec a \\/ i",
        )
        .unwrap();
        // Nine variables but only two quantifier blocks.
        let m = diamond_prec1();
        assert!(eval_condition(&m.rel, &cond, &EvalLimits::default()).is_ok());
        assert!(matches!(
            eval_condition(&m.rel, &cond, &EvalLimits { quant_blocks: 1 }),
            Err(EvalError::DepthLimit { depth: 2, limit: 1 })
        ));
    }

    #[test]
    fn scoping_errors() {
        let c = parse_condition("forall a. forall a. a prec a").unwrap();
        assert!(matches!(
            eval_condition(&diamond_prec1().rel, &c, &EvalLimits::default()),
            Err(EvalError::DuplicateVar(_))
        ));
        let c = parse_condition("e prec top ==> exists e. e prec top").unwrap();
        assert!(matches!(
            eval_condition(&diamond_prec1().rel, &c, &EvalLimits::default()),
            Err(EvalError::OutOfScope(_) | EvalError::DuplicateVar(_))
        ));
    }

    #[test]
    fn general_and_fast_paths_agree() {
        let m1 = diamond_prec1();
        let m2 = diamond_prec2();
        for m in [&m1, &m2] {
            for src in [
                "forall a. forall b. a prec b ==> a prec top",
                "forall a. exists b. a prec b",
                "forall a. forall b. forall c. a prec b & b prec c ==> a prec c",
                "forall d. d prec bot ==> d <= bot",
                "exists e. exists f. top <= e \\/ f & e prec f & f prec top",
                "forall a. a <= top",
                "bot prec top",
                "forall a. forall b. a /\\ b prec top ==> exists e. a <= e \\/ b & e prec top",
            ] {
                let c = parse_condition(src).unwrap();
                let lay = layout(&c).unwrap();
                if let Some(s) = to_std_shape(&lay) {
                    let fast = eval_std(&m.rel, &s).is_none();
                    let general = eval_general(&m.rel, &lay).is_none();
                    assert_eq!(fast, general, "{src}");
                }
            }
        }
    }
}
