//! Shape validation for first-order conditions of the invertible (Kracht)
//! form, and the inverse transformation from such conditions back to
//! inequalities.
//!
//! A condition is accepted when its variables admit roles
//!
//! * `v`: parameters that survive into the axiom,
//! * `a`/`b`: variables displayed on the left/right of `<=` and eliminated
//!   by order reflection at the end,
//! * `c`: universally quantified variables introduced through a
//!   restricting inequality in the antecedent,
//! * `d`: existentially quantified variables introduced through a
//!   restricting inequality in the consequent,
//!
//! subject to the shape clauses checked in [`validate_shape`]: admissible
//! restrictor forms (1), legally sourced restricting variables (2),
//! relational body atoms (3), left-only occurrences of `a`-variables and
//! right-only of `b`-variables (4), uniform occurrences of `c`/`d`
//! variables (5) with matching restricting polarity (6), displayability of
//! every non-`v` occurrence (7), exactly one non-`v` occurrence per
//! antecedent atom (8), and at most one `d`-occurrence per consequent atom
//! with meet/join-compatible repetitions (9). Role inference searches all
//! assignments and keeps the first one under which the inversion
//! completes.
//!
//! The paper-facing extension: restricting sides may also be `v`-variables
//! or the constants `bot`/`top`; such bindings are flagged on the result.

use crate::syntax::{CAtom, Condition, Inequality, LTerm, QuantKind, Restrictor, Term};
use crate::trace::RewriteTrace;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Role {
    A,
    B,
    V,
    C,
    D,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::A => "a",
            Role::B => "b",
            Role::V => "v",
            Role::C => "c",
            Role::D => "d",
        };
        write!(f, "{s}")
    }
}

/// Restrictor forms; `z` denotes the restricting side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RForm {
    /// `y prec z`
    Prec,
    /// `z prec y`
    Succ,
    /// `y <= z`
    Leq,
    /// `z <= y`
    Geq,
    /// `z <= y1 \/ y2`
    LeqOr,
    /// `y1 /\ y2 <= z`
    LeqAnd,
    /// `y2 prec y1 \/ z`
    LeqCoimp,
    /// `z /\ y1 prec y2`
    GeqImp,
}

/// One restricted quantifier: its bound variables, form, restricting side,
/// and region.
#[derive(Debug, Clone, Serialize)]
pub struct Binding {
    pub vars: Vec<String>,
    pub form: RForm,
    pub restricting: LTerm,
    pub in_consequent: bool,
    /// True when the restricting side is a `v`-variable or constant.
    pub extended: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeViolation {
    pub clause: u8,
    pub message: String,
}

impl fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {}: {}", self.clause, self.message)
    }
}

/// A validated Kracht-shaped condition, ready for inversion.
#[derive(Debug, Clone)]
pub struct KrachtFormula {
    pub roles: BTreeMap<String, Role>,
    pub bindings: Vec<Binding>,
    /// Some binding uses a `v`-variable or constant as restricting side.
    pub extended_restrictors: bool,
    univs: Vec<String>,
    ante_body: Vec<CAtom>,
    cons_body: Vec<CAtom>,
}

#[derive(Debug, Error)]
pub enum InvertError {
    #[error("inversion stuck on atom `{0}`; this signals a shape-inference bug")]
    Stuck(String),
}

#[derive(Debug, Clone)]
pub struct Inversion {
    pub inequality: Inequality,
    pub trace: RewriteTrace,
}

// ---------------------------------------------------------------------
// Flattening of the input condition.

struct Flat {
    /// Universal variables in order, with the binding index of explicitly
    /// restricted ones.
    univs: Vec<String>,
    exis: Vec<String>,
    forced: BTreeMap<String, Role>,
    bindings: Vec<(Vec<String>, RForm, LTerm, bool)>,
    ante: Vec<CAtom>,
    cons: Vec<CAtom>,
}

fn restrictor_to_form(r: &Restrictor) -> RForm {
    match r {
        Restrictor::Prec(_) => RForm::Prec,
        Restrictor::Succ(_) => RForm::Succ,
        Restrictor::LeqOr(_) => RForm::LeqOr,
        Restrictor::LeqAnd(_) => RForm::LeqAnd,
        Restrictor::LeqCoimp(_) => RForm::LeqCoimp,
        Restrictor::GeqImp(_) => RForm::GeqImp,
    }
}

fn flatten(cond: &Condition) -> Option<Flat> {
    let mut f = Flat {
        univs: cond.free_vars(),
        exis: Vec::new(),
        forced: BTreeMap::new(),
        bindings: Vec::new(),
        ante: Vec::new(),
        cons: Vec::new(),
    };
    let mut seen_exists = false;
    for q in &cond.prefix {
        match q.kind {
            QuantKind::Forall => {
                if seen_exists {
                    return None;
                }
                f.univs.extend(q.vars.iter().cloned());
                if let Some(r) = &q.restr {
                    for v in &q.vars {
                        f.forced.insert(v.clone(), Role::C);
                    }
                    f.bindings.push((
                        q.vars.clone(),
                        restrictor_to_form(r),
                        LTerm::var(r.restricting_var()),
                        false,
                    ));
                }
            }
            QuantKind::Exists => {
                if cond.clause.cons.is_some() {
                    return None;
                }
                seen_exists = true;
                f.exis.extend(q.vars.iter().cloned());
                for v in &q.vars {
                    f.forced.insert(v.clone(), Role::D);
                }
                if let Some(r) = &q.restr {
                    f.bindings.push((
                        q.vars.clone(),
                        restrictor_to_form(r),
                        LTerm::var(r.restricting_var()),
                        true,
                    ));
                }
            }
        }
    }
    match &cond.clause.cons {
        None => {
            if seen_exists {
                f.cons = cond.clause.ante.clone();
            } else {
                f.cons = cond.clause.ante.clone();
            }
        }
        Some((qs, atoms)) => {
            f.ante = cond.clause.ante.clone();
            for q in qs {
                if q.kind != QuantKind::Exists {
                    return None;
                }
                f.exis.extend(q.vars.iter().cloned());
                for v in &q.vars {
                    f.forced.insert(v.clone(), Role::D);
                }
                if let Some(r) = &q.restr {
                    f.bindings.push((
                        q.vars.clone(),
                        restrictor_to_form(r),
                        LTerm::var(r.restricting_var()),
                        true,
                    ));
                }
            }
            f.cons = atoms.clone();
        }
    }
    // Unquantified existential conjunction means everything was consequent.
    if cond.clause.cons.is_none() && !seen_exists {
        f.cons = cond.clause.ante.clone();
    }
    Some(f)
}

// ---------------------------------------------------------------------
// Occurrence utilities.

fn count_var(t: &LTerm, v: &str) -> usize {
    match t {
        LTerm::Var(x) => usize::from(x == v),
        LTerm::Bot | LTerm::Top => 0,
        LTerm::And(a, b) | LTerm::Or(a, b) => count_var(a, v) + count_var(b, v),
    }
}

fn atom_count(a: &CAtom, v: &str) -> (usize, usize) {
    let (s, t) = a.sides();
    (count_var(s, v), count_var(t, v))
}

/// Is every path from the root of `t` to an occurrence of `v` made of the
/// given connective only?
fn path_only(t: &LTerm, v: &str, conj: bool) -> bool {
    match t {
        LTerm::Var(x) => x != v || true,
        LTerm::Bot | LTerm::Top => true,
        LTerm::And(a, b) => {
            if conj {
                path_only(a, v, conj) && path_only(b, v, conj)
            } else {
                count_var(t, v) == 0
            }
        }
        LTerm::Or(a, b) => {
            if !conj {
                path_only(a, v, conj) && path_only(b, v, conj)
            } else {
                count_var(t, v) == 0
            }
        }
    }
}

// ---------------------------------------------------------------------
// Validation.

/// Validates the Kracht shape, inferring variable roles. When `roles`
/// overrides are given, only that assignment is tried.
pub fn validate_shape(
    cond: &Condition,
    roles_override: Option<&BTreeMap<String, Role>>,
) -> Result<KrachtFormula, Vec<ShapeViolation>> {
    let Some(flat) = flatten(cond) else {
        return Err(vec![ShapeViolation {
            clause: 3,
            message: "condition is not of the prenex universal-implication-existential shape"
                .to_string(),
        }]);
    };
    if flat.univs.len() + flat.exis.len() > 10 {
        return Err(vec![ShapeViolation {
            clause: 3,
            message: format!(
                "{} variables exceed the role-inference bound of 10",
                flat.univs.len() + flat.exis.len()
            ),
        }]);
    }

    let open: Vec<String> = flat
        .univs
        .iter()
        .filter(|v| !flat.forced.contains_key(*v))
        .cloned()
        .collect();
    let options = [Role::A, Role::B, Role::V, Role::C];

    let mut best: Option<Vec<ShapeViolation>> = None;
    let mut assignment = vec![0usize; open.len()];
    loop {
        let mut roles: BTreeMap<String, Role> = flat.forced.clone();
        for (i, v) in open.iter().enumerate() {
            roles.insert(v.clone(), options[assignment[i]]);
        }
        match try_assignment(&flat, &roles) {
            Ok(kf) => return Ok(kf),
            Err(vs) => {
                let better = match &best {
                    None => true,
                    Some(b) => vs.len() < b.len(),
                };
                if better {
                    best = Some(vs);
                }
            }
        }
        if roles_override.is_some() {
            break;
        }
        // Next assignment.
        let mut i = 0;
        loop {
            if i == assignment.len() {
                return Err(best.unwrap_or_default());
            }
            assignment[i] += 1;
            if assignment[i] < options.len() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if open.is_empty() {
            return Err(best.unwrap_or_default());
        }
    }
    // Override path: single attempt.
    let mut roles = flat.forced.clone();
    if let Some(over) = roles_override {
        for (k, v) in over {
            roles.insert(k.clone(), *v);
        }
    }
    match try_assignment(&flat, &roles) {
        Ok(kf) => Ok(kf),
        Err(vs) => Err(vs),
    }
}

fn is_const(t: &LTerm) -> bool {
    matches!(t, LTerm::Bot | LTerm::Top)
}

fn try_assignment(
    flat: &Flat,
    roles: &BTreeMap<String, Role>,
) -> Result<KrachtFormula, Vec<ShapeViolation>> {
    let mut violations: Vec<ShapeViolation> = Vec::new();
    let role = |v: &str| roles.get(v).copied().unwrap_or(Role::V);
    let mut bindings: Vec<Binding> = Vec::new();
    let mut extended = false;

    // Explicit bindings from restricted-quantifier syntax.
    for (vars, form, restricting, in_cons) in &flat.bindings {
        bindings.push(Binding {
            vars: vars.clone(),
            form: *form,
            restricting: restricting.clone(),
            in_consequent: *in_cons,
            extended: false,
        });
    }

    // Infer restrictors for C-variables (antecedent) and D-variables
    // (consequent) that lack one; consumed atoms leave the body.
    let mut ante_body = flat.ante.clone();
    let mut cons_body = flat.cons.clone();
    let already_bound: Vec<String> =
        bindings.iter().flat_map(|b| b.vars.iter().cloned()).collect();

    let needs_c: Vec<String> = flat
        .univs
        .iter()
        .filter(|v| role(v) == Role::C && !already_bound.contains(v))
        .cloned()
        .collect();
    let needs_d: Vec<String> = flat
        .exis
        .iter()
        .filter(|v| role(v) == Role::D && !already_bound.contains(v))
        .cloned()
        .collect();

    let mut bound_now: Vec<String> = already_bound.clone();
    for v in &needs_c {
        if bound_now.contains(v) {
            continue;
        }
        match infer_binding(&mut ante_body, v, &bound_now, false) {
            Some(b) => {
                bound_now.extend(b.vars.iter().cloned());
                bindings.push(b);
            }
            None => violations.push(ShapeViolation {
                clause: 1,
                message: format!("no admissible restricting inequality for `{v}`"),
            }),
        }
    }
    for v in &needs_d {
        if bound_now.contains(v) {
            continue;
        }
        match infer_binding(&mut cons_body, v, &bound_now, true) {
            Some(b) => {
                bound_now.extend(b.vars.iter().cloned());
                bindings.push(b);
            }
            None => violations.push(ShapeViolation {
                clause: 1,
                message: format!("no admissible restricting inequality for `{v}`"),
            }),
        }
    }

    // Clause 2: restricting sides must be variables of role a/b (or an
    // earlier c/d), with v-variables and constants as a flagged extension.
    for b in &mut bindings {
        match &b.restricting {
            LTerm::Var(z) => match role(z) {
                Role::A | Role::B => {}
                Role::C | Role::D => {}
                Role::V => {
                    b.extended = true;
                    extended = true;
                }
            },
            t if is_const(t) => {
                b.extended = true;
                extended = true;
            }
            other => violations.push(ShapeViolation {
                clause: 2,
                message: format!("restricting side `{other}` is not a variable or constant"),
            }),
        }
    }

    // Clause 4: a-variables occur only on left sides, b-variables only on
    // right sides, in body atoms and restricting inequalities alike.
    let all_atoms: Vec<CAtom> = ante_body
        .iter()
        .chain(cons_body.iter())
        .cloned()
        .chain(bindings.iter().map(|b| b.guard()))
        .collect();
    for (v, r) in roles {
        if *r != Role::A && *r != Role::B {
            continue;
        }
        for a in &all_atoms {
            let (ls, rs) = atom_count(a, v);
            let bad = if *r == Role::A { rs > 0 } else { ls > 0 };
            if bad {
                violations.push(ShapeViolation {
                    clause: 4,
                    message: format!(
                        "`{v}` ({r}-variable) occurs on the wrong side of `{a}`"
                    ),
                });
            }
        }
    }

    // Clause 5: c-variables occur uniformly in the antecedent body,
    // d-variables in the consequent body.
    for (v, r) in roles {
        let body = match r {
            Role::C => &ante_body,
            Role::D => &cons_body,
            _ => continue,
        };
        let (mut left, mut right) = (0usize, 0usize);
        for a in body {
            let (ls, rs) = atom_count(a, v);
            left += ls;
            right += rs;
        }
        if left > 0 && right > 0 {
            violations.push(ShapeViolation {
                clause: 5,
                message: format!("`{v}` ({r}-variable) occurs on both sides of its body"),
            });
        }
        // Clause 6: restricting occurrences match body polarity.
        for b in &bindings {
            if b.restricting != LTerm::Var(v.clone()) {
                continue;
            }
            let guard = b.guard();
            let (gl, gr) = atom_count(&guard, v);
            let body_left = left > 0;
            let body_right = right > 0;
            if (gl > 0 && body_right) || (gr > 0 && body_left) {
                violations.push(ShapeViolation {
                    clause: 6,
                    message: format!(
                        "restricting occurrence of `{v}` disagrees with its body polarity"
                    ),
                });
            }
        }
    }

    // Clause 7: non-v occurrences in body atoms must be displayable.
    for a in ante_body.iter().chain(cons_body.iter()) {
        let (s, t) = a.sides();
        for v in a.free_vars() {
            if role(&v) == Role::V {
                continue;
            }
            let displayable = match a {
                CAtom::Prec(..) => {
                    (count_var(s, &v) == 0 || path_only(s, &v, true))
                        && (count_var(t, &v) == 0 || path_only(t, &v, false))
                }
                CAtom::Leq(..) => {
                    (count_var(s, &v) == 0 || *s == LTerm::Var(v.clone()))
                        && (count_var(t, &v) == 0 || *t == LTerm::Var(v.clone()))
                }
            };
            if !displayable {
                violations.push(ShapeViolation {
                    clause: 7,
                    message: format!("occurrence of `{v}` in `{a}` is not displayable"),
                });
            }
        }
    }

    // Clause 8: each antecedent body atom contains exactly one occurrence
    // of a non-v variable.
    for a in &ante_body {
        let mut count = 0;
        for v in a.free_vars() {
            if role(&v) != Role::V {
                let (ls, rs) = atom_count(a, &v);
                count += ls + rs;
            }
        }
        if count != 1 {
            violations.push(ShapeViolation {
                clause: 8,
                message: format!(
                    "antecedent atom `{a}` contains {count} non-v occurrences (need exactly 1)"
                ),
            });
        }
    }

    // Clause 9: at most one d-occurrence per consequent atom; repeated
    // occurrences of one a/b-variable must sit under a meet on the left or
    // a join on the right.
    for a in &cons_body {
        let mut dcount = 0;
        for v in a.free_vars() {
            let (ls, rs) = atom_count(a, &v);
            match role(&v) {
                Role::D => dcount += ls + rs,
                Role::A | Role::B => {
                    if ls + rs >= 2 && !(ls == 0 || rs == 0) {
                        violations.push(ShapeViolation {
                            clause: 9,
                            message: format!(
                                "repeated occurrences of `{v}` in `{a}` straddle the relation"
                            ),
                        });
                    }
                }
                _ => {}
            }
        }
        if dcount > 1 {
            violations.push(ShapeViolation {
                clause: 9,
                message: format!("consequent atom `{a}` contains {dcount} d-occurrences"),
            });
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }

    let kf = KrachtFormula {
        roles: roles.clone(),
        bindings,
        extended_restrictors: extended,
        univs: flat.univs.clone(),
        ante_body,
        cons_body,
    };
    // The shape clauses are necessary; completion of the inversion is the
    // sufficient check.
    match run_inversion(&kf) {
        Ok(_) => Ok(kf),
        Err(e) => Err(vec![ShapeViolation {
            clause: 7,
            message: format!("inversion does not complete: {e}"),
        }]),
    }
}

impl Binding {
    /// The restricting inequality as an atom.
    pub fn guard(&self) -> CAtom {
        let y = |i: usize| LTerm::Var(self.vars[i].clone());
        let z = self.restricting.clone();
        match self.form {
            RForm::Prec => CAtom::Prec(y(0), z),
            RForm::Succ => CAtom::Prec(z, y(0)),
            RForm::Leq => CAtom::Leq(y(0), z),
            RForm::Geq => CAtom::Leq(z, y(0)),
            RForm::LeqOr => CAtom::Leq(z, LTerm::or(y(0), y(1))),
            RForm::LeqAnd => CAtom::Leq(LTerm::and(y(0), y(1)), z),
            RForm::LeqCoimp => CAtom::Prec(y(1), LTerm::or(y(0), z)),
            RForm::GeqImp => CAtom::Prec(LTerm::and(z, y(0)), y(1)),
        }
    }
}

/// Reads one body atom as the restricting inequality of `v` (possibly
/// binding a partner variable for the paired forms). The matched atom is
/// removed from the body.
fn infer_binding(
    body: &mut Vec<CAtom>,
    v: &str,
    bound: &[String],
    in_consequent: bool,
) -> Option<Binding> {
    let legal_restricting = |t: &LTerm| matches!(t, LTerm::Var(_)) || is_const(t);
    let var = LTerm::var(v);
    for (i, atom) in body.iter().enumerate() {
        let b = match atom {
            CAtom::Prec(s, t) if *s == var && legal_restricting(t) && count_var(t, v) == 0 => {
                Some(Binding {
                    vars: vec![v.to_string()],
                    form: RForm::Prec,
                    restricting: t.clone(),
                    in_consequent,
                    extended: false,
                })
            }
            CAtom::Prec(s, t) if *t == var && legal_restricting(s) && count_var(s, v) == 0 => {
                Some(Binding {
                    vars: vec![v.to_string()],
                    form: RForm::Succ,
                    restricting: s.clone(),
                    in_consequent,
                    extended: false,
                })
            }
            CAtom::Leq(s, t) if *s == var && legal_restricting(t) && count_var(t, v) == 0 => {
                Some(Binding {
                    vars: vec![v.to_string()],
                    form: RForm::Leq,
                    restricting: t.clone(),
                    in_consequent,
                    extended: false,
                })
            }
            CAtom::Leq(s, t) if *t == var && legal_restricting(s) && count_var(s, v) == 0 => {
                Some(Binding {
                    vars: vec![v.to_string()],
                    form: RForm::Geq,
                    restricting: s.clone(),
                    in_consequent,
                    extended: false,
                })
            }
            CAtom::Leq(z, or) if legal_restricting(z) && count_var(z, v) == 0 => {
                // z <= y1 \/ y2 with v among y1, y2 and a fresh partner.
                if let LTerm::Or(y1, y2) = or {
                    pair_vars(y1, y2, v, bound).map(|vars| Binding {
                        vars,
                        form: RForm::LeqOr,
                        restricting: z.clone(),
                        in_consequent,
                        extended: false,
                    })
                } else {
                    None
                }
            }
            CAtom::Leq(and, z) if legal_restricting(z) && count_var(z, v) == 0 => {
                if let LTerm::And(y1, y2) = and {
                    pair_vars(y1, y2, v, bound).map(|vars| Binding {
                        vars,
                        form: RForm::LeqAnd,
                        restricting: z.clone(),
                        in_consequent,
                        extended: false,
                    })
                } else {
                    None
                }
            }
            CAtom::Prec(y2t, or) => {
                // y2 prec y1 \/ z.
                if let (LTerm::Var(_), LTerm::Or(l, r)) = (y2t, or) {
                    let mut hit = None;
                    for (y1t, zt) in [(l, r), (r, l)] {
                        if legal_restricting(zt) && count_var(zt, v) == 0 {
                            if let (LTerm::Var(y1), LTerm::Var(y2)) = (&**y1t, y2t) {
                                let pair = order_pair(y1, y2, v, bound);
                                if let Some(vars) = pair {
                                    hit = Some(Binding {
                                        vars,
                                        form: RForm::LeqCoimp,
                                        restricting: (**zt).clone(),
                                        in_consequent,
                                        extended: false,
                                    });
                                    break;
                                }
                            }
                        }
                    }
                    hit
                } else {
                    None
                }
            }
            _ => None,
        };
        // z /\ y1 prec y2, tried when nothing else matched.
        let b = b.or_else(|| {
            let CAtom::Prec(and, y2t) = atom else { return None };
            let (LTerm::And(l, r), LTerm::Var(y2)) = (and, y2t) else { return None };
            for (zt, y1t) in [(l, r), (r, l)] {
                if legal_restricting(zt) && count_var(zt, v) == 0 {
                    if let LTerm::Var(y1) = &**y1t {
                        if let Some(vars) = order_pair(y1, y2, v, bound) {
                            return Some(Binding {
                                vars,
                                form: RForm::GeqImp,
                                restricting: (**zt).clone(),
                                in_consequent,
                                extended: false,
                            });
                        }
                    }
                }
            }
            None
        });
        if let Some(b) = b {
            body.remove(i);
            return Some(b);
        }
    }
    None
}

fn pair_vars(y1: &LTerm, y2: &LTerm, v: &str, bound: &[String]) -> Option<Vec<String>> {
    let (LTerm::Var(a), LTerm::Var(b)) = (y1, y2) else { return None };
    order_pair(a, b, v, bound)
}

fn order_pair(a: &str, b: &str, v: &str, bound: &[String]) -> Option<Vec<String>> {
    let a_s = a.to_string();
    let b_s = b.to_string();
    if a == v && !bound.contains(&b_s) && a != b {
        Some(vec![a_s, b_s])
    } else if b == v && !bound.contains(&a_s) && a != b {
        Some(vec![a_s, b_s])
    } else {
        None
    }
}

// ---------------------------------------------------------------------
// Inversion.

/// A displayed inequality: `var <= other` or `other <= var`.
#[derive(Debug, Clone)]
struct Displayed {
    var: String,
    var_left: bool,
    other: Term,
}

struct DState {
    /// Residual inequalities per region (lhs, rhs).
    ante: Vec<(Term, Term)>,
    cons: Vec<(Term, Term)>,
    displayed_ante: Vec<Displayed>,
    displayed_cons: Vec<Displayed>,
}

impl DState {
    fn render(&self) -> String {
        let side = |v: &[(Term, Term)], d: &[Displayed]| -> String {
            let mut parts: Vec<String> = Vec::new();
            for x in d {
                if x.var_left {
                    parts.push(format!("{} <= {}", x.var, x.other));
                } else {
                    parts.push(format!("{} <= {}", x.other, x.var));
                }
            }
            for (l, r) in v {
                parts.push(format!("{l} <= {r}"));
            }
            parts.join(" & ")
        };
        let a = side(&self.ante, &self.displayed_ante);
        let c = side(&self.cons, &self.displayed_cons);
        if a.is_empty() {
            c
        } else {
            format!("{a} ==> {c}")
        }
    }
}

fn flat_and(t: &LTerm) -> Vec<LTerm> {
    match t {
        LTerm::And(a, b) => {
            let mut v = flat_and(a);
            v.extend(flat_and(b));
            v
        }
        _ => vec![t.clone()],
    }
}

fn flat_or(t: &LTerm) -> Vec<LTerm> {
    match t {
        LTerm::Or(a, b) => {
            let mut v = flat_or(a);
            v.extend(flat_or(b));
            v
        }
        _ => vec![t.clone()],
    }
}

fn meet_of(parts: Vec<LTerm>) -> Term {
    let mut it = parts.into_iter().map(|t| t.to_term());
    match it.next() {
        None => Term::Top,
        Some(first) => it.fold(first, Term::and),
    }
}

fn join_of(parts: Vec<LTerm>) -> Term {
    let mut it = parts.into_iter().map(|t| t.to_term());
    match it.next() {
        None => Term::Bot,
        Some(first) => it.fold(first, Term::or),
    }
}

/// Displays the designated variable of an atom on one side of a term
/// inequality, directing `prec` atoms through `->` when the variable sits
/// on the left and through `>-` when it sits on the right.
fn display_atom(atom: &CAtom, v: &str) -> Result<Displayed, InvertError> {
    let (s, t) = atom.sides();
    let (in_s, in_t) = atom_count(atom, v);
    match atom {
        CAtom::Prec(..) => {
            if in_s == 1 && in_t == 0 && path_only(s, v, true) {
                let rest: Vec<LTerm> =
                    flat_and(s).into_iter().filter(|p| *p != LTerm::var(v)).collect();
                Ok(Displayed {
                    var: v.to_string(),
                    var_left: true,
                    other: Term::imp(meet_of(rest), t.to_term()),
                })
            } else if in_t == 1 && in_s == 0 && path_only(t, v, false) {
                let rest: Vec<LTerm> =
                    flat_or(t).into_iter().filter(|p| *p != LTerm::var(v)).collect();
                Ok(Displayed {
                    var: v.to_string(),
                    var_left: false,
                    other: Term::coimp(join_of(rest), s.to_term()),
                })
            } else {
                Err(InvertError::Stuck(atom.to_string()))
            }
        }
        CAtom::Leq(..) => {
            if *s == LTerm::var(v) && in_t == 0 {
                Ok(Displayed { var: v.to_string(), var_left: true, other: t.to_term() })
            } else if *t == LTerm::var(v) && in_s == 0 {
                Ok(Displayed { var: v.to_string(), var_left: false, other: s.to_term() })
            } else {
                Err(InvertError::Stuck(atom.to_string()))
            }
        }
    }
}

fn run_inversion(kf: &KrachtFormula) -> Result<Inversion, InvertError> {
    let mut trace = RewriteTrace::default();
    let role = |v: &str| kf.roles.get(v).copied().unwrap_or(Role::V);

    // Stage 1: display every body atom on its designated variable.
    let mut state = DState {
        ante: Vec::new(),
        cons: Vec::new(),
        displayed_ante: Vec::new(),
        displayed_cons: Vec::new(),
    };
    let initial = {
        let parts: Vec<String> = kf
            .bindings
            .iter()
            .map(|b| b.guard().to_string())
            .chain(kf.ante_body.iter().map(|a| a.to_string()))
            .collect();
        let cons: Vec<String> = kf.cons_body.iter().map(|a| a.to_string()).collect();
        format!("{} ==> {}", parts.join(" & "), cons.join(" & "))
    };
    let mut last = initial.clone();

    for (region_cons, atoms) in [(false, &kf.ante_body), (true, &kf.cons_body)] {
        for atom in atoms.iter() {
            let nonv: Vec<String> = atom
                .free_vars()
                .into_iter()
                .filter(|v| role(v) != Role::V)
                .collect();
            let designated = match nonv.len() {
                0 => None,
                1 => Some(nonv[0].clone()),
                _ => {
                    // Several displayable variables in one consequent atom;
                    // prefer the d-variable.
                    nonv.iter().find(|v| role(v) == Role::D).cloned()
                }
            };
            match designated {
                None => {
                    // Pure atom: read it directly as an inequality.
                    let (s, t) = atom.sides();
                    let ineq = match atom {
                        CAtom::Leq(..) => (s.to_term(), t.to_term()),
                        CAtom::Prec(..) => {
                            (s.to_term(), Term::imp(Term::Top, t.to_term()))
                        }
                    };
                    if region_cons {
                        state.cons.push(ineq);
                    } else {
                        state.ante.push(ineq);
                    }
                }
                Some(v) => {
                    let d = display_atom(atom, &v)?;
                    if region_cons {
                        state.displayed_cons.push(d);
                    } else {
                        state.displayed_ante.push(d);
                    }
                }
            }
            let now = state.render();
            trace.record("display", "residuation", last.clone(), now.clone());
            last = now;
        }
    }

    // Stage 2: merge restricted variables, innermost first.
    for b in kf.bindings.iter().rev() {
        let before = state.render();
        merge_binding(&mut state, b, &role)?;
        let now = state.render();
        trace.record("merge-restrictor", "compactness", before, now.clone());
        last = now;
    }

    // Stage 3: combine multiple displays of one variable.
    for region_cons in [false, true] {
        let displayed = if region_cons { &mut state.displayed_cons } else { &mut state.displayed_ante };
        let mut combined: Vec<Displayed> = Vec::new();
        for d in displayed.drain(..) {
            match combined.iter_mut().find(|c| c.var == d.var && c.var_left == d.var_left) {
                Some(c) => {
                    c.other = if d.var_left {
                        Term::and(c.other.clone(), d.other)
                    } else {
                        Term::or(c.other.clone(), d.other)
                    };
                }
                None => combined.push(d),
            }
        }
        *displayed = combined;
    }
    let now = state.render();
    if now != last {
        trace.record("merge-variable", "meet/join of bounds", last.clone(), now.clone());
        last = now;
    }

    // Stage 4: final elimination.
    let ineq = match (
        state.displayed_ante.as_slice(),
        state.ante.as_slice(),
        state.displayed_cons.as_slice(),
        state.cons.as_slice(),
    ) {
        ([], [], [], [(l, r)]) => Inequality::new(l.clone(), r.clone()),
        ([da], [], [dc], []) if da.var == dc.var && da.var_left && dc.var_left => {
            Inequality::new(da.other.clone(), dc.other.clone())
        }
        ([da], [], [dc], []) if da.var == dc.var && !da.var_left && !dc.var_left => {
            Inequality::new(dc.other.clone(), da.other.clone())
        }
        _ => return Err(InvertError::Stuck(state.render())),
    };
    trace.record("eliminate", "order reflection", last, ineq.to_string());
    Ok(Inversion { inequality: ineq, trace })
}

/// Merges one restricted variable (or pair) into the restricting
/// inequality, replacing bound variables by their displayed bounds.
fn merge_binding(
    state: &mut DState,
    b: &Binding,
    role: &dyn Fn(&str) -> Role,
) -> Result<(), InvertError> {
    let region = if b.in_consequent { &mut state.displayed_cons } else { &mut state.displayed_ante };
    // Pull out and combine the displays of a bound variable; `want_left`
    // is the side the merge rule needs.
    let mut take = |region: &mut Vec<Displayed>, v: &str, want_left: bool| -> Option<Term> {
        let mut acc: Option<Term> = None;
        let mut i = 0;
        while i < region.len() {
            if region[i].var == v && region[i].var_left == want_left {
                let d = region.remove(i);
                acc = Some(match acc {
                    None => d.other,
                    Some(prev) => {
                        if want_left {
                            Term::and(prev, d.other)
                        } else {
                            Term::or(prev, d.other)
                        }
                    }
                });
            } else {
                i += 1;
            }
        }
        acc
    };
    let z = b.restricting.to_term();
    let result: (Term, Term) = match b.form {
        RForm::Succ => {
            // z prec y, y <= B  ~>  z <= top -> B
            let bb = take(region, &b.vars[0], true).unwrap_or(Term::Top);
            (z, Term::imp(Term::Top, bb))
        }
        RForm::Prec => {
            // y prec z, B <= y  ~>  (bot >- B) <= z
            let bb = take(region, &b.vars[0], false).unwrap_or(Term::Bot);
            (Term::coimp(Term::Bot, bb), z)
        }
        RForm::Leq => {
            let bb = take(region, &b.vars[0], false).unwrap_or(Term::Bot);
            (bb, z)
        }
        RForm::Geq => {
            let bb = take(region, &b.vars[0], true).unwrap_or(Term::Top);
            (z, bb)
        }
        RForm::LeqOr => {
            // z <= y1 \/ y2, y_i <= B_i  ~>  z <= B1 \/ B2
            let b1 = take(region, &b.vars[0], true).unwrap_or(Term::Top);
            let b2 = take(region, &b.vars[1], true).unwrap_or(Term::Top);
            (z, Term::or(b1, b2))
        }
        RForm::LeqAnd => {
            let b1 = take(region, &b.vars[0], false).unwrap_or(Term::Bot);
            let b2 = take(region, &b.vars[1], false).unwrap_or(Term::Bot);
            (Term::and(b1, b2), z)
        }
        RForm::LeqCoimp => {
            // y1 >- y2 <= z, y1 <= B1, B2 <= y2  ~>  B1 >- B2 <= z
            let b1 = take(region, &b.vars[0], true).unwrap_or(Term::Top);
            let b2 = take(region, &b.vars[1], false).unwrap_or(Term::Bot);
            (Term::coimp(b1, b2), z)
        }
        RForm::GeqImp => {
            // z <= y1 -> y2, B1 <= y1, y2 <= B2  ~>  z <= B1 -> B2
            let b1 = take(region, &b.vars[0], false).unwrap_or(Term::Bot);
            let b2 = take(region, &b.vars[1], true).unwrap_or(Term::Top);
            (z, Term::imp(b1, b2))
        }
    };
    // Route the result: it displays the restricting variable when that
    // variable is eliminable, otherwise it is a residual inequality.
    let (lhs, rhs) = result;
    let routed = match &b.restricting {
        LTerm::Var(zv) if matches!(role(zv), Role::A | Role::B | Role::C | Role::D) => {
            let var_left = lhs == Term::var(zv);
            Some(Displayed {
                var: zv.clone(),
                var_left,
                other: if var_left { rhs.clone() } else { lhs.clone() },
            })
        }
        _ => None,
    };
    match routed {
        Some(d) => {
            // A restricting c/d-variable belongs to the region where it is
            // bound; a/b-variables display in the same region as the
            // binding.
            let dest = match role(&d.var) {
                Role::C => &mut state.displayed_ante,
                Role::D => &mut state.displayed_cons,
                _ => {
                    if b.in_consequent {
                        &mut state.displayed_cons
                    } else {
                        &mut state.displayed_ante
                    }
                }
            };
            dest.push(d);
        }
        None => {
            let dest = if b.in_consequent { &mut state.cons } else { &mut state.ante };
            dest.push((lhs, rhs));
        }
    }
    Ok(())
}

/// Inverts a validated Kracht formula into an inequality.
pub fn invert(kf: &KrachtFormula) -> Result<Inversion, InvertError> {
    run_inversion(kf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_condition, parse_inequality};

    fn validate(src: &str) -> Result<KrachtFormula, Vec<ShapeViolation>> {
        validate_shape(&parse_condition(src).unwrap(), None)
    }

    #[test]
    fn distributivity_condition_is_kracht_and_inverts_exactly() {
        let kf = validate(
            "forall a. forall b. forall c. forall d. d /\\ a prec b \\/ c ==> exists e. exists f. d <= e \\/ f & e /\\ a prec b & a /\\ f prec c",
        )
        .unwrap();
        assert_eq!(kf.roles["d"], Role::A);
        assert_eq!(kf.roles["e"], Role::D);
        assert_eq!(kf.roles["f"], Role::D);
        assert_eq!(kf.roles["a"], Role::V);
        assert_eq!(kf.roles["b"], Role::V);
        assert_eq!(kf.roles["c"], Role::V);
        let inv = invert(&kf).unwrap();
        let want = parse_inequality(r"a -> (b \/ c) <= (a -> b) \/ (a -> c)").unwrap();
        assert_eq!(
            Inequality::new(inv.inequality.lhs.ac_normal(), inv.inequality.rhs.ac_normal()),
            Inequality::new(want.lhs.ac_normal(), want.rhs.ac_normal()),
            "got {}",
            inv.inequality
        );
    }

    #[test]
    fn transitivity_condition_inverts_to_its_axiom() {
        let kf = validate("forall a. forall b. forall c. a prec b & b prec c ==> a prec c")
            .unwrap();
        assert_eq!(kf.roles["a"], Role::A);
        assert_eq!(kf.roles["b"], Role::C);
        assert_eq!(kf.roles["c"], Role::V);
        let inv = invert(&kf).unwrap();
        let want = parse_inequality("top -> (top -> c) <= top -> c").unwrap();
        assert_eq!(inv.inequality, want, "got {}", inv.inequality);
    }

    #[test]
    fn cumulative_transitivity_condition_inverts_to_its_axiom() {
        let kf = validate(
            "forall a. forall b. forall c. a prec b & a /\\ b prec c ==> a prec c",
        )
        .unwrap();
        assert_eq!(kf.roles["a"], Role::A);
        assert_eq!(kf.roles["b"], Role::V);
        assert_eq!(kf.roles["c"], Role::V);
        let inv = invert(&kf).unwrap();
        let want = parse_inequality(r"(top -> b) /\ (b -> c) <= top -> c").unwrap();
        assert_eq!(inv.inequality, want, "got {}", inv.inequality);
    }

    #[test]
    fn clause_eight_violation_is_reported() {
        // Two restricted universal variables forced non-v share one
        // antecedent atom.
        let err = validate(
            "forall x succ w. forall y succ w. x /\\ y prec v ==> w prec v",
        )
        .unwrap_err();
        assert!(err.iter().any(|v| v.clause == 8), "{err:?}");
    }

    #[test]
    fn clause_seven_violation_is_reported() {
        // x under a meet on the left of <= is not displayable in this
        // signature.
        let err = validate("forall x succ w. x /\\ v <= u ==> w prec u").unwrap_err();
        assert!(err.iter().any(|v| v.clause == 7), "{err:?}");
    }

    #[test]
    fn dichotomy_condition_validates_with_extension() {
        let kf = validate(
            "forall a. forall b. exists e. exists f. top <= e \\/ f & a /\\ e prec b & b /\\ f prec a",
        )
        .unwrap();
        assert!(kf.extended_restrictors);
        let inv = invert(&kf).unwrap();
        let want = parse_inequality(r"top <= (a -> b) \/ (b -> a)").unwrap();
        assert_eq!(inv.inequality, want, "got {}", inv.inequality);
    }

    #[test]
    fn explicit_restricted_syntax_is_honored() {
        let kf = validate("forall b succ a. b prec c ==> a prec c").unwrap();
        assert_eq!(kf.roles["b"], Role::C);
        let inv = invert(&kf).unwrap();
        assert_eq!(inv.inequality, parse_inequality("top -> (top -> c) <= top -> c").unwrap());
    }

    #[test]
    fn role_override_is_respected() {
        let mut over = BTreeMap::new();
        over.insert("a".to_string(), Role::V);
        over.insert("b".to_string(), Role::V);
        over.insert("c".to_string(), Role::V);
        let cond = parse_condition("forall a. forall b. forall c. a prec b & b prec c ==> a prec c")
            .unwrap();
        // All-v roles leave two unmergeable antecedent atoms.
        assert!(validate_shape(&cond, Some(&over)).is_err());
    }

    #[test]
    fn negated_top_condition_inverts() {
        let kf = validate("forall a. a prec bot ==> a <= bot").unwrap();
        let inv = invert(&kf).unwrap();
        assert_eq!(inv.inequality, parse_inequality("top -> bot <= bot").unwrap());
    }

    #[test]
    fn inversion_traces_replay() {
        let kf = validate(
            "forall a. forall b. forall c. forall d. d /\\ a prec b \\/ c ==> exists e. exists f. d <= e \\/ f & e /\\ a prec b & a /\\ f prec c",
        )
        .unwrap();
        let inv1 = invert(&kf).unwrap();
        let inv2 = invert(&kf).unwrap();
        assert_eq!(inv1.trace, inv2.trace);
        let start = inv1.trace.steps[0].before.clone();
        assert!(inv1.trace.replay(&start).is_ok());
    }
}
