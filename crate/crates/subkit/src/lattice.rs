//! Finite distributive lattices presented, via Birkhoff duality, as the
//! lattices of downsets of a poset of join-irreducibles, together with
//! sublattice embeddings and the closed/open-element checks used by the
//! rest of the crate.
//!
//! Elements are downset bit vectors over the base poset; an element is
//! addressed everywhere by its index in the canonical (ascending mask)
//! enumeration, so equality is index equality.

use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// Index of a lattice element in the canonical enumeration.
pub type ElemId = usize;

/// Default cap on join-irreducibles (lattice of at most 2^6 elements).
pub const DEFAULT_IRREDUCIBLE_CAP: usize = 6;

/// Hard ceiling on join-irreducibles regardless of the configured cap.
pub const MAX_IRREDUCIBLES: usize = 16;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("poset has {0} elements, exceeding the irreducible cap {1}")]
    TooManyIrreducibles(usize, usize),
    #[error("duplicate poset element `{0}`")]
    DuplicateName(String),
    #[error("unknown poset element `{0}`")]
    UnknownName(String),
    #[error("order is not antisymmetric: `{0}` <= `{1}` and `{1}` <= `{0}`")]
    NotAntisymmetric(String, String),
    #[error("order is not transitive: `{0}` <= `{1}` <= `{2}` but `{0}` <= `{2}` is missing")]
    NotTransitive(String, String, String),
    #[error("element index {0} out of range ({1} elements)")]
    BadIndex(usize, usize),
    #[error("`{0:?}` is not a downset of the base poset")]
    NotADownset(Vec<String>),
    #[error("embedding maps different elements {0} and {1} to the same image")]
    NotInjective(ElemId, ElemId),
    #[error("embedding does not preserve {what}: witness elements ({x}, {y})")]
    NotHomomorphism { what: &'static str, x: ElemId, y: ElemId },
    #[error("embedding image must lie in the ambient lattice: {0} out of range")]
    BadImage(usize),
    #[error("embedding map has {got} entries, sublattice has {want} elements")]
    MapSizeMismatch { got: usize, want: usize },
}

/// JSON form of a poset: `{"elements": ["p","q"], "leq": [["p","q"]]}`.
/// Reflexive pairs may be omitted; the constructor closes reflexively and
/// validates transitivity and antisymmetry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosetSpec {
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
}

/// A finite poset of named join-irreducibles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    names: Vec<String>,
    /// `up[i]` has bit `j` set iff `i <= j` (reflexive).
    up: Vec<u64>,
}

impl Poset {
    /// Builds a poset from named elements and a list of `x <= y` pairs.
    /// The relation is closed reflexively; transitivity and antisymmetry
    /// are validated, not repaired.
    pub fn new<S: AsRef<str>>(names: &[S], pairs: &[(S, S)]) -> Result<Self, LatticeError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if names.len() > 64 {
            return Err(LatticeError::TooManyIrreducibles(names.len(), 64));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(LatticeError::DuplicateName(n.clone()));
            }
        }
        let index = |n: &str| -> Result<usize, LatticeError> {
            names
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| LatticeError::UnknownName(n.to_string()))
        };
        let mut up = vec![0u64; names.len()];
        for (i, u) in up.iter_mut().enumerate() {
            *u = 1 << i;
        }
        for (a, b) in pairs {
            let i = index(a.as_ref())?;
            let j = index(b.as_ref())?;
            up[i] |= 1 << j;
        }
        let p = Poset { names, up };
        p.validate()?;
        Ok(p)
    }

    pub fn from_spec(spec: &PosetSpec) -> Result<Self, LatticeError> {
        let pairs: Vec<(&str, &str)> = spec
            .leq
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let names: Vec<&str> = spec.elements.iter().map(|s| s.as_str()).collect();
        Poset::new(&names, &pairs)
    }

    /// A chain `names[0] < names[1] < ...`.
    pub fn chain<S: AsRef<str>>(names: &[S]) -> Self {
        let mut pairs = Vec::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                pairs.push((names[i].as_ref(), names[j].as_ref()));
            }
        }
        let names: Vec<&str> = names.iter().map(|s| s.as_ref()).collect();
        Poset::new(&names, &pairs).expect("chain is a valid poset")
    }

    /// A discrete poset (no order besides reflexivity).
    pub fn antichain<S: AsRef<str>>(names: &[S]) -> Self {
        let names: Vec<&str> = names.iter().map(|s| s.as_ref()).collect();
        Poset::new(&names, &[]).expect("antichain is a valid poset")
    }

    fn validate(&self) -> Result<(), LatticeError> {
        let n = self.names.len();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.leq(i, j) && self.leq(j, i) {
                    return Err(LatticeError::NotAntisymmetric(
                        self.names[i].clone(),
                        self.names[j].clone(),
                    ));
                }
                if self.leq(i, j) && self.up[j] & !self.up[i] != 0 {
                    let k = (self.up[j] & !self.up[i]).trailing_zeros() as usize;
                    return Err(LatticeError::NotTransitive(
                        self.names[i].clone(),
                        self.names[j].clone(),
                        self.names[k].clone(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up[i] & (1 << j) != 0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Mask of elements `j <= i` (the principal downset of `i`).
    pub fn down_mask(&self, i: usize) -> u64 {
        let mut m = 0u64;
        for j in 0..self.names.len() {
            if self.leq(j, i) {
                m |= 1 << j;
            }
        }
        m
    }

    pub fn to_spec(&self) -> PosetSpec {
        let mut leq = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != j && self.leq(i, j) {
                    leq.push((self.names[i].clone(), self.names[j].clone()));
                }
            }
        }
        PosetSpec { elements: self.names.clone(), leq }
    }
}

/// The lattice of all downsets of a poset, ordered by inclusion.
///
/// `elems` is the full downset enumeration in ascending mask order, so the
/// element ids are stable and `bot == 0`, `top == elems.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    poset: Poset,
    elems: Vec<u64>,
    meet_tab: Vec<u32>,
    join_tab: Vec<u32>,
    /// For lattices of at most 64 elements: `elem_up[x]` is the mask of
    /// element ids `y` with `x <= y`, and dually for `elem_down`.
    elem_up: Vec<u64>,
    elem_down: Vec<u64>,
}

/// Builds the downset lattice of `p` under the default irreducible cap.
pub fn downset_lattice(p: &Poset) -> Result<Lattice, LatticeError> {
    downset_lattice_capped(p, DEFAULT_IRREDUCIBLE_CAP)
}

/// Builds the downset lattice of `p`, rejecting posets with more than
/// `cap` elements (and anything beyond [`MAX_IRREDUCIBLES`]).
pub fn downset_lattice_capped(p: &Poset, cap: usize) -> Result<Lattice, LatticeError> {
    let cap = cap.min(MAX_IRREDUCIBLES);
    if p.len() > cap {
        return Err(LatticeError::TooManyIrreducibles(p.len(), cap));
    }
    let n = p.len();
    let downs: Vec<u64> = (0..n).map(|i| p.down_mask(i)).collect();
    let mut elems = Vec::new();
    for mask in 0u64..(1 << n) {
        let mut ok = true;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            if downs[i] & !mask != 0 {
                ok = false;
                break;
            }
            m &= m - 1;
        }
        if ok {
            elems.push(mask);
        }
    }
    let k = elems.len();
    let idx = |mask: u64, elems: &[u64]| -> u32 {
        elems.binary_search(&mask).expect("downsets are closed under meet/join") as u32
    };
    let mut meet_tab = vec![0u32; k * k];
    let mut join_tab = vec![0u32; k * k];
    for x in 0..k {
        for y in 0..k {
            meet_tab[x * k + y] = idx(elems[x] & elems[y], &elems);
            join_tab[x * k + y] = idx(elems[x] | elems[y], &elems);
        }
    }
    let (mut elem_up, mut elem_down) = (Vec::new(), Vec::new());
    if k <= 64 {
        elem_up = vec![0u64; k];
        elem_down = vec![0u64; k];
        for x in 0..k {
            for y in 0..k {
                if elems[x] & !elems[y] == 0 {
                    elem_up[x] |= 1 << y;
                    elem_down[y] |= 1 << x;
                }
            }
        }
    }
    Ok(Lattice { poset: p.clone(), elems, meet_tab, join_tab, elem_up, elem_down })
}

impl Lattice {
    pub fn base(&self) -> &Poset {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bot(&self) -> ElemId {
        0
    }

    pub fn top(&self) -> ElemId {
        self.elems.len() - 1
    }

    pub fn check_index(&self, x: ElemId) -> Result<(), LatticeError> {
        if x < self.elems.len() {
            Ok(())
        } else {
            Err(LatticeError::BadIndex(x, self.elems.len()))
        }
    }

    pub fn meet(&self, x: ElemId, y: ElemId) -> ElemId {
        self.meet_tab[x * self.elems.len() + y] as ElemId
    }

    pub fn join(&self, x: ElemId, y: ElemId) -> ElemId {
        self.join_tab[x * self.elems.len() + y] as ElemId
    }

    pub fn leq(&self, x: ElemId, y: ElemId) -> bool {
        self.elems[x] & !self.elems[y] == 0
    }

    /// Meet of an arbitrary element set; the empty meet is `top`.
    pub fn meet_all<I: IntoIterator<Item = ElemId>>(&self, xs: I) -> ElemId {
        let mut acc = (1u64 << self.poset.len()) - 1;
        if self.poset.is_empty() {
            acc = 0;
        }
        for x in xs {
            acc &= self.elems[x];
        }
        self.index_of_mask(acc).expect("meets stay in the lattice")
    }

    /// Join of an arbitrary element set; the empty join is `bot`.
    pub fn join_all<I: IntoIterator<Item = ElemId>>(&self, xs: I) -> ElemId {
        let mut acc = 0u64;
        for x in xs {
            acc |= self.elems[x];
        }
        self.index_of_mask(acc).expect("joins stay in the lattice")
    }

    pub fn elem_mask(&self, x: ElemId) -> u64 {
        self.elems[x]
    }

    pub fn index_of_mask(&self, mask: u64) -> Option<ElemId> {
        self.elems.binary_search(&mask).ok()
    }

    /// Mask (over element ids) of all `y >= x`. Only for lattices of at
    /// most 64 elements.
    pub fn up_mask(&self, x: ElemId) -> u64 {
        self.elem_up[x]
    }

    /// Mask (over element ids) of all `y <= x`.
    pub fn down_mask(&self, x: ElemId) -> u64 {
        self.elem_down[x]
    }

    pub fn has_elem_masks(&self) -> bool {
        !self.elem_up.is_empty()
    }

    /// The canonical serialization of an element: the sorted list of
    /// irreducible names in its downset.
    pub fn element_names(&self, x: ElemId) -> Vec<String> {
        let mut out = Vec::new();
        let mut m = self.elems[x];
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out.push(self.poset.name(i).to_string());
            m &= m - 1;
        }
        out.sort();
        out
    }

    /// Parses an element given as a list of irreducible names; the set must
    /// be a downset of the base poset.
    pub fn parse_element<S: AsRef<str>>(&self, names: &[S]) -> Result<ElemId, LatticeError> {
        let mut mask = 0u64;
        for n in names {
            let i = self
                .poset
                .index_of(n.as_ref())
                .ok_or_else(|| LatticeError::UnknownName(n.as_ref().to_string()))?;
            mask |= 1 << i;
        }
        self.index_of_mask(mask).ok_or_else(|| {
            LatticeError::NotADownset(names.iter().map(|s| s.as_ref().to_string()).collect())
        })
    }

    /// The principal downset of a single irreducible, as an element.
    pub fn principal(&self, name: &str) -> Result<ElemId, LatticeError> {
        let i = self
            .poset
            .index_of(name)
            .ok_or_else(|| LatticeError::UnknownName(name.to_string()))?;
        Ok(self
            .index_of_mask(self.poset.down_mask(i))
            .expect("principal downsets are downsets"))
    }
}

/// An injective bounded-lattice homomorphism from `sub` into `ambient`.
#[derive(Debug, Clone)]
pub struct LatticeEmbedding {
    sub: Arc<Lattice>,
    ambient: Arc<Lattice>,
    map: Vec<ElemId>,
}

/// Result of one item of the canonical-extension property report.
#[derive(Debug, Clone, Serialize)]
pub struct PropCheck {
    pub name: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
}

/// Report of the closed/open-element facts on an embedding. When the
/// density/compactness precondition fails, `diagnostic` is set and no
/// property items are run.
#[derive(Debug, Clone, Serialize)]
pub struct CanextReport {
    pub diagnostic: Option<String>,
    pub checks: Vec<PropCheck>,
}

impl CanextReport {
    pub fn all_pass(&self) -> bool {
        self.diagnostic.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

impl LatticeEmbedding {
    pub fn new(
        sub: Arc<Lattice>,
        ambient: Arc<Lattice>,
        map: Vec<ElemId>,
    ) -> Result<Self, LatticeError> {
        if map.len() != sub.len() {
            return Err(LatticeError::MapSizeMismatch { got: map.len(), want: sub.len() });
        }
        for &img in &map {
            if img >= ambient.len() {
                return Err(LatticeError::BadImage(img));
            }
        }
        for x in 0..sub.len() {
            for y in 0..sub.len() {
                if x != y && map[x] == map[y] {
                    return Err(LatticeError::NotInjective(x, y));
                }
            }
        }
        for x in 0..sub.len() {
            for y in 0..sub.len() {
                if map[sub.meet(x, y)] != ambient.meet(map[x], map[y]) {
                    return Err(LatticeError::NotHomomorphism { what: "meets", x, y });
                }
                if map[sub.join(x, y)] != ambient.join(map[x], map[y]) {
                    return Err(LatticeError::NotHomomorphism { what: "joins", x, y });
                }
            }
        }
        if map[sub.bot()] != ambient.bot() {
            return Err(LatticeError::NotHomomorphism { what: "bottom", x: sub.bot(), y: 0 });
        }
        if map[sub.top()] != ambient.top() {
            return Err(LatticeError::NotHomomorphism { what: "top", x: sub.top(), y: 0 });
        }
        Ok(LatticeEmbedding { sub, ambient, map })
    }

    pub fn identity(l: &Arc<Lattice>) -> Self {
        LatticeEmbedding {
            sub: Arc::clone(l),
            ambient: Arc::clone(l),
            map: (0..l.len()).collect(),
        }
    }

    pub fn sub(&self) -> &Arc<Lattice> {
        &self.sub
    }

    pub fn ambient(&self) -> &Arc<Lattice> {
        &self.ambient
    }

    pub fn image(&self) -> Vec<ElemId> {
        let mut v = self.map.clone();
        v.sort_unstable();
        v
    }

    /// Ambient elements expressible as meets of non-empty subsets of the
    /// image. Computed by closing the image under binary meets.
    pub fn closed_elements(&self) -> Vec<ElemId> {
        self.close_under(|a, b| self.ambient.meet(a, b))
    }

    /// Ambient elements expressible as joins of non-empty subsets of the
    /// image.
    pub fn open_elements(&self) -> Vec<ElemId> {
        self.close_under(|a, b| self.ambient.join(a, b))
    }

    fn close_under(&self, op: impl Fn(ElemId, ElemId) -> ElemId) -> Vec<ElemId> {
        let mut set: Vec<bool> = vec![false; self.ambient.len()];
        for &x in &self.map {
            set[x] = true;
        }
        loop {
            let cur: Vec<ElemId> =
                set.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect();
            let mut grew = false;
            for &a in &cur {
                for &b in &cur {
                    let c = op(a, b);
                    if !set[c] {
                        set[c] = true;
                        grew = true;
                    }
                }
            }
            if !grew {
                return cur;
            }
        }
    }

    /// Density: every ambient element is a join of closed elements and a
    /// meet of open elements.
    pub fn is_dense(&self) -> bool {
        self.density_failure().is_none()
    }

    fn density_failure(&self) -> Option<ElemId> {
        let closed = self.closed_elements();
        let open = self.open_elements();
        for u in 0..self.ambient.len() {
            let j = self.ambient.join_all(closed.iter().copied().filter(|&k| self.ambient.leq(k, u)));
            let m = self.ambient.meet_all(open.iter().copied().filter(|&o| self.ambient.leq(u, o)));
            if j != u || m != u {
                return Some(u);
            }
        }
        None
    }

    /// Compactness: whenever a meet of image elements lies below a join of
    /// image elements, finite sub-witnesses exist. Checked by constructing,
    /// for each closed `k` and open `o` with `k <= o`, the canonical finite
    /// witness sets and re-verifying the inequality through them.
    pub fn is_compact(&self) -> bool {
        let image = self.image();
        let closed = self.closed_elements();
        let open = self.open_elements();
        for &k in &closed {
            let above: Vec<ElemId> =
                image.iter().copied().filter(|&a| self.ambient.leq(k, a)).collect();
            if self.ambient.meet_all(above.iter().copied()) != k {
                return false;
            }
            for &o in &open {
                if !self.ambient.leq(k, o) {
                    continue;
                }
                let below: Vec<ElemId> =
                    image.iter().copied().filter(|&a| self.ambient.leq(a, o)).collect();
                let finite_meet = self.ambient.meet_all(above.iter().copied());
                let finite_join = self.ambient.join_all(below.iter().copied());
                if !self.ambient.leq(finite_meet, finite_join) {
                    return false;
                }
            }
        }
        true
    }

    /// Runs the closed/open-element property checks by exhaustive
    /// enumeration over the ambient lattice. Requires density and
    /// compactness; a violated precondition is reported as a diagnostic
    /// rather than as property failures.
    pub fn check_canext_props(&self) -> CanextReport {
        if let Some(u) = self.density_failure() {
            return CanextReport {
                diagnostic: Some(format!(
                    "embedding is not dense: element {:?} is not recovered from closed/open elements",
                    self.ambient.element_names(u)
                )),
                checks: Vec::new(),
            };
        }
        if !self.is_compact() {
            return CanextReport {
                diagnostic: Some("embedding is not compact".to_string()),
                checks: Vec::new(),
            };
        }

        let amb = &self.ambient;
        let image = self.image();
        let closed = self.closed_elements();
        let open = self.open_elements();
        let in_closed: Vec<bool> = {
            let mut v = vec![false; amb.len()];
            closed.iter().for_each(|&k| v[k] = true);
            v
        };
        let in_open: Vec<bool> = {
            let mut v = vec![false; amb.len()];
            open.iter().for_each(|&o| v[o] = true);
            v
        };
        let mut checks = Vec::new();
        let mut push = |name: &'static str, witness: Option<String>| {
            checks.push(PropCheck { name, pass: witness.is_none(), witness });
        };
        let names = |x: ElemId| format!("{:?}", amb.element_names(x));

        // k1 <= k2 iff every clopen upper bound of k2 bounds k1.
        let mut w = None;
        'a: for &k1 in &closed {
            for &k2 in &closed {
                let rhs = image
                    .iter()
                    .all(|&b| !amb.leq(k2, b) || amb.leq(k1, b));
                if amb.leq(k1, k2) != rhs {
                    w = Some(format!("(k1, k2) = ({}, {})", names(k1), names(k2)));
                    break 'a;
                }
            }
        }
        push("closed-order-via-clopen-bounds", w);

        // o1 <= o2 iff every clopen lower bound of o1 is below o2.
        let mut w = None;
        'b: for &o1 in &open {
            for &o2 in &open {
                let rhs = image
                    .iter()
                    .all(|&b| !amb.leq(b, o1) || amb.leq(b, o2));
                if amb.leq(o1, o2) != rhs {
                    w = Some(format!("(o1, o2) = ({}, {})", names(o1), names(o2)));
                    break 'b;
                }
            }
        }
        push("open-order-via-clopen-bounds", w);

        // u1 <= u2 iff reflected by closed elements below, iff by open above.
        let mut w = None;
        'c: for u1 in 0..amb.len() {
            for u2 in 0..amb.len() {
                let via_closed = closed
                    .iter()
                    .all(|&k| !amb.leq(k, u1) || amb.leq(k, u2));
                let via_open = open
                    .iter()
                    .all(|&o| !amb.leq(u2, o) || amb.leq(u1, o));
                if amb.leq(u1, u2) != via_closed || via_closed != via_open {
                    w = Some(format!("(u1, u2) = ({}, {})", names(u1), names(u2)));
                    break 'c;
                }
            }
        }
        push("order-via-closed-below-open-above", w);

        // Closed elements are stable under binary join, open under meet.
        let mut w = None;
        'd: for &k1 in &closed {
            for &k2 in &closed {
                if !in_closed[amb.join(k1, k2)] {
                    w = Some(format!("k1 v k2 for ({}, {})", names(k1), names(k2)));
                    break 'd;
                }
            }
        }
        if w.is_none() {
            'e: for &o1 in &open {
                for &o2 in &open {
                    if !in_open[amb.meet(o1, o2)] {
                        w = Some(format!("o1 ^ o2 for ({}, {})", names(o1), names(o2)));
                        break 'e;
                    }
                }
            }
        }
        push("closed-join-open-meet-stability", w);

        // k1 ^ k2 <= b refines to clopen a1, a2 with k_i <= a_i.
        let mut w = None;
        'f: for &k1 in &closed {
            for &k2 in &closed {
                for &b in &image {
                    if !amb.leq(amb.meet(k1, k2), b) {
                        continue;
                    }
                    let found = image.iter().any(|&a1| {
                        amb.leq(k1, a1)
                            && image
                                .iter()
                                .any(|&a2| amb.leq(k2, a2) && amb.leq(amb.meet(a1, a2), b))
                    });
                    if !found {
                        w = Some(format!("(k1, k2, b) = ({}, {}, {})", names(k1), names(k2), names(b)));
                        break 'f;
                    }
                }
            }
        }
        push("closed-meet-below-clopen-refines", w);

        // k1 ^ k2 <= o refines to clopen a1, a2, b with b <= o.
        let mut w = None;
        'g: for &k1 in &closed {
            for &k2 in &closed {
                for &o in &open {
                    if !amb.leq(amb.meet(k1, k2), o) {
                        continue;
                    }
                    let found = image.iter().any(|&a1| {
                        amb.leq(k1, a1)
                            && image.iter().any(|&a2| {
                                amb.leq(k2, a2)
                                    && image.iter().any(|&b| {
                                        amb.leq(b, o) && amb.leq(amb.meet(a1, a2), b)
                                    })
                            })
                    });
                    if !found {
                        w = Some(format!("(k1, k2, o) = ({}, {}, {})", names(k1), names(k2), names(o)));
                        break 'g;
                    }
                }
            }
        }
        push("closed-meet-below-open-refines", w);

        // Closed elements are stable under all meets (pairwise plus the
        // empty meet, which is top; top is clopen).
        let mut w = None;
        if !in_closed[amb.top()] {
            w = Some("top is not closed".to_string());
        }
        'h: for &k1 in &closed {
            if w.is_some() {
                break;
            }
            for &k2 in &closed {
                if !in_closed[amb.meet(k1, k2)] {
                    w = Some(format!("k1 ^ k2 for ({}, {})", names(k1), names(k2)));
                    break 'h;
                }
            }
        }
        push("closed-under-all-meets", w);

        // a <= o1 v o2 refines to clopen b1, b2 with b_i <= o_i.
        let mut w = None;
        'i: for &a in &image {
            for &o1 in &open {
                for &o2 in &open {
                    if !amb.leq(a, amb.join(o1, o2)) {
                        continue;
                    }
                    let found = image.iter().any(|&b1| {
                        amb.leq(b1, o1)
                            && image
                                .iter()
                                .any(|&b2| amb.leq(b2, o2) && amb.leq(a, amb.join(b1, b2)))
                    });
                    if !found {
                        w = Some(format!("(a, o1, o2) = ({}, {}, {})", names(a), names(o1), names(o2)));
                        break 'i;
                    }
                }
            }
        }
        push("clopen-below-open-join-refines", w);

        // k <= o1 v o2 refines through a clopen a above k.
        let mut w = None;
        'j: for &k in &closed {
            for &o1 in &open {
                for &o2 in &open {
                    if !amb.leq(k, amb.join(o1, o2)) {
                        continue;
                    }
                    let found = image.iter().any(|&a| {
                        amb.leq(k, a)
                            && image.iter().any(|&b1| {
                                amb.leq(b1, o1)
                                    && image.iter().any(|&b2| {
                                        amb.leq(b2, o2) && amb.leq(a, amb.join(b1, b2))
                                    })
                            })
                    });
                    if !found {
                        w = Some(format!("(k, o1, o2) = ({}, {}, {})", names(k), names(o1), names(o2)));
                        break 'j;
                    }
                }
            }
        }
        push("closed-below-open-join-refines", w);

        // Open elements are stable under all joins (pairwise plus the empty
        // join, which is bottom; bottom is clopen).
        let mut w = None;
        if !in_open[amb.bot()] {
            w = Some("bottom is not open".to_string());
        }
        'k: for &o1 in &open {
            if w.is_some() {
                break;
            }
            for &o2 in &open {
                if !in_open[amb.join(o1, o2)] {
                    w = Some(format!("o1 v o2 for ({}, {})", names(o1), names(o2)));
                    break 'k;
                }
            }
        }
        push("open-under-all-joins", w);

        CanextReport { diagnostic: None, checks }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(l: Lattice) -> Arc<Lattice> {
        Arc::new(l)
    }

    pub(crate) fn diamond() -> Arc<Lattice> {
        arc(downset_lattice(&Poset::antichain(&["p", "q"])).unwrap())
    }

    pub(crate) fn chain3() -> Arc<Lattice> {
        arc(downset_lattice(&Poset::chain(&["x", "y"])).unwrap())
    }

    #[test]
    fn one_element_poset_gives_two_chain() {
        let l = downset_lattice(&Poset::antichain(&["x"])).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.element_names(l.bot()), Vec::<String>::new());
        assert_eq!(l.element_names(l.top()), vec!["x"]);
    }

    #[test]
    fn two_antichain_gives_diamond() {
        let l = diamond();
        assert_eq!(l.len(), 4);
        let p = l.parse_element(&["p"]).unwrap();
        let q = l.parse_element(&["q"]).unwrap();
        assert_eq!(l.meet(p, q), l.bot());
        assert_eq!(l.join(p, q), l.top());
        assert!(l.leq(p, l.top()));
        assert_eq!(l.join(p, l.bot()), p);
    }

    #[test]
    fn two_chain_gives_prefix_chain() {
        let l = chain3();
        assert_eq!(l.len(), 3);
        // Downsets of a chain are the prefixes.
        assert_eq!(l.elem_mask(0), 0b00);
        assert_eq!(l.elem_mask(1), 0b01);
        assert_eq!(l.elem_mask(2), 0b11);
        assert!(l.parse_element(&["y"]).is_err());
    }

    #[test]
    fn irreducible_cap_is_enforced() {
        let names: Vec<String> = (0..7).map(|i| format!("x{i}")).collect();
        let p = Poset::antichain(&names);
        match downset_lattice(&p) {
            Err(LatticeError::TooManyIrreducibles(7, 6)) => {}
            other => panic!("expected cap rejection, got {other:?}"),
        }
        assert!(downset_lattice_capped(&p, 7).is_ok());
    }

    #[test]
    fn poset_validation() {
        assert!(matches!(
            Poset::new(&["a", "b"], &[("a", "b"), ("b", "a")]),
            Err(LatticeError::NotAntisymmetric(..))
        ));
        assert!(matches!(
            Poset::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]),
            Err(LatticeError::NotTransitive(..))
        ));
        // Reflexive pairs may be omitted or included.
        assert!(Poset::new(&["a", "b"], &[("a", "a"), ("a", "b")]).is_ok());
    }

    #[test]
    fn poset_json_round_trip() {
        let spec: PosetSpec =
            serde_json::from_str(r#"{"elements": ["p", "q"], "leq": [["p", "q"]]}"#).unwrap();
        let p = Poset::from_spec(&spec).unwrap();
        assert!(p.leq(0, 1));
        let l = downset_lattice(&p).unwrap();
        assert_eq!(l.len(), 3);
    }

    #[test]
    fn lattice_laws_hold_exhaustively() {
        for l in [diamond(), chain3()] {
            for x in 0..l.len() {
                for y in 0..l.len() {
                    assert_eq!(l.meet(x, l.join(x, y)), x, "absorption");
                    assert_eq!(l.join(x, l.meet(x, y)), x, "absorption");
                    assert_eq!(l.meet(x, y), l.meet(y, x), "commutativity");
                    assert_eq!(l.join(x, y), l.join(y, x), "commutativity");
                    assert_eq!(l.leq(x, y), l.meet(x, y) == x);
                    assert_eq!(l.leq(x, y), l.join(x, y) == y);
                    for z in 0..l.len() {
                        assert_eq!(l.meet(x, l.meet(y, z)), l.meet(l.meet(x, y), z));
                        assert_eq!(l.join(x, l.join(y, z)), l.join(l.join(x, y), z));
                        assert_eq!(
                            l.meet(x, l.join(y, z)),
                            l.join(l.meet(x, y), l.meet(x, z)),
                            "distributivity"
                        );
                    }
                }
            }
        }
    }

    fn bot_top_embedding() -> LatticeEmbedding {
        let sub = arc(downset_lattice(&Poset::antichain(&["x"])).unwrap());
        let amb = diamond();
        LatticeEmbedding::new(sub, Arc::clone(&amb), vec![0, amb.top()]).unwrap()
    }

    fn chain_in_diamond() -> LatticeEmbedding {
        let sub = chain3();
        let amb = diamond();
        let p = amb.parse_element(&["p"]).unwrap();
        LatticeEmbedding::new(sub, Arc::clone(&amb), vec![0, p, amb.top()]).unwrap()
    }

    #[test]
    fn closed_open_elements() {
        let amb = diamond();
        let id = LatticeEmbedding::identity(&amb);
        let all: Vec<ElemId> = (0..amb.len()).collect();
        assert_eq!(id.closed_elements(), all);
        assert_eq!(id.open_elements(), all);

        let e = bot_top_embedding();
        assert_eq!(e.closed_elements(), vec![0, amb.top()]);
        assert_eq!(e.open_elements(), vec![0, amb.top()]);

        let e = chain_in_diamond();
        let p = amb.parse_element(&["p"]).unwrap();
        assert_eq!(e.closed_elements(), vec![0, p, amb.top()]);
    }

    #[test]
    fn closed_meet_open_is_image() {
        for e in [
            LatticeEmbedding::identity(&diamond()),
            bot_top_embedding(),
            chain_in_diamond(),
        ] {
            let closed = e.closed_elements();
            let open = e.open_elements();
            let both: Vec<ElemId> =
                closed.iter().copied().filter(|k| open.contains(k)).collect();
            assert_eq!(both, e.image());
        }
    }

    #[test]
    fn density_and_compactness() {
        assert!(LatticeEmbedding::identity(&diamond()).is_dense());
        assert!(LatticeEmbedding::identity(&diamond()).is_compact());
        assert!(!bot_top_embedding().is_dense());
        assert!(bot_top_embedding().is_compact());
        assert!(!chain_in_diamond().is_dense());
    }

    #[test]
    fn canext_props_pass_on_identity() {
        for l in [diamond(), chain3()] {
            let report = LatticeEmbedding::identity(&l).check_canext_props();
            assert!(report.diagnostic.is_none());
            assert!(report.all_pass(), "{report:?}");
            assert_eq!(report.checks.len(), 10);
        }
    }

    #[test]
    fn canext_props_diagnose_failed_precondition() {
        // Three-chain embedded in a four-chain, skipping one middle element:
        // not dense, so the report carries a diagnostic instead of results.
        let sub = chain3();
        let amb = arc(downset_lattice(&Poset::chain(&["a", "b", "c"])).unwrap());
        let e = LatticeEmbedding::new(sub, Arc::clone(&amb), vec![0, 1, amb.top()]).unwrap();
        let report = e.check_canext_props();
        assert!(report.diagnostic.is_some());
        assert!(report.checks.is_empty());
    }

    #[test]
    fn embedding_validation_rejects_non_homomorphisms() {
        let sub = chain3();
        let amb = diamond();
        let p = amb.parse_element(&["p"]).unwrap();
        let q = amb.parse_element(&["q"]).unwrap();
        // 0 -> 0, 1 -> p, 2 -> q: does not preserve top.
        assert!(LatticeEmbedding::new(Arc::clone(&sub), Arc::clone(&amb), vec![0, p, q]).is_err());
        assert!(matches!(
            LatticeEmbedding::new(Arc::clone(&sub), Arc::clone(&amb), vec![0, p, p]),
            Err(LatticeError::NotInjective(..))
        ));
    }
}
