//! Enumeration of the equivariant collections on `M̄_{p,q}`, their total
//! orders, and the symmetry and ordering checks.
//!
//! Markings are `0..p` (heavy) followed by `p..p+q` (light). Wherever the
//! intended order leaves a choice, subsets are compared lexicographically as
//! sorted index lists.

use crate::bits::{self, LexMask, Mask};
use crate::cohomology::{MarkingSplit, PairLE};
use crate::error::{Error, Result};
use crate::score::{classify_group, GroupFamily};
use crate::sl2::GradedDims;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

/// `M̄_{p,q}`: `p` heavy and `q` light markings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Space {
    pub p: usize,
    pub q: usize,
}

/// The four families of spaces, which carry different collections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SpaceKind {
    OddHeavy,
    OddHeavyWithLight,
    EvenHeavyOddLight,
    EvenHeavyEvenLight,
}

impl Space {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p % 2 == 1 && p < 3 {
            return Err(Error::UnsupportedSpace(format!(
                "odd p must be at least 3, got {p}"
            )));
        }
        if p.is_multiple_of(2) && p < 4 {
            return Err(Error::UnsupportedSpace(format!(
                "even p must be at least 4, got {p}"
            )));
        }
        if p + q > 20 {
            return Err(Error::UnsupportedSpace(format!(
                "p + q = {} exceeds the supported range",
                p + q
            )));
        }
        Ok(Self { p, q })
    }

    pub fn kind(&self) -> SpaceKind {
        match (self.p % 2, self.q) {
            (1, 0) => SpaceKind::OddHeavy,
            (1, _) => SpaceKind::OddHeavyWithLight,
            (_, q) if q % 2 == 1 => SpaceKind::EvenHeavyOddLight,
            _ => SpaceKind::EvenHeavyEvenLight,
        }
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    pub fn split(&self) -> MarkingSplit {
        MarkingSplit::standard(self.p, self.q).expect("validated space")
    }

    /// `r` with `p = 2r` or `p = 2r + 1`.
    pub fn r(&self) -> i64 {
        (self.p / 2) as i64
    }

    /// `s` with odd light count `2s + 1`; for even light counts `q = 2s + 2`.
    /// For odd `p` this is unused and returns `-1`.
    pub fn s(&self) -> i64 {
        match self.kind() {
            SpaceKind::EvenHeavyOddLight => (self.q as i64 - 1) / 2,
            SpaceKind::EvenHeavyEvenLight => (self.q as i64 - 2) / 2,
            _ => -1,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M({},{})", self.p, self.q)
    }
}

/// Which side of the `E ↦ E^c` symmetry is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Choice of bundle group (1A or 1B) and, for even light counts, of complex
/// group (2A or 2B). The default is 1A with 2B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    pub bundles: Side,
    pub complexes: Side,
}

impl Default for Variant {
    fn default() -> Self {
        Self {
            bundles: Side::A,
            complexes: Side::B,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.bundles {
            Side::A => "1A",
            Side::B => "1B",
        };
        let c = match self.complexes {
            Side::A => "2A",
            Side::B => "2B",
        };
        write!(f, "{b}+{c}")
    }
}

impl FromStr for Variant {
    type Err = Error;

    /// Accepts `1A`, `1B`, `1A+2A`, `1A+2B`, `1B+2A`, `1B+2B`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('+');
        let bundles = match parts.next() {
            Some("1A") => Side::A,
            Some("1B") => Side::B,
            _ => return Err(Error::Variant(s.to_string())),
        };
        let complexes = match parts.next() {
            None | Some("2B") => Side::B,
            Some("2A") => Side::A,
            _ => return Err(Error::Variant(s.to_string())),
        };
        if parts.next().is_some() {
            return Err(Error::Variant(s.to_string()));
        }
        Ok(Self { bundles, complexes })
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One object of a collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollectionObject {
    /// The bundle `F(l,E)`.
    Bundle(PairLE),
    /// The torsion sheaf supported where the heavy markings of `E` coincide.
    TorsionZ(PairLE),
    /// `O_δ(-a,-b)` on the boundary divisor separating `side` from its
    /// complement. `side` is the canonical side, the one containing marking 0.
    BoundaryAB { side: Mask, a: i64, b: i64 },
    /// The projected torsion complex, labelled only.
    TildeTorsion(PairLE),
}

/// The kind of a [`CollectionObject`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum ObjectTag {
    Bundle,
    TorsionZ,
    BoundaryAB,
    TildeTorsion,
}

impl CollectionObject {
    pub fn tag(&self) -> ObjectTag {
        match self {
            CollectionObject::Bundle(_) => ObjectTag::Bundle,
            CollectionObject::TorsionZ(_) => ObjectTag::TorsionZ,
            CollectionObject::BoundaryAB { .. } => ObjectTag::BoundaryAB,
            CollectionObject::TildeTorsion(_) => ObjectTag::TildeTorsion,
        }
    }

    pub fn label(&self) -> Option<PairLE> {
        match self {
            CollectionObject::Bundle(x)
            | CollectionObject::TorsionZ(x)
            | CollectionObject::TildeTorsion(x) => Some(*x),
            CollectionObject::BoundaryAB { .. } => None,
        }
    }

    /// Image under a permutation of markings; boundary objects are
    /// re-canonicalized, swapping `(a, b)` when the sides swap.
    pub fn permuted(&self, perm: &[usize], all: Mask) -> Self {
        match *self {
            CollectionObject::Bundle(x) => CollectionObject::Bundle(x.permuted(perm)),
            CollectionObject::TorsionZ(x) => CollectionObject::TorsionZ(x.permuted(perm)),
            CollectionObject::TildeTorsion(x) => CollectionObject::TildeTorsion(x.permuted(perm)),
            CollectionObject::BoundaryAB { side, a, b } => {
                let img = bits::permute(side, perm);
                if img & 1 == 1 {
                    CollectionObject::BoundaryAB { side: img, a, b }
                } else {
                    CollectionObject::BoundaryAB {
                        side: all & !img,
                        a: b,
                        b: a,
                    }
                }
            }
        }
    }

    /// The position key: boundary objects first, then blocks by `e_q` and
    /// `E_q`; inside a block torsion objects (by `E_p`, then decreasing `l`)
    /// before bundles (by `e_p`, `E_p`, `l`).
    pub fn order_key(&self, split: &MarkingSplit) -> OrderKey {
        match *self {
            CollectionObject::BoundaryAB { side, a, b } => OrderKey {
                part: 0,
                divisor: LexMask(side),
                boundary_rank: (-(a + b), -a),
                ..OrderKey::default()
            },
            CollectionObject::Bundle(x) => OrderKey {
                part: 1,
                e_q: x.e_q(split),
                light: LexMask(x.light_part(split)),
                kind: 1,
                e_p: x.e_p(split),
                heavy: LexMask(x.heavy_part(split)),
                l_rank: x.l,
                ..OrderKey::default()
            },
            CollectionObject::TorsionZ(x) | CollectionObject::TildeTorsion(x) => OrderKey {
                part: 1,
                e_q: x.e_q(split),
                light: LexMask(x.light_part(split)),
                kind: 0,
                e_p: x.e_p(split),
                heavy: LexMask(x.heavy_part(split)),
                l_rank: -x.l,
                ..OrderKey::default()
            },
        }
    }
}

impl fmt::Display for CollectionObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollectionObject::Bundle(x) => write!(f, "F{x}"),
            CollectionObject::TorsionZ(x) => write!(f, "T{x}"),
            CollectionObject::TildeTorsion(x) => write!(f, "T~{x}"),
            CollectionObject::BoundaryAB { side, a, b } => {
                write!(f, "O{:?}(-{a},-{b})", bits::indices(*side))
            }
        }
    }
}

/// Sort key realizing the total order. Compared field by field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderKey {
    pub part: u8,
    pub divisor: LexMask,
    pub boundary_rank: (i64, i64),
    pub e_q: i64,
    pub light: LexMask,
    pub kind: u8,
    pub e_p: i64,
    pub heavy: LexMask,
    pub l_rank: i64,
}

impl Default for OrderKey {
    fn default() -> Self {
        Self {
            part: 0,
            divisor: LexMask(0),
            boundary_rank: (0, 0),
            e_q: 0,
            light: LexMask(0),
            kind: 0,
            e_p: 0,
            heavy: LexMask(0),
            l_rank: 0,
        }
    }
}

/// An ordered collection on a space.
#[derive(Debug, Clone)]
pub struct Collection {
    pub space: Space,
    pub variant: Variant,
    pub objects: Vec<CollectionObject>,
}

impl Collection {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn sort(&mut self) {
        let split = self.space.split();
        self.objects.sort_by_cached_key(|o| o.order_key(&split));
    }

    /// Adds an object that is not already present and re-sorts.
    pub fn inject(&mut self, obj: CollectionObject) -> Result<()> {
        if self.objects.contains(&obj) {
            return Err(Error::AlreadyMember(obj.to_string()));
        }
        self.objects.push(obj);
        self.sort();
        Ok(())
    }

    pub fn labels(&self, tag: ObjectTag) -> Vec<PairLE> {
        self.objects
            .iter()
            .filter(|o| o.tag() == tag)
            .filter_map(|o| o.label())
            .collect()
    }

    pub fn count(&self, tag: ObjectTag) -> usize {
        self.objects.iter().filter(|o| o.tag() == tag).count()
    }

    /// Serializable form with a stable field layout.
    pub fn to_json(&self) -> CollectionJson {
        CollectionJson {
            space: self.space,
            variant: self.variant_name(),
            objects: self
                .objects
                .iter()
                .enumerate()
                .map(|(i, o)| {
                    let (divisor, a, b) = match *o {
                        CollectionObject::BoundaryAB { side, a, b } => {
                            (Some(bits::indices(side)), Some(a), Some(b))
                        }
                        _ => (None, None, None),
                    };
                    ObjectJson {
                        tag: o.tag(),
                        l: o.label().map(|x| x.l),
                        e: o.label().map(|x| bits::indices(x.set)),
                        divisor,
                        a,
                        b,
                        order_index: i,
                    }
                })
                .collect(),
        }
    }

    /// The variant as it applies to this space.
    pub fn variant_name(&self) -> String {
        match self.space.kind() {
            SpaceKind::OddHeavy | SpaceKind::OddHeavyWithLight => "-".to_string(),
            SpaceKind::EvenHeavyOddLight => match self.variant.bundles {
                Side::A => "1A".to_string(),
                Side::B => "1B".to_string(),
            },
            SpaceKind::EvenHeavyEvenLight => self.variant.to_string(),
        }
    }
}

/// JSON form of a collection.
#[derive(Debug, Clone, Serialize)]
pub struct CollectionJson {
    pub space: Space,
    pub variant: String,
    pub objects: Vec<ObjectJson>,
}

/// JSON form of one object.
#[derive(Debug, Clone, Serialize)]
pub struct ObjectJson {
    pub tag: ObjectTag,
    pub l: Option<i64>,
    #[serde(rename = "E")]
    pub e: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divisor: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    pub order_index: usize,
}

fn labels_where(
    split: &MarkingSplit,
    lmax: i64,
    mut keep: impl FnMut(&PairLE) -> bool,
) -> Vec<PairLE> {
    let mut out = Vec::new();
    for set in bits::subsets(split.all()) {
        let e = bits::card(set) as i64;
        for l in (0..=lmax).filter(|l| (l + e) % 2 == 0) {
            let pair = PairLE { l, set };
            if keep(&pair) {
                out.push(pair);
            }
        }
    }
    out
}

fn finish(space: Space, variant: Variant, objects: Vec<CollectionObject>) -> Collection {
    let mut c = Collection {
        space,
        variant,
        objects,
    };
    c.sort();
    c
}

/// Bundles with `l + min(e, p - e) <= r - 1`, for odd `p` and no light markings.
pub fn enumerate_odd_p(p: usize) -> Result<Collection> {
    let space = Space::new(p, 0)?;
    if space.kind() != SpaceKind::OddHeavy {
        return Err(Error::UnsupportedSpace(space.to_string()));
    }
    enumerate_odd_p_with_lights(p, 0)
}

/// Bundles with `l + min(e_p, p - e_p) <= r - 1`, for odd `p`, any light count.
pub fn enumerate_odd_p_with_lights(p: usize, q: usize) -> Result<Collection> {
    let space = Space::new(p, q)?;
    if p % 2 != 1 {
        return Err(Error::UnsupportedSpace(space.to_string()));
    }
    let split = space.split();
    let r = space.r();
    let (pp, heavy) = (p as i64, split.heavy);
    let labels = labels_where(&split, r, |x| {
        let ep = bits::card(x.set & heavy) as i64;
        x.l + ep.min(pp - ep) <= r - 1
    });
    Ok(finish(
        space,
        Variant::default(),
        labels.into_iter().map(CollectionObject::Bundle).collect(),
    ))
}

/// Group 1A (or 1B) bundles and group 2 torsion sheaves, for `p = 2r` and odd `q`.
pub fn enumerate_peven_qodd(p: usize, q: usize, variant: Variant) -> Result<Collection> {
    let space = Space::new(p, q)?;
    if space.kind() != SpaceKind::EvenHeavyOddLight {
        return Err(Error::UnsupportedSpace(space.to_string()));
    }
    let split = space.split();
    let lmax = space.r() + space.s();
    let mut objects = Vec::new();
    for x in labels_where(&split, lmax, |_| true) {
        let g = classify_group(&x, &split, GroupFamily::OddLight)?;
        let bundle = match variant.bundles {
            Side::A => g.g1a,
            Side::B => g.g1b,
        };
        if bundle {
            objects.push(CollectionObject::Bundle(x));
        }
        if g.g2 {
            objects.push(CollectionObject::TorsionZ(x));
        }
    }
    Ok(finish(space, variant, objects))
}

/// Boundary sheaves, then group 1A (or 1B) bundles and group 2B (or 2A)
/// complexes, for `p = 2r` and an even number `q` of light markings
/// (including `q = 0`).
pub fn enumerate_peven_qeven(p: usize, q: usize, variant: Variant) -> Result<Collection> {
    let space = Space::new(p, q)?;
    if space.kind() != SpaceKind::EvenHeavyEvenLight {
        return Err(Error::UnsupportedSpace(space.to_string()));
    }
    let split = space.split();
    let (r, s) = (space.r(), space.s());
    let mut objects: Vec<CollectionObject> = boundary_objects(&space);
    for x in labels_where(&split, r + s + 1, |_| true) {
        let g = classify_group(&x, &split, GroupFamily::EvenLight)?;
        let bundle = match variant.bundles {
            Side::A => g.g1a,
            Side::B => g.g1b,
        };
        if bundle {
            objects.push(CollectionObject::Bundle(x));
        }
        let complex = match variant.complexes {
            Side::A => g.g2a,
            Side::B => g.g2b,
        };
        if complex {
            objects.push(CollectionObject::TildeTorsion(x));
        }
    }
    Ok(finish(space, variant, objects))
}

/// Canonical sides of the boundary divisors: `r` heavy and `s + 1` light
/// markings, containing marking 0.
pub fn boundary_divisors(space: &Space) -> Vec<Mask> {
    let split = space.split();
    let (r, s) = (space.r(), space.s());
    let mut out = Vec::new();
    for h in bits::k_subsets(split.heavy, r as usize) {
        if h & 1 == 0 {
            continue;
        }
        for l in bits::k_subsets(split.light, (s + 1) as usize) {
            out.push(h | l);
        }
    }
    out
}

/// Admissible `(a, b)` for dimension `m = r + s - 1` of each factor.
pub fn boundary_range(m: i64) -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    for a in 1..=m {
        for b in 1..=m {
            v.push((a, b));
        }
    }
    for b in (1..=m).filter(|b| 2 * b <= m) {
        v.push((0, b));
    }
    for a in (1..=m).filter(|a| 2 * a <= m) {
        v.push((a, 0));
    }
    v
}

fn boundary_objects(space: &Space) -> Vec<CollectionObject> {
    let m = space.r() + space.s() - 1;
    let range = boundary_range(m);
    boundary_divisors(space)
        .into_iter()
        .flat_map(|side| {
            range
                .iter()
                .map(move |&(a, b)| CollectionObject::BoundaryAB { side, a, b })
        })
        .collect()
}

/// The collection for a space, dispatching on its family.
pub fn enumerate(space: Space, variant: Variant) -> Result<Collection> {
    match space.kind() {
        SpaceKind::OddHeavy | SpaceKind::OddHeavyWithLight => {
            enumerate_odd_p_with_lights(space.p, space.q)
        }
        SpaceKind::EvenHeavyOddLight => enumerate_peven_qodd(space.p, space.q, variant),
        SpaceKind::EvenHeavyEvenLight => enumerate_peven_qeven(space.p, space.q, variant),
    }
}

/// Adjacent transpositions inside the heavy and inside the light markings.
pub fn generators(space: &Space) -> Vec<Vec<usize>> {
    let n = space.n();
    let mut gens = Vec::new();
    for (start, end) in [(0, space.p), (space.p, n)] {
        for i in start..end.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(i, i + 1);
            gens.push(perm);
        }
    }
    gens
}

/// Returns the first generator (as the swapped pair) that does not map the
/// object set to itself, or `None` if the collection is invariant.
pub fn check_equivariance(collection: &Collection) -> Option<(usize, usize)> {
    let all = collection.space.split().all();
    let set: HashSet<CollectionObject> = collection.objects.iter().copied().collect();
    for perm in generators(&collection.space) {
        if collection
            .objects
            .iter()
            .any(|o| !set.contains(&o.permuted(&perm, all)))
        {
            let i = (0..perm.len())
                .find(|&i| perm[i] != i)
                .expect("non-identity generator");
            return Some((i, perm[i]));
        }
    }
    None
}

/// Pairs `(i, j)` with `i > j` and a nonzero `RHom(E_i, E_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    pub valid: bool,
    pub violations: Vec<(usize, usize)>,
}

/// Checks every backward pair with `hom(i, j) = RHom(E_i, E_j)`.
pub fn order_valid(len: usize, hom: impl Fn(usize, usize) -> GradedDims) -> OrderReport {
    let mut violations = Vec::new();
    for i in 0..len {
        for j in 0..i {
            if !hom(i, j).is_zero() {
                violations.push((i, j));
            }
        }
    }
    OrderReport {
        valid: violations.is_empty(),
        violations,
    }
}

/// A linear extension of the digraph with an edge `i → j` whenever
/// `RHom(E_i, E_j) ≠ 0` and `i ≠ j`, preferring the original position.
/// Fails with the vertices left on a cycle.
pub fn topological_resort(
    len: usize,
    hom: impl Fn(usize, usize) -> GradedDims,
) -> Result<Vec<usize>> {
    let mut out_edges = vec![Vec::new(); len];
    let mut indegree = vec![0usize; len];
    for (i, edges) in out_edges.iter_mut().enumerate() {
        for j in (0..len).filter(|&j| j != i && !hom(i, j).is_zero()) {
            edges.push(j);
            indegree[j] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..len).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(len);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &j in &out_edges[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert(j);
            }
        }
    }
    if order.len() < len {
        return Err(Error::Cyclic(
            (0..len).filter(|&i| indegree[i] > 0).collect(),
        ));
    }
    Ok(order)
}
